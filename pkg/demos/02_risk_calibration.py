"""Exact binomial upper bounds and the threshold search they drive.

Shows why the calibrated threshold is conservative: the bound charges a
finite-sample premium on top of the observed error rate, and the search
keeps the largest threshold whose premium-inclusive rate stays under the
target risk level.
"""

import numpy as np

from clickrisk import RiskSpec, calibrate_threshold, cp_upper_bound

# The premium shrinks as evidence accumulates: same 10% observed error
# rate, increasingly many observations.
print("observed 10% errors, 95% upper confidence bound on the true rate:")
for n in (10, 30, 100, 300, 1000):
    bound = cp_upper_bound(n // 10, n, 0.05)
    print(f"  n={n:5d}  X={n // 10:4d}   bound={bound:.4f}")
print()

# A toy calibration set: uncertainty correlates with being wrong, but
# imperfectly, as for a real grounding model.
rng = np.random.default_rng(0)
n = 120
uncertainty = rng.random(n)
errors = (rng.random(n) < 0.05 + 0.55 * uncertainty).astype(int)
print(f"calibration set: {n} points, {errors.sum()} errors "
      f"({errors.mean():.0%} raw error rate)")

spec = RiskSpec(alpha=0.25, delta=0.05)
outcome = calibrate_threshold(uncertainty, errors, spec)
print(f"target risk alpha={spec.alpha}, significance delta={spec.delta}")
print(f"feasible: {outcome.feasible}, threshold: {outcome.threshold:.4f}")
print()

print("trace excerpts (candidate tau, accepted n, errors X, upper bound):")
marks = {0, len(outcome.trace) // 4, len(outcome.trace) // 2, len(outcome.trace) - 1}
chosen = next(i for i, p in enumerate(outcome.trace) if p.tau == outcome.threshold)
marks.add(chosen)
for i in sorted(marks):
    p = outcome.trace[i]
    note = "   <- calibrated threshold" if i == chosen else ""
    print(f"  tau={p.tau:.4f}  n={p.n_accepted:3d}  X={p.n_errors:3d}  "
          f"bound={p.upper_bound:.4f}{note}")
print()

# Ask for the impossible and the search reports it instead of guessing.
strict = calibrate_threshold(uncertainty, errors, RiskSpec(alpha=0.02, delta=0.05))
print(f"alpha=0.02 -> feasible: {strict.feasible} (threshold {strict.threshold});")
print("an unattainable risk level is a reported outcome, not an error.")
