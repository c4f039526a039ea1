"""Monte Carlo check of the finite-sample FDR guarantee.

The calibration procedure promises: with probability at least 1 - delta
over the calibration draw, the test-time FDR at the calibrated threshold
stays at or below alpha. Each trial here redraws dataset and split, so
the violation frequency estimates that probability; it should land at or
below delta (plus Monte Carlo noise).

A full-strength run lives in the acceptance suite (1000 trials); this
demo uses 150 trials to stay quick.
"""

import numpy as np

from clickrisk import SynthConfig, run_guarantee_trials

ALPHA, DELTA, TRIALS = 0.2, 0.05, 150

result, outcomes = run_guarantee_trials(SynthConfig(seed=1), ALPHA, DELTA, TRIALS)

fdrs = np.array([o.test_fdr for o in outcomes if o.feasible])
print(f"alpha={ALPHA}, delta={DELTA}, {TRIALS} trials "
      f"({result.infeasible} infeasible)")
print(f"test FDR: mean {fdrs.mean():.4f}, max {fdrs.max():.4f}")
print(f"violations (test FDR > alpha): {result.violations} "
      f"-> empirical rate {result.violation_rate:.4f} vs delta {DELTA}")
print()

# a crude histogram of where the test FDR lands relative to alpha
edges = np.linspace(0.0, 0.4, 9)
counts, _ = np.histogram(fdrs, bins=edges)
for lo, hi, count in zip(edges, edges[1:], counts):
    marker = " <- alpha" if lo <= ALPHA < hi else ""
    print(f"  [{lo:.2f}, {hi:.2f})  {'#' * count}{marker}")
print()
print("Mass concentrates below alpha; the rare crossings happen at the")
print("rate the significance level delta budgets for.")
