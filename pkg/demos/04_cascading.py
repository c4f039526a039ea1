"""Two-model cascading: defer risky predictions to a stronger expert.

The primary model is cheap but mediocre; the recorded expert is strong
but costly. Sweeping the risk level trades expert calls against system
accuracy, and the cascade beats both single-model baselines in between.
"""

import numpy as np

from clickrisk import (
    RiskSpec,
    SplitPlan,
    SynthConfig,
    admission,
    calibrate_threshold,
    evaluate_cascade,
    generate_dataset,
    score_record,
    select_mlg,
    split,
)

SEED = 4
records = generate_dataset(SynthConfig(n_records=400, expert_accuracy=0.85, seed=SEED))
uncertainty = {r.id: score_record(r).combined for r in records}
admissible = {r.id: admission(select_mlg(r, SEED), r.gt_box) for r in records}

plan = SplitPlan(calibration_ratio=0.2, seed=SEED)
cal, test = split(records, plan, 0)
test_u = [uncertainty[r.id] for r in test]

print(f"calibrating on {len(cal)} records, cascading on {len(test)}")
print()
print("alpha   tau      system acc   cascade rate   (accepted/deferred)")
reports = []
for alpha in (0.15, 0.2, 0.25, 0.3, 0.4, 0.5):
    outcome = calibrate_threshold(
        [uncertainty[r.id] for r in cal],
        [1 - admissible[r.id] for r in cal],
        RiskSpec(alpha=alpha, delta=0.05),
    )
    if not outcome.feasible:
        print(f"{alpha:.2f}    infeasible at this calibration size")
        continue
    report = evaluate_cascade(test, test_u, outcome.threshold, mlg_seed=SEED)
    reports.append(report)
    print(f"{alpha:.2f}    {outcome.threshold:.4f}   {report.system_accuracy:.4f}       "
          f"{report.cascading_rate:.3f}          ({report.n_accepted}/{report.n_deferred})")

print()
primary = reports[0].primary_accuracy
expert = reports[0].expert_only_accuracy
print(f"primary-only accuracy: {primary:.4f}; expert-only accuracy: {expert:.4f}")
best = max(reports, key=lambda r: r.system_accuracy)
print(f"best cascade: {best.system_accuracy:.4f} while deferring only "
      f"{best.cascading_rate:.0%} of the traffic")
print()
print("Tightening alpha raises the cascade rate (more deferrals, closer to")
print("expert-only); loosening it approaches the primary model alone.")
