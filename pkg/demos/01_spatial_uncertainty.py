"""How sampled click coordinates turn into an uncertainty score.

Walks two contrived records through the scoring pipeline: one where the
model's samples agree, one where they scatter across competing targets.
"""

import numpy as np

from clickrisk import GroundingRecord, UqConfig, build_density_map, extract_regions, score_record, score_regions

config = UqConfig()  # patch 14, beta 0.3, weights (0.6, 0.2, 0.2)

# A confident model: ten stochastic samples land on the same button.
confident = GroundingRecord(
    id="confident",
    image_width=280,
    image_height=140,
    gt_box=(30.0, 30.0, 80.0, 80.0),
    samples=tuple((55.0 + dx, 55.0 + dy) for dx, dy in [(0, 0), (2, 1), (-1, 3), (1, -2), (0, 2),
                                                        (3, 0), (-2, -1), (1, 1), (2, 2), (-1, 0)]),
)

# A torn model: half the samples on each of two identical-looking targets.
torn = GroundingRecord(
    id="torn",
    image_width=280,
    image_height=140,
    gt_box=(30.0, 30.0, 80.0, 80.0),
    samples=tuple([(55.0, 55.0)] * 5 + [(225.0, 55.0)] * 5),
)

for record in (confident, torn):
    print(f"--- {record.id} ---")
    dmap = build_density_map(record.samples, (record.image_width, record.image_height), config.patch_size)
    print(f"grid {dmap.grid_h}x{dmap.grid_w}, peak density {dmap.values.max():.2f}")

    regions = extract_regions(dmap, config.beta)
    ranked = score_regions(dmap, regions)
    print(f"{len(regions)} region(s); scores {np.round(ranked.scores, 3)}, probs {np.round(ranked.probs, 3)}")

    score = score_record(record, config)
    print(f"ta={score.ta:.3f}  ie={score.ie:.3f}  cd={score.cd:.3f}  ->  combined={score.combined:.3f}")
    print()

print("The torn record's fragmented density map produces a combined score")
print("near 0.7, while the confident record sits near the 0.02 floor; a")
print("calibrated threshold between the two separates them cleanly.")
