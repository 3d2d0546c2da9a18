#!/usr/bin/env python3
"""Writes ueq_cohort.csv: 30 respondents x 3 conditions of UEQ-S answers.

Each respondent gets a latent level per scale, items scatter around it, and a
final pass nudges single items by one step until every scale sum hits its
target exactly. Targets are item sums over 30 x 4 answers on the -3..+3 scale.
"""

import csv
import random
import sys

TARGETS = {
    "eye_only": (80, -31),
    "mirror_only": (85, -26),
    "mirror_eye": (155, 156),
}
SPREAD = {"eye_only": 1.2, "mirror_only": 1.2, "mirror_eye": 0.9}
RESPONDENTS = 30


def clamp(v):
    return max(-3, min(3, v))


def scale_block(rng, target_sum, spread):
    mean = target_sum / (RESPONDENTS * 4)
    rows = []
    for _ in range(RESPONDENTS):
        level = rng.gauss(mean, spread)
        rows.append([clamp(round(level + rng.gauss(0, 0.6))) for _ in range(4)])
    total = sum(map(sum, rows))
    while total != target_sum:
        step = 1 if total < target_sum else -1
        r, i = rng.randrange(RESPONDENTS), rng.randrange(4)
        if -3 <= rows[r][i] + step <= 3:
            rows[r][i] += step
            total += step
    return rows


def main(path):
    rng = random.Random(20240521)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["participant", "condition"] + [f"item{i}" for i in range(1, 9)])
        for condition, (prag, hed) in TARGETS.items():
            p = scale_block(rng, prag, SPREAD[condition])
            h = scale_block(rng, hed, SPREAD[condition])
            for k in range(RESPONDENTS):
                w.writerow([f"S{k + 1:02d}", condition] + [v + 4 for v in p[k] + h[k]])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "ueq_cohort.csv")
