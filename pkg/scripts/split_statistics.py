"""Empirical checks of the split samplers over many seeds.

    python scripts/split_statistics.py --seeds 10000
"""

import argparse

import numpy as np

from galtkit.protocol import SIGMA_EE_POS_M, SIGMA_NECK_RAD, TASKS, min_pairwise_distance, region_contains, sample_split


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=10_000)
    args = ap.parse_args()

    print(f"{'task':<27} {'split':<12} {'inside':>8} {'min sep m':>9} {'max attempts':>12}")
    for task in TASKS.values():
        for split in ("id", "ood-spatial"):
            region = task.region(split)
            inside, seps, attempts = 0, [], 0
            for seed in range(args.seeds):
                s = sample_split(task, split, seed)
                inside += region_contains(region, s)
                attempts = max(attempts, s.attempts)
                if region.min_separation:
                    seps.append(min_pairwise_distance(region, s.object_poses))
            sep = f"{min(seps):.4f}" if seps else "-"
            print(f"{task.name:<27} {split:<12} {inside:>8} {sep:>9} {attempts:>12}")

    rs = [sample_split(TASKS["clutter-pick-cube"], "ood-init-pose", s).reset_perturbation for s in range(args.seeds)]
    ee = np.array([r.ee_left_delta + r.ee_right_delta for r in rs]).std(axis=0)
    neck = np.array([(r.neck_yaw_delta, r.neck_pitch_delta) for r in rs]).std(axis=0)
    print(f"EE delta std per axis {np.round(ee, 4).tolist()} (target {SIGMA_EE_POS_M})")
    print(f"neck yaw/pitch std {np.round(neck, 4).tolist()} (target {SIGMA_NECK_RAD})")


if __name__ == "__main__":
    main()
