#!/usr/bin/env python3
"""Relative eigen-gap vs plain eigen-gap as the selection objective.

The plain gap sigma_{k+1} - sigma_k depends on the scale of the small
eigenvalues, which moves a lot across models and noise levels; the relative
form divides that scale out. This script scores both objectives on the same
candidate grids across noise levels and reports the winner's accuracy.

    python scripts/score_ablation.py --noise-levels 0.01 0.05 0.1 0.2
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from autospectral.kmeans import Partition
from autospectral.metrics import clustering_accuracy
from autospectral.search import default_search_space, grid_search
from autospectral.synthetic import random_subspaces


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--noise-levels", type=float, nargs="+", default=[0.01, 0.05, 0.1, 0.2])
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()

    space = default_search_space()
    print(f"{'noise':>6} {'acc(reg)':>10} {'acc(eg)':>10}")
    for noise in args.noise_levels:
        accs = {"reg": [], "eg": []}
        for seed in range(args.seeds):
            X, labels = random_subspaces(
                k=3, ambient_dim=30, intrinsic_dim=3, per_cluster=50, noise_std=noise, seed=seed
            )
            truth = Partition(labels=labels, k=3)
            for score in ("reg", "eg"):
                res = grid_search(X, 3, space, seed=seed, score=score)
                accs[score].append(clustering_accuracy(res.partition, truth))
        print(
            f"{noise:6.2f} {np.mean(accs['reg']):10.4f} {np.mean(accs['eg']):10.4f}"
        )


if __name__ == "__main__":
    main()
