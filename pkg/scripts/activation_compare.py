#!/usr/bin/env python3
"""ReLU vs tanh in the landmark embedding network across hidden widths.

The landmark-to-embedding map is nonsmooth, so the piecewise-linear
activation tends to track it better than a saturating one; this reproduces
that comparison qualitatively on synthetic subspace data.

    python scripts/activation_compare.py --hidden 25 50 100 200
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from autospectral.kmeans import Partition
from autospectral.metrics import clustering_accuracy
from autospectral.netembed import NetConfig, landmark_cluster
from autospectral.search import default_search_space
from autospectral.synthetic import random_subspaces


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--hidden", type=int, nargs="+", default=[25, 50, 100, 200])
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--n", type=int, default=3000)
    ap.add_argument("--landmarks", type=int, default=300)
    args = ap.parse_args()

    space = default_search_space()
    print(f"{'hidden':>7} {'acc(relu)':>10} {'acc(tanh)':>10}")
    for hidden in args.hidden:
        accs = {"relu": [], "tanh": []}
        for seed in range(args.seeds):
            X, labels = random_subspaces(
                k=3, ambient_dim=30, intrinsic_dim=3,
                per_cluster=args.n // 3, noise_std=0.05, seed=seed,
            )
            truth = Partition(labels=labels, k=3)
            for act in ("relu", "tanh"):
                cfg = NetConfig(
                    hidden=hidden, ridge=1e-5 if act == "relu" else 1e-3,
                    epochs=200, batch_size=128,
                    lr=1e-3 if act == "relu" else 1e-2,
                    activation=act, seed=seed,
                )
                partition, _ = landmark_cluster(
                    X, 3, space, args.landmarks, cfg, seed=seed
                )
                accs[act].append(clustering_accuracy(partition, truth))
        print(f"{hidden:7d} {np.mean(accs['relu']):10.4f} {np.mean(accs['tanh']):10.4f}")


if __name__ == "__main__":
    main()
