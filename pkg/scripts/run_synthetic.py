#!/usr/bin/env python3
"""Desk-scale benchmark on synthetic union-of-subspaces data.

Runs the default grid search (and optionally the BO search) over several
seeds and prints accuracy, NMI, the winning candidate, and wall-clock time
per run.

    python scripts/run_synthetic.py --seeds 5 --noise 0.01 --bo
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from autospectral.kmeans import Partition
from autospectral.metrics import clustering_accuracy, nmi
from autospectral.search import bo_search, default_search_space, grid_search
from autospectral.synthetic import random_subspaces


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--clusters", type=int, default=3)
    ap.add_argument("--ambient", type=int, default=30)
    ap.add_argument("--intrinsic", type=int, default=3)
    ap.add_argument("--per-cluster", type=int, default=50)
    ap.add_argument("--noise", type=float, default=0.01)
    ap.add_argument("--seeds", type=int, default=5)
    ap.add_argument("--bo", action="store_true", help="also run the BO search (budget 30/model)")
    args = ap.parse_args()

    space = default_search_space()
    rows = []
    for seed in range(args.seeds):
        X, labels = random_subspaces(
            k=args.clusters,
            ambient_dim=args.ambient,
            intrinsic_dim=args.intrinsic,
            per_cluster=args.per_cluster,
            noise_std=args.noise,
            seed=seed,
        )
        truth = Partition(labels=labels, k=args.clusters)
        t0 = time.perf_counter()
        res = grid_search(X, args.clusters, space, seed=seed)
        t_grid = time.perf_counter() - t0
        row = {
            "seed": seed,
            "grid_acc": clustering_accuracy(res.partition, truth),
            "grid_nmi": nmi(res.partition, truth),
            "grid_reg": res.winner.reg,
            "grid_winner": f"{res.winner.config.model}/tau={res.winner.config.tau}",
            "grid_s": t_grid,
        }
        if args.bo:
            t0 = time.perf_counter()
            bo = bo_search(X, args.clusters, space, budget_per_model=30, seed=seed)
            row["bo_acc"] = clustering_accuracy(bo.partition, truth)
            row["bo_reg"] = bo.winner.reg
            row["bo_s"] = time.perf_counter() - t0
        rows.append(row)
        line = (
            f"seed {seed}: grid acc={row['grid_acc']:.3f} nmi={row['grid_nmi']:.3f} "
            f"reg={row['grid_reg']:.4g} winner={row['grid_winner']} ({row['grid_s']:.1f}s)"
        )
        if args.bo:
            line += f" | bo acc={row['bo_acc']:.3f} reg={row['bo_reg']:.4g} ({row['bo_s']:.1f}s)"
        print(line)

    accs = [r["grid_acc"] for r in rows]
    print(f"\ngrid accuracy: mean={np.mean(accs):.4f} std={np.std(accs):.4f} over {args.seeds} seeds")
    if args.bo:
        bo_accs = [r["bo_acc"] for r in rows]
        print(f"bo accuracy:   mean={np.mean(bo_accs):.4f} std={np.std(bo_accs):.4f}")


if __name__ == "__main__":
    main()
