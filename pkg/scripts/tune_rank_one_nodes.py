#!/usr/bin/env python3
"""Offline tuner for the rank-one frame's default node lists.

Maximizes the smallest singular value of the frame's coordinate matrix over
the 2n-3 nodes (seeded random search plus coordinate descent). The winning
lists are frozen into framelift.frames.TUNED_RANK_ONE_NODES; rerun this
script to regenerate them.

Usage: python scripts/tune_rank_one_nodes.py [n_min n_max]
"""

from __future__ import annotations

import sys

import numpy as np

from framelift.frames import default_nodes_rank_one, rank_one_frame
from framelift.measurement import build_operator

SEARCH_DRAWS = 400
SEARCH_BOX = 2.5
MIN_GAP = 1e-3


def smin(n: int, nodes) -> float:
    nodes = np.sort(np.asarray(nodes, dtype=float))
    if np.any(np.abs(nodes) < 1e-6) or np.any(np.diff(nodes) <= MIN_GAP):
        return 0.0
    return build_operator(rank_one_frame(n, nodes=nodes)).sigma_min


def tune(n: int, seed: int = 0) -> tuple[np.ndarray, float]:
    rng = np.random.default_rng(seed)
    m_nodes = 2 * n - 3
    best_nodes = np.asarray(default_nodes_rank_one(n))
    best = smin(n, best_nodes)
    for _ in range(SEARCH_DRAWS):
        cand = np.sort(rng.uniform(-SEARCH_BOX, SEARCH_BOX, size=m_nodes))
        s = smin(n, cand)
        if s > best:
            best, best_nodes = s, cand
    step = 0.1
    while step >= 1e-4:
        improved = False
        for i in range(m_nodes):
            for d in (step, -step):
                cand = best_nodes.copy()
                cand[i] += d
                s = smin(n, np.sort(cand))
                if s > best:
                    best, best_nodes = s, np.sort(cand)
                    improved = True
        if not improved:
            step /= 2
    return best_nodes, best


def main() -> None:
    n_min, n_max = 3, 12
    if len(sys.argv) == 3:
        n_min, n_max = int(sys.argv[1]), int(sys.argv[2])
    print("TUNED_RANK_ONE_NODES = {")
    for n in range(n_min, n_max + 1):
        nodes, s = tune(n)
        default = smin(n, default_nodes_rank_one(n))
        entries = ", ".join(f"{x:.6f}" for x in nodes)
        print(f"    # sigma_min {s:.3e} (chebyshev default {default:.3e})")
        print(f"    {n}: [{entries}],")
    print("}")


if __name__ == "__main__":
    main()
