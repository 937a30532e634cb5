"""Static-score heuristics that compete with greedy on the visibility objective.

The three heuristics are reconstructions; their scores live here and only
here:

* ``CP``: prefer feeds with the least competing traffic, ascending
  ``int_{t0}^{tf} gamma_j``.
* ``UP``: prefer the busiest broadcasters, descending ``int_{t0}^{tf} mu_i``.
* ``CUP``: descending ratio ``int mu_i / int gamma_j``.
* ``random``: a seeded uniform shuffle.

Each method walks its ranked edge list once and keeps an edge while the
broadcaster still has budget left. Ties go to the smaller edge id.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..seeding import child_rng
from .scenario import BroadcastScenario

METHODS = ("random", "CP", "UP", "CUP")


def _integral(profile, t0, tf):
    r = profile.unroll(tf)
    return r.cumulative(tf) - r.cumulative(t0)


def edge_scores(sc: BroadcastScenario, method: str) -> np.ndarray:
    """Score per candidate edge; higher is picked first."""
    mu = {i: _integral(p, sc.t0, sc.tf) for i, p in sc.broadcasters.items()}
    gam = {j: _integral(p, sc.t0, sc.tf) for j, p in sc.feeds.items()}
    if method == "CP":
        return np.array([-gam[j] for _, j in sc.candidate_edges])
    if method == "UP":
        return np.array([mu[i] for i, _ in sc.candidate_edges])
    if method == "CUP":
        return np.array([mu[i] / gam[j] if gam[j] > 0 else np.inf for i, j in sc.candidate_edges])
    raise DomainError(f"unknown baseline {method!r}; choose from {METHODS}")


def select_baseline(sc: BroadcastScenario, method: str, seed: int = 0) -> list:
    """Edge indices chosen by ``method``, sorted ascending."""
    n = sc.n_edges
    if method == "random":
        order = child_rng(seed, "baseline:random").permutation(n)
    else:
        scores = edge_scores(sc, method)
        order = sorted(range(n), key=lambda e: (-scores[e], e))
    left = dict(sc.budgets)
    chosen = []
    for e in order:
        i = sc.candidate_edges[e][0]
        if left[i] > 0:
            left[i] -= 1
            chosen.append(int(e))
    return sorted(chosen)
