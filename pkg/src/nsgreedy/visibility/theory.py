"""Curvature bounds for the visibility objective and the scenario constants they need."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from .intensity import merge_rates
from .scenario import BroadcastScenario

E74 = math.exp(7.0 / 4.0)
ZETA_MIN = 4.0 * E74  # about 23.02


def _zeta_factor(zeta: float) -> float:
    if not zeta > ZETA_MIN:
        raise DomainError(f"zeta = {zeta} must exceed 4 e^(7/4) = {ZETA_MIN:.4f}: t0 is too "
                          "early for the warm-up condition on the feeds' background posts")
    return 1.0 - ZETA_MIN / zeta


def curvature_bound_weak(xi: float, zeta: float, K: int) -> float:
    """Upper bound on the generalized curvature that grows with ``sqrt(K)``."""
    if not xi >= 1:
        raise DomainError(f"xi must be >= 1, got {xi}")
    if int(K) != K or K < 1:
        raise DomainError(f"K must be a positive integer, got {K!r}")
    c = 6.154 * math.e ** 2 / _zeta_factor(zeta)
    return 1.0 - 1.0 / (xi * (c * xi * math.sqrt(K) + 1.0))


def curvature_bound_strong(xi: float, zeta: float, rho: float) -> float:
    """``K``-free curvature bound when each broadcaster is a small share of every feed."""
    if not xi >= 1:
        raise DomainError(f"xi must be >= 1, got {xi}")
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho}")
    if math.isinf(rho):
        shrink = 1.0
    else:
        shrink = min(rho, 1.0) * math.exp(-1.0 / rho ** 2)
    if shrink == 0.0:
        return 1.0
    c = 2.0 * E74 / (_zeta_factor(zeta) * shrink)
    return 1.0 - 1.0 / (xi * (c * xi + 1.0))


@dataclass
class ScenarioConstants:
    xi: float
    zeta: float
    rho: float
    zeta_per_feed: dict
    xi_crude: float  # (c1/c2)(1 + max in-degree), for comparison with xi

    @property
    def zeta_ok(self) -> bool:
        return self.zeta > ZETA_MIN

    def weak_bound(self, K: int):
        return curvature_bound_weak(self.xi, self.zeta, K) if self.zeta_ok else None

    def strong_bound(self):
        return curvature_bound_strong(self.xi, self.zeta, self.rho) if self.zeta_ok else None


def xi_zeta_rho_estimates(sc: BroadcastScenario) -> ScenarioConstants:
    """``xi``, ``zeta`` and ``rho`` of a scenario, with sup/inf taken over ``[t0, tf]``.

    ``xi`` is the worst case over all edge subsets: every candidate
    broadcaster of a feed is assumed active at its peak.
    """
    t0, tf, K = sc.t0, sc.tf, sc.K
    mu = {i: p.unroll(tf) for i, p in sc.broadcasters.items()}
    gam = {j: p.unroll(tf) for j, p in sc.feeds.items()}
    xi, zeta_per_feed, rho = 1.0, {}, math.inf
    c1 = max([r.sup(t0, tf) for r in list(mu.values()) + list(gam.values())])
    c2 = math.inf
    max_in = 0
    for j, g in gam.items():
        g_inf = g.inf(t0, tf)
        if not g_inf > 0:
            raise DomainError(f"feed {j!r} has zero background rate inside [t0, tf]; xi undefined")
        c2 = min(c2, g_inf)
        srcs = [i for i, jj in sc.candidate_edges if jj == j]
        max_in = max(max_in, len(srcs))
        xi = max(xi, (g.sup(t0, tf) + sum(mu[i].sup(t0, tf) for i in srcs)) / g_inf)
        if K == 1:
            zeta_per_feed[j] = math.inf
        else:
            zeta_per_feed[j] = (g.cumulative(t0) - (K - 1)) / math.sqrt(K - 1)
        for i in srcs:
            edges, (m, gv) = merge_rates([mu[i], g], tf)
            lo, hi = edges[:-1], edges[1:]
            inside = (hi > t0) & (lo < tf)
            m, gv = m[inside], gv[inside]
            with np.errstate(divide="ignore"):
                ratio = np.where(m > 0, gv / np.where(m > 0, m, 1.0), np.inf)
            if K > 1:
                rho = min(rho, float(ratio.min()) / math.sqrt(K - 1))
    zeta = min(zeta_per_feed.values()) if zeta_per_feed else math.inf
    xi_crude = c1 / c2 * (1 + max_in) if math.isfinite(c2) else math.inf
    return ScenarioConstants(xi, zeta, rho, zeta_per_feed, xi_crude)
