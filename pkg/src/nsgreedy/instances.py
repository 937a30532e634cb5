"""Random monotone set functions and matroids for the certification harness.

Every generator fills a dense table over all ``2**n`` subsets, so values are
exact and evaluation is a lookup.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .matroids import Matroid, PartitionMatroid, UniformMatroid
from .seeding import child_rng
from .sets import SetFunction

KINDS = ("coverage", "coverage_power", "pairwise", "ds")
MAX_RANK = 8


def _cover_table(covers, weights):
    # covers[v]: bitmask over the universe; table[m] = weight of the union
    n = len(covers)
    union = np.zeros(1 << n, dtype=np.int64)
    for v in range(n):
        union[1 << v:1 << (v + 1)] = union[:1 << v] | covers[v]
    bits = (union[:, None] >> np.arange(len(weights))) & 1
    return bits @ np.asarray(weights, dtype=float)


def _modular_table(w):
    n = len(w)
    out = np.zeros(1 << n)
    for v in range(n):
        out[1 << v:1 << (v + 1)] = out[:1 << v] + w[v]
    return out


def _random_covers(rng, n, universe):
    covers = []
    for _ in range(n):
        k = rng.integers(1, max(2, universe // 2) + 1)
        covers.append(int(sum(1 << int(u) for u in rng.choice(universe, size=k, replace=False))))
    return covers


def coverage_table(rng, n, universe=12):
    """Weighted coverage: submodular and monotone."""
    return _cover_table(_random_covers(rng, n, universe), rng.uniform(0.1, 1.0, universe))


def coverage_power_table(rng, n, universe=12):
    """Weighted coverage raised to a power in (1, 2]: monotone, not submodular."""
    return coverage_table(rng, n, universe) ** rng.uniform(1.0, 2.0)


def pairwise_table(rng, n):
    """Modular part plus nonnegative pairwise bonuses: monotone supermodular."""
    w = rng.uniform(0.1, 1.0, n)
    c = np.triu(rng.uniform(0.0, 0.5, (n, n)) * (rng.random((n, n)) < 0.5), 1)
    table = _modular_table(w)
    masks = np.arange(1 << n)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(float)
    return table + np.einsum("mi,ij,mj->m", bits, c, bits)


def ds_tables(rng, n, universe=12, theta=None):
    """``(f1, f2)`` with ``f2``'s gains at most ``theta`` times ``f1``'s.

    ``f1`` is coverage plus a positive modular floor; ``f2`` is a scaled-down
    coverage over the same sets with smaller weights plus a modular share of
    the floor.
    """
    theta = rng.uniform(0.1, 0.9) if theta is None else theta
    covers = _random_covers(rng, n, universe)
    w = rng.uniform(0.1, 1.0, universe)
    base = rng.uniform(0.05, 0.5, n)
    f1 = _cover_table(covers, w) + _modular_table(base)
    f2 = theta * (_cover_table(covers, w * rng.uniform(0, 1, universe))
                  + _modular_table(base * rng.uniform(0, 1, n)))
    return f1, f2


def random_matroid(rng, n) -> Matroid:
    """Uniform or partition matroid with rank at most ``MAX_RANK``."""
    if rng.random() < 0.5:
        return UniformMatroid(n, int(rng.integers(1, min(n, MAX_RANK) + 1)))
    n_blocks = int(rng.integers(1, min(n, 4) + 1))
    blocks = [int(b) for b in rng.integers(0, n_blocks, n)]
    caps = {}
    room = MAX_RANK
    for b in sorted(set(blocks)):
        size = blocks.count(b)
        caps[b] = int(rng.integers(1, min(size, 3, room) + 1)) if room > 0 else 0
        room -= caps[b]
    return PartitionMatroid(blocks, caps)


@dataclass
class Instance:
    instance_id: int
    kind: str
    f: SetFunction
    matroid: Matroid

    @property
    def n(self) -> int:
        return self.f.n


def random_instance(master: int, index: int, n_min: int = 3, n_max: int = 10,
                    kind: str | None = None) -> Instance:
    """Instance ``index`` of the stream rooted at ``master``."""
    if not 1 <= n_min <= n_max:
        raise DomainError("need 1 <= n_min <= n_max")
    rng = child_rng(master, "instance", index)
    n = int(rng.integers(n_min, n_max + 1))
    kind = KINDS[int(rng.integers(len(KINDS)))] if kind is None else kind
    if kind == "coverage":
        table = coverage_table(rng, n)
    elif kind == "coverage_power":
        table = coverage_power_table(rng, n)
    elif kind == "pairwise":
        table = pairwise_table(rng, n)
    elif kind == "ds":
        f1, f2 = ds_tables(rng, n)
        table = f1 - f2
    else:
        raise DomainError(f"unknown instance kind {kind!r}")
    return Instance(index, kind, SetFunction.from_table(table, name=kind), random_matroid(rng, n))
