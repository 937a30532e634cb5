"""Uniform, partition and graphic matroids plus an exhaustive axiom checker."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, InstanceTooLarge
from .sets import GroundSet, mask_to_tuple, popcount

MAX_AXIOM_N = 10


class Matroid:
    """Independence oracle over elements ``0 .. n-1``.

    Subclasses implement :meth:`_independent` on bitmasks.
    """

    kind = "abstract"

    def __init__(self, n: int):
        self.ground = GroundSet(n)

    @property
    def n(self) -> int:
        return self.ground.n

    def _independent(self, mask: int) -> bool:
        raise NotImplementedError

    def is_independent(self, subset: Iterable[int]) -> bool:
        return self._independent(self.ground.to_mask(subset))

    def rank_mask(self, mask: int) -> int:
        # greedy insertion is exact for matroids, whatever the order
        kept = 0
        for v in mask_to_tuple(mask):
            if self._independent(kept | 1 << v):
                kept |= 1 << v
        return popcount(kept)

    def rank(self, subset: Optional[Iterable[int]] = None) -> int:
        """Size of a maximal independent subset of ``subset`` (default: all)."""
        mask = self.ground.full_mask if subset is None else self.ground.to_mask(subset)
        return self.rank_mask(mask)

    def to_dict(self) -> dict:
        raise NotImplementedError


class UniformMatroid(Matroid):
    kind = "uniform"

    def __init__(self, n: int, k: int):
        super().__init__(n)
        if int(k) != k or k < 0:
            raise DomainError(f"uniform matroid needs k >= 0, got {k!r}")
        self.k = int(k)

    def _independent(self, mask):
        return popcount(mask) <= self.k

    def to_dict(self):
        return {"kind": "uniform", "n": self.n, "k": self.k}


class PartitionMatroid(Matroid):
    """At most ``capacities[b]`` elements from each block ``b``.

    ``blocks[v]`` is the block id of element ``v``; ``capacities`` maps block
    ids to nonnegative limits (a sequence indexes blocks ``0..``).
    """

    kind = "partition"

    def __init__(self, blocks: Sequence, capacities):
        super().__init__(len(blocks))
        if not isinstance(capacities, dict):
            capacities = dict(enumerate(capacities))
        self.blocks = list(blocks)
        self.capacities = dict(capacities)
        for b in self.blocks:
            if b not in self.capacities:
                raise DomainError(f"block {b!r} has no capacity")
        for b, c in self.capacities.items():
            if int(c) != c or c < 0:
                raise DomainError(f"capacity of block {b!r} must be a nonnegative integer")
        labels = sorted(set(self.blocks), key=str)
        self._block_masks = []
        for b in labels:
            m = 0
            for v, bv in enumerate(self.blocks):
                if bv == b:
                    m |= 1 << v
            self._block_masks.append((m, int(self.capacities[b])))

    def _independent(self, mask):
        return all(popcount(mask & m) <= c for m, c in self._block_masks)

    def to_dict(self):
        return {"kind": "partition", "blocks": self.blocks,
                "capacities": {str(k): v for k, v in self.capacities.items()}}


class GraphicMatroid(Matroid):
    """Edge ``v`` joins vertices ``edges[v]``; independent sets are forests."""

    kind = "graphic"

    def __init__(self, n_vertices: int, edges: Sequence[Sequence[int]]):
        super().__init__(len(edges))
        self.n_vertices = int(n_vertices)
        self.edges = [tuple(int(x) for x in e) for e in edges]
        for e in self.edges:
            if len(e) != 2 or not all(0 <= x < self.n_vertices for x in e):
                raise DomainError(f"edge {e} has endpoints outside 0..{self.n_vertices - 1}")

    @classmethod
    def complete(cls, n_vertices: int) -> "GraphicMatroid":
        edges = [(i, j) for i in range(n_vertices) for j in range(i + 1, n_vertices)]
        return cls(n_vertices, edges)

    def _independent(self, mask):
        parent = {}

        def find(x):
            root = x
            while parent.get(root, root) != root:
                root = parent[root]
            while x != root:  # path compression
                parent[x], x = root, parent.get(x, x)
            return root

        for v in mask_to_tuple(mask):
            a, b = self.edges[v]
            ra, rb = find(a), find(b)
            if ra == rb:
                return False
            parent[ra] = rb
        return True

    def to_dict(self):
        return {"kind": "graphic", "n_vertices": self.n_vertices,
                "edges": [list(e) for e in self.edges]}


class IndependenceFamily(Matroid):
    """An explicit family of subsets; need not satisfy the matroid axioms.

    Exists so that :func:`verify_axioms` can be pointed at broken systems.
    """

    kind = "explicit"

    def __init__(self, n: int, independent_sets: Iterable[Iterable[int]]):
        super().__init__(n)
        self.family = {self.ground.to_mask(s) for s in independent_sets}

    def _independent(self, mask):
        return mask in self.family

    def to_dict(self):
        return {"kind": "explicit", "n": self.n,
                "independent_sets": sorted((list(mask_to_tuple(m)) for m in self.family),
                                           key=lambda s: (len(s), s))}


def matroid_from_dict(spec: dict) -> Matroid:
    """Build a matroid from its config description (``kind`` plus fields)."""
    kind = spec.get("kind")
    if kind == "uniform":
        return UniformMatroid(spec["n"], spec["k"])
    if kind == "partition":
        caps = spec["capacities"]
        if isinstance(caps, dict):
            blocks = [str(b) for b in spec["blocks"]]
            caps = {str(k): v for k, v in caps.items()}
        else:
            blocks = spec["blocks"]
        return PartitionMatroid(blocks, caps)
    if kind == "graphic":
        return GraphicMatroid(spec["n_vertices"], spec["edges"])
    if kind == "explicit":
        return IndependenceFamily(spec["n"], spec["independent_sets"])
    raise DomainError(f"unknown matroid kind {kind!r}")


@dataclass
class AxiomReport:
    non_emptiness: bool
    heredity: bool
    exchange: bool
    heredity_counterexample: Optional[tuple] = None  # (Y, X): Y independent, X <= Y not
    exchange_counterexample: Optional[tuple] = None  # (X, Y) with no augmenting z

    @property
    def ok(self) -> bool:
        return self.non_emptiness and self.heredity and self.exchange


def verify_axioms(m: Matroid) -> AxiomReport:
    """Check non-emptiness, heredity and exchange over every subset."""
    n = m.n
    if n > MAX_AXIOM_N:
        raise InstanceTooLarge(f"verify_axioms is capped at |V| <= {MAX_AXIOM_N}; got {n}")
    size = 1 << n
    indep = np.fromiter((m._independent(s) for s in range(size)), dtype=bool, count=size)
    non_empty = bool(indep[0])

    heredity_cx = None
    for y in np.flatnonzero(indep):
        y = int(y)
        for v in mask_to_tuple(y):
            if not indep[y & ~(1 << v)]:
                heredity_cx = (mask_to_tuple(y), mask_to_tuple(y & ~(1 << v)))
                break
        if heredity_cx:
            break

    exchange_cx = None
    ind_masks = np.flatnonzero(indep)
    sizes = np.array([popcount(int(s)) for s in ind_masks], dtype=int)
    for x, sx in zip(ind_masks, sizes):
        x = int(x)
        augment = 0
        for v in range(n):
            if not x >> v & 1 and indep[x | 1 << v]:
                augment |= 1 << v
        bigger = ind_masks[sizes > sx]
        failing = bigger[((bigger & ~x) & augment) == 0]
        if failing.size:
            exchange_cx = (mask_to_tuple(x), mask_to_tuple(int(failing[0])))
            break

    return AxiomReport(non_empty, heredity_cx is None, exchange_cx is None,
                       heredity_cx, exchange_cx)
