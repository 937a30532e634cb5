"""Broadcast scenarios and the visibility objective over candidate edges."""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import numpy as np

from ..errors import DomainError
from ..matroids import PartitionMatroid
from ..seeding import child_rng
from ..sets import SetFunction, mask_to_tuple
from .analytic import integrated_top_k
from .intensity import IntensityProfile


@dataclass
class BroadcastScenario:
    """Broadcasters, feeds, candidate edges ``(i, j)`` and per-broadcaster budgets.

    Ids are kept as strings so a JSON round trip is lossless.  Edge ``e`` of
    the ground set is ``candidate_edges[e]``.
    """

    broadcasters: dict
    feeds: dict
    candidate_edges: list
    budgets: dict
    K: int
    t0: float
    tf: float

    def __post_init__(self):
        self.broadcasters = {str(k): v for k, v in self.broadcasters.items()}
        self.feeds = {str(k): v for k, v in self.feeds.items()}
        self.candidate_edges = [(str(i), str(j)) for i, j in self.candidate_edges]
        self.budgets = {str(k): v for k, v in self.budgets.items()}
        if int(self.K) != self.K or self.K < 1:
            raise DomainError(f"K must be a positive integer, got {self.K!r}")
        self.K = int(self.K)
        self.t0, self.tf = float(self.t0), float(self.tf)
        if not 0 <= self.t0 < self.tf:
            raise DomainError(f"need 0 <= t0 < tf, got t0={self.t0}, tf={self.tf}")
        for p in list(self.broadcasters.values()) + list(self.feeds.values()):
            if not isinstance(p, IntensityProfile):
                raise DomainError("profiles must be IntensityProfile instances")
        if len(set(self.candidate_edges)) != len(self.candidate_edges):
            raise DomainError("duplicate candidate edge")
        for i, j in self.candidate_edges:
            if i not in self.broadcasters:
                raise DomainError(f"edge ({i}, {j}) names unknown broadcaster {i!r}")
            if j not in self.feeds:
                raise DomainError(f"edge ({i}, {j}) names unknown feed {j!r}")
        for i in self.broadcasters:
            c = self.budgets.get(i)
            if c is None:
                raise DomainError(f"broadcaster {i!r} has no budget")
            if int(c) != c or c < 0:
                raise DomainError(f"budget of {i!r} must be a nonnegative integer")
            self.budgets[i] = int(c)

    @property
    def n_edges(self) -> int:
        return len(self.candidate_edges)

    def edges_into(self, j: str) -> list:
        return [e for e, (_, jj) in enumerate(self.candidate_edges) if jj == j]

    def edge_ids(self, edges: Iterable[int]) -> list:
        return [self.candidate_edges[e] for e in sorted(edges)]

    def edge_index(self, pairs: Iterable) -> list:
        """Ground-set indices of ``(i, j)`` pairs; unknown pairs raise."""
        lookup = {e: k for k, e in enumerate(self.candidate_edges)}
        out = []
        for i, j in pairs:
            k = lookup.get((str(i), str(j)))
            if k is None:
                raise DomainError(f"({i}, {j}) is not a candidate edge")
            out.append(k)
        return sorted(out)

    # -- serialisation -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "broadcasters": [{"id": i, "profile": p.to_dict()} for i, p in self.broadcasters.items()],
            "feeds": [{"id": j, "profile": p.to_dict()} for j, p in self.feeds.items()],
            "candidate_edges": [list(e) for e in self.candidate_edges],
            "budgets": dict(self.budgets),
            "K": self.K, "t0": self.t0, "tf": self.tf,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BroadcastScenario":
        try:
            return cls(
                broadcasters={b["id"]: IntensityProfile.from_dict(b["profile"]) for b in d["broadcasters"]},
                feeds={f["id"]: IntensityProfile.from_dict(f["profile"]) for f in d["feeds"]},
                candidate_edges=[tuple(e) for e in d["candidate_edges"]],
                budgets=d["budgets"], K=d["K"], t0=d["t0"], tf=d["tf"])
        except KeyError as exc:
            raise DomainError(f"scenario is missing key {exc}") from None

    @classmethod
    def load(cls, path) -> "BroadcastScenario":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8")


def edge_set_hash(scenario: BroadcastScenario, edges: Iterable[int]) -> str:
    """Short stable digest of an edge subset, for report rows."""
    text = ";".join(f"{i},{j}" for i, j in scenario.edge_ids(edges))
    return hashlib.blake2b(text.encode(), digest_size=8).hexdigest()


def visibility_edge(scenario: BroadcastScenario, edges: Iterable[int], j: str,
                    tol: Optional[float] = None) -> float:
    """Time-integrated expected top-K count of broadcaster posts in feed ``j``."""
    edges = sorted(set(edges))
    for e in edges:
        if not 0 <= e < scenario.n_edges:
            raise DomainError(f"edge index {e} is not a candidate edge")
    j = str(j)
    if j not in scenario.feeds:
        raise DomainError(f"unknown feed {j!r}")
    mus = [scenario.broadcasters[i] for i, jj in scenario.edge_ids(edges) if jj == j]
    if not mus:
        return 0.0
    return integrated_top_k(mus, scenario.feeds[j], scenario.K, scenario.t0, scenario.tf, tol)


def visibility_per_edge(scenario: BroadcastScenario, edges: Iterable[int],
                        tol: Optional[float] = None) -> dict:
    """``{(i, j): U(i, j)}``: each chosen broadcaster's own share of feed ``j``."""
    pairs = scenario.edge_ids(set(edges))
    out = {}
    for i, j in pairs:
        mus = [scenario.broadcasters[b] for b, jj in pairs if jj == j]
        out[(i, j)] = integrated_top_k(mus, scenario.feeds[j], scenario.K, scenario.t0,
                                       scenario.tf, tol, share=scenario.broadcasters[i])
    return out


def visibility_objective(scenario: BroadcastScenario, tol: Optional[float] = None):
    """``(F, M)``: total visibility over candidate edges and the budget matroid.

    ``F`` caches per-feed values keyed by the set of edges into that feed, so
    scans over many edge sets only integrate each distinct feed state once.
    """
    feed_ids = list(scenario.feeds)
    into = {j: 0 for j in feed_ids}
    for e, (_, j) in enumerate(scenario.candidate_edges):
        into[j] |= 1 << e
    cache: dict = {}

    def value(mask):
        total = 0.0
        for j in feed_ids:
            sub = mask & into[j]
            if not sub:
                continue
            key = (j, sub)
            v = cache.get(key)
            if v is None:
                v = cache[key] = visibility_edge(scenario, mask_to_tuple(sub), j, tol)
            total += v
        return total

    f = SetFunction(scenario.n_edges, value, name="visibility", takes_mask=True)
    blocks = [i for i, _ in scenario.candidate_edges]
    matroid = PartitionMatroid(blocks, {i: scenario.budgets[i] for i in set(blocks)})
    return f, matroid


@dataclass
class VisibilityReport:
    per_feed: dict
    total: float
    method: str  # analytic | quadrature | empirical
    n: int = 0
    edge_set_hash: str = ""
    per_edge: dict = field(default_factory=dict)
    per_realization: Optional[np.ndarray] = None

    def stderr(self) -> float:
        """Standard error of ``total`` across realizations (empirical reports)."""
        if self.per_realization is None or self.n < 2:
            return float("nan")
        return float(np.std(self.per_realization, ddof=1) / np.sqrt(self.n))

    def rows(self) -> list:
        out = [[j, self.edge_set_hash, self.method, repr(float(v)), self.n]
               for j, v in self.per_feed.items()]
        out.append(["total", self.edge_set_hash, self.method, repr(float(self.total)), self.n])
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["feed", "edge_set_hash", "method", "value", "n"])
        w.writerows(self.rows())
        return buf.getvalue()


def analytic_report(scenario: BroadcastScenario, edges: Iterable[int],
                    tol: Optional[float] = None) -> VisibilityReport:
    edges = sorted(set(edges))
    per_feed = {j: visibility_edge(scenario, edges, j, tol) for j in scenario.feeds}
    return VisibilityReport(per_feed, float(sum(per_feed.values())), "analytic", 0,
                            edge_set_hash(scenario, edges), visibility_per_edge(scenario, edges, tol))


# -- generators --------------------------------------------------------------

def _random_profile(rng, period, pieces, lo, hi):
    bp = tuple(period * k / pieces for k in range(pieces))
    return IntensityProfile(period, bp, tuple(float(v) for v in rng.uniform(lo, hi, pieces)))


def random_scenario(seed: int, n_broadcasters: int = 3, n_feeds: int = 3, n_edges: int = 6,
                    budget: int = 1, K: int = 5, pieces: int = 4, period: float = 1.0,
                    mu_range=(0.01, 0.1), gamma_range=(0.4, 50.0),
                    t0: float = 3.0, tf: float = 5.0) -> BroadcastScenario:
    """Small random scenario with periodic piecewise-constant rates.

    Candidate edges are a uniform sample of ``n_edges`` broadcaster-feed pairs.
    """
    rng = child_rng(seed, "scenario")
    pairs = [(f"b{i}", f"f{j}") for i in range(n_broadcasters) for j in range(n_feeds)]
    if n_edges > len(pairs):
        raise DomainError("more candidate edges than broadcaster-feed pairs")
    chosen = sorted(rng.choice(len(pairs), size=n_edges, replace=False))
    return BroadcastScenario(
        broadcasters={f"b{i}": _random_profile(rng, period, pieces, *mu_range)
                      for i in range(n_broadcasters)},
        feeds={f"f{j}": _random_profile(rng, period, pieces, *gamma_range) for j in range(n_feeds)},
        candidate_edges=[pairs[k] for k in chosen],
        budgets={f"b{i}": budget for i in range(n_broadcasters)},
        K=K, t0=t0, tf=tf)


def constant_scenario(mu: float = 0.1, gamma: float = 1.0, K: int = 5,
                      t0: float = 30.0, tf: float = 40.0) -> BroadcastScenario:
    """One broadcaster, one feed, one candidate edge, constant rates."""
    return BroadcastScenario(
        broadcasters={"b0": IntensityProfile.constant(mu)},
        feeds={"f0": IntensityProfile.constant(gamma)},
        candidate_edges=[("b0", "f0")], budgets={"b0": 1}, K=K, t0=t0, tf=tf)


def toy_scenario() -> BroadcastScenario:
    """Four broadcasters (budget 1 each), four feeds, ``K = 10``, one-day period.

    Broadcaster ``b{k}`` is busy during quarter ``k`` of the day.  Feed ``f{k}``
    is quiet in quarter ``(k + 1) mod 4`` and crowded otherwise, and the
    crowded levels differ so that ranking feeds by total competition alone
    misses the quiet-slot matching.
    """
    quarter = (0.0, 0.25, 0.5, 0.75)
    broadcasters, feeds = {}, {}
    for k in range(4):
        mu = [0.3] * 4
        mu[k] = 12.0
        broadcasters[f"b{k}"] = IntensityProfile(1.0, quarter, tuple(mu))
        quiet = (k + 1) % 4
        base = 40.0 + 10.0 * k
        gam = [base] * 4
        gam[quiet] = 2.0
        feeds[f"f{k}"] = IntensityProfile(1.0, quarter, tuple(gam))
    edges = [(f"b{i}", f"f{j}") for i in range(4) for j in range(4)]
    return BroadcastScenario(broadcasters, feeds, edges, {f"b{i}": 1 for i in range(4)},
                             K=10, t0=3.0, tf=5.0)
