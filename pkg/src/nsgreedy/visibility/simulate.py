"""Exact sampling of piecewise-constant Poisson feeds and the replay estimator."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .. import kernels
from ..errors import DomainError
from ..seeding import derive_seed
from .intensity import IntensityProfile
from .scenario import BroadcastScenario, VisibilityReport, edge_set_hash

BACKGROUND = "background"


def sample_poisson(profile: IntensityProfile, t_end: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted event times on ``[0, t_end]``: Poisson count per piece, uniform placement."""
    rate = profile.unroll(t_end)
    lo, hi = rate.edges[:-1], rate.edges[1:]
    counts = rng.poisson(rate.values * (hi - lo))
    total = int(counts.sum())
    if total == 0:
        return np.empty(0)
    starts = np.repeat(lo, counts)
    widths = np.repeat(hi - lo, counts)
    return np.sort(starts + widths * rng.random(total))


@dataclass
class FeedEvents:
    """One feed in one realization, in arrival order.

    ``sources[k]`` is the broadcaster index of event ``k``, or ``-1`` for the
    feed's background traffic.
    """

    times: np.ndarray
    sources: np.ndarray


@dataclass
class EventLog:
    broadcaster_ids: list
    feed_ids: list
    realizations: list = field(default_factory=list)  # list of {feed id: FeedEvents}

    @property
    def n(self) -> int:
        return len(self.realizations)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["realization", "feed", "time", "source"])
        for r, feeds in enumerate(self.realizations):
            for j in self.feed_ids:
                ev = feeds.get(j)
                if ev is None:
                    continue
                for t, s in zip(ev.times, ev.sources):
                    w.writerow([r, j, repr(float(t)), BACKGROUND if s < 0 else self.broadcaster_ids[s]])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, broadcaster_ids: Optional[list] = None,
                 feed_ids: Optional[list] = None) -> "EventLog":
        """Parse the CSV written by :meth:`to_csv` (or any log with those columns)."""
        rows = list(csv.DictReader(io.StringIO(text)))
        missing = {"realization", "feed", "time", "source"} - set(rows[0] if rows else {})
        if rows and missing:
            raise DomainError(f"event log is missing columns {sorted(missing)}")
        if broadcaster_ids is None:
            broadcaster_ids = sorted({r["source"] for r in rows} - {BACKGROUND})
        if feed_ids is None:
            feed_ids = sorted({r["feed"] for r in rows})
        code = {b: k for k, b in enumerate(broadcaster_ids)}
        n_real = max((int(r["realization"]) for r in rows), default=-1) + 1
        buckets = [dict() for _ in range(n_real)]
        for r in rows:
            s = r["source"]
            if s != BACKGROUND and s not in code:
                raise DomainError(f"unknown source {s!r}")
            buckets[int(r["realization"])].setdefault(r["feed"], []).append(
                (float(r["time"]), -1 if s == BACKGROUND else code[s]))
        log = cls(list(broadcaster_ids), list(feed_ids))
        for b in buckets:
            feeds = {}
            for j in feed_ids:
                ev = b.get(j, [])
                t = np.array([e[0] for e in ev], dtype=float)
                s = np.array([e[1] for e in ev], dtype=np.int64)
                feeds[j] = _ordered(t, s)
            log.realizations.append(feeds)
        return log


def _ordered(times, sources) -> FeedEvents:
    # arrival order: time, then source id (background last), then input order
    key_src = np.where(sources < 0, np.iinfo(np.int64).max, sources)
    order = np.lexsort((np.arange(times.size), key_src, times))
    return FeedEvents(times[order], sources[order])


def simulate_realization(scenario: BroadcastScenario, edges: Iterable[int], seed: int) -> dict:
    """One realization of every feed on ``[0, tf]`` given chosen edges.

    Each broadcaster posts once into all feeds it reaches.  Every process
    draws from its own seed stream keyed by id, so results do not depend on
    which other edges are present.
    """
    pairs = scenario.edge_ids(set(edges))
    b_ids = list(scenario.broadcasters)
    b_code = {b: k for k, b in enumerate(b_ids)}
    posts = {}
    for i in sorted({i for i, _ in pairs}, key=b_code.get):
        rng = np.random.default_rng(derive_seed(seed, f"broadcaster:{i}"))
        posts[i] = sample_poisson(scenario.broadcasters[i], scenario.tf, rng)
    out = {}
    for j, prof in scenario.feeds.items():
        rng = np.random.default_rng(derive_seed(seed, f"feed:{j}"))
        parts_t = [sample_poisson(prof, scenario.tf, rng)]
        parts_s = [np.full(parts_t[0].size, -1, dtype=np.int64)]
        for i, jj in pairs:
            if jj == j:
                parts_t.append(posts[i])
                parts_s.append(np.full(posts[i].size, b_code[i], dtype=np.int64))
        out[j] = _ordered(np.concatenate(parts_t), np.concatenate(parts_s))
    return out


def simulate(scenario: BroadcastScenario, edges: Iterable[int], seed: int, n: int) -> EventLog:
    """``n`` realizations; realization ``l`` uses ``derive_seed(seed, "realization", l)``."""
    edges = sorted(set(edges))
    log = EventLog(list(scenario.broadcasters), list(scenario.feeds))
    for ell in range(n):
        log.realizations.append(
            simulate_realization(scenario, edges, derive_seed(seed, "realization", ell)))
    return log


def _replay(ev: FeedEvents, K: int, t0: float, tf: float, who: Optional[int] = None) -> float:
    flags = ev.sources >= 0 if who is None else ev.sources == who
    return kernels.replay_top_k(ev.times, flags.astype(np.int64), K, t0, tf)


def empirical_visibility(log: EventLog, K: int, t0: float, tf: float,
                         edge_hash: str = "") -> VisibilityReport:
    """Average over realizations of the time broadcaster posts spend in the top ``K``."""
    if log.n < 1:
        raise DomainError("need at least one realization")
    if not tf > t0:
        raise DomainError(f"empty horizon [{t0}, {tf}]")
    if int(K) != K or K < 1:
        raise DomainError("K must be a positive integer")
    per_real = np.zeros(log.n)
    per_feed = {j: 0.0 for j in log.feed_ids}
    per_edge: dict = {}
    for r, feeds in enumerate(log.realizations):
        for j in log.feed_ids:
            ev = feeds.get(j)
            if ev is None or not np.any(ev.sources >= 0):
                continue
            v = _replay(ev, K, t0, tf)
            per_real[r] += v
            per_feed[j] += v
            for b in np.unique(ev.sources[ev.sources >= 0]):
                key = (log.broadcaster_ids[b], j)
                per_edge[key] = per_edge.get(key, 0.0) + _replay(ev, K, t0, tf, int(b))
    per_feed = {j: v / log.n for j, v in per_feed.items()}
    per_edge = {k: v / log.n for k, v in sorted(per_edge.items())}
    return VisibilityReport(per_feed, float(per_real.mean()), "empirical", log.n,
                            edge_hash, per_edge, per_real)


def realization_visibility(scenario: BroadcastScenario, edges: Iterable[int], seed: int) -> list:
    """Per-feed time in the top ``K`` for the single realization drawn from ``seed``."""
    feeds = simulate_realization(scenario, edges, seed)
    return [_replay(feeds[j], scenario.K, scenario.t0, scenario.tf) for j in scenario.feeds]


def estimate_visibility(scenario: BroadcastScenario, edges: Iterable[int], seed: int,
                        n: int) -> VisibilityReport:
    """Simulate ``n`` realizations and apply the replay estimator.

    Realizations are generated and replayed one at a time, so memory stays flat
    for large ``n``.
    """
    edges = sorted(set(edges))
    if n < 1:
        raise DomainError("need at least one realization")
    vals = np.array([realization_visibility(scenario, edges, derive_seed(seed, "realization", ell))
                     for ell in range(n)])
    per_feed = {j: float(vals[:, k].mean()) for k, j in enumerate(scenario.feeds)}
    per_real = vals.sum(axis=1)
    return VisibilityReport(per_feed, float(per_real.mean()), "empirical", n,
                            edge_set_hash(scenario, edges), {}, per_real)
