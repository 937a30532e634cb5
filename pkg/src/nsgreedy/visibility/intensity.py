"""Piecewise-constant rate functions.

``IntensityProfile`` is the periodic description used in scenario files.
``PiecewiseRate`` is its finite unrolling on ``[0, t_end]``; sums of rates
and all integrals are done on that form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class IntensityProfile:
    """Rate ``values[k]`` on ``[breakpoints[k], breakpoints[k+1])``, repeated every ``period``."""

    period: float
    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bp = tuple(float(b) for b in self.breakpoints)
        vals = tuple(float(v) for v in self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vals)
        if not np.isfinite(self.period) or self.period <= 0:
            raise DomainError(f"period must be positive, got {self.period}")
        if not bp or bp[0] != 0.0:
            raise DomainError("breakpoints must start at 0")
        if any(b2 <= b1 for b1, b2 in zip(bp, bp[1:])):
            raise DomainError("breakpoints must be strictly ascending")
        if bp[-1] >= self.period:
            raise DomainError("breakpoints must lie in [0, period)")
        if len(vals) != len(bp):
            raise DomainError("need one value per breakpoint")
        if any(not np.isfinite(v) or v < 0 for v in vals):
            raise DomainError("rates must be finite and nonnegative")

    @classmethod
    def constant(cls, rate: float, period: float = 1.0) -> "IntensityProfile":
        return cls(period, (0.0,), (rate,))

    @classmethod
    def from_dict(cls, d: dict) -> "IntensityProfile":
        return cls(float(d["period"]), tuple(d["breakpoints"]), tuple(d["values"]))

    def to_dict(self) -> dict:
        return {"period": self.period, "breakpoints": list(self.breakpoints),
                "values": list(self.values)}

    def scaled(self, c: float) -> "IntensityProfile":
        return IntensityProfile(self.period, self.breakpoints, tuple(c * v for v in self.values))

    def rate(self, t):
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.breakpoints, np.mod(t, self.period), side="right") - 1
        out = np.asarray(self.values)[k]
        return out if out.ndim else float(out)

    def unroll(self, t_end: float) -> "PiecewiseRate":
        """The profile restricted to ``[0, t_end]``."""
        if t_end < 0:
            raise DomainError("t_end must be nonnegative")
        n_periods = int(np.floor(t_end / self.period)) + 1
        starts = (np.asarray(self.breakpoints)[None, :]
                  + self.period * np.arange(n_periods)[:, None]).ravel()
        vals = np.tile(self.values, n_periods)
        keep = starts < t_end
        if not keep.any():  # t_end == 0
            keep[0] = True
        edges = np.append(starts[keep], t_end)
        return PiecewiseRate(edges, vals[keep])


class PiecewiseRate:
    """Rate ``values[k]`` on ``[edges[k], edges[k+1])`` with ``edges[0] == 0``."""

    __slots__ = ("edges", "values", "_cum")

    def __init__(self, edges, values):
        self.edges = np.asarray(edges, dtype=float)
        self.values = np.asarray(values, dtype=float)
        if self.edges.ndim != 1 or self.edges.size != self.values.size + 1:
            raise DomainError("need len(edges) == len(values) + 1")
        if self.edges[0] != 0.0 or np.any(np.diff(self.edges) < 0):
            raise DomainError("edges must start at 0 and be nondecreasing")
        self._cum = np.concatenate(([0.0], np.cumsum(self.values * np.diff(self.edges))))

    @property
    def t_end(self) -> float:
        return float(self.edges[-1])

    @classmethod
    def zero(cls, t_end: float) -> "PiecewiseRate":
        return cls([0.0, t_end], [0.0])

    def refine(self, edges) -> np.ndarray:
        """Values on a finer partition whose pieces each sit inside one of ours."""
        edges = np.asarray(edges, dtype=float)
        k = np.clip(np.searchsorted(self.edges, edges[:-1], side="right") - 1,
                    0, self.values.size - 1)
        return self.values[k]

    def cumulative(self, t):
        """``int_0^t`` of the rate (linear extrapolation past ``t_end``)."""
        t = np.asarray(t, dtype=float)
        k = np.clip(np.searchsorted(self.edges, t, side="right") - 1, 0, self.values.size - 1)
        out = self._cum[k] + self.values[k] * (t - self.edges[k])
        return out if out.ndim else float(out)

    def window(self, a: float, b: float) -> np.ndarray:
        """Rates of the pieces meeting ``[a, b]`` with positive overlap."""
        lo, hi = self.edges[:-1], self.edges[1:]
        if b > a:
            mask = (hi > a) & (lo < b)
        else:
            mask = (lo <= a) & (hi > a)
            if not mask.any():
                mask[-1] = True
        return self.values[mask]

    def sup(self, a: float, b: float) -> float:
        return float(self.window(a, b).max())

    def inf(self, a: float, b: float) -> float:
        return float(self.window(a, b).min())


def merge_rates(rates: Sequence[PiecewiseRate], t_end: float):
    """Common refinement of several rates on ``[0, t_end]``.

    Returns ``(edges, [values per input])``; zero-length pieces are dropped.
    """
    edges = np.unique(np.concatenate([r.edges[r.edges <= t_end] for r in rates] + [[0.0, t_end]]))
    edges = edges[edges <= t_end]
    return edges, [r.refine(edges) for r in rates]


def _as_rate(lam, t_end):
    if isinstance(lam, PiecewiseRate):
        if lam.t_end < t_end:
            raise DomainError(f"rate only defined up to {lam.t_end}")
        return lam
    if isinstance(lam, IntensityProfile):
        return lam.unroll(t_end)
    raise TypeError(f"expected IntensityProfile or PiecewiseRate, got {type(lam).__name__}")


def sum_rates(profiles: Iterable, t_end: float) -> PiecewiseRate:
    """Pointwise sum of profiles on ``[0, t_end]``; the zero rate if empty."""
    rates = [_as_rate(p, t_end) for p in profiles]
    if not rates:
        return PiecewiseRate.zero(t_end)
    edges, vals = merge_rates(rates, t_end)
    return PiecewiseRate(edges, np.sum(vals, axis=0))


def cumulative_intensity(lam, tau: float, t: float) -> float:
    """``J(lam, tau, t)``, the integral of ``lam`` over ``[tau, t]``."""
    if tau < 0:
        raise DomainError("tau must be nonnegative")
    if tau > t:
        raise DomainError(f"need tau <= t, got tau={tau}, t={t}")
    r = _as_rate(lam, t)
    return float(r.cumulative(t) - r.cumulative(tau))
