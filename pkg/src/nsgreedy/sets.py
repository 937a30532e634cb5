"""Ground sets, memoized set functions and brute-force ratio certificates.

Subsets travel as iterables of element ids at the API boundary and as integer
bitmasks internally (bit ``i`` set <=> element ``i`` present).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from . import kernels
from .errors import DomainError, InstanceTooLarge, NonMonotoneError

TOL = 1e-12
MAX_MONOTONE_N = 20
MAX_RATIO_N = 12


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def mask_to_tuple(mask: int) -> tuple:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class GroundSet:
    """Elements ``0 .. n-1``."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"ground set size must be a nonnegative integer, got {self.n!r}")

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    def to_mask(self, subset: Iterable[int]) -> int:
        if isinstance(subset, int):
            raise TypeError("pass subsets as iterables of element ids, not ints")
        mask = 0
        for v in subset:
            if int(v) != v or not 0 <= v < self.n:
                raise DomainError(f"element {v!r} outside ground set of size {self.n}")
            mask |= 1 << int(v)
        return mask

    def __iter__(self):
        return iter(range(self.n))

    def __len__(self):
        return self.n


class SetFunction:
    """A memoized value oracle normalised so that ``F(empty) = 0``.

    ``oracle`` receives a ``frozenset`` of element ids, or the bitmask itself
    when ``takes_mask`` is set. It is called once at
    construction on the empty set and the result is subtracted from every
    later value. ``eval_count`` counts oracle calls only; memo hits are free.
    """

    def __init__(self, n: int, oracle: Callable[[frozenset], float], *,
                 memo: bool = True, name: Optional[str] = None, takes_mask: bool = False):
        self.ground = n if isinstance(n, GroundSet) else GroundSet(n)
        self._oracle = oracle
        self._takes_mask = takes_mask
        self.memo_enabled = memo
        self.name = name or getattr(oracle, "__name__", "F")
        self.eval_count = 0
        self._memo: dict[int, float] = {}
        self._offset = 0.0
        self._offset = self._call(0)
        if memo:
            self._memo[0] = 0.0

    @classmethod
    def from_table(cls, table, name: str = "table") -> "SetFunction":
        """Wrap a dense array indexed by bitmask (length ``2**n``)."""
        table = np.asarray(table, dtype=float)
        n = int(table.size).bit_length() - 1
        if table.ndim != 1 or table.size != 1 << n:
            raise DomainError("table length must be a power of two")
        return cls(n, lambda mask: table[mask], name=name, takes_mask=True)

    @property
    def n(self) -> int:
        return self.ground.n

    def _call(self, mask: int) -> float:
        self.eval_count += 1
        arg = mask if self._takes_mask else frozenset(mask_to_tuple(mask))
        return float(self._oracle(arg)) - self._offset

    def value_mask(self, mask: int) -> float:
        if self.memo_enabled:
            val = self._memo.get(mask)
            if val is None:
                val = self._memo[mask] = self._call(mask)
            return val
        return self._call(mask)

    def __call__(self, subset: Iterable[int] = ()) -> float:
        return self.value_mask(self.ground.to_mask(subset))

    def gain_mask(self, omega: int, s: int) -> float:
        return self.value_mask(s | omega) - self.value_mask(s)

    def table(self) -> np.ndarray:
        """Values on all ``2**n`` subsets, indexed by bitmask."""
        return np.fromiter((self.value_mask(m) for m in range(1 << self.n)),
                           dtype=float, count=1 << self.n)

    def __repr__(self):
        return f"SetFunction({self.name!r}, n={self.n})"


def marginal_gain(f: SetFunction, omega: Iterable[int], s: Iterable[int]) -> float:
    """``rho_Omega(S) = F(S | Omega) - F(S)``."""
    return f.gain_mask(f.ground.to_mask(omega), f.ground.to_mask(s))


def _require_size(f, cap, what):
    if f.n > cap:
        raise InstanceTooLarge(f"{what} is exhaustive and capped at |V| <= {cap}; got {f.n}")


def check_monotone(f: SetFunction, tol: float = TOL) -> bool:
    """True iff ``rho_v(S) >= -tol`` for every ``v`` and ``S`` (exhaustive)."""
    _require_size(f, MAX_MONOTONE_N, "check_monotone")
    if f.n == 0:
        return True
    worst, _ = kernels.monotone_scan(f.table(), f.n)
    return worst >= -tol


def monotone_violation(f: SetFunction, tol: float = TOL):
    """``(S, v)`` with the most negative gain below ``-tol``, or ``None``."""
    _require_size(f, MAX_MONOTONE_N, "monotone_violation")
    if f.n == 0:
        return None
    worst, (s, v) = kernels.monotone_scan(f.table(), f.n)
    if worst >= -tol:
        return None
    return mask_to_tuple(s), v


def is_submodular(f: SetFunction, tol: float = TOL) -> bool:
    """Exhaustive diminishing-returns check.

    Uses the local form ``rho_v(S) >= rho_v(S + u)`` for all ``S`` and
    distinct ``u, v`` outside ``S``, which is equivalent to the ``A <= B`` form.
    """
    _require_size(f, MAX_MONOTONE_N, "is_submodular")
    t = f.table()
    masks = np.arange(1 << f.n)
    for v in range(f.n):
        bv = 1 << v
        for u in range(f.n):
            bu = 1 << u
            if u == v:
                continue
            s = masks[(masks & (bv | bu)) == 0]
            before = t[s | bv] - t[s]
            after = t[s | bu | bv] - t[s | bu]
            if np.any(before < after - tol):
                return False
    return True


@dataclass
class GammaResult:
    gamma: float
    witness: Optional[tuple]  # (Omega \ S, S)
    raw_ratio: float
    diagnostics: list = field(default_factory=list)


@dataclass
class AlphaResult:
    alpha: float
    witness: Optional[tuple]  # (v, A, B)
    raw_ratio: float


@dataclass
class RatioCertificate:
    gamma: float
    alpha: float
    witness_gamma: Optional[tuple]
    witness_alpha: Optional[tuple]
    monotone: bool


def _clamp01(x, tol=TOL):
    # rounding can leave a submodular gamma a few ulps under 1 (or a modular
    # alpha just above 0); snap values within tol of either end
    if x >= 1.0 - tol:
        return 1.0
    if x <= tol:
        return 0.0
    return x


def submodularity_ratio_bruteforce(f: SetFunction, tol: float = TOL) -> GammaResult:
    """Submodularity ratio by enumerating every disjoint pair ``(Omega, S)``.

    Pairs with ``rho_Omega(S) <= tol`` are skipped. If none remain the
    function is flat and ``gamma = 1``.
    """
    _require_size(f, MAX_RATIO_N, "submodularity_ratio_bruteforce")
    if f.n == 0:
        return GammaResult(1.0, None, float("inf"))
    ratio, o, s, found = kernels.gamma_scan(f.table(), f.n, tol)
    if not found:
        return GammaResult(1.0, None, float("inf"))
    diagnostics = []
    if ratio < 0:
        msg = (f"negative singleton-gain sum at Omega={mask_to_tuple(o)}, "
               f"S={mask_to_tuple(s)}: input is not monotone; gamma clamped to 0")
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        diagnostics.append(msg)
    return GammaResult(_clamp01(ratio), (mask_to_tuple(o), mask_to_tuple(s)), ratio, diagnostics)


def generalized_curvature_bruteforce(f: SetFunction, tol: float = TOL) -> AlphaResult:
    """Generalized curvature from all triples ``(v, A <= B <= V - v)``.

    ``1 - alpha`` is the least ``rho_v(A) / rho_v(B)`` over triples with
    ``rho_v(B) > tol``.
    """
    _require_size(f, MAX_RATIO_N, "generalized_curvature_bruteforce")
    if f.n == 0:
        return AlphaResult(0.0, None, float("inf"))
    ratio, v, a, b, found = kernels.alpha_scan(f.table(), f.n, tol)
    if not found:
        return AlphaResult(0.0, None, float("inf"))
    return AlphaResult(_clamp01(1.0 - ratio), (v, mask_to_tuple(a), mask_to_tuple(b)), ratio)


def certify(f: SetFunction, tol: float = TOL) -> RatioCertificate:
    g = submodularity_ratio_bruteforce(f, tol)
    a = generalized_curvature_bruteforce(f, tol)
    return RatioCertificate(g.gamma, a.alpha, g.witness, a.witness, check_monotone(f, tol))


def gamma_witness_ratio(f: SetFunction, witness) -> float:
    omega, s = witness
    om, sm = f.ground.to_mask(omega), f.ground.to_mask(s)
    numer = sum(f.gain_mask(1 << v, sm) for v in omega if not sm >> v & 1)
    return numer / f.gain_mask(om, sm)


def alpha_witness_ratio(f: SetFunction, witness) -> float:
    v, a, b = witness
    am, bm = f.ground.to_mask(a), f.ground.to_mask(b)
    return f.gain_mask(1 << v, am) / f.gain_mask(1 << v, bm)


def ds_compose(f1: SetFunction, f2: SetFunction, tol: float = TOL):
    """``G = f1 - f2`` and the least ``alpha*`` with ``rho2 <= alpha* rho1``.

    ``alpha*`` is the largest ratio ``rho^{f2}_v(S) / rho^{f1}_v(S)`` over
    ``v`` outside ``S`` with ``rho^{f1}_v(S) > tol``. A ratio above 1, or a
    positive ``f2`` gain where ``f1`` is flat, means ``G`` decreases there and
    :class:`NonMonotoneError` is raised with the offending ``(S, v)``.
    """
    if f1.n != f2.n:
        raise DomainError("f1 and f2 must share a ground set")
    _require_size(f1, MAX_RATIO_N, "ds_compose")
    n = f1.n
    t1, t2 = f1.table(), f2.table()
    masks = np.arange(1 << n)
    alpha_star, worst = 0.0, None
    for v in range(n):
        bit = 1 << v
        s = masks[(masks & bit) == 0]
        r1 = t1[s | bit] - t1[s]
        r2 = t2[s | bit] - t2[s]
        flat = r1 <= tol
        bad = flat & (r2 > tol)
        if bad.any():
            i = int(np.argmax(bad))
            raise NonMonotoneError(
                f"f1 is flat but f2 grows at S={mask_to_tuple(int(s[i]))}, v={v}",
                (mask_to_tuple(int(s[i])), v))
        if (~flat).any():
            ratios = np.where(flat, -np.inf, r2 / np.where(flat, 1.0, r1))
            i = int(np.argmax(ratios))
            if ratios[i] > alpha_star:
                alpha_star, worst = float(ratios[i]), (mask_to_tuple(int(s[i])), v)
    if alpha_star > 1.0 + tol:
        raise NonMonotoneError(f"G = f1 - f2 decreases (alpha* = {alpha_star:.6g} > 1) "
                               f"at S={worst[0]}, v={worst[1]}", worst)

    def diff(s):
        m = f1.ground.to_mask(s)
        return f1.value_mask(m) - f2.value_mask(m)

    g = SetFunction(n, diff, name=f"{f1.name}-{f2.name}")
    return g, alpha_star


def eps_approx_counterexample(eps: float, delta: float):
    """The pair ``(G, F_delta)`` on three elements, both functions of ``|S|``.

    ``G`` is submodular; ``F_delta`` stays within a ``1 +/- eps`` factor of
    ``G`` yet its generalized curvature tends to 1 as ``delta -> 0``.
    """
    if not 0 <= eps <= 0.5:
        raise DomainError("eps must lie in [0, 1/2]")
    if not 0 <= delta <= eps:
        raise DomainError("delta must lie in [0, eps]")
    g_vals = (0.0, 1 - eps, 1.0, 1 + eps)
    f_vals = (0.0, 1 - eps, 1 - eps + delta, 1 + eps)
    g = SetFunction(3, lambda s: g_vals[len(s)], name="G")
    f = SetFunction(3, lambda s: f_vals[len(s)], name="F_delta")
    return g, f
