"""Closed-form top-K visibility for piecewise-constant rates.

Notation: ``mu`` is the summed rate of the broadcasters a feed follows
through the chosen edges, ``gamma`` the feed's background rate, and
``J(tau, t)`` the integral of ``mu + gamma`` over ``[tau, t]``.  On each
piece ``J`` is linear in ``tau``, so every inner integral reduces to
differences of ``Q(K, .)`` or its antiderivative ``G`` at the piece ends.
"""

from __future__ import annotations

import numpy as np

from .. import kernels
from ..errors import DomainError
from ..incgamma import poisson_log_terms
from .intensity import IntensityProfile, PiecewiseRate, _as_rate, merge_rates, sum_rates

SMALL_MASS = 1e-7
MAX_DEPTH = 40


def _mu_list(mu):
    if mu is None:
        return []
    if isinstance(mu, (IntensityProfile, PiecewiseRate)):
        return [mu]
    return list(mu)


def feed_pieces(mu, gamma, t_end: float):
    """``(edges, mu_values, gamma_values)`` on a common partition of ``[0, t_end]``."""
    mu_rate = sum_rates(_mu_list(mu), t_end)
    edges, (m, g) = merge_rates([mu_rate, _as_rate(gamma, t_end)], t_end)
    if edges.size < 2:  # t_end == 0
        edges = np.array([0.0, 0.0])
        m, g = m[:1] if m.size else np.zeros(1), g[:1] if g.size else np.zeros(1)
    return edges, m, g


def _check_k(K, name="K"):
    if int(K) != K or K < 1:
        raise DomainError(f"{name} must be a positive integer, got {K!r}")
    return int(K)


def expected_top_k(mu, gamma, K: int, t, form: str = "gamma"):
    """Expected number of broadcaster posts among the top ``K`` at time ``t``.

    ``form="gamma"`` evaluates ``K + G(J(0,t)) - int Q(K, J(tau,t)) gamma(tau)``;
    ``form="mu"`` evaluates ``int Q(K, J(tau,t)) mu(tau)``.  The two agree to
    rounding.  ``t`` may be an array.
    """
    K = _check_k(K)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("t must be nonnegative")
    if form not in ("gamma", "mu"):
        raise DomainError(f"form must be 'gamma' or 'mu', got {form!r}")
    t_end = float(t_arr.max()) if t_arr.size else 0.0
    edges, m, g = feed_pieces(mu, gamma, t_end)
    if not np.any(m > 0):
        return np.zeros(t_arr.shape) if t_arr.ndim else 0.0
    out = kernels.expected_top_k_batch(t_arr.ravel(), edges, m, g, K, 0 if form == "gamma" else 1)
    out = np.asarray(out).reshape(t_arr.shape)
    return out if out.ndim else float(out)


def _piece_ends(mu, gamma, t):
    edges, m, g = feed_pieces(mu, gamma, t)
    c = m + g
    cum = np.concatenate(([0.0], np.cumsum(c * np.diff(edges))))
    return np.diff(edges), m, c, cum[-1] - cum[:-1], cum[-1] - cum[1:]


def position_probabilities(mu, gamma, kmax: int, t: float) -> np.ndarray:
    """``[g_1(t), ..., g_kmax(t)]``: chance a broadcaster post sits at position ``k``."""
    kmax = _check_k(kmax, "kmax")
    if t < 0:
        raise DomainError("t must be nonnegative")
    out = np.zeros(kmax)
    if t == 0:
        return out
    length, m, c, ja, jb = _piece_ends(mu, gamma, float(t))
    mass = c * length
    big = (mass >= SMALL_MASS) & (m > 0)
    small = (mass < SMALL_MASS) & (m > 0) & (length > 0)
    if big.any():
        # Q(k, x) for k = 1..kmax is the running sum of Poisson(x) pmf terms
        qa = np.cumsum(np.exp(poisson_log_terms(kmax, ja[big])), axis=-1)
        qb = np.cumsum(np.exp(poisson_log_terms(kmax, jb[big])), axis=-1)
        out += ((m[big] / c[big])[:, None] * (qb - qa)).sum(axis=0)
    if small.any():
        mid = 0.5 * (ja[small] + jb[small])
        pmf = np.exp(poisson_log_terms(kmax, mid))
        out += ((m[small] * length[small])[:, None] * pmf).sum(axis=0)
    return out


def position_probability(mu, gamma, k: int, t: float) -> float:
    """``g_k(t)`` for a single position ``k >= 1``."""
    return float(position_probabilities(mu, gamma, k, t)[-1])


def adaptive_simpson(fn, breaks, tol: float, min_depth: int = 2):
    """Integral of a vectorised ``fn`` over ``[breaks[0], breaks[-1]]``.

    Each interval between consecutive ``breaks`` is refined independently; all
    pending intervals of a level are evaluated in one call to ``fn``.  ``tol``
    is an absolute target shared in proportion to interval length.
    """
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1], breaks[1:]
    keep = b > a
    a, b = a[keep], b[keep]
    if a.size == 0:
        return 0.0
    span = b.sum() - a.sum()
    m = 0.5 * (a + b)
    vals = fn(np.concatenate((a, m, b)))
    fa, fm, fb = np.split(vals, 3)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    tols = tol * (b - a) / span
    total = 0.0
    for depth in range(MAX_DEPTH):
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = np.split(fn(np.concatenate((lm, rm))), 2)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        err = left + right - whole
        done = np.abs(err) <= 15.0 * tols
        if depth + 1 < min_depth:
            done[:] = False
        elif depth == MAX_DEPTH - 1:
            done[:] = True
        total += float(np.sum((left + right + err / 15.0)[done]))
        if done.all():
            break
        r = ~done
        a = np.concatenate((a[r], m[r]))
        b = np.concatenate((m[r], b[r]))
        fa, fb = np.concatenate((fa[r], fm[r])), np.concatenate((fm[r], fb[r]))
        fm = np.concatenate((flm[r], frm[r]))
        whole = np.concatenate((left[r], right[r]))
        tols = np.concatenate((tols[r], tols[r])) / 2.0
        m = 0.5 * (a + b)
    return total


def integrated_top_k(mu, gamma, K: int, t0: float, tf: float, tol: float | None = None,
                     share=None) -> float:
    """``int_{t0}^{tf} E[r(t)] dt`` by adaptive Simpson split at rate breakpoints.

    ``share`` optionally names one of the broadcaster rates inside ``mu``;
    the result is then the time its own posts spend in the top ``K``.  The
    default tolerance is ``1e-9 * K * (tf - t0)``.
    """
    K = _check_k(K)
    if not 0 <= t0 <= tf:
        raise DomainError(f"need 0 <= t0 <= tf, got t0={t0}, tf={tf}")
    if tf == t0:
        return 0.0
    if tol is None:
        tol = 1e-9 * K * (tf - t0)
    edges, m, g = feed_pieces(mu, gamma, tf)
    if not np.any(m > 0):
        return 0.0
    if share is None:
        w_mu, w_gam, form = m, g, 0
    else:
        s = _as_rate(share, tf).refine(edges)
        w_mu, w_gam, form = s, g + m - s, 1

    def fn(t):
        return kernels.expected_top_k_batch(t, edges, w_mu, w_gam, K, form)

    breaks = np.unique(np.concatenate(([t0, tf], edges[(edges > t0) & (edges < tf)])))
    return adaptive_simpson(fn, breaks, tol)
