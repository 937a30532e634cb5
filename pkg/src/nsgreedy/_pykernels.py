"""Pure-numpy kernels, the fallback for the compiled ``_ckernels`` module.

Every function here mirrors its Cython twin: the same iteration order, the
same tie-breaking (first minimum in lexicographic mask order), the same
floating-point summation order for the set-function scans. The two scans
therefore return bit-identical results. The time-domain kernels agree to
rounding of ``exp``/``log``.
"""

import numpy as np

from .incgamma import q_and_g

BACKEND = "python"

# pieces with total mass c*L below this use a midpoint rule (avoids 0/0)
SMALL_MASS = 1e-7


def _subset_sums(values, n):
    # out[m] = sum of values[i] over bits i of m, added in ascending bit order
    out = np.zeros(1 << n)
    for i in range(n):
        out[1 << i:1 << (i + 1)] = out[:1 << i] + values[i]
    return out


def gamma_scan(table, n, tol):
    """Minimum of sum_{v in O} rho_v(S) / rho_O(S) over disjoint nonempty O.

    Returns ``(ratio, omega, s, found)``; pairs with ``rho_O(S) <= tol`` are
    skipped.  ``ratio`` is raw (unclamped).
    """
    table = np.ascontiguousarray(table, dtype=float)
    size = 1 << n
    masks = np.arange(size)
    bits = 1 << np.arange(n)
    best, best_o, best_s = np.inf, -1, -1
    for s in range(size):
        rho = table[s | bits] - table[s]
        numer = _subset_sums(rho, n)
        denom = table[s | masks] - table[s]
        ok = ((masks & s) == 0) & (masks != 0) & (denom > tol)
        if not ok.any():
            continue
        ratio = np.full(size, np.inf)
        ratio[ok] = numer[ok] / denom[ok]
        o = int(np.argmin(ratio))
        if ratio[o] < best:
            best, best_o, best_s = float(ratio[o]), o, s
    return best, best_o, best_s, best_o >= 0


def alpha_scan(table, n, tol):
    """Minimum of rho_v(A) / rho_v(B) over v and A <= B <= V - {v}.

    Triples with ``rho_v(B) <= tol`` are skipped. Returns
    ``(ratio, v, a, b, found)``.
    """
    table = np.ascontiguousarray(table, dtype=float)
    size = 1 << n
    masks = np.arange(size)
    best, best_v, best_a, best_b = np.inf, -1, -1, -1
    for v in range(n):
        bit = 1 << v
        free = (masks & bit) == 0
        rho = np.where(free, table[masks | bit] - table, np.inf)
        # submask minimum: low[B] = min over A <= B of rho[A]
        low = rho.copy()
        for i in range(n):
            view = low.reshape(-1, 2, 1 << i)
            np.minimum(view[:, 1, :], view[:, 0, :], out=view[:, 1, :])
        ok = free & (rho > tol)
        if not ok.any():
            continue
        ratio = np.full(size, np.inf)
        ratio[ok] = low[ok] / rho[ok]
        b = int(np.argmin(ratio))
        if ratio[b] < best:
            # smallest submask of b attaining the minimum (ascending walk)
            a = 0
            while rho[a] != low[b]:
                a = (a - b) & b
            best, best_v, best_a, best_b = float(ratio[b]), v, a, b
    return best, best_v, best_a, best_b, best_v >= 0


def monotone_scan(table, n):
    """Smallest singleton marginal gain and the ``(s, v)`` attaining it."""
    table = np.asarray(table, dtype=float)
    masks = np.arange(1 << n)
    worst, arg = np.inf, (-1, -1)
    for v in range(n):
        bit = 1 << v
        free = masks[(masks & bit) == 0]
        gains = table[free | bit] - table[free]
        i = int(np.argmin(gains))
        if gains[i] < worst:
            worst, arg = float(gains[i]), (int(free[i]), v)
    return worst, arg


def expected_top_k_batch(t, edges, mu, gam, K, form=0):
    """E[r(t)] for every entry of ``t``.

    ``edges`` (length m+1, edges[0] == 0) bounds m pieces with constant
    broadcaster rate ``mu`` and feed rate ``gam``.  ``form == 0`` uses the
    feed-rate expression ``K + G(J(0,t)) - int Q(K, J) gam``; ``form == 1``
    the broadcaster-rate expression ``int Q(K, J) mu``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    edges = np.asarray(edges, dtype=float)
    mu = np.asarray(mu, dtype=float)
    gam = np.asarray(gam, dtype=float)
    m = mu.size
    rate = mu + gam
    cum = np.concatenate(([0.0], np.cumsum(rate * np.diff(edges))))
    p = np.clip(np.searchsorted(edges, t, side="right") - 1, 0, m - 1)
    ct = cum[p] + rate[p] * (t - edges[p])
    q_idx = np.arange(m)
    active = q_idx[None, :] <= p[:, None]
    last = q_idx[None, :] == p[:, None]
    ja = np.where(active, ct[:, None] - cum[None, :m], 0.0)
    jb = np.where(active & ~last, ct[:, None] - cum[None, 1:], 0.0)
    length = np.where(last, (t - edges[p])[:, None], np.diff(edges)[None, :])
    mass = rate[None, :] * length
    weight = gam if form == 0 else mu
    # terms with both ends far in the Poisson tail vanish to double precision
    tail = K + 40.0 * np.sqrt(K) + 50.0
    live = active & (mass > 0) & (jb < tail)
    big = live & (mass >= SMALL_MASS)
    small = live & (mass < SMALL_MASS)
    contrib = np.zeros_like(ja)
    if big.any():
        _, g_a = q_and_g(K, ja[big])
        _, g_b = q_and_g(K, jb[big])
        w = np.broadcast_to(weight[None, :] / np.where(rate > 0, rate, 1.0)[None, :], ja.shape)
        contrib[big] = w[big] * (g_a - g_b)
    if small.any():
        q_mid, _ = q_and_g(K, 0.5 * (ja[small] + jb[small]))
        wl = np.broadcast_to(weight[None, :], ja.shape)[small] * length[small]
        contrib[small] = wl * q_mid
    total = contrib.sum(axis=1)
    if form == 0:
        _, g_t = q_and_g(K, ct)
        return K + g_t - total
    return total


def replay_top_k(times, from_broadcaster, K, t0, tf):
    """Time a broadcaster post spends in the top ``K`` of a feed during [t0, tf].

    ``times`` must be sorted; the feed is inverse chronological, so between
    consecutive events the top ``K`` are the ``K`` most recent posts.
    """
    times = np.asarray(times, dtype=float)
    flags = np.asarray(from_broadcaster, dtype=np.int64)
    if times.size == 0:
        return 0.0
    csum = np.concatenate(([0], np.cumsum(flags)))
    idx = np.arange(times.size)
    window = csum[idx + 1] - csum[np.maximum(idx + 1 - K, 0)]
    nxt = np.append(times[1:], tf)
    length = np.clip(nxt, t0, tf) - np.clip(times, t0, tf)
    return float(np.dot(window, np.maximum(length, 0.0)))
