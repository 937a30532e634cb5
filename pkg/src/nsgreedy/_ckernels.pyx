# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; see ``_pykernels`` for the reference semantics.

The set-function scans walk masks in ascending order and keep the first
strict minimum, exactly like the numpy twin, so both return the same
witnesses.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, lgamma, sqrt, INFINITY

cnp.import_array()

BACKEND = "cython"

cdef double SMALL_MASS = 1e-7


def gamma_scan(double[::1] table, int n, double tol):
    cdef long size = 1L << n
    cdef long full = size - 1
    cdef long s, comp, o, rest
    cdef int i
    cdef double base, numer, denom, ratio
    cdef double best = INFINITY
    cdef long best_o = -1, best_s = -1
    cdef double[::1] rho = np.empty(max(n, 1))
    for s in range(size):
        base = table[s]
        for i in range(n):
            rho[i] = table[s | (1L << i)] - base
        comp = full & ~s
        o = (0 - comp) & comp
        while o != 0:
            denom = table[s | o] - base
            if denom > tol:
                numer = 0.0
                rest = o
                i = 0
                while rest != 0:
                    if rest & 1:
                        numer += rho[i]
                    rest >>= 1
                    i += 1
                ratio = numer / denom
                if ratio < best:
                    best = ratio
                    best_o = o
                    best_s = s
            o = (o - comp) & comp
    return best, best_o, best_s, best_o >= 0


def alpha_scan(double[::1] table, int n, double tol):
    cdef long size = 1L << n
    cdef long bit, b, a, s, hb
    cdef int v, i
    cdef double rb, ratio
    cdef double best = INFINITY
    cdef int best_v = -1
    cdef long best_a = -1, best_b = -1
    cdef double[::1] rho = np.empty(size)
    cdef double[::1] low = np.empty(size)
    for v in range(n):
        bit = 1L << v
        for s in range(size):
            rho[s] = table[s | bit] - table[s] if not s & bit else INFINITY
            low[s] = rho[s]
        # submask minimum: low[B] = min over A <= B of rho[A]
        for i in range(n):
            hb = 1L << i
            for s in range(size):
                if s & hb and low[s ^ hb] < low[s]:
                    low[s] = low[s ^ hb]
        for b in range(size):
            if b & bit:
                continue
            rb = rho[b]
            if not rb > tol:
                continue
            ratio = low[b] / rb
            if ratio < best:
                a = 0
                while rho[a] != low[b]:
                    a = (a - b) & b
                best = ratio
                best_v = v
                best_a = a
                best_b = b
    return best, best_v, best_a, best_b, best_v >= 0


def monotone_scan(double[::1] table, int n):
    cdef long size = 1L << n
    cdef long s, bit
    cdef int v
    cdef double gain
    cdef double worst = INFINITY
    cdef long arg_s = -1
    cdef int arg_v = -1
    for v in range(n):
        bit = 1L << v
        for s in range(size):
            if s & bit:
                continue
            gain = table[s | bit] - table[s]
            if gain < worst:
                worst = gain
                arg_s = s
                arg_v = v
    return worst, (arg_s, arg_v)


cdef void _q_g(double x, int K, double* q, double* g) nogil:
    # Q(K, x) and G(K, x); forward recurrence unless exp(-x) would underflow
    cdef double p, lx, sq = 0.0, sg = 0.0
    cdef int i
    if x < 700.0:
        p = exp(-x)
        for i in range(K):
            if i > 0:
                p *= x / i
            sq += p
            sg += (K - i) * p
    else:
        lx = log(x)
        for i in range(K):
            p = exp(i * lx - x - lgamma(i + 1.0))
            sq += p
            sg += (K - i) * p
    q[0] = sq
    g[0] = -sg


def q_and_g(int K, double x):
    cdef double q, g
    _q_g(x, K, &q, &g)
    return q, g


def expected_top_k_batch(t, edges, mu, gam, int K, int form=0):
    cdef double[::1] tv = np.ascontiguousarray(np.atleast_1d(t), dtype=np.float64)
    cdef double[::1] ev = np.ascontiguousarray(edges, dtype=np.float64)
    cdef double[::1] mv = np.ascontiguousarray(mu, dtype=np.float64)
    cdef double[::1] gv = np.ascontiguousarray(gam, dtype=np.float64)
    cdef Py_ssize_t m = mv.shape[0], nt = tv.shape[0]
    cdef Py_ssize_t k, q, p, lo, hi, mid
    cdef double[::1] cum = np.empty(m + 1)
    out = np.empty(nt)
    cdef double[::1] ov = out
    cdef double tt, ct, ja, jb, length, rate, mass, total, w, qa, ga, qb, gb
    cdef double tail = K + 40.0 * sqrt(K) + 50.0
    cum[0] = 0.0
    for q in range(m):
        cum[q + 1] = cum[q] + (mv[q] + gv[q]) * (ev[q + 1] - ev[q])
    for k in range(nt):
        tt = tv[k]
        # last piece with edges[p] <= t, clipped to [0, m-1]
        lo = 0
        hi = m
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if ev[mid] <= tt:
                lo = mid
            else:
                hi = mid
        p = lo
        ct = cum[p] + (mv[p] + gv[p]) * (tt - ev[p])
        total = 0.0
        for q in range(p + 1):
            rate = mv[q] + gv[q]
            ja = ct - cum[q]
            if q == p:
                jb = 0.0
                length = tt - ev[p]
            else:
                jb = ct - cum[q + 1]
                length = ev[q + 1] - ev[q]
            mass = rate * length
            if not mass > 0.0 or jb >= tail:
                continue
            w = gv[q] if form == 0 else mv[q]
            if mass >= SMALL_MASS:
                _q_g(ja, K, &qa, &ga)
                _q_g(jb, K, &qb, &gb)
                total += (w / rate) * (ga - gb)
            else:
                _q_g(0.5 * (ja + jb), K, &qa, &ga)
                total += w * length * qa
        if form == 0:
            _q_g(ct, K, &qa, &ga)
            ov[k] = K + ga - total
        else:
            ov[k] = total
    return out


def replay_top_k(times, from_broadcaster, int K, double t0, double tf):
    cdef double[::1] tv = np.ascontiguousarray(times, dtype=np.float64)
    cdef long long[::1] fv = np.ascontiguousarray(from_broadcaster, dtype=np.int64)
    cdef Py_ssize_t n = tv.shape[0], e
    cdef long long window = 0
    cdef double a, b, total = 0.0
    for e in range(n):
        window += fv[e]
        if e >= K:
            window -= fv[e - K]
        a = tv[e]
        b = tv[e + 1] if e + 1 < n else tf
        if a < t0:
            a = t0
        elif a > tf:
            a = tf
        if b < t0:
            b = t0
        elif b > tf:
            b = tf
        if b > a:
            total += window * (b - a)
    return total
