"""Regularized upper incomplete gamma for integer order, and its antiderivative.

For integer ``K >= 1``::

    Q(K, x) = exp(-x) * sum_{i<K} x**i / i!        (P[Poisson(x) < K])
    G(K, x) = -sum_{i<K} (K - i) * x**i * exp(-x) / i!

``G`` satisfies ``G(K, 0) = -K``, ``dG/dx = Q(K, x)`` and ``G -> 0`` as
``x -> inf``.  Both are evaluated from Poisson log-probabilities, so large
arguments (``x`` in the thousands) neither overflow nor underflow mid-sum.
"""

import math

import numpy as np

from .errors import DomainError

# rows of the (len(x), K) term matrix evaluated per chunk
_CHUNK = 4096

_lgamma_cache = {}


def _lfact(K):
    table = _lgamma_cache.get(K)
    if table is None:
        table = np.array([math.lgamma(i + 1.0) for i in range(K)])
        _lgamma_cache[K] = table
    return table


def _check(K, x):
    if int(K) != K or K < 1:
        raise DomainError(f"order K must be a positive integer, got {K!r}")
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise DomainError("argument x must be nonnegative")
    return int(K), x


def poisson_log_terms(K, x):
    """``log(x**i exp(-x) / i!)`` for ``i < K``; shape ``x.shape + (K,)``."""
    x = np.asarray(x, dtype=float)
    i = np.arange(K, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logx = np.log(x)[..., None]
        ilogx = np.where(i == 0, 0.0, i * logx)
    return ilogx - x[..., None] - _lfact(K)


def _q_and_g(K, x):
    flat = x.reshape(-1)
    q = np.empty_like(flat)
    g = np.empty_like(flat)
    weights = K - np.arange(K, dtype=float)
    for lo in range(0, flat.size, _CHUNK):
        terms = np.exp(poisson_log_terms(K, flat[lo:lo + _CHUNK]))
        q[lo:lo + _CHUNK] = terms.sum(axis=-1)
        g[lo:lo + _CHUNK] = -(terms @ weights)
    return q.reshape(x.shape), g.reshape(x.shape)


def regularized_gamma_q(K, x):
    """Q(K, x) for integer K >= 1 and x >= 0 (scalar or array)."""
    K, x = _check(K, x)
    q, _ = _q_and_g(K, x)
    return q if q.ndim else float(q)


def gamma_antiderivative(K, x):
    """G(K, x), the antiderivative of Q(K, .) normalised so that G(K, inf) = 0."""
    K, x = _check(K, x)
    _, g = _q_and_g(K, x)
    return g if g.ndim else float(g)


def q_and_g(K, x):
    """Both Q(K, x) and G(K, x) from one pass over the Poisson terms."""
    K, x = _check(K, x)
    return _q_and_g(K, x)
