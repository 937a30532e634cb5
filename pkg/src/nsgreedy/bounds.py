"""Closed-form approximation factors for the greedy algorithm."""

import math

from .errors import DomainError


def bound_weak(gamma: float, r: int) -> float:
    """Greedy factor from the submodularity ratio: 0.4 g^2 / (sqrt(g r) + 1).

    Only valid for matroid rank ``r >= 3``; smaller ranks are cheap enough to
    solve exactly with :func:`nsgreedy.greedy.brute_force_opt`.
    """
    if not 0 < gamma <= 1:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    if r < 3:
        raise DomainError(f"rank {r} < 3: use brute_force_opt instead of the rank bound")
    return 0.4 * gamma ** 2 / (math.sqrt(gamma * r) + 1.0)


def bound_curvature(alpha: float) -> float:
    """Rank-free greedy factor 1 / (1 + 1/(1 - alpha)); 1/2 when alpha = 0."""
    if not 0 <= alpha < 1:
        raise DomainError(f"alpha must lie in [0, 1), got {alpha}")
    return 1.0 / (1.0 + 1.0 / (1.0 - alpha))


def lemma1_constants(gamma: float, r: int):
    """``(alpha_star, theta)`` of the geometric-decrease argument.

    While the residual ``K_t = OPT - F(S_t)`` stays above ``alpha_star * OPT``
    each greedy step shrinks it by at least a factor ``1 - theta``.
    """
    if not 0 < gamma <= 1:
        raise DomainError(f"gamma must lie in (0, 1], got {gamma}")
    if r < 3:
        raise DomainError(f"rank must be >= 3, got {r}")
    x = gamma ** 2 / (2.0 * (math.sqrt(gamma * r) + 1.0))
    alpha_star = 1.0 / (x + 1.0)
    # log(1/alpha*) - 1 + alpha* = log1p(x) - x/(1+x), which cancels badly for
    # small x; there use its series sum_{k>=2} (-1)^k (k-1)/k x^k
    if x < 1e-2:
        gap = sum((-1) ** k * (k - 1) / k * x ** k for k in range(2, 12))
    else:
        gap = math.log1p(x) - x / (1.0 + x)
    theta = math.sqrt(gap / (gamma * r * alpha_star))
    return alpha_star, theta


def asymptotic_regime(gamma: float, r: int, threshold: float = 2.0) -> str:
    """Which asymptotic form of the rank bound applies; informational only.

    ``gamma * r < threshold`` counts as bounded, ``>= threshold`` as large.
    """
    if not 0 < gamma <= 1 or r < 1:
        raise DomainError("need 0 < gamma <= 1 and r >= 1")
    if gamma * r < threshold:
        return "γr small: Ω(γ²)"
    return "γr large: Ω(γ√γ/√r)"


def ratio_bound_rsc(r_strong: float, R_smooth: float) -> float:
    """Submodularity-ratio lower bound r/R for restricted strong concavity."""
    if not 0 < r_strong <= R_smooth:
        raise DomainError("need 0 < r_strong <= R_smooth")
    return r_strong / R_smooth
