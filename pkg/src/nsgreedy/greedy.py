"""The standard greedy algorithm under a matroid, and an exact solver."""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field

from .errors import DomainError, InstanceTooLarge
from .matroids import Matroid
from .sets import TOL, SetFunction, mask_to_tuple

BRUTE_MAX_N = 20
BRUTE_MAX_RANK = 8


@dataclass
class GreedyStep:
    element: int
    selected: bool
    gain: float
    value: float  # F(selected so far) after this step


@dataclass
class GreedyTrace:
    selected: list = field(default_factory=list)
    considered: list = field(default_factory=list)
    gains: list = field(default_factory=list)
    final_value: float = 0.0
    oracle_calls: int = 0
    steps: list = field(default_factory=list)
    prefix_values: list = field(default_factory=lambda: [0.0])  # F(S_t), t = 0..|S|

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "element", "considered_only", "gain", "cumulative_value"])
        for i, st in enumerate(self.steps, start=1):
            w.writerow([i, st.element, 0 if st.selected else 1, repr(st.gain), repr(st.value)])
        return buf.getvalue()


def greedy_maximize(f: SetFunction, m: Matroid, tol: float = TOL) -> GreedyTrace:
    """Run the greedy algorithm literally.

    Each round takes the not-yet-considered element with the largest gain
    on the current selection (smallest id on ties), marks it considered, and
    keeps it only if the selection stays independent.  The loop ends once
    every element has been considered.  A negative best gain triggers a
    ``RuntimeWarning`` but the run continues.
    """
    if f.n != m.n:
        raise DomainError("set function and matroid must share a ground set")
    calls0 = f.eval_count
    trace = GreedyTrace()
    remaining = list(range(f.n))
    sel = 0
    value = f.value_mask(0)
    warned = False
    while remaining:
        best_v, best_gain = -1, -float("inf")
        for v in remaining:
            gain = f.value_mask(sel | 1 << v) - value
            if gain > best_gain:
                best_v, best_gain = v, gain
        remaining.remove(best_v)
        trace.considered.append(best_v)
        if best_gain < -tol and not warned:
            warnings.warn(f"best marginal gain {best_gain:.3g} < 0: objective is not monotone",
                          RuntimeWarning, stacklevel=2)
            warned = True
        chosen = m._independent(sel | 1 << best_v)
        if chosen:
            sel |= 1 << best_v
            value = f.value_mask(sel)
            trace.selected.append(best_v)
            trace.gains.append(best_gain)
            trace.prefix_values.append(value)
        trace.steps.append(GreedyStep(best_v, chosen, best_gain, value))
    trace.final_value = value
    trace.oracle_calls = f.eval_count - calls0
    return trace


def brute_force_opt(f: SetFunction, m: Matroid):
    """Exact maximum of ``f`` over independent sets, ``(subset, value)``.

    Depth-first extension in increasing element order visits independent sets
    in lexicographic order and prunes dependent branches (heredity), so the
    first maximiser found is the lexicographically smallest one.
    """
    if f.n != m.n:
        raise DomainError("set function and matroid must share a ground set")
    if f.n > BRUTE_MAX_N:
        raise InstanceTooLarge(f"brute_force_opt capped at |V| <= {BRUTE_MAX_N}")
    r = m.rank()
    if r > BRUTE_MAX_RANK:
        raise InstanceTooLarge(f"brute_force_opt capped at rank <= {BRUTE_MAX_RANK}; got {r}")
    best = [f.value_mask(0), 0]

    def extend(mask, start):
        for v in range(start, f.n):
            nxt = mask | 1 << v
            if not m._independent(nxt):
                continue
            val = f.value_mask(nxt)
            if val > best[0]:
                best[0], best[1] = val, nxt
            extend(nxt, v + 1)

    extend(0, 0)
    return mask_to_tuple(best[1]), best[0]


def lemma1_violations(trace: GreedyTrace, opt: float, alpha_star: float, theta: float,
                      tol: float = 1e-9) -> list:
    """Steps ``t`` where ``K_t >= alpha_star * OPT`` but ``K_{t+1} > (1-theta) K_t + tol``.

    ``K_t = OPT - F(S_t)`` is the residual after ``t`` selections.
    """
    if opt <= 0:
        return []
    values = trace.prefix_values
    bad = []
    for t in range(len(values) - 1):
        k_t, k_next = opt - values[t], opt - values[t + 1]
        if k_t / opt >= alpha_star and k_next > (1.0 - theta) * k_t + tol:
            bad.append(t)
    return bad
