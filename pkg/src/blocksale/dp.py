"""Dynamic programming solvers: exact, coarse-grain, bounded funnel, two-step.

All variants share one Bellman row-fill kernel (compiled or numpy fallback,
see backend.py):

    O[t][n] = max_{k in [l_t, u_t]} O[t-1][n-k] + [p_t - c_t * g(n)] * k

with per-row budget windows [L_t, U_t]. The exact solver uses vacuous bounds
(l = 0, u = N); the coarse solver runs the same recursion over buckets of P
units; the bounded solver restricts the search to a funnel around a first
stage solution. Argmax parents are stored during the fill and backtracked, so
recovery never relies on floating-point equality.
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass

import numpy as np

from .backend import fill_row
from .model import Instance, Schedule, evaluate_objective, make_schedule

DEFAULT_MEMORY_BUDGET = 24 * 2**30  # bytes
GTABLE_MAX_N = 10**7  # precompute g(0..N) only below this (8e7 bytes)


class MemoryBudgetError(MemoryError):
    def __init__(self, required: int, available: int):
        self.required = required
        self.available = available
        super().__init__(
            f"DP table needs {required} bytes, budget is {available} bytes"
        )


class TimeLimitExceeded(RuntimeError):
    """The solve did not finish within its time limit; no value is returned."""


class InfeasibleFunnelError(ValueError):
    """The funnel bounds cannot reach a total of N units."""


def memory_budget_default() -> int:
    env = os.environ.get("BLOCKSALE_MEMORY_BUDGET")
    return int(env) if env else DEFAULT_MEMORY_BUDGET


@dataclass(frozen=True)
class FunnelBounds:
    """Per-step decision bounds [l_t, u_t] and cumulative windows [L_t, U_t]."""

    l: np.ndarray
    u: np.ndarray
    L: np.ndarray
    U: np.ndarray

    @classmethod
    def build(cls, l, u, total: int) -> "FunnelBounds":
        l = np.asarray(l, dtype=np.int64)
        u = np.asarray(u, dtype=np.int64)
        T = len(l)
        if np.any(l < 0) or np.any(u < l):
            raise InfeasibleFunnelError("need 0 <= l_t <= u_t for every step")
        if int(u.sum()) < total:
            raise InfeasibleFunnelError(
                f"upper bounds only reach {int(u.sum())} < {total} units"
            )
        cum_l = np.cumsum(l)
        cum_u = np.cumsum(u)
        suffix_l = cum_l[-1] - cum_l
        suffix_u = cum_u[-1] - cum_u
        # Cumulative windows min(cum, N), tightened so every retained state
        # can still reach exactly `total` given the remaining bounds.
        U = np.minimum(np.minimum(cum_u, total), total - suffix_l)
        L = np.maximum(np.minimum(cum_l, total), total - suffix_u)
        # Keep windows forward-reachable row to row.
        for t in range(1, T):
            L[t] = max(L[t], L[t - 1] + l[t])
            U[t] = min(U[t], U[t - 1] + u[t])
        if np.any(L > U):
            raise InfeasibleFunnelError("empty budget window; funnel is infeasible")
        return cls(l=l, u=u, L=L, U=U)

    @classmethod
    def around(cls, x0, radius: int, N: int) -> "FunnelBounds":
        """Funnel l_t = max(0, floor(x0_t) - radius), u_t = min(N, ceil(x0_t) + radius)."""
        if radius < 1:
            raise InfeasibleFunnelError(f"radius must be >= 1, got {radius}")
        x0 = np.asarray(x0, dtype=np.float64)
        l = np.maximum(0, np.floor(x0).astype(np.int64) - radius)
        u = np.minimum(N, np.ceil(x0).astype(np.int64) + radius)
        return cls.build(l, u, N)


@dataclass
class DpTable:
    """Windowed value/parent table; values kept only when requested."""

    los: np.ndarray              # per-row window offset L_t
    parents: list[np.ndarray]    # argmax k per cell, -1 for unreachable cells
    values: list[np.ndarray] | None
    final_value: float


def _run_dp(
    T: int,
    total: int,
    bounds: FunnelBounds,
    weight_fn,
    time_limit=None,
    memory_budget=None,
    keep_values: bool = False,
):
    """Fill the windowed table row by row and backtrack the argmax parents."""
    if memory_budget is None:
        memory_budget = memory_budget_default()
    widths = bounds.U - bounds.L + 1
    required = int(widths.sum()) * 4 + 2 * int(widths.max()) * 8
    if keep_values:
        required += int(widths.sum()) * 8
    if required > memory_budget:
        raise MemoryBudgetError(required, memory_budget)

    start = time.monotonic()
    prev = np.zeros(1)
    prev_lo = 0
    parents: list[np.ndarray] = []
    values: list[np.ndarray] | None = [] if keep_values else None
    for t in range(T):
        lo = int(bounds.L[t])
        hi = int(bounds.U[t])
        cur = np.empty(hi - lo + 1)
        par = np.empty(hi - lo + 1, dtype=np.int32)
        w = weight_fn(t, lo, hi)
        fill_row(prev, prev_lo, cur, lo, par, w, int(bounds.l[t]), int(bounds.u[t]))
        parents.append(par)
        if values is not None:
            values.append(cur.copy())
        prev, prev_lo = cur, lo
        if time_limit is not None and time.monotonic() - start > time_limit:
            raise TimeLimitExceeded(
                f"DP exceeded time limit of {time_limit} s at row {t + 1}/{T}"
            )

    final_value = float(prev[total - prev_lo])
    if not math.isfinite(final_value):
        raise InfeasibleFunnelError("target budget unreachable inside the funnel")

    x = np.zeros(T, dtype=np.int64)
    n = total
    for t in reversed(range(T)):
        k = int(parents[t][n - int(bounds.L[t])])
        if k < 0:
            raise InfeasibleFunnelError("backtracking hit an unreachable cell")
        x[t] = k
        n -= k
    assert n == 0
    table = DpTable(
        los=bounds.L.copy(), parents=parents, values=values, final_value=final_value
    )
    return final_value, x, table


def _unit_weights(inst: Instance):
    """Weight rows w[n] = p_t - c_t * g(n); g precomputed when N is small enough."""
    if inst.N <= GTABLE_MAX_N:
        gvals = inst.g(np.arange(inst.N + 1))

        def weight_fn(t, lo, hi):
            return inst.p[t] - inst.c[t] * gvals[lo : hi + 1]

    else:

        def weight_fn(t, lo, hi):
            return inst.p[t] - inst.c[t] * inst.g(np.arange(lo, hi + 1))

    return weight_fn


def solve_exact(
    inst: Instance,
    time_limit=None,
    memory_budget=None,
    keep_table: bool = False,
):
    """Global optimum via the full Bellman recursion, O(T N^2) time."""
    bounds = FunnelBounds.build(
        np.zeros(inst.T, dtype=np.int64),
        np.full(inst.T, inst.N, dtype=np.int64),
        inst.N,
    )
    dp_value, x, table = _run_dp(
        inst.T,
        inst.N,
        bounds,
        _unit_weights(inst),
        time_limit=time_limit,
        memory_budget=memory_budget,
        keep_values=keep_table,
    )
    sched = make_schedule(inst, x)
    if abs(sched.value - dp_value) > 1e-6 * max(1.0, abs(dp_value)):
        raise RuntimeError(
            f"DP value {dp_value} disagrees with re-evaluated objective {sched.value}"
        )
    if keep_table:
        return sched, table
    return sched


def solve_coarse(
    inst: Instance, P: int, time_limit=None, memory_budget=None
) -> Schedule:
    """Exact DP over buckets of P units; remainder N mod P goes to the last step."""
    if not 1 <= P <= inst.N:
        raise ValueError(f"grain must satisfy 1 <= P <= N, got {P}")
    M = inst.N // P
    bounds = FunnelBounds.build(
        np.zeros(inst.T, dtype=np.int64), np.full(inst.T, M, dtype=np.int64), M
    )

    def weight_fn(t, lo, hi):
        return (inst.p[t] - inst.c[t] * inst.g(P * np.arange(lo, hi + 1))) * P

    _, buckets, _ = _run_dp(
        inst.T, M, bounds, weight_fn, time_limit=time_limit, memory_budget=memory_budget
    )
    x = P * buckets
    x[-1] += inst.N - P * M
    return make_schedule(inst, x)


def solve_bounded(
    inst: Instance, x0, radius: int, time_limit=None, memory_budget=None
) -> Schedule:
    """Exact DP restricted to a funnel of the given radius around x0."""
    bounds = FunnelBounds.around(x0, radius, inst.N)
    _, x, _ = _run_dp(
        inst.T,
        inst.N,
        bounds,
        _unit_weights(inst),
        time_limit=time_limit,
        memory_budget=memory_budget,
    )
    return make_schedule(inst, x)


def auto_grain(T: int, N: int) -> int:
    """Grain P = floor(10^c), c = (2 log10 N - log10 T - 2) / 4, clamped to [1, N].

    This balances the coarse stage against the funnel stage so the two-step
    wall time is minimized; c stays rational rather than integer.
    """
    c = (2.0 * math.log10(N) - math.log10(T) - 2.0) / 4.0
    return max(1, min(N, int(math.floor(10.0**c))))


@dataclass(frozen=True)
class TwoStepResult:
    schedule: Schedule
    stage1: Schedule
    grain: int
    radius: int

    @property
    def value(self) -> float:
        return self.schedule.value


def solve_two_step(
    inst: Instance,
    P: int | None = None,
    lam: int = 5,
    time_limit=None,
    memory_budget=None,
) -> TwoStepResult:
    """Coarse-grain DP followed by a funnel DP of radius lam * P around it."""
    if P is None:
        P = auto_grain(inst.T, inst.N)
    stage1 = solve_coarse(inst, P, time_limit=time_limit, memory_budget=memory_budget)
    radius = max(1, lam * P)
    stage2 = solve_bounded(
        inst, stage1.x, radius, time_limit=time_limit, memory_budget=memory_budget
    )
    if stage2.value < stage1.value:
        stage2 = stage1  # funnel can never do worse than its own center
    return TwoStepResult(schedule=stage2, stage1=stage1, grain=P, radius=radius)


def enumerate_optimum(inst: Instance) -> Schedule:
    """Brute-force optimum over all compositions of N into T parts.

    Independent oracle for the DP; only viable for tiny instances.
    """
    best_x = None
    best_v = -np.inf

    def rec(prefix, remaining, steps_left):
        nonlocal best_x, best_v
        if steps_left == 1:
            x = prefix + [remaining]
            v = evaluate_objective(inst, x)
            if v > best_v:
                best_v = v
                best_x = x
            return
        for k in range(remaining + 1):
            rec(prefix + [k], remaining - k, steps_left - 1)

    rec([], inst.N, inst.T)
    return Schedule(x=np.asarray(best_x, dtype=np.int64), value=best_v)
