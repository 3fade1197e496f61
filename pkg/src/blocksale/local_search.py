"""Naive baselines and iterated local search over adjacent-pair shifts.

The ILS scans every adjacent pair (t, t+1), evaluates the objective delta of
moving P units earlier (d+) or later (d-) using only the two affected terms,
applies the single best strictly-improving shift, and repeats until a fixed
point. Shift sizes follow a dichotomy P = 2^R, 2^(R-1), ..., 1 with
R = floor(ln N / ln 2). Feasibility is preserved by construction: a shift
moves mass between neighbors and never changes the total.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .model import Instance, Schedule, evaluate_objective, make_schedule

# Relative threshold below which an improvement is treated as floating-point
# noise, preventing limit cycles.
IMPROVEMENT_RTOL = 1e-9


@dataclass(frozen=True)
class IlsConfig:
    max_iterations: int = 200_000
    time_limit: float | None = None
    dichotomy: bool = True
    shift: int = 1  # fixed shift size when dichotomy is off

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass(frozen=True)
class IlsResult:
    schedule: Schedule
    status: str  # local_optimum | iteration_cap | time_cap
    iterations: int


def fire_sale(inst: Instance) -> Schedule:
    """Everything at the first step: x = (N, 0, ..., 0)."""
    x = np.zeros(inst.T, dtype=np.int64)
    x[0] = inst.N
    return make_schedule(inst, x)


def uniform_sale(inst: Instance) -> Schedule:
    """x_t = N / T; when T does not divide N, the remainder spreads one unit
    at a time over the earliest steps."""
    q, r = divmod(inst.N, inst.T)
    x = np.full(inst.T, q, dtype=np.int64)
    x[:r] += 1
    return make_schedule(inst, x)


def _best_shift(inst: Instance, x, y, P):
    """Best adjacent P-shift: returns (delta, index, direction) or None.

    Moving P units between x_i and x_{i+1} only changes y_i, hence only the
    objective terms i and i+1; both deltas are computed vectorized over i.
    """
    p, c, g = inst.p, inst.c, inst.g
    xi = x[:-1]
    xj = x[1:]
    yi = y[:-1]
    gyj = g(y[1:])
    term_i = (p[:-1] - c[:-1] * g(yi)) * xi
    coef_j = p[1:] - c[1:] * gyj

    # d+: move P from x_{i+1} to x_i
    ok_plus = (xj >= P) & (xi + P <= inst.N)
    d_plus = np.where(
        ok_plus,
        (p[:-1] - c[:-1] * g(yi + P)) * (xi + P) - term_i - coef_j * P,
        -np.inf,
    )
    # d-: move P from x_i to x_{i+1}
    ok_minus = (xi >= P) & (xj + P <= inst.N)
    # Clip the masked-out arguments: g may not be defined left of zero.
    d_minus = np.where(
        ok_minus,
        (p[:-1] - c[:-1] * g(np.maximum(yi - P, 0))) * (xi - P) - term_i + coef_j * P,
        -np.inf,
    )

    i_plus = int(np.argmax(d_plus))
    i_minus = int(np.argmax(d_minus))
    if d_plus[i_plus] >= d_minus[i_minus]:
        return float(d_plus[i_plus]), i_plus, +1
    return float(d_minus[i_minus]), i_minus, -1


def ils(inst: Instance, x0: Schedule | None = None, config: IlsConfig | None = None) -> IlsResult:
    """Iterated local search from x0 (default: uniform sale)."""
    if x0 is None:
        x0 = uniform_sale(inst)
    if config is None:
        config = IlsConfig()

    x = np.array(x0.x, dtype=np.int64)
    y = np.cumsum(x)
    value = x0.value
    start = time.monotonic()
    iterations = 0
    status = "local_optimum"

    if config.dichotomy:
        R = int(np.floor(np.log(inst.N) / np.log(2.0)))
        shifts = [2**r for r in range(R, -1, -1)]
    else:
        shifts = [config.shift]

    if inst.T > 1:
        done = False
        for P in shifts:
            while True:
                delta, i, sign = _best_shift(inst, x, y, P)
                if delta <= IMPROVEMENT_RTOL * max(1.0, abs(value)):
                    break  # fixed point for this shift size
                x[i] += sign * P
                x[i + 1] -= sign * P
                y[i] += sign * P
                value += delta
                iterations += 1
                if iterations >= config.max_iterations:
                    status = "iteration_cap"
                    done = True
                    break
                if (
                    config.time_limit is not None
                    and time.monotonic() - start > config.time_limit
                ):
                    status = "time_cap"
                    done = True
                    break
            if done:
                break

    # Re-evaluate from scratch: incremental deltas accumulate rounding error.
    final = make_schedule(inst, x)
    if final.value < x0.value:
        final = x0  # never return worse than the seed
    return IlsResult(schedule=final, status=status, iterations=iterations)


def shift_deltas(inst: Instance, x, P: int):
    """(d+, d-) arrays for all adjacent pairs; -inf marks infeasible shifts.

    Exposed for delta-correctness fuzz tests against full re-evaluation.
    """
    x = np.asarray(x, dtype=np.int64)
    y = np.cumsum(x)
    p, c, g = inst.p, inst.c, inst.g
    xi, xj, yi = x[:-1], x[1:], y[:-1]
    term_i = (p[:-1] - c[:-1] * g(yi)) * xi
    coef_j = p[1:] - c[1:] * g(y[1:])
    ok_plus = (xj >= P) & (xi + P <= inst.N)
    ok_minus = (xi >= P) & (xj + P <= inst.N)
    d_plus = np.where(
        ok_plus, (p[:-1] - c[:-1] * g(yi + P)) * (xi + P) - term_i - coef_j * P, -np.inf
    )
    d_minus = np.where(
        ok_minus,
        (p[:-1] - c[:-1] * g(np.maximum(yi - P, 0))) * (xi - P) - term_i + coef_j * P,
        -np.inf,
    )
    return d_plus, d_minus


def has_improving_unit_shift(inst: Instance, x, rtol: float = IMPROVEMENT_RTOL) -> bool:
    """True when some +-1 adjacent shift strictly improves the objective."""
    if inst.T == 1:
        return False
    value = evaluate_objective(inst, x)
    d_plus, d_minus = shift_deltas(inst, x, 1)
    thresh = rtol * max(1.0, abs(value))
    return bool(max(d_plus.max(), d_minus.max()) > thresh)
