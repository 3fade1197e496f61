"""Analytic upper bound and the continuous first stage.

The closed-form bound ub = N * [max(p) - min(c) * g(N/T)] is valid whenever
x * g(x) is strictly convex (the separated relaxation is then concave and its
constant-price optimum is the uniform split). The continuous first stage is a
projected gradient ascent on the relaxed objective over the scaled simplex
{x >= 0, sum x = N}; its output feeds the bounded DP as a funnel center.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Instance, PenaltyFunction


@dataclass(frozen=True)
class BoundReport:
    ub: float
    pbar: float
    cunder: float
    convexity_ok: bool


def check_xg_convexity(g: PenaltyFunction, N: int) -> bool:
    """Numerical convexity of h(x) = x * g(x) on (0, N].

    Second differences h(x+d) - 2h(x) + h(x-d) on a geometric grid must not
    fall below the floating-point noise floor of the evaluation; a weakly
    curved h (second difference indistinguishable from zero) passes, a
    detectable concave segment fails.
    """

    def h(v):
        return v * np.asarray(g(v))

    x = np.geomspace(1e-3, float(N), 256)
    d = np.maximum(x * 1e-4, 1e-6)
    hp, h0, hm = h(x + d), h(x), h(np.maximum(x - d, 0.0))
    second = hp - 2.0 * h0 + hm
    noise = 16.0 * np.finfo(np.float64).eps * (np.abs(hp) + 2.0 * np.abs(h0) + np.abs(hm))
    return bool(np.all(second > -noise))


def upper_bound(inst: Instance) -> BoundReport:
    """Closed-form bound N * [pbar - cunder * g(N/T)] with real argument N/T."""
    pbar = float(inst.p.max())
    cunder = float(inst.c.min())
    ub = inst.N * (pbar - cunder * float(inst.g(inst.N / inst.T)))
    return BoundReport(
        ub=ub,
        pbar=pbar,
        cunder=cunder,
        convexity_ok=check_xg_convexity(inst.g, inst.N),
    )


def project_simplex(v, total: float) -> np.ndarray:
    """Euclidean projection onto {x >= 0, sum x = total} (sort-based)."""
    v = np.asarray(v, dtype=np.float64)
    if total <= 0.0:
        raise ValueError(f"simplex scale must be positive, got {total}")
    mu = np.sort(v)[::-1]
    cssv = np.cumsum(mu) - total
    rho = np.nonzero(mu - cssv / np.arange(1, len(v) + 1) > 0)[0][-1]
    tau = cssv[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def relaxed_objective(inst: Instance, x) -> float:
    """The relaxed proceeds f(x) on real-valued feasible points."""
    x = np.asarray(x, dtype=np.float64)
    y = np.cumsum(x)
    return float(np.dot(inst.p - inst.c * inst.g(y), x))


def relaxed_gradient(inst: Instance, x) -> np.ndarray:
    """Analytic gradient: df/dx_j = p_j - c_j g(y_j) - sum_{t>=j} c_t g'(y_t) x_t."""
    x = np.asarray(x, dtype=np.float64)
    y = np.cumsum(x)
    tail = inst.c * inst.g.derivative(y) * x
    rev_cumsum = np.cumsum(tail[::-1])[::-1]
    return inst.p - inst.c * inst.g(y) - rev_cumsum


@dataclass(frozen=True)
class ContinuousResult:
    x: np.ndarray
    value: float
    converged: bool
    iterations: int


def projected_gradient_ascent(
    objective,
    gradient,
    T: int,
    total: float,
    x0=None,
    tolerance: float = 1e-8,
    max_iters: int = 2000,
) -> ContinuousResult:
    """Maximize over the scaled simplex by x <- proj(x + a * grad) with
    backtracking on a; stops when the projected step stalls."""
    if tolerance <= 0.0:
        raise ValueError("tolerance must be positive")
    x = np.full(T, total / T) if x0 is None else project_simplex(x0, total)
    fx = objective(x)
    step = 1.0
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        grad = gradient(x)
        # Fixed-step projected move measures stationarity independently of
        # the adaptive step size.
        probe = project_simplex(x + grad, total)
        if np.linalg.norm(probe - x) <= tolerance * max(1.0, np.linalg.norm(x)):
            converged = True
            break
        moved = False
        while step > 1e-14:
            cand = project_simplex(x + step * grad, total)
            fc = objective(cand)
            if fc > fx:
                x, fx = cand, fc
                moved = True
                step *= 2.0  # allow the step to grow back
                break
            step *= 0.5
        if not moved:
            converged = True  # no ascent direction within machine precision
            break
    return ContinuousResult(x=x, value=fx, converged=converged, iterations=it)


def continuous_first_stage(
    inst: Instance, tolerance: float = 1e-8, max_iters: int = 2000
) -> ContinuousResult:
    """Feasible stationary point of the relaxed problem, for funnel seeding."""
    return projected_gradient_ascent(
        lambda x: relaxed_objective(inst, x),
        lambda x: relaxed_gradient(inst, x),
        inst.T,
        float(inst.N),
        tolerance=tolerance,
        max_iters=max_iters,
    )


def separated_objective(inst: Instance, x) -> float:
    """U(x) = sum_t [p_t - c_t g(x_t)] x_t, the separated over-estimator."""
    x = np.asarray(x, dtype=np.float64)
    return float(np.dot(inst.p - inst.c * inst.g(x), x))


def separated_gradient(inst: Instance, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return inst.p - inst.c * (inst.g(x) + inst.g.derivative(x) * x)
