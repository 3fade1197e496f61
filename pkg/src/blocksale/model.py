"""Problem instance, penalty functions and the objective evaluator.

The liquidation problem: sell N integer units over T time steps. Selling is
penalized through a bounded increasing function g applied to the cumulative
quantity sold, so proceeds at step t are [p_t - c_t * g(y_t)] * x_t with
y_t = x_1 + ... + x_t.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field

import numpy as np


class ValidationError(ValueError):
    """Raised when an instance or parameter violates its invariants."""


class InfeasibleScheduleError(ValueError):
    """Raised when a decision vector is not a feasible schedule."""


class PenaltyPrototype(enum.Enum):
    """Bounded increasing prototype G with G(0) = 0 and G -> 1 at infinity."""

    RATIONAL = "rational"   # x / (1 + x)
    SQRT = "sqrt"           # 1 - 2 / (1 + sqrt(1 + x))
    ARCTAN = "arctan"       # (2 / pi) * arctan(x)

    def apply(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self is PenaltyPrototype.RATIONAL:
            return x / (1.0 + x)
        if self is PenaltyPrototype.SQRT:
            return 1.0 - 2.0 / (1.0 + np.sqrt(1.0 + x))
        return (2.0 / math.pi) * np.arctan(x)

    def inverse(self, h: float) -> float:
        """Exact inverse of G on (0, 1)."""
        if not 0.0 < h < 1.0:
            raise ValidationError(f"inverse argument must be in (0, 1), got {h}")
        if self is PenaltyPrototype.RATIONAL:
            return h / (1.0 - h)
        if self is PenaltyPrototype.SQRT:
            return 4.0 * h / (1.0 - h) ** 2
        return math.tan(math.pi * h / 2.0)

    def derivative(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self is PenaltyPrototype.RATIONAL:
            return 1.0 / (1.0 + x) ** 2
        if self is PenaltyPrototype.SQRT:
            s = np.sqrt(1.0 + x)
            return 1.0 / (s * (1.0 + s) ** 2)
        return (2.0 / math.pi) / (1.0 + x * x)


@dataclass(frozen=True)
class PenaltyFunction:
    """Calibrated penalty g(y) = G(eta * y)."""

    prototype: PenaltyPrototype
    eta: float

    def __post_init__(self):
        if not self.eta > 0.0:
            raise ValidationError(f"eta must be positive, got {self.eta}")

    def __call__(self, y):
        return self.prototype.apply(self.eta * np.asarray(y, dtype=np.float64))

    def derivative(self, y):
        """g'(y) = eta * G'(eta * y), on the real extension of g."""
        return self.eta * self.prototype.derivative(
            self.eta * np.asarray(y, dtype=np.float64)
        )


def calibrate_eta(prototype: PenaltyPrototype, level: float, threshold: float) -> float:
    """Scaling factor eta such that G(eta * level) = threshold.

    `level` is typically the block size N and `threshold` how close the
    penalty gets to its asymptote once the whole block has been sold.
    """
    if not 0.0 < threshold < 1.0:
        raise ValidationError(f"threshold must be in (0, 1), got {threshold}")
    if not level > 0.0:
        raise ValidationError(f"level must be positive, got {level}")
    return prototype.inverse(threshold) / level


@dataclass(frozen=True)
class Instance:
    """A liquidation problem: T steps, N units, prices p, penalty ranges c."""

    T: int
    N: int
    p: np.ndarray
    c: np.ndarray
    g: PenaltyFunction

    def __post_init__(self):
        if self.T < 1 or self.N < 1:
            raise ValidationError(f"T and N must be positive, got T={self.T} N={self.N}")
        if self.T > self.N:
            raise ValidationError(f"T > N not supported (T={self.T}, N={self.N})")
        p = np.ascontiguousarray(self.p, dtype=np.float64)
        c = np.ascontiguousarray(self.c, dtype=np.float64)
        if p.shape != (self.T,) or c.shape != (self.T,):
            raise ValidationError("p and c must both have length T")
        if not np.all(p > 0.0):
            raise ValidationError("all prices must be strictly positive")
        if not np.all(c > 0.0):
            raise ValidationError("all penalty ranges must be strictly positive")
        if not np.all(c < p):
            raise ValidationError("floor prices p - c must stay positive")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "c", c)
        p.setflags(write=False)
        c.setflags(write=False)


@dataclass(frozen=True)
class Schedule:
    """A feasible integer decision vector with its cached objective value."""

    x: np.ndarray
    value: float

    def __post_init__(self):
        x = np.ascontiguousarray(self.x, dtype=np.int64)
        object.__setattr__(self, "x", x)
        x.setflags(write=False)


def evaluate_objective(inst: Instance, x) -> float:
    """Sale proceeds sum_t [p_t - c_t * g(y_t)] * x_t with y_t the running sum."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (inst.T,):
        raise InfeasibleScheduleError(f"decision vector must have length {inst.T}")
    if np.any(x < 0):
        raise InfeasibleScheduleError("negative quantities are not allowed")
    total = int(x.sum())
    if total != inst.N:
        raise InfeasibleScheduleError(f"quantities sum to {total}, expected {inst.N}")
    y = np.cumsum(x)
    return float(np.dot(inst.p - inst.c * inst.g(y), x))


def make_schedule(inst: Instance, x) -> Schedule:
    return Schedule(x=np.asarray(x, dtype=np.int64), value=evaluate_objective(inst, x))


def make_instance(
    T: int,
    N: int,
    prices,
    beta: float = 0.9,
    prototype: PenaltyPrototype = PenaltyPrototype.ARCTAN,
    H: float = 0.99,
    L: float | None = None,
) -> Instance:
    """Build an instance with floor prices q_t = (1 - beta) * p_t.

    The penalty is calibrated so that g(L) = H; by default L = N, H = 0.99.
    """
    if not 0.0 < beta < 1.0:
        raise ValidationError(f"beta must be in (0, 1), got {beta}")
    p = np.asarray(prices, dtype=np.float64)
    if L is None:
        L = float(N)
    g = PenaltyFunction(prototype, calibrate_eta(prototype, L, H))
    return Instance(T=T, N=N, p=p, c=beta * p, g=g)


def instance_to_json(
    T: int,
    N: int,
    beta: float,
    prototype: PenaltyPrototype,
    H: float,
    L: float,
    prices=None,
    generator: dict | None = None,
) -> str:
    doc = {
        "T": T,
        "N": N,
        "beta": beta,
        "prototype": prototype.value,
        "H": H,
        "L": L,
    }
    if prices is not None:
        doc["prices"] = [float(v) for v in prices]
    if generator is not None:
        doc["generator"] = generator
    return json.dumps(doc)


def instance_from_json(text: str) -> Instance:
    """Parse the instance document; prices may come from an embedded generator."""
    doc = json.loads(text)
    try:
        T = int(doc["T"])
        N = int(doc["N"])
        beta = float(doc.get("beta", 0.9))
        prototype = PenaltyPrototype(doc.get("prototype", "arctan"))
        H = float(doc.get("H", 0.99))
        L = float(doc.get("L", N))
    except (KeyError, ValueError) as exc:
        raise ValidationError(f"malformed instance document: {exc}") from exc

    if "prices" in doc:
        prices = np.asarray(doc["prices"], dtype=np.float64)
    elif "generator" in doc:
        from . import prices as prices_mod

        gen = doc["generator"]
        batch = prices_mod.build_batch(
            mu=float(gen.get("mu", 0.0)),
            sigma=float(gen.get("sigma", 0.0)),
            p0=float(gen.get("p0", 100.0)),
            T_max=int(gen.get("T_max", 1000)),
            dt=gen.get("dt"),
            R=int(gen.get("R", 10)),
            seed=int(gen.get("seed", 0)),
        )
        prices = prices_mod.subsample(batch.averaged, T)
    else:
        raise ValidationError("instance document needs either 'prices' or 'generator'")

    return make_instance(T, N, prices, beta=beta, prototype=prototype, H=H, L=L)
