"""Price vector generation: geometric Brownian motion batches and subsampling.

Paths are reproducible: a path is fully determined by its spec. Normal
variates come from numpy's PCG64 generator seeded explicitly; the R paths of
a batch use sub-seeds seed, seed + 1, ..., seed + R - 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .model import ValidationError

DEFAULT_P0 = 100.0
DEFAULT_T_MAX = 1000
DEFAULT_PATHS = 10


@dataclass(frozen=True)
class GbmSpec:
    p0: float
    mu: float
    sigma: float
    steps: int
    dt: float
    seed: int

    def __post_init__(self):
        if not self.p0 > 0.0:
            raise ValidationError(f"p0 must be positive, got {self.p0}")
        if self.sigma < 0.0:
            raise ValidationError(f"sigma must be non-negative, got {self.sigma}")
        if self.steps < 1:
            raise ValidationError(f"steps must be positive, got {self.steps}")
        if not self.dt > 0.0:
            raise ValidationError(f"dt must be positive, got {self.dt}")


@dataclass(frozen=True)
class PriceBatch:
    paths: np.ndarray      # (R, T_max)
    averaged: np.ndarray   # (T_max,), pointwise mean over paths


def simulate_gbm(spec: GbmSpec) -> np.ndarray:
    """One GBM path S_0 = p0, S_{k+1} = S_k * exp[(mu - sigma^2/2) dt + sigma sqrt(dt) Z_k]."""
    rng = np.random.default_rng(spec.seed)
    z = rng.standard_normal(spec.steps - 1)
    increments = (spec.mu - 0.5 * spec.sigma**2) * spec.dt + spec.sigma * np.sqrt(spec.dt) * z
    path = np.empty(spec.steps)
    path[0] = spec.p0
    path[1:] = spec.p0 * np.exp(np.cumsum(increments))
    return path


def build_batch(
    mu: float,
    sigma: float,
    p0: float = DEFAULT_P0,
    T_max: int = DEFAULT_T_MAX,
    dt: float | None = None,
    R: int = DEFAULT_PATHS,
    seed: int = 0,
) -> PriceBatch:
    """R seeded paths and their pointwise average.

    dt defaults to 1 / T_max so a batch spans one unit of time; this is a
    configuration choice, not a calibrated value.
    """
    if R < 1:
        raise ValidationError(f"path count must be >= 1, got {R}")
    if dt is None:
        dt = 1.0 / T_max
    paths = np.stack(
        [
            simulate_gbm(GbmSpec(p0=p0, mu=mu, sigma=sigma, steps=T_max, dt=dt, seed=seed + i))
            for i in range(R)
        ]
    )
    return PriceBatch(paths=paths, averaged=paths.mean(axis=0))


def subsample(averaged: np.ndarray, T: int) -> np.ndarray:
    """Every stride-th entry (1-based indices stride, 2*stride, ..., T*stride)."""
    averaged = np.asarray(averaged, dtype=np.float64)
    T_max = len(averaged)
    if T < 1 or T_max % T != 0:
        raise ValidationError(f"T={T} must divide the vector length {T_max}")
    stride = T_max // T
    return averaged[stride - 1 :: stride].copy()


# The standard experiment set: 9 (mu, sigma) combinations plus constant prices.
MOMENT_GRID = [(mu, sigma) for mu in (-0.05, 0.0, 0.05) for sigma in (0.10, 0.25, 0.70)]


def write_prices_csv(path, prices) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["price"])
        for v in prices:
            writer.writerow([repr(float(v))])


def read_prices_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or header[0] != "price":
            raise ValidationError(f"{path}: expected a single 'price' column header")
        return np.array([float(row[0]) for row in reader])
