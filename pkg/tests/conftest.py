import numpy as np
import pytest

from blocksale import Instance, PenaltyFunction, PenaltyPrototype, make_instance
from blocksale import prices as prices_mod

PROTOTYPES = list(PenaltyPrototype)


def constant_instance(T, N, prototype=PenaltyPrototype.ARCTAN, H=0.99, beta=0.9,
                      price=100.0, L=None):
    return make_instance(T, N, np.full(T, price), beta=beta, prototype=prototype,
                         H=H, L=L)


def uncalibrated_instance(T, N, prototype, price=100.0, beta=0.9):
    p = np.full(T, price)
    return Instance(T=T, N=N, p=p, c=beta * p, g=PenaltyFunction(prototype, 1.0))


def gbm_prices(T, seed=0, mu=0.0, sigma=0.25, T_max=None):
    """A positive price vector of length T from an averaged GBM batch."""
    if T_max is None:
        T_max = T * max(1, 120 // T)  # keep batches small in unit tests
    batch = prices_mod.build_batch(mu=mu, sigma=sigma, T_max=T_max, seed=seed)
    return prices_mod.subsample(batch.averaged, T)


def random_instance(rng, T_max=50, N_max=5000):
    T = int(rng.integers(1, T_max + 1))
    N = int(rng.integers(T, N_max + 1))
    beta = float(rng.uniform(0.5, 0.95))
    prototype = PROTOTYPES[int(rng.integers(len(PROTOTYPES)))]
    sigma = float(rng.choice([0.10, 0.25, 0.70]))
    mu = float(rng.choice([-0.05, 0.0, 0.05]))
    vec = gbm_prices(T, seed=int(rng.integers(2**31)), mu=mu, sigma=sigma)
    return make_instance(T, N, vec, beta=beta, prototype=prototype)


def random_schedule(rng, T, N):
    """Uniformly random feasible integer schedule."""
    cuts = np.sort(rng.integers(0, N + 1, size=T - 1)) if T > 1 else np.array([], int)
    parts = np.diff(np.concatenate(([0], cuts, [N])))
    return parts.astype(np.int64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
