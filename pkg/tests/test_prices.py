import numpy as np
import pytest

from blocksale.model import ValidationError
from blocksale.prices import (
    GbmSpec,
    MOMENT_GRID,
    build_batch,
    read_prices_csv,
    simulate_gbm,
    subsample,
    write_prices_csv,
)


class TestSimulateGbm:
    def test_degenerate_constant(self):
        spec = GbmSpec(p0=100.0, mu=0.0, sigma=0.0, steps=50, dt=0.01, seed=1)
        assert np.allclose(simulate_gbm(spec), 100.0)

    def test_drift_only_closed_form(self):
        spec = GbmSpec(p0=100.0, mu=0.05, sigma=0.0, steps=20, dt=1.0, seed=1)
        path = simulate_gbm(spec)
        k = np.arange(20)
        assert np.allclose(path, 100.0 * np.exp(0.05 * k), rtol=1e-12)

    def test_positivity_and_determinism(self):
        spec = GbmSpec(p0=100.0, mu=-0.05, sigma=0.7, steps=500, dt=0.002, seed=42)
        a = simulate_gbm(spec)
        b = simulate_gbm(spec)
        assert np.array_equal(a, b)
        assert np.all(a > 0.0)

    def test_log_return_moments(self):
        # Sample moments of ln(S_T / S_0) against the log-normal law.
        mu, sigma, steps = 0.0, 0.25, 200
        dt = 1.0 / steps
        n_paths = 2000
        logs = np.array([
            np.log(simulate_gbm(
                GbmSpec(p0=100.0, mu=mu, sigma=sigma, steps=steps + 1, dt=dt, seed=s)
            )[-1] / 100.0)
            for s in range(n_paths)
        ])
        horizon = steps * dt
        mean_expected = (mu - sigma**2 / 2) * horizon
        se = sigma * np.sqrt(horizon) / np.sqrt(n_paths)
        assert abs(logs.mean() - mean_expected) < 3 * se
        assert abs(logs.var() - sigma**2 * horizon) < 0.1 * sigma**2 * horizon

    def test_spec_validation(self):
        with pytest.raises(ValidationError):
            GbmSpec(p0=-1.0, mu=0.0, sigma=0.1, steps=10, dt=0.1, seed=0)
        with pytest.raises(ValidationError):
            GbmSpec(p0=1.0, mu=0.0, sigma=-0.1, steps=10, dt=0.1, seed=0)
        with pytest.raises(ValidationError):
            GbmSpec(p0=1.0, mu=0.0, sigma=0.1, steps=10, dt=0.0, seed=0)


class TestBuildBatch:
    def test_single_path_average(self):
        batch = build_batch(mu=0.0, sigma=0.2, T_max=100, R=1, seed=3)
        assert np.array_equal(batch.averaged, batch.paths[0])

    def test_average_is_pointwise_mean(self):
        batch = build_batch(mu=0.05, sigma=0.3, T_max=60, R=7, seed=5)
        assert batch.paths.shape == (7, 60)
        assert np.allclose(batch.averaged, batch.paths.mean(axis=0))

    def test_same_seed_same_batch(self):
        a = build_batch(mu=0.0, sigma=0.25, T_max=80, R=10, seed=11)
        b = build_batch(mu=0.0, sigma=0.25, T_max=80, R=10, seed=11)
        assert np.array_equal(a.averaged, b.averaged)

    def test_averaging_shrinks_variance(self):
        # Pointwise variance of the 10-path mean should be about a tenth of
        # the single-path variance, estimated over 100 seed replications.
        T_max, reps = 120, 100
        singles = np.array([
            build_batch(mu=0.0, sigma=0.10, T_max=T_max, R=1, seed=1000 + i).averaged
            for i in range(reps)
        ])
        means = np.array([
            build_batch(mu=0.0, sigma=0.10, T_max=T_max, R=10, seed=10_000 + 10 * i).averaged
            for i in range(reps)
        ])
        var_single = singles[:, -1].var()
        var_mean = means[:, -1].var()
        assert var_mean == pytest.approx(var_single / 10.0, rel=0.5)

    def test_path_count_validation(self):
        with pytest.raises(ValidationError):
            build_batch(mu=0.0, sigma=0.1, R=0)


class TestSubsample:
    def test_identity(self):
        v = np.arange(1.0, 11.0)
        assert np.array_equal(subsample(v, 10), v)

    def test_stride_example_indices(self):
        v = np.arange(1.0, 1001.0)  # value == 1-based index
        out = subsample(v, 10)
        assert np.array_equal(out, [100, 200, 300, 400, 500, 600, 700, 800, 900, 1000])

    def test_stride_arithmetic(self):
        v = np.arange(1.0, 1001.0)
        out = subsample(v, 100)
        assert len(out) == 100
        assert out[0] == 10 and out[-1] == 1000

    def test_divisibility_error(self):
        with pytest.raises(ValidationError):
            subsample(np.arange(10.0), 3)


def test_moment_grid():
    assert len(MOMENT_GRID) == 9
    assert (-0.05, 0.10) in MOMENT_GRID and (0.05, 0.70) in MOMENT_GRID


def test_csv_roundtrip(tmp_path):
    vec = build_batch(mu=0.0, sigma=0.25, T_max=50, seed=9).averaged
    path = tmp_path / "prices.csv"
    write_prices_csv(path, vec)
    back = read_prices_csv(path)
    assert np.array_equal(back, vec)
