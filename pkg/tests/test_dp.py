import numpy as np
import pytest

from blocksale import PenaltyPrototype, evaluate_objective, make_instance
from blocksale.dp import (
    FunnelBounds,
    InfeasibleFunnelError,
    MemoryBudgetError,
    TimeLimitExceeded,
    auto_grain,
    enumerate_optimum,
    solve_bounded,
    solve_coarse,
    solve_exact,
    solve_two_step,
)
from conftest import PROTOTYPES, constant_instance, gbm_prices, random_schedule


class TestSolveExact:
    def test_single_step_base_case(self):
        inst = constant_instance(1, 37)
        sched = solve_exact(inst)
        assert list(sched.x) == [37]
        expected = (inst.p[0] - inst.c[0] * float(inst.g(37))) * 37
        assert sched.value == pytest.approx(expected)

    @pytest.mark.parametrize("proto", PROTOTYPES)
    def test_matches_brute_force_constant(self, proto):
        inst = constant_instance(3, 5, prototype=proto)
        assert solve_exact(inst).value == pytest.approx(
            enumerate_optimum(inst).value, rel=1e-12
        )

    def test_matches_brute_force_gbm(self):
        for T, N in [(2, 6), (3, 7), (4, 8)]:
            inst = make_instance(T, N, gbm_prices(T, seed=5, sigma=0.7))
            assert solve_exact(inst).value == pytest.approx(
                enumerate_optimum(inst).value, rel=1e-12
            )

    def test_feasibility_and_revaluation(self):
        inst = make_instance(8, 120, gbm_prices(8, seed=2))
        sched = solve_exact(inst)
        assert sched.x.sum() == 120
        assert np.all(sched.x >= 0)
        assert sched.value == pytest.approx(evaluate_objective(inst, sched.x))

    def test_dominates_random_schedules(self, rng):
        inst = make_instance(6, 60, gbm_prices(6, seed=3))
        opt = solve_exact(inst).value
        for _ in range(50):
            x = random_schedule(rng, 6, 60)
            assert evaluate_objective(inst, x) <= opt + 1e-9 * abs(opt)

    def test_table_monotonicity_and_bellman(self):
        # The final row is pinned to n = N, so align rows by their offsets.
        inst = constant_instance(4, 12)
        sched, table = solve_exact(inst, keep_table=True)
        full = [
            (int(lo), np.asarray(row))
            for lo, row in zip(table.los, table.values)
        ]
        for t, (lo, row) in enumerate(full[:-1]):
            assert lo == 0 and len(row) == inst.N + 1
            assert row[0] == 0.0  # O[t][0] = 0
            assert np.all(np.diff(row) >= -1e-12)  # nondecreasing in n
            if t > 0:
                assert np.all(row >= full[t - 1][1] - 1e-12)  # nondecreasing in t
        # Bellman consistency by direct re-scan.
        gvals = inst.g(np.arange(inst.N + 1))
        prev = np.zeros(inst.N + 1)
        for t, (lo, row) in enumerate(full):
            w_row = inst.p[t] - inst.c[t] * gvals
            for i, n in enumerate(range(lo, lo + len(row))):
                rhs = max(prev[n - k] + w_row[n] * k for k in range(n + 1))
                assert row[i] == pytest.approx(rhs, rel=1e-12)
            nxt = np.full(inst.N + 1, -np.inf)
            nxt[lo : lo + len(row)] = row
            prev = nxt
        assert full[-1][1][-1] == pytest.approx(sched.value, rel=1e-12)

    def test_memory_budget_error(self):
        inst = constant_instance(10, 1000)
        with pytest.raises(MemoryBudgetError) as exc:
            solve_exact(inst, memory_budget=100)
        assert exc.value.required > exc.value.available == 100

    def test_time_limit_error(self):
        inst = constant_instance(100, 20000)
        with pytest.raises(TimeLimitExceeded):
            solve_exact(inst, time_limit=0.01)


class TestSolveCoarse:
    def test_grain_one_is_exact(self):
        inst = make_instance(5, 40, gbm_prices(5, seed=8))
        assert solve_coarse(inst, 1).value == pytest.approx(solve_exact(inst).value)

    def test_grain_n_single_bucket(self):
        T, N = 6, 48
        vec = np.array([100.0, 104.0, 99.0, 110.0, 103.0, 101.0])
        inst = make_instance(T, N, vec)
        sched = solve_coarse(inst, N)
        j = int(np.argmax(inst.p - inst.c * float(inst.g(N))))
        expected = np.zeros(T, dtype=int)
        expected[j] = N
        assert list(sched.x) == list(expected)

    def test_close_to_exact_at_medium_size(self):
        inst = constant_instance(10, 10_000)
        exact = solve_exact(inst).value
        coarse = solve_coarse(inst, 100).value
        assert 100.0 * (exact - coarse) / exact < 0.5

    def test_remainder_goes_to_last_step(self):
        inst = make_instance(4, 103, gbm_prices(4, seed=1))
        sched = solve_coarse(inst, 10)
        assert sched.x.sum() == 103
        assert sched.x[-1] % 10 == 3

    def test_grain_validation(self):
        inst = constant_instance(3, 9)
        with pytest.raises(ValueError):
            solve_coarse(inst, 0)
        with pytest.raises(ValueError):
            solve_coarse(inst, 10)


class TestSolveBounded:
    def test_vacuous_radius_is_exact(self):
        inst = make_instance(5, 30, gbm_prices(5, seed=4))
        exact = solve_exact(inst)
        sched = solve_bounded(inst, np.zeros(5), radius=30)
        assert sched.value == pytest.approx(exact.value)

    def test_optimum_in_own_funnel(self):
        inst = make_instance(6, 90, gbm_prices(6, seed=6))
        exact = solve_exact(inst)
        for radius in (1, 3, 10):
            sched = solve_bounded(inst, exact.x, radius)
            assert sched.value == pytest.approx(exact.value)

    def test_respects_bounds(self):
        inst = make_instance(6, 90, gbm_prices(6, seed=7))
        x0 = np.full(6, 15.0)
        sched = solve_bounded(inst, x0, radius=4)
        assert sched.x.sum() == 90
        assert np.all(sched.x >= 11) and np.all(sched.x <= 19)

    def test_beats_rounded_center(self):
        inst = make_instance(6, 90, gbm_prices(6, seed=9, sigma=0.7))
        x0 = np.full(6, 15)
        sched = solve_bounded(inst, x0, radius=4)
        assert sched.value >= evaluate_objective(inst, x0) - 1e-9

    def test_infeasible_funnel(self):
        inst = constant_instance(3, 100)
        with pytest.raises(InfeasibleFunnelError):
            solve_bounded(inst, np.zeros(3), radius=2)


class TestFunnelBounds:
    def test_windows(self):
        fb = FunnelBounds.around(np.full(4, 5.0), radius=2, N=20)
        assert np.array_equal(fb.l, [3, 3, 3, 3])
        assert np.array_equal(fb.u, [7, 7, 7, 7])
        assert fb.U[-1] == 20 and fb.L[-1] == 20
        assert np.all(fb.L <= fb.U)
        # Cumulative windows contain the cumulative sums of the center.
        center = np.cumsum(np.full(4, 5))
        assert np.all((fb.L <= center) & (center <= fb.U))

    def test_radius_validation(self):
        with pytest.raises(InfeasibleFunnelError):
            FunnelBounds.around(np.full(4, 5.0), radius=0, N=20)


class TestTwoStep:
    def test_auto_grain_formula(self):
        assert auto_grain(10, 10**6) == 177
        assert auto_grain(10, 100) == 1  # 10^0.25 floors to 1
        assert 1 <= auto_grain(1000, 10**5) <= 10**5

    def test_stage_two_improves(self):
        for seed in range(3):
            inst = make_instance(8, 400, gbm_prices(8, seed=seed, sigma=0.7))
            res = solve_two_step(inst, P=16, lam=5)
            assert res.schedule.value >= res.stage1.value - 1e-12

    def test_reaches_exact_on_medium_instance(self):
        inst = constant_instance(10, 1000)
        res = solve_two_step(inst, P=100, lam=5)
        assert res.value == pytest.approx(solve_exact(inst).value, rel=1e-12)

    def test_auto_used_when_grain_missing(self):
        inst = constant_instance(10, 1000)
        res = solve_two_step(inst)
        assert res.grain == auto_grain(10, 1000)
