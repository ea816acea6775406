"""Mode budgets, information metrics, and the orientation optimizer."""
import numpy as np
import pytest

from multipat.planner import (
    capacity_objective,
    dipole_coefficient_matrix,
    epsilon_entropy,
    fibonacci_orientations,
    lambda_jensen,
    lambda_simple,
    mode_count,
    nelder_mead,
    optimize_reference_orientations,
    plan_modes,
    wrap_orientation,
)
from multipat.vsh import build_mode_set


class TestModeCount:
    def test_reference_values(self):
        assert mode_count(2) == 16
        assert mode_count(4) == 48
        assert mode_count(1) == 6

    def test_strictly_monotone(self):
        counts = [mode_count(lam) for lam in range(1, 12)]
        assert all(b > a for a, b in zip(counts, counts[1:]))

    def test_validation(self):
        with pytest.raises(ValueError):
            mode_count(0)


class TestLambdaRules:
    def test_simple_ceiling(self):
        assert lambda_simple(2 * np.pi * 0.25) == 2  # half-wave dipole, R = lambda/4
        assert lambda_simple(3.0) == 3
        assert lambda_simple(30.0) == 30
        with pytest.raises(ValueError):
            lambda_simple(0.0)

    def test_jensen_large_antenna(self):
        # ceil(30 + 1.8 * 30^(1/3)) = ceil(35.593) = 36, inside validity: no warning
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("error")
            assert lambda_jensen(30.0, -40.0) == 36

    def test_jensen_small_antenna_warns(self):
        with pytest.warns(UserWarning, match="validity"):
            assert lambda_jensen(2 * np.pi * 0.25, -40.0) == 4

    def test_jensen_reduces_to_simple(self):
        with pytest.warns(UserWarning):
            assert lambda_jensen(3.0, p_tr=0.0, p_r=0.0) == lambda_simple(3.0)

    def test_jensen_dominates_simple(self):
        import warnings

        for k_r in (2.0, 11.0, 30.0, 100.0):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                assert lambda_jensen(k_r, -40.0) >= lambda_simple(k_r)

    def test_plan_modes(self):
        budget = plan_modes(2 * np.pi * 0.25)
        assert (budget.lambda_max, budget.n_modes, budget.rule) == (2, 16, "simple-ceiling")
        with pytest.warns(UserWarning):
            budget = plan_modes(2 * np.pi * 0.25, p_tr=-40.0)
        assert (budget.lambda_max, budget.n_modes, budget.rule) == (4, 48, "jensen")


class TestEpsilonEntropy:
    def test_identity_is_zero_bits(self):
        assert epsilon_entropy(np.eye(5, dtype=complex), 1.0) == pytest.approx(0.0, abs=1e-12)

    def test_doubled_identity(self):
        assert epsilon_entropy(2.0 * np.eye(2, dtype=complex), 1.0) == pytest.approx(2.0)

    def test_determinant_identity_at_unit_epsilon(self):
        rng = np.random.default_rng(15)
        for n in (3, 5, 8):
            t = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            h1 = epsilon_entropy(t, 1.0)
            det = np.linalg.det(t @ t.conj().T).real
            assert h1 == pytest.approx(0.5 * np.log2(det), abs=1e-8)

    def test_epsilon_shift_law(self):
        rng = np.random.default_rng(16)
        t = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
        for eps in (0.5, 2.0, 10.0):
            shift = epsilon_entropy(t, eps) - epsilon_entropy(t, 1.0)
            assert shift == pytest.approx(-6 * np.log2(eps), abs=1e-9)

    def test_validation(self):
        with pytest.raises(ValueError):
            epsilon_entropy(np.eye(2), 0.0)
        with pytest.raises(ValueError):
            epsilon_entropy(np.zeros((2, 2)), 1.0)


class TestCapacityObjective:
    def test_identity(self):
        assert capacity_objective(np.eye(4, dtype=complex)) == pytest.approx(-1.0)

    def test_singular(self):
        t = np.ones((3, 3), dtype=complex)
        assert capacity_objective(t) == pytest.approx(0.0, abs=1e-12)

    def test_matches_singular_value_product(self):
        rng = np.random.default_rng(17)
        t = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        sigma = np.linalg.svd(t, compute_uv=False)
        assert capacity_objective(t) == pytest.approx(-np.prod(sigma**2), rel=1e-10)

    def test_unitary_invariance(self):
        rng = np.random.default_rng(18)
        t = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        q, _ = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))
        assert capacity_objective(q @ t) == pytest.approx(capacity_objective(t), rel=1e-9)
        assert capacity_objective(t @ q) == pytest.approx(capacity_objective(t), rel=1e-9)


class TestWrapAndSeeds:
    def test_wrap_orientation(self):
        t, p = wrap_orientation(-0.3, 0.0)
        assert 0 <= t <= np.pi and 0 <= p < 2 * np.pi
        assert t == pytest.approx(0.3)
        assert p == pytest.approx(np.pi)
        t, p = wrap_orientation(np.pi + 0.2, 1.0)
        assert t == pytest.approx(np.pi - 0.2)

    def test_fibonacci_upper_hemisphere(self):
        pts = fibonacci_orientations(10)
        assert len(pts) == 10
        assert all(0 < t < np.pi / 2 + 1e-9 for t, _ in pts)
        assert len({(round(t, 6), round(p, 6)) for t, p in pts}) == 10


class TestNelderMead:
    @staticmethod
    def quadratic(x):
        return float(np.sum((x - 1.5) ** 2))

    def test_zero_budget_returns_initial(self):
        x0 = np.array([0.0, 0.0])
        x, f, trace = nelder_mead(self.quadratic, x0, budget=0)
        np.testing.assert_array_equal(x, x0)
        assert f == pytest.approx(self.quadratic(x0))

    def test_converges_on_quadratic(self):
        x, f, trace = nelder_mead(self.quadratic, np.zeros(3), budget=600)
        assert f < 1e-8

    def test_trace_monotone(self):
        _, _, trace = nelder_mead(self.quadratic, np.zeros(4), budget=300)
        values = [v for _, v in trace]
        assert all(b < a for a, b in zip(values, values[1:]))

    def test_budget_respected(self):
        calls = {"n": 0}

        def counted(x):
            calls["n"] += 1
            return self.quadratic(x)

        nelder_mead(counted, np.zeros(3), budget=50)
        assert calls["n"] <= 51  # baseline evaluation plus the budget


class TestOptimizeOrientations:
    def test_zero_budget_identity(self):
        ms = build_mode_set(1, multipole="electric")
        init = [(0.0, 0.0), (np.pi / 2, 0.0), (np.pi / 2, np.pi / 2)]
        result = optimize_reference_orientations(init, mode_set=ms, budget=0)
        assert [(round(t, 12), round(p, 12)) for t, p in result.orientations] == [
            (round(t, 12), round(p, 12)) for t, p in init
        ]

    def test_never_worse_than_start(self):
        ms = build_mode_set(3, "odd", "electric")
        rng = np.random.default_rng(19)
        for _ in range(3):
            init = [(np.arccos(rng.uniform(0, 1)), rng.uniform(0, 2 * np.pi)) for _ in range(10)]
            start = float(np.linalg.cond(dipole_coefficient_matrix(init, ms)))
            result = optimize_reference_orientations(init, mode_set=ms, budget=60)
            assert result.objective_value <= start + 1e-12

    def test_orthogonal_triple_already_optimal(self):
        # the three orthogonal dipoles are a condition-1 basis for the three
        # first-degree electric modes; the optimizer cannot improve them
        ms = build_mode_set(1, multipole="electric")
        init = [(0.0, 0.0), (np.pi / 2, 0.0), (np.pi / 2, np.pi / 2)]
        start = float(np.linalg.cond(dipole_coefficient_matrix(init, ms)))
        assert start == pytest.approx(1.0, abs=1e-6)
        result = optimize_reference_orientations(init, mode_set=ms, budget=200)
        assert result.objective_value >= start * (1 - 1e-6)
        assert abs(result.objective_value - start) / start < 0.01

    def test_exhaustive_scan_confirms_local_optimum(self):
        # move only the third dipole over a 5-degree grid: nothing beats the
        # orthogonal triple
        ms = build_mode_set(1, multipole="electric")
        fixed = [(0.0, 0.0), (np.pi / 2, 0.0)]
        best = np.inf
        for t in np.deg2rad(np.arange(5, 180, 5)):
            for p in np.deg2rad(np.arange(0, 360, 5)):
                cond = float(np.linalg.cond(dipole_coefficient_matrix(fixed + [(t, p)], ms)))
                best = min(best, cond)
        orthogonal = float(
            np.linalg.cond(dipole_coefficient_matrix(fixed + [(np.pi / 2, np.pi / 2)], ms))
        )
        assert orthogonal <= best + 1e-9

    def test_capacity_objective_route(self):
        ms = build_mode_set(1, multipole="electric")
        init = [(0.3, 0.1), (1.2, 2.0), (0.9, 4.0)]
        result = optimize_reference_orientations(
            init, mode_set=ms, objective="capacity", budget=40
        )
        start = capacity_objective(dipole_coefficient_matrix(init, ms))
        assert result.objective_value <= start + 1e-12

    def test_validation(self):
        ms = build_mode_set(3, "odd", "electric")
        with pytest.raises(ValueError):
            optimize_reference_orientations([(0.1, 0.2)], mode_set=ms, budget=10)
        with pytest.raises(ValueError):
            optimize_reference_orientations([(0.1, 0.2)], budget=10)  # no builder
        with pytest.raises(ValueError):
            optimize_reference_orientations(
                [(0.1, 0.2)], matrix_builder=lambda o: np.eye(2), objective="magic", budget=1
            )
