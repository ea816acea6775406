"""Multipath chamber model: determinism, voltage law, analytic channel."""
import numpy as np
import pytest

from multipat.chamber import ChamberModel, analytic_channel, probe_voltages, sample_chamber, select_chamber
from multipat.dipole import DipoleSpec
from multipat.farfield import decompose, default_grid, synthesize
from multipat.vsh import TangentVector, build_mode_set

K = 2 * np.pi


def single_path_chamber(theta, phi, alpha=0.0, rho=1.0 + 0j):
    return ChamberModel(
        n_probes=1,
        n_paths=1,
        sigma_rho=1.0,
        seed=0,
        rho=np.array([[rho]]),
        theta=np.array([[theta]]),
        phi=np.array([[phi]]),
        alpha=np.array([[alpha]]),
    )


class TestSampleChamber:
    def test_deterministic(self):
        a = sample_chamber(42, 10, 10, 0.001)
        b = sample_chamber(42, 10, 10, 0.001)
        np.testing.assert_array_equal(a.rho, b.rho)
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.phi, b.phi)
        np.testing.assert_array_equal(a.alpha, b.alpha)

    def test_seeds_differ(self):
        a = sample_chamber(1, 4, 4)
        b = sample_chamber(2, 4, 4)
        assert np.any(a.rho != b.rho)

    def test_distribution_ranges(self):
        ch = sample_chamber(3, 40, 40, 0.001)
        assert ch.theta.min() > 0 and ch.theta.max() < np.pi
        assert ch.phi.min() >= 0 and ch.phi.max() < 2 * np.pi
        assert ch.alpha.min() >= 0 and ch.alpha.max() < 2 * np.pi
        assert abs(np.std(ch.rho.real) - 0.001) < 3e-4
        assert abs(np.mean(ch.rho.real)) < 1e-4

    def test_over_provisioned_shape(self):
        ch = sample_chamber(5, 12, 20, 0.001)
        assert ch.rho.shape == (12, 20)

    def test_validation(self):
        with pytest.raises(ValueError):
            sample_chamber(0, 0, 5)
        with pytest.raises(ValueError):
            sample_chamber(0, 5, 5, sigma_rho=0.0)


class TestProbeVoltages:
    def test_zero_gains(self):
        ch = sample_chamber(0, 6, 6)
        ch.rho = np.zeros_like(ch.rho)
        v = probe_voltages(ch, DipoleSpec().field(K))
        np.testing.assert_array_equal(v, np.zeros(6, dtype=complex))

    def test_single_path_theta_polarized(self):
        ch = single_path_chamber(1.1, 0.3, alpha=0.0)
        field = DipoleSpec(theta0=0.5, phi0=2.0).field(K)
        v = probe_voltages(ch, field)
        assert v[0] == pytest.approx(field(1.1, 0.3).e_theta, rel=1e-14)

    def test_single_path_phi_polarized(self):
        ch = single_path_chamber(1.1, 0.3, alpha=np.pi / 2)
        field = DipoleSpec(theta0=0.5, phi0=2.0).field(K)
        v = probe_voltages(ch, field)
        assert v[0] == pytest.approx(field(1.1, 0.3).e_phi, rel=1e-12, abs=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(8)
        ch = sample_chamber(17, 8, 12)
        f1 = DipoleSpec(theta0=0.3, phi0=1.0).field(K)
        f2 = DipoleSpec(theta0=2.0, phi0=4.0).field(K)

        def combined(t, p):
            a, b = f1(t, p), f2(t, p)
            return TangentVector(a.e_theta + b.e_theta, a.e_phi + b.e_phi)

        lhs = probe_voltages(ch, combined)
        rhs = probe_voltages(ch, f1) + probe_voltages(ch, f2)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12)


class TestAnalyticChannel:
    def test_rejects_magnetic_modes(self):
        ch = sample_chamber(0, 16, 16)
        with pytest.raises(ValueError):
            analytic_channel(ch, build_mode_set(1, multipole="both"))

    def test_zero_gain_chamber(self):
        ch = sample_chamber(0, 10, 10)
        ch.rho = np.zeros_like(ch.rho)
        t = analytic_channel(ch, build_mode_set(3, "odd", "electric"))
        assert np.all(t.entries == 0)

    def test_exact_on_truncated_field(self):
        ms = build_mode_set(3, "odd", "electric")
        ch = sample_chamber(5, 10, 10, 0.001)
        spec = DipoleSpec(theta0=0.9, phi0=2.2)
        coeffs = decompose(spec.field(K), ms, default_grid(3))
        t = analytic_channel(ch, ms)
        via_matrix = t.entries @ coeffs.to_amplitude_vector()
        via_simulation = probe_voltages(ch, lambda a, b: synthesize(coeffs, a, b))
        assert np.max(np.abs(via_matrix - via_simulation)) < 1e-10 * np.max(np.abs(via_simulation))

    def test_truncation_residual_against_exact_field(self):
        ch = sample_chamber(5, 10, 10, 0.001)
        spec = DipoleSpec(theta0=0.9, phi0=2.2)
        exact_v = probe_voltages(ch, spec.field(K))
        errs = []
        for lam in (1, 3, 5):
            ms = build_mode_set(lam, "odd", "electric")
            coeffs = decompose(spec.field(K), ms, default_grid(lam))
            approx_v = analytic_channel(ch, ms).entries @ coeffs.to_amplitude_vector()
            errs.append(np.linalg.norm(approx_v - exact_v) / np.linalg.norm(exact_v))
        assert errs[0] > errs[1] > errs[2] > 1e-14  # nonzero, strictly shrinking


class TestSelectChamber:
    @staticmethod
    def _builder(fields):
        def build(ch):
            return np.column_stack([probe_voltages(ch, f) for f in fields])
        return build

    def test_single_seed_unconditional(self):
        fields = [DipoleSpec(theta0=t).field(K) for t in (0.2, 0.9, 1.6)]
        ch, cond = select_chamber([7], self._builder(fields), 4, 4)
        assert ch.seed == 7 and cond > 1.0

    def test_minimizes_condition_number(self):
        fields = [DipoleSpec(theta0=t, phi0=p).field(K)
                  for t, p in [(0.1, 0), (0.8, 1.0), (1.5, 2.0), (2.2, 4.0)]]
        build = self._builder(fields)
        seeds = list(range(30))
        conds = [np.linalg.cond(build(sample_chamber(s, 4, 6))) for s in seeds]
        ch, cond = select_chamber(seeds, build, 4, 6)
        assert cond == pytest.approx(min(conds))
        assert cond <= np.median(conds)
        assert ch.seed == seeds[int(np.argmin(conds))]

    def test_empty_seed_list(self):
        with pytest.raises(ValueError):
            select_chamber([], lambda ch: np.eye(2), 2, 2)
