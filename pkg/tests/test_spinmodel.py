import numpy as np
import pytest

from znqr.operators import dagger, hermiticity_defect
from znqr.spinmodel import (
    IX,
    IY,
    IZ,
    DensityMatrix,
    Frame,
    SpinSystem,
    THETA_EVEN_SPACING,
    energy_levels,
    equilibrium_deviation,
    f_factors,
    g_cos_theta,
    h_quadrupole,
    h_rf_lab,
    h_zeeman,
    hat_h0,
    hat_rf,
    r_transform,
    secular_h0,
    secular_hamiltonian,
    secular_rf,
    secular_zeeman,
    tilde_transform,
    transition_frequencies,
)
from oracles import eq21_matrix, ix_quad_picture_elementwise, tilde_by_expm

WP = SpinSystem.paper_working_point()

THETA_GRID = np.radians([5.0, 30.0, 60.0, 71.337, 85.0])
DELTA_GRID = [0.0, 2 * np.pi * 10e3, -2 * np.pi * 10e3]


def offdiag_max(m):
    return np.max(np.abs(m - np.diag(np.diag(m))))


class TestSpinSystem:
    def test_paper_working_point(self):
        assert WP.omega_q == pytest.approx(2 * np.pi * 28.1e6)
        assert WP.omega_0 == pytest.approx(2 * np.pi * 4.176e6 * 730e-6)
        assert np.cos(WP.theta) ** 2 == pytest.approx(4.0 / 39.0)

    def test_exactly_one_field_spec(self):
        with pytest.raises(ValueError):
            SpinSystem.from_hz(28.1e6, 1.0, nu_0_hz=3e3, b0_tesla=7e-4)
        with pytest.raises(ValueError):
            SpinSystem.from_hz(28.1e6, 1.0)

    def test_invariants(self):
        with pytest.raises(ValueError):
            SpinSystem(-1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            SpinSystem(1.0, -1.0, 0.0)
        with pytest.raises(ValueError):
            SpinSystem(1.0, 0.0, np.pi)

    def test_perturbation_regime_warning(self):
        with pytest.warns(UserWarning):
            SpinSystem(omega_q=1.0, omega_0=0.5, theta=0.1)


class TestLabHamiltonians:
    def test_quadrupole_diagonal_values(self):
        sys = SpinSystem(omega_q=2.0, omega_0=0.0, theta=0.0)
        h = h_quadrupole(sys)
        m = np.array([1.5, 0.5, -0.5, -1.5])
        assert np.allclose(np.diag(h), (2.0 / 2.0) * (m**2 - 5.0 / 4.0))
        assert abs(np.trace(h)) < 1e-14

    def test_quadrupole_manifold_gap_is_omega_q(self):
        h = h_quadrupole(WP)
        gap = h[0, 0].real - h[1, 1].real
        assert gap == pytest.approx(WP.omega_q)

    def test_zeeman_axis_limits(self):
        along = SpinSystem(WP.omega_q, 1.0, 0.0)
        assert np.allclose(h_zeeman(along), -IZ)
        perp = SpinSystem(WP.omega_q, 1.0, np.pi / 2)
        assert np.allclose(h_zeeman(perp), -IX)

    def test_zeeman_iz_weight_at_working_angle(self):
        # even-spacing angle: cos(theta) = 2/sqrt(39) = 0.32026
        sys = SpinSystem(WP.omega_q, 1.0, THETA_EVEN_SPACING)
        h = h_zeeman(sys)
        assert h[0, 0].real == pytest.approx(-1.5 * 0.32026, abs=2e-5)

    def test_rf_at_time_zero(self):
        h = h_rf_lab(WP, omega_1=1.0, omega=WP.omega_q, alpha=0.0, phi=0.0, t=0.0)
        assert np.allclose(h, -2.0 * IX)

    def test_rf_vanishes_at_quarter_cycle(self):
        t = (np.pi / 2) / WP.omega_q
        h = h_rf_lab(WP, omega_1=1.0, omega=WP.omega_q, alpha=0.0, phi=0.0, t=t)
        assert np.max(np.abs(h)) < 1e-9

    def test_rf_polarization_rotates_to_iy(self):
        h = h_rf_lab(WP, 1.0, WP.omega_q, 0.3, np.pi / 2, t=1.0e-9)
        expected = -2.0 * np.cos(WP.omega_q * 1.0e-9 + 0.3) * IY
        assert np.max(np.abs(h - expected)) < 1e-12

    def test_rf_hermitian_at_all_times(self):
        for t in np.linspace(0, 1e-6, 7):
            h = h_rf_lab(WP, 1.0, WP.omega_q, 0.7, 1.1, t)
            assert hermiticity_defect(h) < 1e-12


class TestQuadrupolePicture:
    def test_iz_and_iz2_invariant(self):
        for a in (IZ, IZ @ IZ):
            out = tilde_transform(a, WP.omega_q, 3.3e-6)
            assert np.allclose(out, a)

    def test_matches_expm_oracle(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        t, omega = 0.8e-6, WP.omega_q
        assert np.allclose(tilde_transform(a, omega, t), tilde_by_expm(a, omega, t),
                           atol=1e-12)

    def test_ix_satellite_phases(self):
        omega = 2 * np.pi * 1e6
        for wt in (np.pi, 0.4, 2.1):
            t = wt / omega
            out = tilde_transform(IX, omega, t)
            assert np.allclose(out, ix_quad_picture_elementwise(omega, t), atol=1e-12)


class TestSecularHamiltonian:
    def test_zeeman_keeps_central_block_only(self):
        sys = SpinSystem(WP.omega_q, 1.0, np.pi / 2)
        h = secular_zeeman(sys)
        expected = np.zeros((4, 4), dtype=complex)
        expected[1, 2] = expected[2, 1] = -1.0
        assert np.allclose(h, expected)

    def test_theta_zero_is_pure_iz(self):
        sys = SpinSystem(WP.omega_q, 1.0, 0.0)
        h = secular_hamiltonian(sys, omega_1=0.0, delta_wq=0.0)
        assert np.allclose(h, -IZ)

    def test_rf_satellite_pattern(self):
        h = secular_rf(omega_1=1.0, alpha=0.0, phi=0.0)
        expected = np.zeros((4, 4), dtype=complex)
        expected[0, 1] = expected[1, 0] = -np.sqrt(3) / 2
        expected[2, 3] = expected[3, 2] = -np.sqrt(3) / 2
        assert np.allclose(h, expected)

    def test_rf_phases(self):
        alpha, phi = 0.4, 1.3
        h = secular_rf(1.0, alpha, phi)
        assert h[0, 1] == pytest.approx(-np.sqrt(3) / 2 * np.exp(-1j * (phi + alpha)))
        assert h[2, 3] == pytest.approx(-np.sqrt(3) / 2 * np.exp(-1j * (phi - alpha)))
        assert hermiticity_defect(h) < 1e-13


class TestRTransform:
    def test_theta_zero_unmixed(self):
        fp, fm = f_factors(0.0)
        assert fp == pytest.approx(1.0)
        assert fm == pytest.approx(0.0)

    def test_working_point_weights(self):
        fp, fm = f_factors(THETA_EVEN_SPACING)
        assert fp == pytest.approx(np.sqrt(7.0 / 12.0), abs=1e-12)
        assert fm == pytest.approx(np.sqrt(5.0 / 12.0), abs=1e-12)

    @pytest.mark.parametrize("theta", np.linspace(0.0, np.pi * 0.999, 17))
    def test_involution(self, theta):
        r = r_transform(theta)
        assert np.max(np.abs(r @ r - np.eye(4))) < 1e-13

    def test_g_cos_theta_finite_at_right_angle(self):
        assert g_cos_theta(np.pi / 2) == pytest.approx(2.0, abs=1e-9)


class TestEnergyLevels:
    @pytest.mark.parametrize("theta", THETA_GRID)
    @pytest.mark.parametrize("delta", DELTA_GRID)
    def test_r_diagonalizes_and_closed_forms_match(self, theta, delta):
        sys = SpinSystem(WP.omega_q, WP.omega_0, theta)
        h0 = secular_h0(sys, delta)
        hd = r_transform(theta) @ h0 @ r_transform(theta)
        scale = max(1.0, np.max(np.abs(hd)))
        assert offdiag_max(hd) < 1e-12 * scale
        closed = energy_levels(sys, delta)
        assert np.allclose(np.diag(hd).real, closed,
                           rtol=1e-10, atol=1e-10 * scale)

    def test_axis_aligned_levels(self):
        sys = SpinSystem(WP.omega_q, 1.0, 0.0)
        assert np.allclose(energy_levels(sys, 0.0), np.array([-12, -4, 4, 12]) / 8.0)

    def test_working_point_closed_form(self):
        c = 2.0 / np.sqrt(39.0)
        delta = 2 * np.pi * 5e3
        e = energy_levels(WP, delta)
        w0 = WP.omega_0
        expected = np.array([
            9 * delta - 12 * w0 * c,
            delta - 24 * w0 * c,
            delta + 24 * w0 * c,
            9 * delta + 12 * w0 * c,
        ]) / 8.0
        assert np.allclose(e, expected, rtol=1e-12)

    @pytest.mark.parametrize("theta", THETA_GRID)
    @pytest.mark.parametrize("delta", DELTA_GRID)
    def test_trace_identity(self, theta, delta):
        sys = SpinSystem(WP.omega_q, WP.omega_0, theta)
        total = energy_levels(sys, delta).sum()
        assert total == pytest.approx(20.0 * delta / 8.0, abs=1e-6)

    def test_finite_at_right_angle(self):
        sys = SpinSystem(WP.omega_q, WP.omega_0, np.pi / 2)
        e = energy_levels(sys, 0.0)
        assert np.all(np.isfinite(e))
        assert e[1] == pytest.approx(-WP.omega_0, rel=1e-9)


class TestTransitionFrequencies:
    def test_axis_aligned_two_lines(self):
        sys = SpinSystem(WP.omega_q, WP.omega_0, 0.0)
        nu = transition_frequencies(sys)
        assert nu["12"] == pytest.approx(sys.omega_q - sys.omega_0)
        assert nu["34"] == pytest.approx(sys.omega_q + sys.omega_0)
        # f- weighted lines sit further out but carry no amplitude at theta=0
        assert nu["13"] == pytest.approx(sys.omega_q - 2 * sys.omega_0)
        assert nu["24"] == pytest.approx(sys.omega_q + 2 * sys.omega_0)
        assert f_factors(0.0)[1] == pytest.approx(0.0)

    def test_working_point_even_spacing(self):
        nu = sorted(transition_frequencies(WP).values())
        spacings = np.diff(nu)
        target = 3 * WP.omega_0 * np.cos(WP.theta)
        assert np.allclose(spacings, target, rtol=1e-10)

    def test_degenerate_without_field(self):
        sys = SpinSystem(WP.omega_q, 0.0, 0.3)
        nu = transition_frequencies(sys)
        assert np.allclose(list(nu.values()), sys.omega_q)


class TestHatFrame:
    def test_hat_rf_matches_closed_form(self):
        for theta in THETA_GRID:
            sys = SpinSystem(WP.omega_q, WP.omega_0, theta)
            for alpha, phi in ((0.0, 0.0), (0.7, 0.0), (0.4, 1.9)):
                got = hat_rf(sys, omega_1=2 * np.pi * 20e3, alpha=alpha, phi=phi)
                ref = eq21_matrix(theta, 2 * np.pi * 20e3, alpha, phi)
                scale = np.max(np.abs(ref))
                assert np.max(np.abs(got - ref)) < 1e-12 * scale

    def test_theta_zero_reduces_to_satellite_form(self):
        # at theta = 0 the mixing vanishes; R is diag(1, 1, -1, 1), so the hat
        # operator equals the satellite form up to that basis-sign flip
        sys = SpinSystem(WP.omega_q, WP.omega_0, 0.0)
        sign = np.diag([1.0, 1.0, -1.0, 1.0])
        assert np.allclose(hat_rf(sys, 1.0), sign @ secular_rf(1.0) @ sign, atol=1e-14)

    def test_working_point_entries(self):
        got = hat_rf(WP, omega_1=1.0)
        fp, fm = np.sqrt(7.0 / 12.0), np.sqrt(5.0 / 12.0)
        assert got[0, 1] == pytest.approx(-np.sqrt(3) / 2 * fp)
        assert got[0, 2] == pytest.approx(-np.sqrt(3) / 2 * fm)
        assert got[1, 3] == pytest.approx(-np.sqrt(3) / 2 * fm)
        assert got[2, 3] == pytest.approx(np.sqrt(3) / 2 * fp)

    def test_hermitian(self):
        h = hat_rf(WP, 2 * np.pi * 10e3, 0.3, 0.9)
        assert hermiticity_defect(h) < 1e-13 * np.max(np.abs(h))


class TestEquilibriumDeviation:
    def test_shape_and_trace(self):
        rho = equilibrium_deviation(WP)
        assert rho.frame is Frame.HAT
        assert np.allclose(rho.matrix, np.diag([1.0, -1.0, -1.0, 1.0]))
        assert abs(np.trace(rho.matrix)) < 1e-14

    def test_commutes_with_static_hamiltonian_at_theta_zero(self):
        sys = SpinSystem(WP.omega_q, WP.omega_0, 0.0)
        h = hat_h0(sys, delta_wq=0.0)
        rho = equilibrium_deviation(sys).matrix
        assert np.max(np.abs(h @ rho - rho @ h)) < 1e-13 * np.max(np.abs(h))


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        bad = np.zeros((4, 4), dtype=complex)
        bad[0, 1] = 1.0
        with pytest.raises(ValueError):
            DensityMatrix(bad)

    def test_rejects_traceful(self):
        with pytest.raises(ValueError):
            DensityMatrix(np.eye(4, dtype=complex))
