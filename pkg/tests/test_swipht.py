import numpy as np
import pytest
from numpy.testing import assert_allclose

from tbpc2sim.constants import TWO_PI
from tbpc2sim.dynamics import TimeGrid, propagate
from tbpc2sim.swipht import (
    DIMENSIONLESS_DURATION,
    Pulse,
    SingularityError,
    SwiphtParams,
    analytic_unitary,
    chi,
    make_pulse,
    omega,
    pulse_area,
    solve_parameters,
    validate,
)

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SZ = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


def two_level_hamiltonian(p):
    """The rotating-frame generator the analytic solution is exact for."""

    def h(t):
        t_arr = np.atleast_1d(t)
        out = omega(t_arr, p)[:, None, None] * SX[None, :, :] - (
            abs(p.delta) / 2.0
        ) * SZ[None, :, :]
        return out if np.ndim(t) else out[0]

    return h


@pytest.fixture(scope="module")
def solved_1mhz():
    return solve_parameters(TWO_PI * 1.0)


class TestChi:
    def test_boundary_conditions(self, solved_1mhz):
        for t in (0.0, solved_1mhz.tau_us):
            value, d1, d2 = chi(t, solved_1mhz)
            assert_allclose(value, np.pi / 4, atol=1e-14)
            assert abs(d1) < 1e-14
            assert abs(d2) < 1e-12

    def test_midpoint_symmetry_maximum(self, solved_1mhz):
        p = solved_1mhz
        value, d1, _ = chi(p.tau_us / 2.0, p)
        assert_allclose(value, p.c / 256.0 + np.pi / 4.0, rtol=1e-12)
        assert abs(d1) < 1e-12

    def test_domain_check(self, solved_1mhz):
        with pytest.raises(ValueError):
            chi(-0.1 * solved_1mhz.tau_us, solved_1mhz)
        with pytest.raises(ValueError):
            chi(1.1 * solved_1mhz.tau_us, solved_1mhz)


class TestOmega:
    def test_vanishes_at_endpoints(self, solved_1mhz):
        p = solved_1mhz
        assert abs(omega(0.0, p)) < 1e-10 * abs(p.delta)
        assert abs(omega(p.tau_us, p)) < 1e-10 * abs(p.delta)

    def test_time_symmetry(self, solved_1mhz):
        p = solved_1mhz
        ts = np.linspace(0.0, p.tau_us, 501)
        w = omega(ts, p)
        assert np.max(np.abs(w - w[::-1])) < 1e-10 * np.max(np.abs(w))

    def test_singularity_error_names_time(self):
        p = SwiphtParams(c=1e4, tau_us=DIMENSIONLESS_DURATION / TWO_PI, delta=TWO_PI)
        ts = np.linspace(0.0, p.tau_us, 101)
        with pytest.raises(SingularityError) as err:
            omega(ts, p)
        assert 0.0 <= err.value.t_us <= p.tau_us


class TestSolveParameters:
    def test_reproduces_published_constants(self, solved_1mhz):
        assert abs(solved_1mhz.c - 138.9) / 138.9 < 0.005
        assert abs(solved_1mhz.tau_us * abs(solved_1mhz.delta) - 5.87) / 5.87 < 0.005

    def test_pulse_area_is_half_pi(self, solved_1mhz):
        assert abs(pulse_area(solved_1mhz) - np.pi / 2.0) < 1e-6

    def test_scale_covariance(self, solved_1mhz):
        doubled = solve_parameters(TWO_PI * 2.0)
        assert_allclose(doubled.c, solved_1mhz.c, rtol=1e-9)
        assert_allclose(doubled.tau_us, solved_1mhz.tau_us / 2.0, rtol=1e-12)

    def test_sign_of_delta_irrelevant(self):
        plus = solve_parameters(TWO_PI * 0.5)
        minus = solve_parameters(-TWO_PI * 0.5)
        assert_allclose(plus.c, minus.c, rtol=1e-12)
        assert_allclose(plus.tau_us, minus.tau_us, rtol=1e-12)

    def test_rejects_zero_delta(self):
        with pytest.raises(ValueError):
            solve_parameters(0.0)

    def test_single_root_in_bracket(self, recwarn):
        solve_parameters(TWO_PI * 3.0)
        assert not [w for w in recwarn.list if "multiple area roots" in str(w.message)]


class TestValidate:
    def test_solved_pulse_is_valid(self, solved_1mhz):
        report = validate(solved_1mhz)
        assert report.valid
        assert report.constraint_ratio < 1.0
        assert_allclose(report.chi_start, np.pi / 4, atol=1e-14)
        assert abs(report.chid_start) < 1e-14
        assert_allclose(report.chi_end, np.pi / 4, atol=1e-14)
        assert abs(report.area - np.pi / 2.0) < 1e-6
        assert np.isfinite(report.max_abs_omega)

    def test_zero_amplitude_is_degenerate(self):
        report = validate(SwiphtParams(c=0.0, tau_us=1.0, delta=TWO_PI))
        assert not report.valid
        assert abs(report.area) < 1e-12

    def test_oversized_amplitude_violates_constraint(self):
        p = SwiphtParams(c=1e4, tau_us=DIMENSIONLESS_DURATION / TWO_PI, delta=TWO_PI)
        report = validate(p)
        assert report.constraint_ratio > 1.0
        assert not report.valid


class TestAnalyticUnitary:
    def test_identity_at_start(self, solved_1mhz):
        assert_allclose(analytic_unitary(0.0, solved_1mhz), np.eye(2), atol=1e-12)

    def test_unitarity_along_pulse(self, solved_1mhz):
        p = solved_1mhz
        for frac in (0.1, 0.33, 0.5, 0.77, 1.0):
            u = analytic_unitary(frac * p.tau_us, p)
            assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-9

    @pytest.mark.parametrize("delta_mhz", [0.1, 1.0, 10.0, 100.0])
    def test_matches_numerical_integration(self, delta_mhz):
        # central oracle: closed-form U vs midpoint-propagated U
        p = solve_parameters(TWO_PI * delta_mhz)
        rec = propagate(
            two_level_hamiltonian(p), TimeGrid(0.0, p.tau_us, 20000), tol=1e-9, n_record=4
        )
        for t, u_num in zip(rec.times[1:], rec.unitaries[1:]):
            u_ana = analytic_unitary(t, p)
            assert np.max(np.abs(u_ana - u_num)) < 1e-6

    @pytest.mark.parametrize("delta_mhz", [0.1, 1.0, 100.0])
    def test_cyclic_evolution_at_pulse_end(self, delta_mhz):
        p = solve_parameters(TWO_PI * delta_mhz)
        u = analytic_unitary(p.tau_us, p)
        assert abs(u[0, 1]) < 1e-6
        assert abs(u[1, 0]) < 1e-6

    def test_final_unitary_from_integration_is_diagonal(self, solved_1mhz):
        p = solved_1mhz
        rec = propagate(two_level_hamiltonian(p), TimeGrid(0.0, p.tau_us, 20000), tol=1e-9)
        u = rec.final
        assert abs(u[0, 1]) < 1e-6
        assert abs(u[1, 0]) < 1e-6


class TestPulse:
    def test_make_pulse_invariants(self, solved_1mhz):
        pulse = make_pulse(solved_1mhz, omega_p=TWO_PI * 2540.0)
        assert len(pulse.times_us) == 4096
        assert np.all(np.isfinite(pulse.omega_rad_per_us))
        assert abs(pulse.area - np.pi / 2.0) < 1e-6
        meta = pulse.metadata()
        assert_allclose(meta["C"], solved_1mhz.c)
        assert_allclose(meta["delta_MHz"], 1.0, rtol=1e-12)

    def test_envelope_interpolation(self, solved_1mhz):
        pulse = make_pulse(solved_1mhz, omega_p=0.0)
        t = 0.4321 * solved_1mhz.tau_us
        assert abs(pulse.envelope(t) - omega(t, solved_1mhz)) < 1e-5 * np.max(
            np.abs(pulse.omega_rad_per_us)
        )

    def test_invalid_params_rejected(self):
        bad = SwiphtParams(c=1e4, tau_us=DIMENSIONLESS_DURATION / TWO_PI, delta=TWO_PI)
        with pytest.raises(SingularityError):
            make_pulse(bad, omega_p=0.0)
