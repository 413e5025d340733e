import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

from tbpc2sim.dynamics import (
    ConvergenceError,
    TimeGrid,
    first_peak_time,
    oscillation_frequency_mhz,
    propagate,
    rabi_frequency,
    rabi_period_formula_us,
    rabi_period_from_trace,
    rabi_simulation,
    to_interaction_picture,
    transverse_amplitude_mhz,
)
from tbpc2sim.smm import SmmParams

SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


class TestPropagate:
    def test_zero_hamiltonian_is_identity(self):
        rec = propagate(lambda t: np.zeros((3, 3)), TimeGrid(0.0, 2.0, 16), n_record=8)
        for u in rec.unitaries:
            assert_allclose(u, np.eye(3), atol=1e-14)

    def test_constant_hamiltonian_closed_form(self):
        rng = np.random.default_rng(1)
        m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        h = (m + m.conj().T) / 2
        rec = propagate(lambda t: h, TimeGrid(0.0, 1.3, 64), tol=1e-11)
        assert np.max(np.abs(rec.final - expm(-1j * h * 1.3))) < 1e-11

    def test_resonant_pi_pulse(self):
        omega0 = 2.0
        rec = propagate(lambda t: 0.5 * omega0 * SX, TimeGrid(0.0, np.pi / omega0, 64))
        psi = rec.final @ np.array([1.0, 0.0])
        assert_allclose(abs(psi[1]) ** 2, 1.0, atol=1e-10)

    def test_unitarity_of_all_records(self):
        def h(t):
            t_arr = np.atleast_1d(t)
            out = np.cos(3.0 * t_arr)[:, None, None] * SX[None, :, :]
            return out if np.ndim(t) else out[0]

        rec = propagate(h, TimeGrid(0.0, 5.0, 1024), tol=1e-8, n_record=32)
        for u in rec.unitaries:
            assert np.max(np.abs(u.conj().T @ u - np.eye(2))) < 1e-9

    def test_second_order_convergence(self):
        rng = np.random.default_rng(4)
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h_static = (m + m.conj().T) / 2

        def h(t):  # smooth time dependence with known reference
            t_arr = np.atleast_1d(t)
            out = (1.0 + 0.5 * np.sin(t_arr))[:, None, None] * h_static[None, :, :]
            return out if np.ndim(t) else out[0]

        ref = propagate(h, TimeGrid(0.0, 2.0, 4096, adaptive=False)).final
        errs = []
        for n in (16, 32, 64):
            u = propagate(h, TimeGrid(0.0, 2.0, n, adaptive=False)).final
            errs.append(np.max(np.abs(u - ref)))
        assert 3.0 < errs[0] / errs[1] < 5.0
        assert 3.0 < errs[1] / errs[2] < 5.0

    def test_tolerance_domain(self):
        with pytest.raises(ValueError):
            propagate(lambda t: SX, TimeGrid(0.0, 1.0, 4), tol=1e-2)

    def test_nonconvergence_raises_with_disagreement(self):
        def h(t):
            t_arr = np.atleast_1d(t)
            out = np.cos(1e6 * t_arr)[:, None, None] * (50.0 * SX)[None, :, :]
            return out if np.ndim(t) else out[0]

        with pytest.raises(ConvergenceError) as err:
            propagate(h, TimeGrid(0.0, 1.0, 2), tol=1e-12)
        assert err.value.disagreement > 0

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            TimeGrid(1.0, 0.5, 8)
        with pytest.raises(ValueError):
            TimeGrid(0.0, 1.0, 0)


class TestInteractionPicture:
    def test_free_evolution_maps_to_identity(self):
        rng = np.random.default_rng(9)
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        h0 = (m + m.conj().T) / 2
        rec = propagate(lambda t: h0, TimeGrid(0.0, 2.0, 128), tol=1e-10)
        rec_i = to_interaction_picture(rec, h0)
        for u in rec_i.unitaries:
            assert np.max(np.abs(u - np.eye(3))) < 1e-9

    def test_zero_frame_is_noop(self):
        rec = propagate(lambda t: 0.7 * SX, TimeGrid(0.0, 1.0, 32))
        rec_i = to_interaction_picture(rec, np.zeros((2, 2)))
        for a, b in zip(rec.unitaries, rec_i.unitaries):
            assert_allclose(a, b, atol=1e-14)

    def test_roundtrip(self):
        h0 = np.diag([0.0, 2.0, 5.0]).astype(complex)
        rec = propagate(lambda t: h0 + 0.3 * np.eye(3), TimeGrid(0.0, 1.5, 64))
        back = to_interaction_picture(to_interaction_picture(rec, h0), -h0)
        for a, b in zip(rec.unitaries, back.unitaries):
            assert np.max(np.abs(a - b)) < 1e-12

    def test_dimension_mismatch(self):
        rec = propagate(lambda t: 0.7 * SX, TimeGrid(0.0, 1.0, 8))
        with pytest.raises(ValueError):
            to_interaction_picture(rec, np.zeros((3, 3)))


class TestRabiFormulas:
    def test_resonant_period_theta_zero(self):
        p = SmmParams(theta=0.0)
        assert abs(rabi_period_formula_us(p) - 2.23) / 2.23 < 0.01

    def test_resonant_period_theta_pi_six(self):
        p = SmmParams(theta=np.pi / 6)
        assert abs(rabi_period_formula_us(p) - 2.57) / 2.57 < 0.01

    def test_zero_transverse_amplitude_limit(self):
        assert rabi_frequency(3.5, 0.0) == 3.5

    def test_monotone_in_detuning(self):
        amp = 0.45
        freqs = [rabi_frequency(d, amp) for d in (0.0, 1.0, 2.0, 4.0)]
        assert all(a < b for a, b in zip(freqs, freqs[1:]))


@pytest.fixture(scope="module")
def trace_theta0():
    return rabi_simulation(SmmParams(theta=0.0), t_max_us=2.6)


@pytest.fixture(scope="module")
def trace_theta30():
    return rabi_simulation(SmmParams(theta=np.pi / 6), t_max_us=3.0)


class TestRabiSimulation:
    def test_period_theta_zero(self, trace_theta0):
        assert abs(rabi_period_from_trace(trace_theta0) - 2.23) / 2.23 < 0.02

    def test_period_theta_pi_six(self, trace_theta30):
        assert abs(rabi_period_from_trace(trace_theta30) - 2.57) / 2.57 < 0.02

    def test_simulation_matches_formula_period(self, trace_theta0):
        formula = rabi_period_formula_us(SmmParams(theta=0.0))
        assert abs(rabi_period_from_trace(trace_theta0) - formula) / formula < 0.005

    def test_norm_conservation(self, trace_theta0):
        total = trace_theta0.populations.sum(axis=1)
        assert np.max(np.abs(total - 1.0)) < 1e-9

    def test_no_transfer_at_theta_pi_half(self):
        trace = rabi_simulation(SmmParams(theta=np.pi / 2), t_max_us=3.0)
        assert trace.p_target.max() < 1e-4

    def test_detuned_frequency_matches_formula(self):
        p = SmmParams(theta=np.pi / 6)
        amp = transverse_amplitude_mhz(p)
        for det in (2.0, -4.0):
            trace = rabi_simulation(p, detuning_mhz=det, t_max_us=0.8)
            assert (
                abs(oscillation_frequency_mhz(trace) - rabi_frequency(det, amp))
                / rabi_frequency(det, amp)
                < 0.03
            )

    def test_resonance_extremizes_transfer_and_frequency(self):
        p = SmmParams(theta=np.pi / 6)
        maxima, freqs = [], []
        for det in (-4.0, -2.0, 0.0, 2.0, 4.0):
            trace = rabi_simulation(p, detuning_mhz=det, t_max_us=1.6)
            maxima.append(trace.p_target.max())
            freqs.append(oscillation_frequency_mhz(trace))
        assert np.argmax(maxima) == 2
        assert np.argmin(freqs) == 2


class TestPeakFinding:
    def test_quadratic_interpolation(self):
        t = np.linspace(0, 1, 101)
        y = np.sin(np.pi * t / 0.62) ** 2
        assert abs(first_peak_time(t, y) - 0.31) < 1e-3

    def test_picks_first_peak_not_largest(self):
        t = np.linspace(0, 10, 2001)
        y = np.sin(np.pi * t / 2.0) ** 2 * (1 + 0.01 * t)  # later peaks higher
        assert abs(first_peak_time(t, y) - 1.0) < 0.01
