import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

from tbpc2sim.linalg_spin import (
    eig_hermitian,
    kron,
    propagator_step,
    propagator_steps_batch,
    spin_operators,
)


def random_hermitian(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (m + m.conj().T) / 2.0


class TestSpinOperators:
    def test_spin_half_is_pauli_over_two(self):
        ops = spin_operators(0.5)
        assert_allclose(ops.jz, np.diag([0.5, -0.5]), atol=1e-15)
        assert_allclose(ops.jx, np.array([[0, 0.5], [0.5, 0]]), atol=1e-15)

    def test_spin_six_dimension_and_diagonal(self):
        ops = spin_operators(6)
        assert ops.dim == 13
        assert_allclose(np.diag(ops.jz).real, np.arange(6, -7, -1), atol=1e-15)

    def test_ladder_matrix_element_spin_three_half(self):
        # <3/2|Ix|1/2> = sqrt(I(I+1) - m(m+1))/2 at m = 1/2
        ops = spin_operators(1.5)
        expected = np.sqrt(1.5 * 2.5 - 0.5 * 1.5) / 2.0
        assert_allclose(ops.jx[0, 1], expected, rtol=1e-15)
        assert_allclose(expected, np.sqrt(3) / 2.0, rtol=1e-15)

    @pytest.mark.parametrize("j", [0.5, 1.0, 1.5, 6.0])
    def test_su2_algebra_and_casimir(self, j):
        ops = spin_operators(j)
        eye = np.eye(ops.dim)
        for a, b, c in [(ops.jx, ops.jy, ops.jz), (ops.jy, ops.jz, ops.jx), (ops.jz, ops.jx, ops.jy)]:
            assert np.max(np.abs(a @ b - b @ a - 1j * c)) < 1e-12
        casimir = ops.jx @ ops.jx + ops.jy @ ops.jy + ops.jz @ ops.jz
        assert np.max(np.abs(casimir - j * (j + 1) * eye)) < 1e-12
        assert np.max(np.abs(ops.jplus - (ops.jx + 1j * ops.jy))) < 1e-12
        assert np.max(np.abs(ops.jminus - (ops.jx - 1j * ops.jy))) < 1e-12

    @pytest.mark.parametrize("bad", [-0.5, 0.3, 1.2])
    def test_rejects_non_half_integer(self, bad):
        with pytest.raises(ValueError):
            spin_operators(bad)


class TestEigHermitian:
    def test_diagonal_matrix(self):
        evals, _ = eig_hermitian(np.diag([3.0, 1.0, 2.0]))
        assert_allclose(evals, [1.0, 2.0, 3.0], atol=1e-14)

    def test_pauli_x_spectrum(self):
        evals, _ = eig_hermitian(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert_allclose(evals, [-1.0, 1.0], atol=1e-14)

    def test_reconstruction_roundtrip(self):
        rng = np.random.default_rng(7)
        m = random_hermitian(rng, 8)
        evals, evecs = eig_hermitian(m)
        assert np.max(np.abs((evecs * evals) @ evecs.conj().T - m)) < 1e-10
        # residual per eigenpair
        resid = m @ evecs - evecs * evals
        assert np.max(np.abs(resid)) < 1e-10 * np.max(np.abs(evals))

    def test_phase_convention_deterministic(self):
        rng = np.random.default_rng(3)
        m = random_hermitian(rng, 6)
        _, v1 = eig_hermitian(m)
        _, v2 = eig_hermitian(m.copy())
        assert_allclose(v1, v2, atol=0)
        piv = v1[np.argmax(np.abs(v1), axis=0), np.arange(6)]
        assert np.all(np.abs(piv.imag) < 1e-12)
        assert np.all(piv.real > 0)

    def test_rejects_non_hermitian(self):
        with pytest.raises(ValueError):
            eig_hermitian(np.array([[0.0, 1.0], [0.0, 0.0]]))

    @pytest.mark.parametrize("dim", [2, 3])
    def test_eigenvalues_match_characteristic_polynomial(self, dim):
        # independent oracle: char-poly coefficients from traces/determinant
        rng = np.random.default_rng(11 + dim)
        for _ in range(25):
            m = random_hermitian(rng, dim)
            if dim == 2:
                coeffs = [1.0, -np.trace(m).real, np.linalg.det(m).real]
            else:
                t1 = np.trace(m).real
                t2 = np.trace(m @ m).real
                coeffs = [1.0, -t1, (t1**2 - t2) / 2.0, -np.linalg.det(m).real]
            roots = np.sort(np.roots(coeffs).real)
            evals, _ = eig_hermitian(m)
            assert_allclose(evals, roots, atol=1e-10)


class TestKron:
    def test_identity_product(self):
        assert_allclose(kron(np.eye(2), np.eye(3)), np.eye(6), atol=0)

    def test_dimensions(self):
        rng = np.random.default_rng(0)
        a, b = rng.normal(size=(4, 4)), rng.normal(size=(5, 5))
        assert kron(a, b).shape == (20, 20)

    def test_mixed_product_property(self):
        rng = np.random.default_rng(5)
        a, c = (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)) for _ in range(2))
        b, d = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(2))
        lhs = kron(a, b) @ kron(c, d)
        rhs = kron(a @ c, b @ d)
        assert np.max(np.abs(lhs - rhs)) < 1e-12


class TestPropagatorStep:
    def test_zero_hamiltonian(self):
        assert_allclose(propagator_step(np.zeros((3, 3)), 1.7), np.eye(3), atol=1e-15)

    def test_two_pi_rotation_of_spin_half(self):
        omega = 2.0
        h = omega * np.diag([0.5, -0.5])
        u = propagator_step(h, 2 * np.pi / omega)
        assert_allclose(u, np.diag([np.exp(-1j * np.pi), np.exp(1j * np.pi)]), atol=1e-12)
        assert_allclose(u, -np.eye(2), atol=1e-12)

    def test_matches_scipy_expm(self):
        rng = np.random.default_rng(13)
        h = random_hermitian(rng, 6)
        dt = 0.37
        assert np.max(np.abs(propagator_step(h, dt) - expm(-1j * h * dt))) < 1e-11

    def test_unitarity_1000_random(self):
        rng = np.random.default_rng(42)
        worst = 0.0
        for _ in range(1000):
            dim = int(rng.integers(2, 33))
            u = propagator_step(random_hermitian(rng, dim), rng.uniform(0.01, 5.0))
            worst = max(worst, np.max(np.abs(u.conj().T @ u - np.eye(dim))))
        assert worst < 1e-12

    def test_batch_agrees_with_single(self):
        rng = np.random.default_rng(2)
        hs = np.stack([random_hermitian(rng, 5) for _ in range(4)])
        batch = propagator_steps_batch(hs, 0.21)
        for k in range(4):
            assert np.max(np.abs(batch[k] - propagator_step(hs[k], 0.21))) < 1e-12

    def test_rejects_nonfinite_dt(self):
        with pytest.raises(ValueError):
            propagator_step(np.eye(2), np.inf)
