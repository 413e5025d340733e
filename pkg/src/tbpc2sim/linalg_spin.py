"""Spin operators and the dense Hermitian linear-algebra kernel.

Everything downstream (molecule Hamiltonians, cavity models, propagators)
runs through the routines here: angular-momentum matrices, Hermitian
eigendecomposition with a deterministic phase convention, Kronecker
products and the unitary step propagator exp(-i H dt).

All matrices are dense ``numpy`` arrays of ``complex128``.  The basis for
spin operators is ordered by descending magnetic quantum number
(m = j, j-1, ..., -j).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpinOperatorSet",
    "spin_operators",
    "eig_hermitian",
    "kron",
    "propagator_step",
    "hermiticity_defect",
]

#: Relative tolerance for accepting a matrix as Hermitian.
HERMITICITY_RTOL = 1e-12


@dataclass(frozen=True)
class SpinOperatorSet:
    """Dense spin-j matrices in units of hbar, basis ordered by descending m."""

    j: float
    dim: int
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray

    @property
    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order (descending)."""
        return np.arange(self.j, -self.j - 1, -1.0)


def spin_operators(j: float) -> SpinOperatorSet:
    """Build the spin-j operator set from the ladder construction.

    Args:
        j: spin quantum number; 2j must be a non-negative integer.

    Returns:
        SpinOperatorSet with Jz diagonal (j, j-1, ..., -j) and
        J+- = Jx +- i Jy satisfying the su(2) algebra to round-off.
    """
    two_j = 2.0 * j
    if j < 0 or abs(two_j - round(two_j)) > 1e-12:
        raise ValueError(f"spin must be a non-negative half-integer, got j={j}")
    dim = int(round(two_j)) + 1
    m = np.arange(j, -j - 1, -1.0)
    jz = np.diag(m).astype(complex)
    # <m|J+|m-1> = sqrt(j(j+1) - m(m-1)); with descending order J+ is
    # superdiagonal (raising m moves one index up).
    up = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] - 1.0))
    jplus = np.diag(up, k=1).astype(complex)
    jminus = jplus.conj().T
    jx = 0.5 * (jplus + jminus)
    jy = -0.5j * (jplus - jminus)
    return SpinOperatorSet(j=j, dim=dim, jx=jx, jy=jy, jz=jz, jplus=jplus, jminus=jminus)


def hermiticity_defect(mat: np.ndarray) -> float:
    """max|M - M^dag| relative to max|M| (absolute if M is zero)."""
    mat = np.asarray(mat)
    scale = np.max(np.abs(mat))
    defect = np.max(np.abs(mat - mat.conj().T))
    return defect / scale if scale > 0 else defect


def eig_hermitian(mat: np.ndarray, rtol: float = HERMITICITY_RTOL):
    """Eigendecomposition of a Hermitian matrix with deterministic phases.

    Args:
        mat: square Hermitian matrix (checked to ``rtol``).
        rtol: allowed relative Hermiticity defect.

    Returns:
        (eigenvalues, eigenvectors): eigenvalues ascending, eigenvectors in
        columns, each phased so its largest-magnitude component is real
        and positive.

    Raises:
        ValueError: if the input is not Hermitian within tolerance.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    if hermiticity_defect(mat) > rtol:
        raise ValueError(
            f"matrix is not Hermitian within rtol={rtol} "
            f"(defect {hermiticity_defect(mat):.3e})"
        )
    evals, evecs = np.linalg.eigh(mat)
    evecs = fix_eigenvector_phases(evecs)
    return evals, evecs


def fix_eigenvector_phases(evecs: np.ndarray) -> np.ndarray:
    """Phase each column so its largest-magnitude entry is real positive."""
    evecs = np.array(evecs, dtype=complex)
    idx = np.argmax(np.abs(evecs), axis=0)
    pivots = evecs[idx, np.arange(evecs.shape[1])]
    phases = pivots / np.abs(pivots)
    return evecs / phases[None, :]


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product, (A x B)[(i*rB+k),(j*cB+l)] = A[i,j] B[k,l]."""
    return np.kron(np.asarray(a), np.asarray(b))


def propagator_step(h: np.ndarray, dt: float, rtol: float = HERMITICITY_RTOL) -> np.ndarray:
    """exp(-i H dt) for Hermitian H (angular-frequency units).

    Computed through the eigendecomposition, which keeps the result unitary
    to round-off for the small dense matrices used here.
    """
    if not np.isfinite(dt):
        raise ValueError(f"dt must be finite, got {dt}")
    evals, evecs = eig_hermitian(h, rtol=rtol)
    phases = np.exp(-1j * evals * dt)
    return (evecs * phases) @ evecs.conj().T


def propagator_steps_batch(hs: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i H dt) for a stack of Hermitian matrices, shape (n, d, d).

    No Hermiticity check (hot path); callers guarantee Hermitian input.
    """
    evals, evecs = np.linalg.eigh(hs)
    phases = np.exp(-1j * evals * dt)
    return np.einsum("nij,nj,nkj->nik", evecs, phases, evecs.conj())
