"""Single-molecule model: level structure, hyperfine control, Stark shifts.

The electronic degree of freedom is reduced to the ground doublet
{|m_J=+6>, |m_J=-6>} (the first excited doublet sits ~600 K above), so one
molecule lives in an 8-dimensional space: 2 electronic x 4 nuclear
(I = 3/2) states.  The off-diagonal ligand field enters as a tunnel
splitting ``delta_t`` coupling equal-m_I pairs, which opens the avoided
crossings used for initialization/readout.

Units: energies/levels in GHz (E/h), hyperfine constants in MHz, fields in
Tesla.  ``control_hamiltonian`` is the one angular-frequency interface
(rad/us), since it feeds the propagator directly.

Basis conventions (descending m everywhere):
    electronic: (+6, -6); nuclear: m_I = +3/2, +1/2, -1/2, -3/2.
    product index = electronic_index * 4 + nuclear_index.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import linear_sum_assignment

from .constants import CONSTANTS, TWO_PI
from .linalg_spin import eig_hermitian, kron, spin_operators

__all__ = [
    "SmmParams",
    "LevelDiagram",
    "AvoidedCrossing",
    "CalibrationError",
    "CrossingProximityWarning",
    "build_full_hamiltonian",
    "effective_levels",
    "manifold_splittings",
    "calibrate_hyperfine",
    "sweep_spectrum",
    "find_avoided_crossings",
    "control_hamiltonian",
    "stark_shift",
]

J_ELECTRONIC = 6
I_NUCLEAR = 1.5

#: Nuclear m_I values in basis order.
M_I_VALUES = np.array([1.5, 0.5, -0.5, -1.5])

#: Electronic m_J values of the ground doublet in basis order.
M_J_VALUES = np.array([6.0, -6.0])

_NUC = spin_operators(I_NUCLEAR)


class CalibrationError(ValueError):
    """Raised when a splitting triple is inconsistent with the level model."""


class CrossingProximityWarning(UserWarning):
    """Requested field sits within a few gap-widths of an avoided crossing."""


@dataclass(frozen=True)
class SmmParams:
    """Physical constants of one molecule.

    Attributes:
        a_mhz: hyperfine constant A (MHz, linear frequency).  The default
            518.8 MHz is 24.9 mK * kB/h and reproduces the measured Rabi
            periods at eta = 1e-3.
        p_mhz: quadrupole constant P (MHz).  The default 272.5 MHz is
            calibrated from the splitting triple (2.54, 3.09, 3.63) GHz;
            the quoted 0.4 mK (~8.3 MHz) is inconsistent with those
            splittings and is not used.
        g_l: electronic g-factor.
        g_n: nuclear g-factor.
        theta: hyperfine anisotropy angle (rad), theta = arctan(A/A_xz).
        eta: dimensionless drive strength.
        delta_t_mhz: electronic tunnel splitting (MHz); default is
            1 uK * kB/h = 0.0208 MHz.
        da_over_a_per_mv: Stark sensitivity d(A)/A per mV of gate voltage.
        dc_shift_mhz: additive shift of the nu_1 transition frequency,
            realized by rescaling A (dc Stark tuning knob).
    """

    a_mhz: float = 518.8
    p_mhz: float = 272.5
    g_l: float = 1.5
    g_n: float = 1.354
    theta: float = np.pi / 6
    eta: float = 1e-3
    delta_t_mhz: float = 1e-6 * CONSTANTS.kb_over_h * 1e3
    da_over_a_per_mv: float = 2.3e-3 / 16.0
    dc_shift_mhz: float = 0.0

    j: int = field(default=J_ELECTRONIC, init=False)
    i: float = field(default=I_NUCLEAR, init=False)

    def __post_init__(self):
        if not self.a_mhz > 0:
            raise ValueError(f"A must be positive, got {self.a_mhz} MHz")
        if not 0.0 <= self.theta <= np.pi / 2:
            raise ValueError(f"theta must lie in [0, pi/2], got {self.theta}")
        if self.eta < 0:
            raise ValueError(f"eta must be non-negative, got {self.eta}")
        if self.delta_t_mhz < 0:
            raise ValueError(f"delta_t must be non-negative, got {self.delta_t_mhz}")

    @property
    def a_effective_mhz(self) -> float:
        """Hyperfine constant including the dc Stark shift of nu_1.

        nu_1 = 6A - 2P, so shifting nu_1 by dc_shift_mhz means
        A -> A + dc_shift_mhz / 6.
        """
        return self.a_mhz + self.dc_shift_mhz / 6.0

    def with_dc_shift(self, dc_shift_mhz: float) -> "SmmParams":
        return replace(self, dc_shift_mhz=dc_shift_mhz)


@dataclass
class AvoidedCrossing:
    """Anticrossing between equal-m_I states of the +-6 doublet."""

    b_center_t: float
    gap_mhz: float
    nuclear_projection: float


@dataclass
class LevelDiagram:
    """Zeeman diagram of the lowest eight electron-nuclear levels.

    ``levels`` has shape (n_points, 8) in GHz, sorted ascending per field
    point.  ``labels[k][i]`` is the (m_J, m_I) product label assigned to
    level i at field point k by maximum overlap.
    """

    b_values: np.ndarray
    levels: np.ndarray
    labels: list
    params: SmmParams
    crossings: list = field(default_factory=list)


def _product_labels():
    return [(mj, mi) for mj in M_J_VALUES for mi in M_I_VALUES]


def build_full_hamiltonian(p: SmmParams, b_field, ligand_field=None) -> np.ndarray:
    """8x8 molecule Hamiltonian in GHz (E/h).

    H = g_l mu_B B_z Jz (x) 1  +  A Jz (x) Iz  +  P (Iz^2 - I(I+1)/3)
        + (delta_t/2)(|+6><-6| + h.c.) (x) 1.

    Only B_z enters: transverse Zeeman components have no matrix elements
    within the {m_J = +-6} doublet (Delta m_J = 12).

    Args:
        p: molecule parameters.
        b_field: magnetic field; scalar B_z or a 3-vector (T), z taken.
        ligand_field: optional 2x2 Hermitian array (GHz) in the (+6, -6)
            electronic basis replacing the default tunnel-splitting term.
            Hook for supplying calibrated ligand-field data; no dataset of
            Stevens coefficients ships with the package.
    """
    b = np.atleast_1d(np.asarray(b_field, dtype=float))
    if not np.all(np.isfinite(b)):
        raise ValueError(f"magnetic field must be finite, got {b_field}")
    b_z = float(b[2]) if b.size == 3 else float(b[0])

    a_ghz = p.a_effective_mhz / 1e3
    p_ghz = p.p_mhz / 1e3
    dt_ghz = p.delta_t_mhz / 1e3

    jz_e = np.diag(M_J_VALUES).astype(complex)
    eye_e = np.eye(2, dtype=complex)
    eye_n = np.eye(4, dtype=complex)
    iz = _NUC.jz
    quad = iz @ iz - (I_NUCLEAR * (I_NUCLEAR + 1) / 3.0) * eye_n

    h = p.g_l * CONSTANTS.mu_b_over_h * b_z * kron(jz_e, eye_n)
    h += a_ghz * kron(jz_e, iz)
    h += p_ghz * kron(eye_e, quad)
    if ligand_field is not None:
        lf = np.asarray(ligand_field, dtype=complex)
        if lf.shape != (2, 2):
            raise ValueError(f"ligand_field must be 2x2, got {lf.shape}")
        h += kron(lf, eye_n)
    else:
        tunnel = np.array([[0.0, dt_ghz / 2.0], [dt_ghz / 2.0, 0.0]], dtype=complex)
        h += kron(tunnel, eye_n)
    return h


def crossing_fields(p: SmmParams) -> dict:
    """Field positions of the four equal-m_I crossings, {m_I: B* (T)}.

    From degeneracy of the diagonal model:  B* = -A m_I / (g_l mu_B).
    """
    a_ghz = p.a_effective_mhz / 1e3
    return {mi: -a_ghz * mi / (p.g_l * CONSTANTS.mu_b_over_h) for mi in M_I_VALUES}


def effective_levels(p: SmmParams, b_z: float) -> np.ndarray:
    """Four m_J = -6 eigenvalues (GHz), ascending.

    Valid away from avoided crossings; a CrossingProximityWarning is
    emitted if ``b_z`` sits within 3 gap-widths of one.
    """
    width_t = (p.delta_t_mhz / 1e3) / (12.0 * p.g_l * CONSTANTS.mu_b_over_h)
    for mi, b_star in crossing_fields(p).items():
        if abs(b_z - b_star) < 3.0 * width_t:
            warnings.warn(
                f"B_z = {b_z:g} T lies within 3 gap-widths of the m_I = {mi} "
                f"avoided crossing at {b_star:g} T",
                CrossingProximityWarning,
                stacklevel=2,
            )
    h = build_full_hamiltonian(p, b_z)
    evals, evecs = eig_hermitian(h)
    # weight on the m_J = -6 electronic block (second half of the basis)
    weight_minus = np.sum(np.abs(evecs[4:, :]) ** 2, axis=0)
    idx = np.argsort(weight_minus)[-4:]
    return np.sort(evals[idx])


def manifold_splittings(a_mhz: float, p_mhz: float) -> np.ndarray:
    """(nu_1, nu_2, nu_3) in GHz for the m_J = -6 manifold.

    E(m_I) = -6 A m_I + P (m_I^2 - 5/4) gives nu = (6A-2P, 6A, 6A+2P).
    """
    a, p = a_mhz / 1e3, p_mhz / 1e3
    return np.array([6 * a - 2 * p, 6 * a, 6 * a + 2 * p])


def calibrate_hyperfine(nu1_ghz: float, nu2_ghz: float, nu3_ghz: float):
    """Invert the level spacings to (A, P) in MHz.

    The linear+quadrupole model fixes nu_1 + nu_3 = 2 nu_2; triples
    violating that identity by more than 1% are rejected.
    """
    residual = abs(nu1_ghz + nu3_ghz - 2.0 * nu2_ghz)
    if residual > 0.01 * nu2_ghz:
        raise CalibrationError(
            f"splittings ({nu1_ghz}, {nu2_ghz}, {nu3_ghz}) GHz violate "
            f"nu1 + nu3 = 2 nu2 by {residual:g} GHz (> 1%)"
        )
    a_mhz = nu2_ghz / 6.0 * 1e3
    p_mhz = (nu3_ghz - nu1_ghz) / 4.0 * 1e3
    return a_mhz, p_mhz


def sweep_spectrum(p: SmmParams, b_min_t: float, b_max_t: float, n_points: int) -> LevelDiagram:
    """Diagonalize over a field range and label levels by max overlap."""
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    b_values = np.linspace(b_min_t, b_max_t, n_points)
    product = _product_labels()
    levels = np.empty((n_points, 8))
    labels = []
    for k, b in enumerate(b_values):
        evals, evecs = eig_hermitian(build_full_hamiltonian(p, b))
        levels[k] = evals
        # bijective label assignment: maximize total overlap with the
        # product basis (robust through the crossing regions)
        overlap = np.abs(evecs) ** 2  # overlap[s, i] = |<product s|level i>|^2
        rows, cols = linear_sum_assignment(-overlap)
        level_labels = [None] * 8
        for s, i in zip(rows, cols):
            level_labels[i] = product[s]
        labels.append(level_labels)
    return LevelDiagram(b_values=b_values, levels=levels, labels=labels, params=p)


def _pair_gap_ghz(p: SmmParams, b_z: float, mi: float) -> float:
    """Gap between the two eigenstates dominated by the (+-6, mi) pair."""
    h = build_full_hamiltonian(p, b_z)
    evals, evecs = eig_hermitian(h)
    ni = int(np.argmax(M_I_VALUES == mi))
    weight = np.abs(evecs[ni, :]) ** 2 + np.abs(evecs[4 + ni, :]) ** 2
    a, b = np.argsort(weight)[-2:]
    return abs(evals[a] - evals[b])


def _golden_minimize(fun, lo: float, hi: float, xtol: float):
    """Plain golden-section minimization of a unimodal scalar function."""
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    while (b - a) > xtol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    x = 0.5 * (a + b)
    return x, fun(x)


def find_avoided_crossings(diagram: LevelDiagram, xtol_t: float = 1e-12) -> list:
    """Locate gap minima of equal-m_I pairs and refine to ``xtol_t``.

    Scans the sampled diagram for interior local minima of the pair gap,
    then refines each candidate by golden-section search on the exact gap.
    The default field tolerance is far below the required 1e-6 T so that
    the reported gap is meaningful even for delta_t = 0, where the
    minimum is a V-shape and the gap at the returned field scales with
    the remaining field error.  Returns AvoidedCrossing entries sorted by
    field; empty list when the scanned window contains no minima.
    """
    p = diagram.params
    b = diagram.b_values
    out = []
    for mi in M_I_VALUES:
        gaps = np.empty(len(b))
        for k in range(len(b)):
            pair = [
                i
                for i, lab in enumerate(diagram.labels[k])
                if lab is not None and lab[1] == mi
            ]
            # away from crossings labels are bijective: exactly one +6 and
            # one -6 state carry this m_I
            e = sorted(diagram.levels[k][i] for i in pair[:2])
            gaps[k] = e[-1] - e[0] if len(e) == 2 else np.inf
        for k in range(1, len(b) - 1):
            if gaps[k] <= gaps[k - 1] and gaps[k] < gaps[k + 1]:
                b_c, gap = _golden_minimize(
                    lambda x, mi=mi: _pair_gap_ghz(p, x, mi), b[k - 1], b[k + 1], xtol_t
                )
                out.append(
                    AvoidedCrossing(
                        b_center_t=b_c, gap_mhz=gap * 1e3, nuclear_projection=mi
                    )
                )
    out.sort(key=lambda c: c.b_center_t)
    return out


def control_hamiltonian(p: SmmParams, t: float, omega_p: float) -> np.ndarray:
    """Electric-drive Hamiltonian in the m_J = -6 nuclear space (rad/us).

    H_c(t) = eta A cos(omega_p t) (sin(theta) Iz + cos(theta) Ix), where
    the drive direction encodes the hyperfine anisotropy: a purely
    diagonal hyperfine tensor (theta = pi/2) leaves no transition matrix
    elements, so electric driving requires an off-diagonal component.

    Args:
        p: molecule parameters (A enters in angular units, 2*pi * MHz).
        t: time (us).
        omega_p: drive angular frequency (rad/us).
    """
    a_ang = TWO_PI * p.a_effective_mhz
    direction = np.sin(p.theta) * _NUC.jz + np.cos(p.theta) * _NUC.jx
    return p.eta * a_ang * np.cos(omega_p * t) * direction


def stark_shift(p: SmmParams, da_over_a: float) -> float:
    """Change of nu_1 (MHz) when A -> A (1 + da_over_a), P held fixed.

    The scaling acts on A only: the 7.16 MHz calibration point
    back-solves to 6 A (dA/A) exactly, which scaling P as well would not
    reproduce.
    """
    if abs(da_over_a) >= 0.1:
        raise ValueError(f"|dA/A| must be < 0.1, got {da_over_a}")
    a = p.a_effective_mhz
    nu_before = manifold_splittings(a, p.p_mhz)[0]
    nu_after = manifold_splittings(a * (1.0 + da_over_a), p.p_mhz)[0]
    return (nu_after - nu_before) * 1e3
