"""Two molecules coupled to a common resonator mode.

The composite space is qubit1 (4 nuclear levels) x qubit2 (4) x resonator
(Fock levels 0..n_max), index = ((j1*4)+j2)*(n_max+1) + n.  The static
Hamiltonian is Jaynes-Cummings-like with an extra level-tuning term:

    H0 = omega_c a^dag a + sum_{n,j} omega_{n,j} |n,j><n,j|
         + (a + a^dag) sum_{n,j} eps_{n,j} |n,j><n,j|
         + sum_{n,j} xi_{n,j} (a^dag |n,j><n,j+1| + a |n,j+1><n,j|),

with eps_{n,j} = eta A sin(theta_n) uniform across levels and
xi_{n,j} = eta A cos(theta_n) sqrt(I(I+1) - m_j (m_j - 1)) the standard
ladder factor of the j <-> j+1 nuclear transition (m_j is the magnetic
quantum number of level j; Hermiticity makes the two rotating terms share
one coefficient).  The rotating wave approximation is built in: there are
no a^dag (qubit-raising) products.

The sweep parameter g is defined as the lowest-transition matrix element,
g = sqrt(3) eta A cos(theta), i.e. the vacuum Rabi coupling of the qubit
transition; eta follows from g.

Internally H0 is stored in rad/us; transition frequencies are reported in
GHz/MHz.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import CONSTANTS, TWO_PI
from .linalg_spin import fix_eigenvector_phases, kron
from .smm import M_I_VALUES, SmmParams, manifold_splittings

__all__ = [
    "CavityParams",
    "CoupledSystem",
    "TransitionFrequencies",
    "RateBudget",
    "CouplingEstimate",
    "LogicalIdentificationError",
    "build_coupled_hamiltonian",
    "transition_frequencies",
    "drive_structure",
    "drive_hamiltonian",
    "estimate_coupling",
    "strong_coupling_check",
    "dressed_table",
]

#: sqrt(I(I+1) - m_j (m_j - 1)) for the three nuclear transitions.
LADDER_FACTORS = np.sqrt(
    1.5 * 2.5 - M_I_VALUES[:-1] * (M_I_VALUES[:-1] - 1.0)
)  # [sqrt(3), 2, sqrt(3)]


class LogicalIdentificationError(RuntimeError):
    """A logical dressed state has bare overlap <= 0.5."""


@dataclass(frozen=True)
class CavityParams:
    """Resonator frequency (GHz), Fock cutoff, quality factor, vacuum V_rms."""

    omega_c_ghz: float
    n_max: int = 4
    q: float = 1e5
    v_rms_uv: float = 20.0

    def __post_init__(self):
        if not self.omega_c_ghz > 0:
            raise ValueError(f"omega_c must be positive, got {self.omega_c_ghz}")
        if self.n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {self.n_max}")
        if not self.q > 0:
            raise ValueError(f"Q must be positive, got {self.q}")


@dataclass
class CoupledSystem:
    """Dressed two-qubit + resonator model, immutable after construction."""

    h0: np.ndarray
    p1: SmmParams
    p2: SmmParams
    cavity: CavityParams
    g_mhz: float
    dressed_energies: np.ndarray          # rad/us, ascending
    dressed_states: np.ndarray            # columns, deterministic phases
    logical_indices: np.ndarray           # dressed indices of 00, 01, 10, 11
    logical_overlaps: np.ndarray
    qubit_drive_ops: list = field(repr=False, default=None)   # rad/us
    cavity_drive_op: np.ndarray = field(repr=False, default=None)

    @property
    def dims(self):
        return (4, 4, self.cavity.n_max + 1)

    def bare_index(self, j1: int, j2: int, n: int) -> int:
        nf = self.cavity.n_max + 1
        return (j1 * 4 + j2) * nf + n


def _qubit_level_angular(p: SmmParams) -> np.ndarray:
    """Four nuclear levels (rad/us) from the manifold splittings, zero-based."""
    nu_ghz = manifold_splittings(p.a_effective_mhz, p.p_mhz)
    levels_mhz = np.concatenate([[0.0], np.cumsum(nu_ghz) * 1e3])
    return TWO_PI * levels_mhz


def build_coupled_hamiltonian(
    p1: SmmParams, p2: SmmParams, c: CavityParams, g_mhz: float
) -> CoupledSystem:
    """Assemble H0, diagonalize, and identify the logical dressed states.

    Args:
        p1, p2: molecule parameters.  A dc_shift on p2 moves its nu_1
            transition (via A rescaling) exactly as a gate voltage would.
        c: resonator parameters.
        g_mhz: qubit-resonator coupling, defined as the lowest-transition
            matrix element sqrt(3) eta A cos(theta).

    Emits a warning when a logical dressed state populates the top Fock
    level above 1e-6 (truncation suspect).
    """
    if g_mhz < 0:
        raise ValueError(f"g must be non-negative, got {g_mhz}")
    nf = c.n_max + 1
    eye_q = np.eye(4, dtype=complex)
    eye_f = np.eye(nf, dtype=complex)
    lower_f = np.diag(np.sqrt(np.arange(1, nf)), k=1)  # annihilation a
    raise_f = lower_f.conj().T
    number_f = raise_f @ lower_f

    omega_c = TWO_PI * c.omega_c_ghz * 1e3
    h = omega_c * kron(kron(eye_q, eye_q), number_f)

    qubit_ops = []
    for slot, p in enumerate((p1, p2)):
        eta_a = TWO_PI * g_mhz / (np.sqrt(3.0) * np.cos(p.theta))   # rad/us
        eps = eta_a * np.sin(p.theta)
        xi = eta_a * np.cos(p.theta) * LADDER_FACTORS
        levels = _qubit_level_angular(p)

        diag_q = np.diag(levels).astype(complex)
        ladder_q = sum(
            xi[j] * _unit(4, j, j + 1) for j in range(3)
        )  # |j><j+1|, lowers the qubit
        drive_q = eps * eye_q + ladder_q + ladder_q.conj().T

        def lift(op_q, slot=slot):
            parts = [eye_q, eye_q]
            parts[slot] = op_q
            return kron(kron(parts[0], parts[1]), eye_f)

        h += lift(diag_q)
        h += eps * kron(kron(eye_q, eye_q), lower_f + raise_f)
        h += kron(kron(*_slot(ladder_q, slot)), raise_f)
        h += kron(kron(*_slot(ladder_q.conj().T, slot)), lower_f)
        qubit_ops.append(lift(drive_q))

    evals, evecs = np.linalg.eigh(h)
    evecs = fix_eigenvector_phases(evecs)

    dim = 16 * nf
    logical_indices = np.empty(4, dtype=int)
    logical_overlaps = np.empty(4)
    for pos, (j1, j2) in enumerate([(0, 0), (0, 1), (1, 0), (1, 1)]):
        bare = np.zeros(dim)
        bare[(j1 * 4 + j2) * nf] = 1.0
        ov = np.abs(evecs.conj().T @ bare) ** 2
        k = int(np.argmax(ov))
        logical_indices[pos] = k
        logical_overlaps[pos] = ov[k]
        top_fock = np.sum(np.abs(evecs[nf - 1 :: nf, k]) ** 2)
        if top_fock > 1e-6:
            warnings.warn(
                f"logical state |{j1}{j2}> holds {top_fock:.2e} population in "
                f"the top Fock level; increase n_max beyond {c.n_max}",
                stacklevel=2,
            )

    cavity_op = kron(kron(eye_q, eye_q), lower_f + raise_f).astype(complex)
    return CoupledSystem(
        h0=h,
        p1=p1,
        p2=p2,
        cavity=c,
        g_mhz=g_mhz,
        dressed_energies=evals,
        dressed_states=evecs,
        logical_indices=logical_indices,
        logical_overlaps=logical_overlaps,
        qubit_drive_ops=qubit_ops,
        cavity_drive_op=cavity_op,
    )


def _unit(dim: int, row: int, col: int) -> np.ndarray:
    out = np.zeros((dim, dim), dtype=complex)
    out[row, col] = 1.0
    return out


def _slot(op_q: np.ndarray, slot: int):
    parts = [np.eye(4, dtype=complex), np.eye(4, dtype=complex)]
    parts[slot] = op_q
    return parts


@dataclass(frozen=True)
class TransitionFrequencies:
    """Target / unwanted transition frequencies and their signed difference."""

    f_target_ghz: float
    f_unwanted_ghz: float
    delta_mhz: float


def transition_frequencies(s: CoupledSystem) -> TransitionFrequencies:
    """Frequencies of |00>~ <-> |01>~ (target) and |10>~ <-> |11>~ (unwanted).

    delta = f_unwanted - f_target (signed); it vanishes at g = 0 for
    unshifted identical qubits and grows with the coupling.
    """
    bad = np.nonzero(s.logical_overlaps <= 0.5)[0]
    if bad.size:
        labels = ["00", "01", "10", "11"]
        raise LogicalIdentificationError(
            f"logical state |{labels[bad[0]]}> has bare overlap "
            f"{s.logical_overlaps[bad[0]]:.3f} <= 0.5 "
            f"(dressed index {s.logical_indices[bad[0]]})"
        )
    e = s.dressed_energies[s.logical_indices]  # rad/us, order 00 01 10 11
    w_target = e[1] - e[0]
    w_unwanted = e[3] - e[2]
    return TransitionFrequencies(
        f_target_ghz=w_target / TWO_PI / 1e3,
        f_unwanted_ghz=w_unwanted / TWO_PI / 1e3,
        delta_mhz=(w_unwanted - w_target) / TWO_PI,
    )


def drive_structure(s: CoupledSystem, lambdas=(0.0, 0.0, 1.0)) -> np.ndarray:
    """Static operator multiplying Omega(t) cos(omega_p t) in the drive.

    lambdas = (lambda_c, lambda_1, lambda_2); the qubit parts reuse the
    eps/xi coefficients of H0 but carry no cavity operators (the pulse
    couples to the molecules directly).
    """
    lam_c, lam_1, lam_2 = lambdas
    v = lam_c * s.cavity_drive_op + lam_1 * s.qubit_drive_ops[0] + lam_2 * s.qubit_drive_ops[1]
    return v


def drive_hamiltonian(s: CoupledSystem, pulse, lambdas=(0.0, 0.0, 1.0)):
    """Time-dependent drive generator H_p(t), batched-callable (rad/us)."""
    v = drive_structure(s, lambdas)

    def h_p(t):
        t_arr = np.asarray(t, dtype=float)
        coeff = pulse.envelope(t_arr) * np.cos(pulse.omega_p * t_arr)
        if t_arr.ndim == 0:
            return coeff * v
        return coeff[:, None, None] * v[None, :, :]

    return h_p


@dataclass(frozen=True)
class CouplingEstimate:
    """Qubit-resonator coupling estimate and the effective hyperfine field."""

    g_khz: float
    b_eff_t: float


def estimate_coupling(
    a_mhz: float = 518.8,
    m_j: int = 6,
    sensitivity_per_uv: float = 1e-6,
    v_rms_uv: float = 20.0,
    g_n: float = 1.354,
) -> CouplingEstimate:
    """g/2pi (kHz) from the Stark sensitivity of the hyperfine constant.

    g = sensitivity * V_rms * |m_J| * A; the defaults compose to the
    2e-5 |m_J| A estimate (~60 kHz).  The report also carries
    B_eff = A J / (g_N mu_N), the effective magnetic field the nuclear
    spin feels from the electronic magnetization (~300 T), which shows
    why electric driving outpaces micro-coil magnetic driving.
    """
    if a_mhz <= 0 or sensitivity_per_uv < 0 or v_rms_uv < 0:
        raise ValueError("estimate_coupling inputs must be positive")
    g_khz = sensitivity_per_uv * v_rms_uv * abs(m_j) * a_mhz * 1e3
    b_eff_t = a_mhz * abs(m_j) / (g_n * CONSTANTS.mu_n_over_h)
    return CouplingEstimate(g_khz=float(g_khz), b_eff_t=float(b_eff_t))


@dataclass(frozen=True)
class RateBudget:
    """Coupling vs. loss rates; strong coupling iff g exceeds both."""

    g_khz: float
    kappa_khz: float
    gamma_khz: float
    strong_coupling: bool


def strong_coupling_check(g_khz: float, c: CavityParams, t2_star_ms: float) -> RateBudget:
    """kappa/2pi = omega_c/Q and gamma/2pi = 1/T2*, compared against g."""
    if g_khz <= 0 or t2_star_ms <= 0:
        raise ValueError("rates require positive g and T2*")
    kappa_khz = c.omega_c_ghz * 1e6 / c.q
    gamma_khz = 1.0 / t2_star_ms
    return RateBudget(
        g_khz=float(g_khz),
        kappa_khz=float(kappa_khz),
        gamma_khz=float(gamma_khz),
        strong_coupling=bool(g_khz > kappa_khz and g_khz > gamma_khz),
    )


def dressed_table(s: CoupledSystem) -> list:
    """Rows (index, energy_GHz, bare_label, overlap) for the dressed states."""
    nf = s.cavity.n_max + 1
    rows = []
    for k in range(len(s.dressed_energies)):
        amp = np.abs(s.dressed_states[:, k]) ** 2
        b = int(np.argmax(amp))
        j1, rem = divmod(b, 4 * nf)
        j2, n = divmod(rem, nf)
        rows.append(
            (
                k,
                s.dressed_energies[k] / TWO_PI / 1e3,
                f"{j1}{j2};{n}",
                float(amp[b]),
            )
        )
    return rows
