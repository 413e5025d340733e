"""Desk-scale simulator for electrically driven TbPc2 nuclear-spin qubits.

Submodules:
    linalg_spin  spin operators and the dense Hermitian kernel
    smm          single-molecule levels, control, Stark shifts
    dynamics     Schrodinger propagation and Rabi simulations
    cavity       two qubits + resonator, dressed states, rate budget
    swipht       analytic pulse synthesis for the fast CNOT
    gates        CNOT simulation, fidelity, coupling sweeps
    cli          command-line entry points and config files
"""

from .cavity import (
    CavityParams,
    CoupledSystem,
    CouplingEstimate,
    RateBudget,
    TransitionFrequencies,
    build_coupled_hamiltonian,
    drive_hamiltonian,
    estimate_coupling,
    strong_coupling_check,
    transition_frequencies,
)
from .constants import CONSTANTS, PhysicalConstants
from .dynamics import (
    EvolutionRecord,
    RabiTrace,
    TimeGrid,
    propagate,
    rabi_frequency,
    rabi_period_formula_us,
    rabi_simulation,
    to_interaction_picture,
)
from .gates import (
    CNOT_ONE_CONTROL,
    CNOT_ZERO_CONTROL,
    GateResult,
    SweepTable,
    optimize_local_gates,
    pedersen_fidelity,
    simulate_cnot,
    sweep,
)
from .linalg_spin import SpinOperatorSet, eig_hermitian, kron, propagator_step, spin_operators
from .smm import (
    AvoidedCrossing,
    LevelDiagram,
    SmmParams,
    build_full_hamiltonian,
    calibrate_hyperfine,
    control_hamiltonian,
    effective_levels,
    find_avoided_crossings,
    stark_shift,
    sweep_spectrum,
)
from .swipht import (
    Pulse,
    SwiphtParams,
    analytic_unitary,
    make_pulse,
    solve_parameters,
    validate,
)

__version__ = "0.1.0"
