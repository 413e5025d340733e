"""Physical constants and unit conventions.

Public interfaces across the package use linear frequency (MHz / GHz),
Tesla and microseconds.  Time propagation happens in angular frequency
(rad/us); the factor 2*pi is applied at module boundaries only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi

#: Bohr magneton over Planck constant, GHz/T.
MU_B_OVER_H_GHZ_PER_T = 13.9962

#: Nuclear magneton over Planck constant, MHz/T.
MU_N_OVER_H_MHZ_PER_T = 7.6226

#: Boltzmann constant over Planck constant, GHz/K (equivalently MHz/mK).
KB_OVER_H_GHZ_PER_K = 20.8366


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA-derived conversion factors used throughout the model."""

    mu_b_over_h: float = MU_B_OVER_H_GHZ_PER_T   # GHz/T
    mu_n_over_h: float = MU_N_OVER_H_MHZ_PER_T   # MHz/T
    kb_over_h: float = KB_OVER_H_GHZ_PER_K       # GHz/K


CONSTANTS = PhysicalConstants()


def mhz_to_angular(f_mhz):
    """Linear frequency in MHz -> angular frequency in rad/us."""
    return TWO_PI * np.asarray(f_mhz, dtype=float)


def angular_to_mhz(w):
    """Angular frequency in rad/us -> linear frequency in MHz."""
    return np.asarray(w, dtype=float) / TWO_PI
