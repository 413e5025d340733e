"""Flat key = value configuration with fail-closed parsing.

Format: one ``key = value`` per line, ``#`` starts a comment, keys carry
explicit unit suffixes (``a_mhz``, ``omega_c_ghz``).  Unknown keys are
rejected so golden files cannot silently drift.  Every key can also be
overridden through the environment as ``TBPC2SIM_<KEY_UPPERCASE>``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields

import numpy as np

from .cavity import CavityParams
from .smm import SmmParams

__all__ = ["Config", "ConfigError", "load_config", "default_config", "ENV_PREFIX"]

ENV_PREFIX = "TBPC2SIM_"


class ConfigError(ValueError):
    """Malformed, unknown, or physically invalid configuration input."""


def _float_list(text: str):
    return tuple(float(x) for x in str(text).split(",") if x.strip())


# key -> (parser, default)
_SCHEMA = {
    "qubit1_a_mhz": (float, 518.8),
    "qubit1_p_mhz": (float, 272.5),
    "qubit1_g_l": (float, 1.5),
    "qubit1_g_n": (float, 1.354),
    "qubit1_theta_rad": (float, np.pi / 6),
    "qubit1_eta": (float, 1e-3),
    "qubit1_delta_t_mhz": (float, 0.0208366),
    "qubit1_da_over_a_per_mv": (float, 2.3e-3 / 16.0),
    "qubit1_dc_shift_mhz": (float, 0.0),
    "qubit2_a_mhz": (float, 518.8),
    "qubit2_p_mhz": (float, 272.5),
    "qubit2_g_l": (float, 1.5),
    "qubit2_g_n": (float, 1.354),
    "qubit2_theta_rad": (float, np.pi / 6),
    "qubit2_eta": (float, 1e-3),
    "qubit2_delta_t_mhz": (float, 0.0208366),
    "qubit2_da_over_a_per_mv": (float, 2.3e-3 / 16.0),
    "qubit2_dc_shift_mhz": (float, 40.0),
    "cavity_omega_c_ghz": (float, 2.3),
    "cavity_n_max": (int, 4),
    "cavity_q": (float, 1e5),
    "cavity_v_rms_uv": (float, 20.0),
    "sweep_g_mhz": (_float_list, (5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0, 45.0, 50.0)),
    "sweep_omega_c_ghz": (_float_list, (2.3,)),
    "spectrum_b_min_t": (float, -0.06),
    "spectrum_b_max_t": (float, 0.06),
    "spectrum_points": (int, 2001),
    "rabi_tmax_us": (float, 6.0),
    "rabi_detuning_grid_mhz": (_float_list, (-4.0, -2.0, 0.0, 2.0, 4.0)),
    "solver_tol": (float, 1e-6),
    "output_dir": (str, "."),
}


@dataclass
class Config:
    """Validated run configuration; see _SCHEMA for keys and defaults."""

    values: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def _qubit(self, prefix: str) -> SmmParams:
        v = self.values
        try:
            return SmmParams(
                a_mhz=v[f"{prefix}_a_mhz"],
                p_mhz=v[f"{prefix}_p_mhz"],
                g_l=v[f"{prefix}_g_l"],
                g_n=v[f"{prefix}_g_n"],
                theta=v[f"{prefix}_theta_rad"],
                eta=v[f"{prefix}_eta"],
                delta_t_mhz=v[f"{prefix}_delta_t_mhz"],
                da_over_a_per_mv=v[f"{prefix}_da_over_a_per_mv"],
                dc_shift_mhz=v[f"{prefix}_dc_shift_mhz"],
            )
        except ValueError as exc:
            raise ConfigError(f"invalid {prefix} parameters: {exc}") from exc

    @property
    def qubit1(self) -> SmmParams:
        return self._qubit("qubit1")

    @property
    def qubit2(self) -> SmmParams:
        return self._qubit("qubit2")

    @property
    def cavity(self) -> CavityParams:
        v = self.values
        try:
            return CavityParams(
                omega_c_ghz=v["cavity_omega_c_ghz"],
                n_max=v["cavity_n_max"],
                q=v["cavity_q"],
                v_rms_uv=v["cavity_v_rms_uv"],
            )
        except ValueError as exc:
            raise ConfigError(f"invalid cavity parameters: {exc}") from exc


def default_config() -> Config:
    return Config(values={k: default for k, (_, default) in _SCHEMA.items()})


def _parse_value(key: str, raw: str):
    if key not in _SCHEMA:
        raise ConfigError(f"unknown configuration key {key!r}")
    parser, _ = _SCHEMA[key]
    try:
        return parser(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"cannot parse {key} = {raw!r}: {exc}") from exc


def load_config(path: str | None = None, environ=None) -> Config:
    """Build a Config from defaults, an optional file, and the environment.

    Precedence: defaults < file < TBPC2SIM_* environment variables.
    Unknown keys anywhere fail closed with ConfigError.
    """
    cfg = default_config()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.readlines()
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc
        for lineno, line in enumerate(lines, start=1):
            body = line.split("#", 1)[0].strip()
            if not body:
                continue
            if "=" not in body:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {body!r}")
            key, raw = (part.strip() for part in body.split("=", 1))
            cfg.values[key] = _parse_value(key, raw)
    env = os.environ if environ is None else environ
    for name, raw in env.items():
        if not name.startswith(ENV_PREFIX):
            continue
        key = name[len(ENV_PREFIX) :].lower()
        cfg.values[key] = _parse_value(key, raw)
    # re-validate the wrapped physical types eagerly
    _ = cfg.qubit1, cfg.qubit2, cfg.cavity
    return cfg
