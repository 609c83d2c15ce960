"""Run configuration: file parsing, validation, defaults.

Config files are either a JSON object or key=value lines with
JSON-encoded values; CLI flags override file values. Unknown keys are
rejected by name and the resolved config round-trips losslessly through
JSON.
"""
from __future__ import annotations

import json
from pathlib import Path

from .errors import ConfigError
from .params import ModelParams

MODEL_KEYS = {
    "omega1": 1.0, "omega2": 1.0, "omega0": 1.0,
    "g": 0.0, "g1": None, "g2": None, "g2_ratio": 1.0,
    "n_atoms": 1, "mu": 0.0, "z": 2, "t": 0.0,
}

SOLVER_KEYS = {
    "n_max": None,            # Fock cutoff (None: displacement-based default)
    "ceiling": 20000,
    "psi_epsilon": 1e-4,
    "psi_max": None,
    "coarse_grid": 21,
    "jump_width": 1e-4,
    "rel_tol": 1e-8,
    "pair_gap_ratio": 0.2,
    "workers": 1,
    "seed": 0,                # reserved for stochastic minimizer variants
}

RUN_KEYS = {
    "output": None,           # forced output directory (default: timestamped)
    "sweep": None,            # "var:start:stop:npoints"
    "t_grid": None,           # "start:stop:npoints"
    "t_hi": None,             # upper bisection endpoint (mean-field boundary)
    "axis2": "g",
    "axis2_grid": None,
    "method": "both",
    "model": "two_mode",
    "k_levels": 3,
    "g_grid": None,
}

CIRCUIT_KEYS = {
    "L1": None, "L2": None, "La": None, "Lb": None,
    "Ca": None, "Cb": None, "Cg": None, "CJ": None,
    "D": None, "xs": None, "matrix_element": None, "omega0_atom": None,
    "phi0": None, "e_charge": None,
    "dedup_lt_j": False,
    "tune_target_omega": None, "tune_target_g": None, "tune_free": None,
}

ALL_KEYS = {**MODEL_KEYS, **SOLVER_KEYS, **RUN_KEYS, **CIRCUIT_KEYS}

_POSITIVE_KEYS = ("psi_epsilon", "jump_width", "rel_tol", "pair_gap_ratio")


def parse_config_file(path) -> dict:
    """JSON object or key=value lines; values are JSON-decoded."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        return data
    data = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        try:
            data[key] = json.loads(raw)
        except json.JSONDecodeError:
            data[key] = raw
    return data


def validate_config(data: dict) -> dict:
    """Fill defaults and reject unknown keys (named in the error)."""
    for key in data:
        if key not in ALL_KEYS:
            raise ConfigError(f"unknown config key {key!r}")
    resolved = dict(ALL_KEYS)
    resolved.update(data)
    for key in _POSITIVE_KEYS:
        v = resolved.get(key)
        if v is not None and not (isinstance(v, (int, float)) and v > 0):
            raise ConfigError(f"config key {key!r} must be a positive number")
    for key in ("n_max", "coarse_grid", "workers", "k_levels", "ceiling"):
        v = resolved.get(key)
        if v is not None and (not isinstance(v, int) or v < 0):
            raise ConfigError(f"config key {key!r} must be a non-negative integer")
    return resolved


def model_params_from(config: dict) -> ModelParams:
    g1 = config["g1"] if config["g1"] is not None else config["g"]
    g2 = (config["g2"] if config["g2"] is not None
          else g1 * config.get("g2_ratio", 1.0))
    return ModelParams(
        omega1=config["omega1"], omega2=config["omega2"], omega0=config["omega0"],
        g1=g1, g2=g2, n_atoms=config["n_atoms"], mu=config["mu"],
        z=config["z"], t=config["t"],
    )


def parse_grid(spec_str: str, *, name: str = "grid"):
    """\"start:stop:npoints\" -> inclusive linspace."""
    import numpy as np

    parts = str(spec_str).split(":")
    if len(parts) != 3:
        raise ConfigError(f"{name} must be start:stop:npoints, got {spec_str!r}")
    try:
        start, stop, npts = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"cannot parse {name} {spec_str!r}: {exc}") from exc
    if npts < 2 or stop <= start:
        raise ConfigError(f"{name} needs stop > start and npoints >= 2")
    return np.linspace(start, stop, npts)


def parse_sweep(spec_str: str):
    """\"var:start:stop:npoints\" -> (variable, grid)."""
    parts = str(spec_str).split(":")
    if len(parts) != 4:
        raise ConfigError(f"sweep must be var:start:stop:npoints, got {spec_str!r}")
    variable = parts[0]
    if variable not in ("g", "mu"):
        raise ConfigError(f"sweep variable must be g or mu, got {variable!r}")
    return variable, parse_grid(":".join(parts[1:]), name="sweep")
