"""
Study configuration: JSON defaults < key=value study file < command-line overrides.
"""

import json
import math
import os
from dataclasses import asdict, dataclass
from typing import Optional

from dotenv import dotenv_values

from ..utils.errors import ConfigError
from ..utils.logger import get_logger

logger = get_logger(__name__)

DEFAULTS_PATH = os.path.join(os.path.dirname(__file__), "config.json")

PROBLEMS = ("laplace", "poisson", "helmholtz", "advection")
KERNEL_METHODS = ("svd", "qr")
SOLVER_STRATEGIES = ("direct", "iterative")
HELMHOLTZ_OMEGA = 4 * math.pi
PLANEWAVE_OMEGA = 2 * math.pi


@dataclass(frozen=True)
class StudyConfig:
    problem: str
    pmin: int
    pmax: int
    refinements: int
    base_n: int
    eps: float
    kernel_method: str
    scaled_eps: bool
    equilibrate: bool
    omega: Optional[float]
    alpha: float
    threads: int
    timings: bool
    cond_max_dofs: int
    solver_tol: float
    dense_threshold: int
    solver_strategy: str
    out: str

    @property
    def degrees(self) -> list:
        return list(range(self.pmin, self.pmax + 1))

    @property
    def wavenumber(self) -> float:
        """omega, defaulting to 4 pi for the Helmholtz study."""
        return self.omega if self.omega is not None else HELMHOLTZ_OMEGA

    def solver_options(self) -> dict:
        return {"tol": self.solver_tol, "dense_threshold": self.dense_threshold, "strategy": self.solver_strategy}

    def to_dict(self):
        return asdict(self)


def _boolean(key: str, value) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("1", "true", "yes", "on"):
        return True
    if text in ("0", "false", "no", "off"):
        return False
    raise ConfigError(key, f"expected a boolean, got {value!r}")


def _optional_float(key: str, value) -> Optional[float]:
    if value is None or (isinstance(value, str) and value.strip().lower() in ("", "none", "null")):
        return None
    return _number(key, value, float)


def _number(key: str, value, kind):
    try:
        if kind is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(str(value).strip()) if isinstance(value, str) else int(value)
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(key, f"expected {kind.__name__}, got {value!r}") from None


COERCIONS = {
    "problem": str,
    "pmin": lambda key, value: _number(key, value, int),
    "pmax": lambda key, value: _number(key, value, int),
    "refinements": lambda key, value: _number(key, value, int),
    "base_n": lambda key, value: _number(key, value, int),
    "eps": lambda key, value: _number(key, value, float),
    "kernel_method": str,
    "scaled_eps": _boolean,
    "equilibrate": _boolean,
    "omega": _optional_float,
    "alpha": lambda key, value: _number(key, value, float),
    "threads": lambda key, value: _number(key, value, int),
    "timings": _boolean,
    "cond_max_dofs": lambda key, value: _number(key, value, int),
    "solver_tol": lambda key, value: _number(key, value, float),
    "dense_threshold": lambda key, value: _number(key, value, int),
    "solver_strategy": str,
    "out": str,
}


def _coerce(key: str, value):
    if key not in COERCIONS:
        raise ConfigError(key, f"unknown configuration key '{key}'")
    coercion = COERCIONS[key]
    if coercion is str:
        return str(value).strip()
    return coercion(key, value)


def load_defaults(path: str = DEFAULTS_PATH) -> dict:
    """Loads the JSON defaults shipped with the package."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except (IOError, json.JSONDecodeError) as e:
        logger.error(f"Error loading defaults from {path}: {e}")
        raise


def read_study_file(path: str) -> dict:
    """
    Reads a flat key=value study file (comments start with '#').

    Raises:
        ConfigError: if the file does not exist or a line has no value
    """
    if not os.path.exists(path):
        raise ConfigError("config", f"study file {path} does not exist")
    values = dotenv_values(path)
    for key, value in values.items():
        if value is None:
            raise ConfigError(key, f"key '{key}' in {path} has no value")
    return dict(values)


def _validate(values: dict):
    if values["problem"] not in PROBLEMS:
        raise ConfigError("problem", f"unknown problem '{values['problem']}', expected one of {PROBLEMS}")
    if values["kernel_method"] not in KERNEL_METHODS:
        raise ConfigError("kernel_method", f"unknown kernel method '{values['kernel_method']}', expected one of {KERNEL_METHODS}")
    if values["solver_strategy"] not in SOLVER_STRATEGIES:
        raise ConfigError("solver_strategy", f"unknown solver strategy '{values['solver_strategy']}', expected one of {SOLVER_STRATEGIES}")
    if values["pmin"] < 0:
        raise ConfigError("pmin", f"pmin must be >= 0, got {values['pmin']}")
    if values["pmax"] < values["pmin"]:
        raise ConfigError("pmax", f"pmax={values['pmax']} is below pmin={values['pmin']}")
    for key in ("refinements", "base_n", "threads", "dense_threshold"):
        if values[key] < 1:
            raise ConfigError(key, f"{key} must be >= 1, got {values[key]}")
    if values["cond_max_dofs"] < 0:
        raise ConfigError("cond_max_dofs", f"cond_max_dofs must be >= 0, got {values['cond_max_dofs']}")
    for key in ("eps", "alpha", "solver_tol"):
        if not values[key] > 0:
            raise ConfigError(key, f"{key} must be > 0, got {values[key]}")
    if values["omega"] is not None and not values["omega"] > 0:
        raise ConfigError("omega", f"omega must be > 0, got {values['omega']}")
    if not values["out"]:
        raise ConfigError("out", "output path is empty")


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None,
                defaults_path: str = DEFAULTS_PATH) -> StudyConfig:
    """
    Builds a validated StudyConfig.

    Args:
        path: optional key=value study file
        overrides: values from the command line; None entries are ignored

    Raises:
        ConfigError: naming the offending key
    """
    values = {key: _coerce(key, value) for key, value in load_defaults(defaults_path).items()}
    if path:
        for key, value in read_study_file(path).items():
            values[key] = _coerce(key, value)
        logger.info(f"Loaded study file {path}")
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _coerce(key, value)
    missing = [key for key in COERCIONS if key not in values]
    if missing:
        raise ConfigError(missing[0], f"configuration key '{missing[0]}' has no value")
    _validate(values)
    return StudyConfig(**values)
