# config.py

import math
import os
from dataclasses import dataclass, field, fields, replace
from typing import Dict, List, Optional, Tuple

import numpy as np
from dotenv import dotenv_values, load_dotenv

from qudit_states import ACCEPTED_INTERPRETATION, Interpretation

ENV_PREFIX = "BOUND_BOOST_"
ENV_KEYS = ("out_dir", "seed", "workers")
GRID_STEP_TOL = 1e-3


class ConfigError(ValueError):
    pass


def parse_x_grid(spec: str) -> Tuple[float, ...]:
    """
    'start:stop:step', stop included when the step lands on it to within
    GRID_STEP_TOL of a step, so truncated decimals like 0.00333333 still reach it.
    """
    try:
        start, stop, step = (float(v) for v in spec.split(":"))
    except ValueError:
        raise ConfigError(f"x grid must look like start:stop:step, got {spec!r}")
    if step <= 0 or stop < start:
        raise ConfigError(f"Empty x grid {spec!r}")
    steps = (stop - start) / step
    nearest = round(steps)
    count = (nearest if math.isclose(steps, nearest, abs_tol=GRID_STEP_TOL) else math.floor(steps)) + 1
    return tuple(float(v) for v in start + step * np.arange(count))


def parse_direction(value) -> Tuple[float, float, float]:
    if isinstance(value, str):
        value = value.split(",")
    try:
        e = np.asarray([float(v) for v in value], dtype=np.float64)
    except (TypeError, ValueError):
        raise ConfigError(f"Direction must be three numbers, got {value!r}")
    if e.shape != (3,) or not np.all(np.isfinite(e)) or np.linalg.norm(e) == 0:
        raise ConfigError(f"Direction must be a non-zero 3-vector, got {value!r}")
    return tuple(float(v) for v in e / np.linalg.norm(e))


def default_x_grid() -> Tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(0.0, 1.0 / 3.0, 101))


@dataclass(frozen=True)
class ScenarioConfig:
    energy: float = 1.0
    direction: Tuple[float, float, float] = (0.0, 0.0, 1.0)
    rapidities: Tuple[float, ...] = (0.0, 0.5, 0.8, 1.0)
    x_grid: Tuple[float, ...] = field(default_factory=default_x_grid)
    p: float = 0.04
    activation_x: float = 7.0 / 60.0
    activation_rapidity: float = 0.95
    interpretation: Interpretation = ACCEPTED_INTERPRETATION
    scan_rapidity: float = 0.8
    samples: int = 5000
    witness_rapidity: float = 0.8
    seesaw_restarts: int = 64
    certify_points: Tuple[Tuple[float, float], ...] = ((1.0 / 15.0, 0.8),)
    k_terms: int = 10
    restarts: int = 16
    tol: float = 1e-6
    seed: int = 0
    workers: int = 1
    out_dir: str = "outputs"
    fixture: Optional[str] = None
    log_level: str = "INFO"

    def __post_init__(self):
        if not self.energy > 0:
            raise ConfigError(f"energy must be positive, got {self.energy}")
        object.__setattr__(self, "direction", parse_direction(self.direction))
        object.__setattr__(self, "interpretation", Interpretation.parse(self.interpretation))
        if not self.rapidities or not self.x_grid:
            raise ConfigError("Rapidity list and x grid must be non-empty")
        if any(not 0.0 <= x <= 1.0 / 3.0 + 1e-12 for x in self.x_grid):
            raise ConfigError("x grid values must lie in [0, 1/3]")
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError(f"p must lie in [0, 1], got {self.p}")
        if self.k_terms < 1 or self.restarts < 1 or self.seesaw_restarts < 1 or self.samples < 1:
            raise ConfigError("k, restarts and samples must be at least 1")
        if not self.tol > 0:
            raise ConfigError(f"tol must be positive, got {self.tol}")
        if self.workers < 1:
            raise ConfigError(f"workers must be at least 1, got {self.workers}")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Interpretation):
                value = value.value
            elif isinstance(value, tuple):
                value = [list(v) if isinstance(v, tuple) else v for v in value]
            out[f.name] = value
        return out


_CASTS = {
    "energy": float,
    "p": float,
    "activation_x": float,
    "activation_rapidity": float,
    "scan_rapidity": float,
    "witness_rapidity": float,
    "tol": float,
    "samples": int,
    "seesaw_restarts": int,
    "k_terms": int,
    "k": int,
    "restarts": int,
    "seed": int,
    "workers": int,
    "direction": parse_direction,
    "x_grid": parse_x_grid,
    "rapidities": lambda v: tuple(float(x) for x in str(v).split(",")),
    "xi": lambda v: tuple(float(x) for x in str(v).split(",")),
    "interpretation": Interpretation.parse,
    "out_dir": str,
    "out": str,
    "fixture": str,
    "log_level": str,
}
_ALIASES = {"xi": "rapidities", "out": "out_dir", "k": "k_terms"}


def _coerce(values: Dict[str, object]) -> Dict[str, object]:
    out = {}
    for raw_key, raw in values.items():
        if raw is None or raw == "":
            continue
        key = raw_key.strip().lower().replace("-", "_")
        cast = _CASTS.get(key)
        if cast is None:
            raise ConfigError(f"Unknown configuration key {raw_key!r}")
        if isinstance(raw, list):
            raw = tuple(raw)
        try:
            out[_ALIASES.get(key, key)] = raw if not isinstance(raw, str) else cast(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Bad value for {raw_key!r}: {e}")
    return out


def from_env() -> Dict[str, object]:
    load_dotenv()
    return _coerce({key: os.getenv(ENV_PREFIX + key.upper()) for key in ENV_KEYS})


def from_file(path: str) -> Dict[str, object]:
    if not os.path.isfile(path):
        raise ConfigError(f"Config file not found: {path}")
    return _coerce(dotenv_values(path))


def load_config(path: Optional[str] = None, overrides: Optional[Dict[str, object]] = None) -> ScenarioConfig:
    """defaults < environment (.env included) < key-value file < explicit overrides."""
    values: Dict[str, object] = {}
    values.update(from_env())
    if path:
        values.update(from_file(path))
    if overrides:
        values.update(_coerce(overrides))
    return ScenarioConfig(**values)


def with_certify_points(cfg: ScenarioConfig, points: List[Tuple[float, float]]) -> ScenarioConfig:
    return replace(cfg, certify_points=tuple((float(x), float(xi)) for x, xi in points))
