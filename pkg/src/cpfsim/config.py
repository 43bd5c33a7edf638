"""Declarative run configuration.

A run is described by one JSON document; the CLI never takes physics
parameters as positional flags. Example:

    {
      "bath": {"gamma": 1.0, "tau_c": 1.0},
      "state": {"p": 0.8},
      "schemes": ["zzz", "xzx"],
      "y": -1,
      "grid": {"t_max_gamma": 5.0, "points": 101, "equal_times": true},
      "noise": {"total_counts": 10000, "visibility": 1.0,
                "replicas": 200, "seed": 7},
      "units": "gamma_t"
    }

The bath block is either analytic ({"gamma", "tau_c"}) or tabulated
({"kernel_csv": path, "time_unit": "seconds" | "inverse_gamma", "gamma"}).
Exactly one form must be present. Times in emitted datasets are in
dimensionless gamma*t by default ("units": "gamma_t"); "absolute" keeps
them in the input units.

Validation failures name the offending field path.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

from .bath import BathKernel, LorentzianKernel, load_kernel_csv
from .cpf import InitialState, MeasurementScheme
from .errors import ValidationError
from .experiment import ExperimentConfig

_UNITS = ("gamma_t", "absolute")


def _fail(field: str, message: str):
    raise ValidationError(f"config: {field}: {message}")


def _require(mapping: dict, field: str, context: str):
    if field not in mapping:
        _fail(f"{context}.{field}" if context else field, "missing required field")
    return mapping[field]


def _number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(field, f"expected a number, got {value!r}")
    return float(value)


@dataclass(frozen=True)
class BathConfig:
    """Either an analytic Lorentzian bath or a tabulated kernel file."""

    gamma: float
    tau_c: Optional[float] = None
    kernel_csv: Optional[Path] = None
    time_unit: str = "seconds"

    def make_kernel(self) -> BathKernel:
        if self.kernel_csv is not None:
            scale = 1.0 / self.gamma if self.time_unit == "inverse_gamma" else 1.0
            return load_kernel_csv(self.kernel_csv, time_scale=scale)
        return LorentzianKernel(gamma=self.gamma, tau_c=self.tau_c)

    @property
    def is_analytic(self) -> bool:
        return self.kernel_csv is None


@dataclass(frozen=True)
class RunConfig:
    bath: BathConfig
    state: InitialState
    schemes: tuple[MeasurementScheme, ...]
    y: int
    t_max_gamma: float
    points: int
    equal_times: bool
    noise: Optional[ExperimentConfig]
    units: str
    raw: dict  # canonical echo for dataset headers

    @property
    def times(self):
        """Grid of absolute times corresponding to gamma*t in [0, t_max_gamma]."""
        import numpy as np

        return np.linspace(0.0, self.t_max_gamma / self.bath.gamma, self.points)

    def report_time(self, t: float) -> float:
        return t * self.bath.gamma if self.units == "gamma_t" else t


def _parse_bath(block, field: str) -> BathConfig:
    if not isinstance(block, dict):
        _fail(field, "expected an object")
    analytic = "tau_c" in block
    tabulated = "kernel_csv" in block
    if analytic == tabulated:
        _fail(field, "exactly one bath form required: {gamma, tau_c} or {kernel_csv, ...}")
    gamma = _number(_require(block, "gamma", field), f"{field}.gamma")
    if gamma <= 0:
        _fail(f"{field}.gamma", "must be > 0")
    if analytic:
        tau_c = _number(block["tau_c"], f"{field}.tau_c")
        if tau_c <= 0:
            _fail(f"{field}.tau_c", "must be > 0")
        return BathConfig(gamma=gamma, tau_c=tau_c)
    path = Path(str(block["kernel_csv"]))
    if not path.exists():
        _fail(f"{field}.kernel_csv", f"file not found: {path}")
    unit = block.get("time_unit", "seconds")
    if unit not in ("seconds", "inverse_gamma"):
        _fail(f"{field}.time_unit", f"must be 'seconds' or 'inverse_gamma', got {unit!r}")
    return BathConfig(gamma=gamma, kernel_csv=path, time_unit=unit)


def _parse_state(block, field: str) -> InitialState:
    if not isinstance(block, dict):
        _fail(field, "expected an object")
    if "p" in block:
        p = _number(block["p"], f"{field}.p")
        if not (0.0 <= p <= 1.0):
            _fail(f"{field}.p", "must lie in [0, 1]")
        return InitialState.from_population(p)
    if "a" in block and "b" in block:

        def as_complex(v, name):
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                return complex(v)
            if isinstance(v, list) and len(v) == 2:
                return complex(_number(v[0], name), _number(v[1], name))
            _fail(name, f"expected a number or [re, im] pair, got {v!r}")

        a = as_complex(block["a"], f"{field}.a")
        b = as_complex(block["b"], f"{field}.b")
        try:
            return InitialState(a=a, b=b)
        except ValidationError as exc:
            _fail(field, str(exc))
    _fail(field, "expected either {'p': ...} or {'a': ..., 'b': ...}")


def _parse_schemes(value, field: str) -> tuple[MeasurementScheme, ...]:
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, list) or not value:
        _fail(field, "expected a non-empty list of scheme names")
    schemes = []
    for name in value:
        try:
            schemes.append(MeasurementScheme(str(name).lower()))
        except ValueError:
            _fail(field, f"unknown scheme {name!r}; valid: zzz, xzx, yzy")
    return tuple(schemes)


def _parse_noise(block, field: str) -> ExperimentConfig:
    if not isinstance(block, dict):
        _fail(field, "expected an object")
    total = _number(_require(block, "total_counts", field), f"{field}.total_counts")
    visibility = _number(block.get("visibility", 1.0), f"{field}.visibility")
    replicas = block.get("replicas", 1)
    seed = block.get("seed", 0)
    if not isinstance(replicas, int) or isinstance(replicas, bool):
        _fail(f"{field}.replicas", "must be an integer")
    if not isinstance(seed, int) or isinstance(seed, bool):
        _fail(f"{field}.seed", "must be an integer")
    try:
        return ExperimentConfig(
            total_counts=total, visibility=visibility, replicas=replicas, seed=seed
        )
    except ValidationError as exc:
        _fail(field, str(exc))


def parse_config(document: dict) -> RunConfig:
    if not isinstance(document, dict):
        raise ValidationError("config: top level must be a JSON object")
    bath = _parse_bath(_require(document, "bath", ""), "bath")
    state = _parse_state(document.get("state", {"p": 0.8}), "state")
    schemes = _parse_schemes(document.get("schemes", ["zzz", "xzx"]), "schemes")
    y = document.get("y", -1)
    if y not in (+1, -1):
        _fail("y", f"must be +1 or -1, got {y!r}")
    grid = document.get("grid", {})
    if not isinstance(grid, dict):
        _fail("grid", "expected an object")
    t_max_gamma = _number(grid.get("t_max_gamma", 5.0), "grid.t_max_gamma")
    if t_max_gamma <= 0:
        _fail("grid.t_max_gamma", "must be > 0")
    points = grid.get("points", 101)
    if not isinstance(points, int) or isinstance(points, bool) or points < 2:
        _fail("grid.points", f"must be an integer >= 2, got {points!r}")
    equal_times = grid.get("equal_times", True)
    if not isinstance(equal_times, bool):
        _fail("grid.equal_times", "must be true or false")
    noise = _parse_noise(document["noise"], "noise") if "noise" in document else None
    units = document.get("units", "gamma_t")
    if units not in _UNITS:
        _fail("units", f"must be one of {_UNITS}, got {units!r}")
    return RunConfig(
        bath=bath,
        state=state,
        schemes=schemes,
        y=y,
        t_max_gamma=t_max_gamma,
        points=points,
        equal_times=equal_times,
        noise=noise,
        units=units,
        raw=document,
    )


def load_config(path: Union[str, Path]) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"config: cannot read {path}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(
            f"config: {path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return parse_config(document)


def seeded(cfg: RunConfig, seed: Optional[int]) -> RunConfig:
    """Return cfg with the noise seed overridden (CLI --seed flag)."""
    if seed is None or cfg.noise is None:
        return cfg
    import dataclasses

    noise = dataclasses.replace(cfg.noise, seed=seed)
    raw = dict(cfg.raw)
    raw["noise"] = dict(raw.get("noise", {}))
    raw["noise"]["seed"] = seed
    return dataclasses.replace(cfg, noise=noise, raw=raw)
