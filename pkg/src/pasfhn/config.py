"""JSON run configuration: parsing, defaults and validation with field paths."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

from .model import ModelParams
from .source import SourceParams, default_half_extent

STUDY_KINDS = ("equilibrium", "admissible", "rectangle", "simulate", "average-check",
               "oscillatory", "sweep")
SYSTEM_TAGS = ("full", "centered", "pas", "linear_error", "nonlinear_error")
FORMATS = ("csv", "json")

DEFAULT_MODEL = {"epsilon": 0.5, "gamma": 8.0, "beta": 6.0, "rho": 0.0}
DEFAULT_SOURCE = {"a": 0.0, "b": 0.0, "d1": 1.0, "d2": 1.0, "x0": 0.0, "omega1": 100.0, "eta": 1.0}

# kind -> option defaults; None marks a required option
STUDY_DEFAULTS = {
    "equilibrium": {"tol": 1e-12, "delta_grid": None},
    "admissible": {"delta_grid": None},
    "rectangle": {"Delta": None, "bound": 0.5, "x_samples": 2001, "t_samples": 200, "n_face": 33},
    "simulate": {"system": "pas", "initial": {"kind": "zero", "amplitude": 0.0, "width": 1.0},
                 "rect_bound": None},
    "average-check": {"V": [-0.2, 0.0, 0.3], "x": [0.0, 0.7, 2.0], "t_index": [7, 23, 41],
                      "omega_ratios": [100, 200, 400], "W": 0.0},
    "oscillatory": {"d": 1.0, "omega_list": [50, 100, 200, 400, 800], "profile": "constant",
                    "x": 0.0, "t": 2.0},
    "sweep": {"omega_list": None, "bound": 0.5,
              "initial": {"kind": "bump", "amplitude": 0.004, "width": 1.0},
              "crosscheck": False, "store_interval": 0.05},
}


class ConfigError(ValueError):
    """Invalid configuration; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass
class GridConfig:
    half_extent: Optional[float] = None
    n_points: int = 1601


@dataclass
class TimeConfig:
    T: float = 20.0
    n_per_period: int = 40
    pas_per_period: int = 200
    sample_every: int = 0


@dataclass
class StudyConfig:
    kind: str = "equilibrium"
    options: dict = field(default_factory=dict)


@dataclass
class OutputConfig:
    directory: str = "out"
    formats: tuple = ("csv", "json")


@dataclass
class RunConfig:
    model: ModelParams
    source: SourceParams
    grid: GridConfig
    time: TimeConfig
    study: StudyConfig
    output: OutputConfig

    def half_extent(self) -> float:
        if self.grid.half_extent is not None:
            return self.grid.half_extent
        return default_half_extent(self.source)

    def echo(self) -> dict:
        """Fully resolved configuration, loadable again by ``load_config``."""
        d = {"model": asdict(self.model), "source": asdict(self.source),
             "grid": asdict(self.grid), "time": asdict(self.time),
             "study": {"kind": self.study.kind, **self.study.options},
             "output": {"directory": self.output.directory, "formats": list(self.output.formats)}}
        d["grid"]["half_extent"] = self.half_extent()
        return d


def _section(raw: dict, name: str, allowed) -> dict:
    sec = raw.get(name, {})
    if sec is None:
        sec = {}
    if not isinstance(sec, dict):
        raise ConfigError(name, "must be an object")
    for key in sec:
        if key not in allowed:
            raise ConfigError(f"{name}.{key}", "unknown field")
    return sec


def _number(sec: dict, name: str, key: str, default, positive=False, nonneg=False, integer=False,
            minimum=None):
    path = f"{name}.{key}"
    val = sec.get(key, default)
    if val is None:
        raise ConfigError(path, "is required")
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(path, f"must be a number, got {val!r}")
    if integer:
        if int(val) != val:
            raise ConfigError(path, f"must be an integer, got {val!r}")
        val = int(val)
    else:
        val = float(val)
        if not math.isfinite(val):
            raise ConfigError(path, "must be finite")
    if positive and not val > 0:
        raise ConfigError(path, f"must be > 0, got {val}")
    if nonneg and val < 0:
        raise ConfigError(path, f"must be >= 0, got {val}")
    if minimum is not None and val < minimum:
        raise ConfigError(path, f"must be >= {minimum}, got {val}")
    return val


def _study(raw: dict, kind_override: Optional[str]) -> StudyConfig:
    sec = raw.get("study", {}) or {}
    if not isinstance(sec, dict):
        raise ConfigError("study", "must be an object")
    kind = kind_override or sec.get("kind", "equilibrium")
    if kind not in STUDY_KINDS:
        raise ConfigError("study.kind", f"must be one of {', '.join(STUDY_KINDS)}, got {kind!r}")
    defaults = STUDY_DEFAULTS[kind]
    opts = {}
    for key, val in sec.items():
        if key == "kind":
            continue
        if key not in defaults:
            raise ConfigError(f"study.{key}", f"unknown option for study kind {kind!r}")
        opts[key] = val
    for key, default in defaults.items():
        if key not in opts:
            if default is None and key in ("omega_list",):
                raise ConfigError(f"study.{key}", f"is required for study kind {kind!r}")
            opts[key] = json.loads(json.dumps(default))
    _check_study(kind, opts)
    return StudyConfig(kind, opts)


def _check_list(path, val, minlen=1, increasing=False, positive=False):
    if not isinstance(val, list) or len(val) < minlen:
        raise ConfigError(path, f"must be a list of at least {minlen} numbers")
    for i, v in enumerate(val):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}[{i}]", f"must be a number, got {v!r}")
        if positive and not v > 0:
            raise ConfigError(f"{path}[{i}]", f"must be > 0, got {v}")
    if increasing and any(b <= a for a, b in zip(val, val[1:])):
        raise ConfigError(path, "must be strictly increasing")


def _check_initial(path, init):
    if not isinstance(init, dict):
        raise ConfigError(path, "must be an object")
    kind = init.get("kind", "zero")
    if kind not in ("zero", "bump"):
        raise ConfigError(f"{path}.kind", f"must be 'zero' or 'bump', got {kind!r}")
    _number(init, path, "amplitude", 0.0)
    _number(init, path, "width", 1.0, positive=True)


def _check_study(kind: str, o: dict):
    if kind == "equilibrium":
        _number(o, "study", "tol", None, positive=True)
    if kind in ("equilibrium", "admissible") and o.get("delta_grid") is not None:
        _check_list("study.delta_grid", o["delta_grid"])
    if kind == "rectangle":
        if o["Delta"] is not None:
            _number(o, "study", "Delta", None, nonneg=True)
        _number(o, "study", "bound", None, positive=True)
        _number(o, "study", "x_samples", None, integer=True, minimum=3)
        _number(o, "study", "t_samples", None, integer=True, minimum=2)
        _number(o, "study", "n_face", None, integer=True, minimum=2)
    if kind == "simulate":
        if o["system"] not in SYSTEM_TAGS:
            raise ConfigError("study.system", f"must be one of {', '.join(SYSTEM_TAGS)}")
        _check_initial("study.initial", o["initial"])
        if o["rect_bound"] is not None:
            _number(o, "study", "rect_bound", None, positive=True)
    if kind == "average-check":
        for key in ("V", "x", "t_index"):
            _check_list(f"study.{key}", o[key])
        _check_list("study.omega_ratios", o["omega_ratios"], minlen=2, increasing=True, positive=True)
        _number(o, "study", "W", None)
    if kind == "oscillatory":
        _number(o, "study", "d", None, positive=True)
        _check_list("study.omega_list", o["omega_list"], minlen=2, increasing=True, positive=True)
        if any(v <= 1 for v in o["omega_list"]):
            raise ConfigError("study.omega_list", "every entry must be > 1")
        if o["profile"] not in ("constant", "gaussian"):
            raise ConfigError("study.profile", "must be 'constant' or 'gaussian'")
        _number(o, "study", "x", None)
        _number(o, "study", "t", None, positive=True)
    if kind == "sweep":
        _check_list("study.omega_list", o["omega_list"], minlen=3, increasing=True, positive=True)
        _number(o, "study", "bound", None, positive=True)
        _number(o, "study", "store_interval", None, positive=True)
        _check_initial("study.initial", o["initial"])
        if not isinstance(o["crosscheck"], bool):
            raise ConfigError("study.crosscheck", "must be true or false")


def build_config(raw: dict, kind: Optional[str] = None) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be a JSON object")
    for key in raw:
        if key not in ("model", "source", "grid", "time", "study", "output"):
            raise ConfigError(key, "unknown section")
    m = {**DEFAULT_MODEL, **_section(raw, "model", tuple(DEFAULT_MODEL) + ("delta_witness",))}
    eps = _number(m, "model", "epsilon", None, positive=True)
    gam = _number(m, "model", "gamma", None, positive=True)
    beta = _number(m, "model", "beta", None, positive=True)
    rho = _number(m, "model", "rho", None, nonneg=True)
    witness = m.get("delta_witness")
    if witness is not None:
        witness = _number(m, "model", "delta_witness", None, positive=True)
    try:
        model = ModelParams(eps, gam, beta, rho, witness)
    except ValueError as exc:
        raise ConfigError("model", str(exc)) from exc

    s = {**DEFAULT_SOURCE, **_section(raw, "source", tuple(DEFAULT_SOURCE))}
    vals = {k: _number(s, "source", k, None, positive=k in ("d1", "d2", "omega1", "eta"))
            for k in DEFAULT_SOURCE}
    source = SourceParams(**vals)

    g = _section(raw, "grid", ("half_extent", "n_points"))
    X = g.get("half_extent")
    if X is not None:
        X = _number(g, "grid", "half_extent", None, positive=True)
    grid = GridConfig(X, _number(g, "grid", "n_points", 1601, integer=True, minimum=3))

    t = _section(raw, "time", ("T", "n_per_period", "pas_per_period", "sample_every"))
    time_cfg = TimeConfig(_number(t, "time", "T", 20.0, positive=True),
                          _number(t, "time", "n_per_period", 40, integer=True, minimum=4),
                          _number(t, "time", "pas_per_period", 200, integer=True, minimum=4),
                          _number(t, "time", "sample_every", 0, integer=True, nonneg=True))

    study = _study(raw, kind)

    o = _section(raw, "output", ("directory", "formats"))
    directory = o.get("directory", "out")
    if not isinstance(directory, str) or not directory:
        raise ConfigError("output.directory", "must be a non-empty string")
    formats = o.get("formats", list(FORMATS))
    if not isinstance(formats, list) or any(f not in FORMATS for f in formats):
        raise ConfigError("output.formats", f"must be a list drawn from {FORMATS}")
    return RunConfig(model, source, grid, time_cfg, study, OutputConfig(directory, tuple(formats)))


def load_config(path, kind: Optional[str] = None) -> RunConfig:
    """Read and validate a JSON config; ``kind`` overrides ``study.kind``."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    return build_config(raw, kind)
