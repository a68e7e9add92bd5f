"""JSON scenario configuration and run reports.

Schema (unknown keys are rejected at every level)::

    {
      "two_s": 2,                          # 2s; optional for spin-1 presets
      "fiducial": "pure:-1" | "spin1-2/3-1/3" | "spin1-equal-pair"
                  | "spin1-uniform" | [c_s, ..., c_-s],
                                           # coefficients: numbers or [re, im]
      "field": {"b0": 1.0, "b": 0.5, "drive_omega": 2.0, "mu": 1.0,
                "hbar": 1.0, "zero_delta": false},
      "gauge": "psi_locked" | "psi_frozen" | "least_norm",
                                           # default: the preset's own gauge
      "initial": "cyclic" | {"phi": 0.0, "theta": 1.0, "psi": 0.0},
      "path": "integrated" | "prescribed",
      "periods": 1,                        # or "duration": seconds
      "n_steps": 2000,
      "tolerance": 1e-6,
      "outputs": {"report": "report.json", "trajectory": "traj.csv"}
    }

``zero_delta`` replaces ``drive_omega`` by the value that makes the
Hamiltonian vanish on the cyclic orbit.  ``initial.theta`` may be omitted to
use the resonant polar angle.  ``path = "prescribed"`` evaluates the phases
on the orbit phi = w t at the given theta instead of integrating.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from typing import Any, Optional

from .coherent import FiducialVector, preset_fiducial
from .dynamics import FieldProtocol, Gauge
from .scenarios import A3Spin1, SimpleSpin1, Simplest, SpecialSpin1, zero_delta_field
from .su2 import SpinQuantum


class ConfigError(ValueError):
    """Invalid configuration; ``line``/``column`` locate JSON syntax errors."""

    def __init__(self, msg, line: Optional[int] = None, column: Optional[int] = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(msg + where)
        self.line = line
        self.column = column


_TOP_KEYS = {"two_s", "fiducial", "field", "gauge", "initial", "path", "periods", "duration",
             "n_steps", "tolerance", "outputs"}
_FIELD_KEYS = {"b0", "b", "drive_omega", "mu", "hbar", "zero_delta"}
_INITIAL_KEYS = {"phi", "theta", "psi"}
_OUTPUT_KEYS = {"report", "trajectory"}
PRESETS = ("spin1-2/3-1/3", "spin1-equal-pair", "spin1-uniform")


def _reject_unknown(obj: dict, allowed: set, where: str):
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _number(value, name) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite")
    return value


def _coefficient(value, i) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            raise ConfigError(f"fiducial[{i}] must be a number or [re, im]")
        return complex(_number(value[0], f"fiducial[{i}][0]"), _number(value[1], f"fiducial[{i}][1]"))
    return complex(_number(value, f"fiducial[{i}]"))


@dataclass
class ScenarioConfig:
    fiducial: Any  # preset name or list of complex coefficients
    field: dict
    two_s: Optional[int] = None
    gauge: Optional[str] = None  # defaults to the model system's gauge
    initial: Any = "cyclic"
    path: str = "integrated"
    periods: Optional[float] = 1.0
    duration: Optional[float] = None
    n_steps: int = 2000
    tolerance: float = 1e-6
    outputs: dict = field(default_factory=dict)

    # --- parsing -------------------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "ScenarioConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        _reject_unknown(raw, _TOP_KEYS, "configuration")
        if "fiducial" not in raw or "field" not in raw:
            raise ConfigError("configuration needs 'fiducial' and 'field'")

        fid = raw["fiducial"]
        if isinstance(fid, list):
            fid = [_coefficient(c, i) for i, c in enumerate(fid)]
        elif not isinstance(fid, str):
            raise ConfigError("fiducial must be a preset name or a coefficient list")

        fld = raw["field"]
        if not isinstance(fld, dict):
            raise ConfigError("field must be an object")
        _reject_unknown(fld, _FIELD_KEYS, "field")
        fld = dict(fld)
        for key in ("b0", "b"):
            if key not in fld:
                raise ConfigError(f"field.{key} is required")
        zero_delta = fld.get("zero_delta", False)
        if not isinstance(zero_delta, bool):
            raise ConfigError("field.zero_delta must be true or false")
        if not zero_delta and "drive_omega" not in fld:
            raise ConfigError("field.drive_omega is required unless zero_delta is set")
        for key in ("b0", "b", "drive_omega", "mu", "hbar"):
            if key in fld:
                fld[key] = _number(fld[key], f"field.{key}")
        if fld.get("hbar", 1.0) <= 0:
            raise ConfigError("field.hbar must be positive")

        two_s = raw.get("two_s")
        if two_s is not None and (isinstance(two_s, bool) or not isinstance(two_s, int) or two_s < 1):
            raise ConfigError("two_s must be a positive integer")

        gauge = raw.get("gauge")
        if gauge is not None and gauge not in {g.value for g in Gauge}:
            raise ConfigError(f"unknown gauge {gauge!r}")

        initial = raw.get("initial", "cyclic")
        if isinstance(initial, dict):
            _reject_unknown(initial, _INITIAL_KEYS, "initial")
            initial = {k: _number(v, f"initial.{k}") for k, v in initial.items()}
        elif initial != "cyclic":
            raise ConfigError("initial must be 'cyclic' or an object with phi/theta/psi")

        path = raw.get("path", "integrated")
        if path not in ("integrated", "prescribed"):
            raise ConfigError("path must be 'integrated' or 'prescribed'")

        if "periods" in raw and "duration" in raw:
            raise ConfigError("give either 'periods' or 'duration', not both")
        periods = _number(raw["periods"], "periods") if "periods" in raw else None
        duration = _number(raw["duration"], "duration") if "duration" in raw else None
        if periods is None and duration is None:
            periods = 1.0
        if (periods is not None and periods <= 0) or (duration is not None and duration <= 0):
            raise ConfigError("run length must be positive")

        n_steps = raw.get("n_steps", 2000)
        if isinstance(n_steps, bool) or not isinstance(n_steps, int) or n_steps < 2:
            raise ConfigError("n_steps must be an integer >= 2")
        tolerance = _number(raw.get("tolerance", 1e-6), "tolerance")

        outputs = raw.get("outputs", {})
        if not isinstance(outputs, dict):
            raise ConfigError("outputs must be an object")
        _reject_unknown(outputs, _OUTPUT_KEYS, "outputs")
        for k, v in outputs.items():
            if not isinstance(v, str):
                raise ConfigError(f"outputs.{k} must be a path string")

        cfg = cls(fid, fld, two_s, gauge, initial, path, periods, duration, n_steps, tolerance, dict(outputs))
        cfg.fiducial_vector()  # validate early
        return cfg

    @classmethod
    def from_json(cls, text: str) -> "ScenarioConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
        return cls.from_dict(raw)

    @classmethod
    def load(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                continue
            if f.name == "fiducial" and isinstance(value, list):
                value = [[c.real, c.imag] for c in value]
            out[f.name] = copy.deepcopy(value)
        return out

    # --- derived objects ---------------------------------------------------------

    @property
    def spin(self) -> SpinQuantum:
        if self.two_s is not None:
            return SpinQuantum(self.two_s)
        if isinstance(self.fiducial, str) and self.fiducial in PRESETS:
            return SpinQuantum(2)
        if isinstance(self.fiducial, list):
            return SpinQuantum(len(self.fiducial) - 1)
        raise ConfigError("two_s is required for this fiducial")

    def fiducial_vector(self) -> FiducialVector:
        try:
            if isinstance(self.fiducial, str):
                explicit = self.fiducial.startswith("pure:") or self.two_s is not None
                return preset_fiducial(self.fiducial, self.spin if explicit else None)
            return FiducialVector(self.spin, self.fiducial)
        except ConfigError:
            raise
        except (ValueError, KeyError, ZeroDivisionError) as exc:
            raise ConfigError(f"invalid fiducial: {exc}") from None

    def field_protocol(self) -> FieldProtocol:
        f = self.field
        mu, hbar = f.get("mu", 1.0), f.get("hbar", 1.0)
        if f.get("zero_delta", False):
            try:
                return zero_delta_field(f["b0"], f["b"], mu, hbar)
            except ValueError as exc:
                raise ConfigError(str(exc)) from None
        return FieldProtocol(f["b0"], f["b"], f["drive_omega"], mu, hbar)

    def model_case(self):
        """The model system named by the fiducial preset, if any."""
        if not isinstance(self.fiducial, str):
            return None
        if self.fiducial.startswith("pure:"):
            return Simplest(Fraction(self.fiducial[5:]), self.spin.two_s)
        return {"spin1-2/3-1/3": SimpleSpin1(), "spin1-equal-pair": SpecialSpin1(),
                "spin1-uniform": A3Spin1()}[self.fiducial]

    def effective_gauge(self) -> Gauge:
        if self.gauge is not None:
            return Gauge(self.gauge)
        case = self.model_case()
        return case.gauge if case is not None else Gauge.PSI_FROZEN

    def with_value(self, dotted: str, value: float) -> "ScenarioConfig":
        """Copy with one numeric field replaced, e.g. ``field.b0`` or ``initial.theta``."""
        raw = self.to_dict()
        parts = dotted.split(".")
        target = raw
        for p in parts[:-1]:
            if p == "initial" and not isinstance(target.get(p), dict):
                target[p] = {}
            if not isinstance(target.get(p), dict):
                raise ConfigError(f"unknown sweep parameter {dotted!r}")
            target = target[p]
        allowed = {
            (): {"periods", "duration", "tolerance"},
            ("field",): _FIELD_KEYS - {"zero_delta"},
            ("initial",): _INITIAL_KEYS,
        }.get(tuple(parts[:-1]))
        if allowed is None or parts[-1] not in allowed:
            raise ConfigError(f"unknown sweep parameter {dotted!r}")
        target[parts[-1]] = value
        if parts == ["periods"]:
            raw.pop("duration", None)
        if parts == ["duration"]:
            raw.pop("periods", None)
        return ScenarioConfig.from_dict(raw)


# --- reports ---------------------------------------------------------------------

def format_float(x: float) -> str:
    """17-significant-digit text that reparses to the same double."""
    if not math.isfinite(x):
        raise ValueError("non-finite value in report")
    return "%.17g" % x


def _dump(obj, indent: int, level: int = 0) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return format_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_dump(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + _dump(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent: int = 2) -> str:
    """Deterministic JSON: insertion-ordered keys and '%.17g' floats."""
    return _dump(obj, indent) + "\n"


@dataclass
class RunReport:
    case: Optional[str]
    gamma: float
    delta: float
    gamma_a0_part: float
    gamma_a3_part: float
    hbar: float
    phase_angle: float
    intensity: float
    closure_residual: float
    consistency_residual: float
    theta0: float
    period: Optional[float]
    closed_form: Optional[dict] = None  # {"gamma": ..., "delta": ...}
    deviations: Optional[dict] = None  # {"gamma": |dGamma|, "delta": |dDelta|}
    tolerance: float = 1e-6
    passed: bool = True

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        raw = json.loads(text)
        names = [f.name for f in fields(cls)]
        if set(raw) != set(names):
            raise ValueError("report fields do not match")
        return cls(**raw)
