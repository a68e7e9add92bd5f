"""The four model systems in a rotating magnetic field and their closed forms.

All closed forms are for one revolution of the field traversed forward in
time, over t in [0, 2 pi/|w|].  For w < 0 the orbit runs clockwise and both
phases change sign relative to the w > 0 expressions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .coherent import FiducialVector, preset_fiducial
from .dynamics import CyclicCase, FieldProtocol, Gauge, Trajectory, cyclic_path, cyclic_theta, integrate_trajectory
from .errors import UnknownCase
from .phases import PhaseResult, phase_result
from .su2 import SpinQuantum

SQRT2 = math.sqrt(2)


@dataclass(frozen=True)
class Simplest:
    """Pure fiducial |m> of spin s (defaults to s = |m|, or s = 1 for m = 0)."""

    m: Fraction
    two_s: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "m", Fraction(self.m).limit_denominator(2))

    @property
    def spin(self) -> SpinQuantum:
        if self.two_s is not None:
            return SpinQuantum(self.two_s)
        two_s = int(abs(2 * self.m))
        return SpinQuantum(two_s if two_s else 2)

    def fiducial(self) -> FiducialVector:
        return FiducialVector.basis(self.spin, self.m)

    gauge = Gauge.PSI_LOCKED
    cyclic_case = CyclicCase.PURE_M


@dataclass(frozen=True)
class SimpleSpin1:
    """sqrt(2/3)|1> + sqrt(1/3)|-1>: monopole strength A0 = 1/3, no A3 term."""

    preset = "spin1-2/3-1/3"
    gauge = Gauge.PSI_LOCKED
    cyclic_case = CyclicCase.PURE_M

    def fiducial(self) -> FiducialVector:
        return preset_fiducial(self.preset)


@dataclass(frozen=True)
class SpecialSpin1:
    """(|1> + |-1>)/sqrt(2): every A coefficient vanishes."""

    preset = "spin1-equal-pair"
    gauge = Gauge.PSI_LOCKED
    cyclic_case = CyclicCase.PURE_M

    def fiducial(self) -> FiducialVector:
        return preset_fiducial(self.preset)


@dataclass(frozen=True)
class A3Spin1:
    """(|1> + |0> + |-1>)/sqrt(3): A0 = 0, the phase comes entirely from A3."""

    preset = "spin1-uniform"
    gauge = Gauge.PSI_FROZEN
    cyclic_case = CyclicCase.A3

    def fiducial(self) -> FiducialVector:
        return preset_fiducial(self.preset)


CASES = (Simplest, SimpleSpin1, SpecialSpin1, A3Spin1)


def _check_case(case):
    if not isinstance(case, CASES):
        raise UnknownCase(f"not a model system: {case!r}")


def _orientation(field: FieldProtocol) -> float:
    if field.drive_omega == 0:
        raise ValueError("closed forms need a rotating field (w != 0)")
    return math.copysign(1.0, field.drive_omega)


def _monopole(m, field, theta0):
    sigma = _orientation(field)
    gamma = -2 * math.pi * m * field.hbar * (1 - math.cos(theta0)) * sigma
    delta = -(2 * math.pi * field.mu * m / abs(field.drive_omega)) * (
        field.b * math.cos(theta0) + field.b0 * math.sin(theta0)
    )
    return PhaseResult(gamma, delta, gamma, 0.0, field.hbar)


def scenario_closed_form(case, field: FieldProtocol, theta0: float) -> PhaseResult:
    """Analytic phases of the cyclic orbit phi = w t, theta = theta0."""
    _check_case(case)
    if isinstance(case, Simplest):
        return _monopole(float(case.m), field, theta0)
    if isinstance(case, SimpleSpin1):
        return _monopole(1 / 3, field, theta0)
    if isinstance(case, SpecialSpin1):
        return PhaseResult(0.0, 0.0, 0.0, 0.0, field.hbar)
    sigma = _orientation(field)
    gamma = -(4 * SQRT2 / 3) * field.hbar * math.pi * math.sin(theta0) * sigma
    delta = -(4 * SQRT2 / 3) * (math.pi * field.mu / abs(field.drive_omega)) * (
        field.b0 * math.cos(theta0) - field.b * math.sin(theta0)
    )
    return PhaseResult(gamma, delta, 0.0, gamma, field.hbar)


def zero_delta_field(b0: float, b: float, mu: float = 1.0, hbar: float = 1.0) -> FieldProtocol:
    """Field whose cyclic orbit has H = 0 throughout: w = -mu (b0^2 + b^2)/(hbar b)."""
    if b == 0:
        raise ValueError("the H = 0 orbit needs a static component b != 0")
    return FieldProtocol(b0, b, -mu * (b0**2 + b**2) / (hbar * b), mu, hbar)


def zero_delta_gamma(case, field: FieldProtocol) -> float:
    """Geometric phase on the H = 0 orbit written in terms of the field.

    Monopole cases: -2 pi m hbar [1 + b0/sqrt(b0^2 + b^2)] (for b > 0);
    A3 case: -(4 sqrt2/3) hbar pi |b0|/sqrt(b0^2 + b^2).
    """
    _check_case(case)
    sigma = _orientation(field)
    root = math.hypot(field.b0, field.b)
    if isinstance(case, SpecialSpin1):
        return 0.0
    if isinstance(case, A3Spin1):
        return -(4 * SQRT2 / 3) * field.hbar * math.pi * abs(field.b0) / root * sigma
    m = float(case.m) if isinstance(case, Simplest) else 1 / 3
    return -2 * m * math.pi * field.hbar * (1 + math.copysign(1.0, field.b) * field.b0 / root) * sigma


def initial_angles(case, theta0: float):
    """Start of the cyclic orbit: phi = 0 in phase with the transverse field."""
    return (0.0, theta0, 0.0)


def scenario_trajectory(case, field: FieldProtocol, n_steps: int = 2000, theta0: float | None = None,
                        integrate: bool = True, periods: int = 1) -> Trajectory:
    """One-period orbit of a model system, integrated or in closed form."""
    _check_case(case)
    if theta0 is None:
        theta0 = cyclic_theta(field, case.cyclic_case)
    if not integrate:
        return cyclic_path(field, theta0, case.gauge, n_steps, periods=periods)
    return integrate_trajectory(case.fiducial(), initial_angles(case, theta0), field, case.gauge,
                                periods * field.period, n_steps)


def run_scenario(case, field: FieldProtocol, n_steps: int = 2000, theta0: float | None = None):
    """Integrate one period and return (trajectory, numerical phases, closed form)."""
    if theta0 is None:
        theta0 = cyclic_theta(field, case.cyclic_case)
    traj = scenario_trajectory(case, field, n_steps, theta0)
    return traj, phase_result(case.fiducial(), traj, field), scenario_closed_form(case, field, theta0)
