"""Built-in invariant suites behind ``spincs check``.

Every check is self-contained (fixed seeds, built-in parameters) and reports
a measured value against its threshold.  The fast level covers the
resolution of unity and unitarity; the full level adds orthogonality,
insertion identities, Stokes, degeneracy, group law, Gaussian decomposition,
conjugated spin operators, the generator identity and the model systems.
"""
from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .coherent import FiducialVector, preset_fiducial, resolution_residual
from .dynamics import FieldProtocol, canonical_matrix, canonical_residual, cyclic_path, cyclic_theta
from .phases import Surface, loop_phase, surface_phase
from .propagator import insertion_identity_residual
from .quadrature import QuadratureSpec
from .scenarios import A3Spin1, SimpleSpin1, Simplest, SpecialSpin1, run_scenario, zero_delta_field, zero_delta_gamma
from .su2 import (
    EulerAngles,
    SpinQuantum,
    antinormal_decomposition,
    antinormal_operator,
    compose_rotations,
    compose_three,
    conjugated_spin_operators,
    gaussian_decomposition,
    maurer_cartan,
    orthogonality_residual,
    rotation_matrix,
    spin_operators,
)

SEED = 20240917


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float
    threshold: float
    seconds: float
    comparison: str = "<"

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "comparison": self.comparison,
            "threshold": self.threshold,
            "seconds": self.seconds,
        }


def random_fiducial(spin, rng) -> FiducialVector:
    spin = SpinQuantum(spin) if isinstance(spin, int) else spin
    return FiducialVector(spin, rng.normal(size=spin.dim) + 1j * rng.normal(size=spin.dim))


def random_angles(rng, theta_max=math.pi) -> EulerAngles:
    return EulerAngles(rng.uniform(0, 2 * math.pi), rng.uniform(0, theta_max), rng.uniform(0, 2 * math.pi))


# --- individual measurements -----------------------------------------------------

def resolution_max(two_s_values=(1, 2, 3, 4), n_fiducials=10, seed=SEED) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for two_s in two_s_values:
        quad = QuadratureSpec.uniform(two_s + 4)
        for _ in range(n_fiducials):
            worst = max(worst, resolution_residual(random_fiducial(two_s, rng), quad))
    return worst


def unitarity_max(two_s_values=(1, 2, 3, 4, 5), n=20, seed=SEED) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for two_s in two_s_values:
        for _ in range(n):
            R = rotation_matrix(SpinQuantum(two_s), random_angles(rng))
            worst = max(worst, float(np.abs(R @ R.conj().T - np.eye(two_s + 1)).max()))
    return worst


def orthogonality_max(max_two_s=5) -> float:
    worst = 0.0
    for a in range(1, max_two_s + 1):
        for b in range(a, max_two_s + 1, 2):
            quad = QuadratureSpec.uniform(max(a, b) + 3)
            worst = max(worst, orthogonality_residual(SpinQuantum(a), quad, SpinQuantum(b)))
    return worst


def insertion_max(seed=SEED) -> float:
    rng = np.random.default_rng(seed)
    cases = [
        (FiducialVector.basis(SpinQuantum(1), -0.5), FieldProtocol(0.0, 1.0, 0.0), 0.7),
        (preset_fiducial("spin1-uniform"), FieldProtocol(0.8, 0.5, 1.7, mu=0.9), 1.1),
        (random_fiducial(2, rng), FieldProtocol(1.2, -0.3, -0.6), 0.9),
        (random_fiducial(3, rng), FieldProtocol(0.4, 0.7, 2.2, hbar=0.8), 0.5),
    ]
    worst = 0.0
    for fid, field, t_mid in cases:
        quad = QuadratureSpec.uniform(fid.spin.two_s + 4)
        worst = max(worst, insertion_identity_residual(fid, random_angles(rng), random_angles(rng), field, t_mid, quad))
    return worst


def _wobbly_loop(theta0, amp, psi_of_phi):
    def loop(s):
        s = np.asarray(s, dtype=float)
        phi = 2 * np.pi * s
        return phi, theta0 + amp * np.sin(phi), psi_of_phi(phi)

    def tangent(s, h=1e-6):
        a, b = loop(np.asarray(s) + h), loop(np.asarray(s) - h)
        return tuple((x - y) / (2 * h) for x, y in zip(a, b))

    return loop, tangent


def stokes_max() -> float:
    """Line vs surface phase for a monopole fiducial and the A3 fiducial."""
    quad = QuadratureSpec(40, 256, 1)
    worst = 0.0
    monopole_loop = _wobbly_loop(1.0, 0.3, lambda p: -p)  # psi = -phi: no net A0 dpsi on the cap
    a3_loop = _wobbly_loop(1.2, 0.25, lambda p: 0.4 * np.cos(p))
    for fid, (loop, tangent) in (
        (FiducialVector.basis(SpinQuantum(4), 1), monopole_loop),
        (preset_fiducial("spin1-2/3-1/3"), monopole_loop),
        (preset_fiducial("spin1-uniform"), a3_loop),
    ):
        line = loop_phase(fid, loop, tangent, 512)
        surf = surface_phase(fid, Surface.radial_cap(loop), quad)
        worst = max(worst, abs(line - surf))
    return worst


def degeneracy_max(n=1000, seed=SEED) -> float:
    """max |det M| / ||M||^3 over random fiducials and angles."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        fid = random_fiducial(1 + i % 5, rng)
        M = canonical_matrix(fid, random_angles(rng))
        norm = np.linalg.norm(M, 2)
        if norm > 0:
            worst = max(worst, abs(np.linalg.det(M)) / norm**3)
    return worst


def cyclic_equation_max() -> float:
    """Residual of the canonical equations on the closed-form cyclic orbits."""
    worst = 0.0
    fields = (FieldProtocol(1.0, 0.5, 2.0), FieldProtocol(0.6, -0.4, 1.3, mu=1.5, hbar=0.7))
    for field in fields:
        for case in (Simplest(1, 4), Simplest(-2, 4), SimpleSpin1(), A3Spin1()):
            theta0 = cyclic_theta(field, case.cyclic_case)
            traj = cyclic_path(field, theta0, case.gauge, 16)
            fid = case.fiducial()
            for t, q, qd in zip(traj.times, traj.omegas, traj.omega_dots):
                worst = max(worst, canonical_residual(fid, q, qd, field, t))
    return worst


def group_law_max(n=50, seed=SEED) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        spin = SpinQuantum(1 + i % 4)
        a, b, c = random_angles(rng), random_angles(rng), random_angles(rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            two = compose_rotations(b, a)
            three = compose_three(c, b, a)
        Ra, Rb, Rc = (rotation_matrix(spin, x) for x in (a, b, c))
        worst = max(worst, float(np.abs(rotation_matrix(spin, two) - Rb @ Ra).max()))
        worst = max(worst, float(np.abs(rotation_matrix(spin, three) - Rc @ Rb @ Ra).max()))
    return worst


def gaussian_max(n=30, seed=SEED) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        spin = SpinQuantum(1 + i % 4)
        omega = random_angles(rng, theta_max=2.5)
        R = rotation_matrix(spin, omega)
        worst = max(worst, float(np.abs(gaussian_decomposition(omega).operator(spin) - R).max()))
        worst = max(worst, float(np.abs(antinormal_operator(spin, antinormal_decomposition(omega)) - R).max()))
    return worst


def conjugation_max(n=30, seed=SEED) -> float:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        spin = SpinQuantum(1 + i % 5)
        omega = random_angles(rng)
        S = spin_operators(spin)
        R = rotation_matrix(spin, omega)
        direct = [R.conj().T @ op @ R for op in (S.S3, S.S_plus, S.S_minus)]
        closed = conjugated_spin_operators(spin, omega)
        worst = max(worst, max(float(np.abs(x - y).max()) for x, y in zip(direct, closed)))
    return worst


def generator_order(seed=SEED, h=1e-2) -> float:
    """Observed convergence order of central differences towards R^dagger dR/dt."""
    rng = np.random.default_rng(seed)
    orders = []
    for i in range(10):
        spin = SpinQuantum(1 + i % 4)
        q = random_angles(rng).as_array()
        v = rng.normal(size=3)
        R = rotation_matrix(spin, q)
        exact = maurer_cartan(spin, q, v)
        errs = []
        for step in (h, h / 2):
            fd = (rotation_matrix(spin, q + step * v) - rotation_matrix(spin, q - step * v)) / (2 * step)
            errs.append(float(np.abs(R.conj().T @ fd - exact).max()))
        orders.append(math.log2(errs[0] / errs[1]))
    return min(orders)


def model_systems_max(n_steps=2000) -> float:
    """Largest |numerical - closed form| over the four model systems and the H = 0 orbits."""
    worst = 0.0
    field = FieldProtocol(1.0, 0.5, 2.0)
    for case in (Simplest(-2), Simplest(1, 4), SimpleSpin1(), SpecialSpin1(), A3Spin1()):
        _, num, cf = run_scenario(case, field, n_steps)
        worst = max(worst, abs(num.gamma - cf.gamma), abs(num.delta - cf.delta))
    zd = zero_delta_field(0.8, 0.6, mu=-1.0)
    for case in (Simplest(1), A3Spin1()):
        _, num, _ = run_scenario(case, zd, n_steps)
        worst = max(worst, abs(num.delta), abs(num.gamma - zero_delta_gamma(case, zd)))
    return worst


# --- suites ----------------------------------------------------------------------

FAST: list[tuple[str, Callable[[], float], float, str]] = [
    ("resolution_of_unity", resolution_max, 1e-10, "<"),
    ("unitarity", unitarity_max, 1e-12, "<"),
]

FULL = FAST + [
    ("orthogonality", orthogonality_max, 1e-10, "<"),
    ("insertion_identity", insertion_max, 1e-8, "<"),
    ("stokes", stokes_max, 1e-6, "<"),
    ("degeneracy", degeneracy_max, 1e-12, "<"),
    ("cyclic_canonical_equations", cyclic_equation_max, 1e-10, "<"),
    ("group_law", group_law_max, 1e-10, "<"),
    ("gaussian_decomposition", gaussian_max, 1e-8, "<"),
    ("conjugated_spin_operators", conjugation_max, 1e-12, "<"),
    ("generator_convergence_order", generator_order, 1.9, ">="),
    ("model_system_phases", model_systems_max, 1e-6, "<"),
]


def run_checks(full: bool = False) -> dict:
    """Run a suite and return a JSON-ready report."""
    results = []
    for name, fn, threshold, comparison in FULL if full else FAST:
        start = time.perf_counter()
        try:
            value = float(fn())
            ok = value < threshold if comparison == "<" else value >= threshold
        except Exception:  # a crashing check is a failed check
            value, ok = float("nan"), False
        results.append(CheckResult(name, bool(ok and math.isfinite(value)), value, threshold,
                                   time.perf_counter() - start, comparison))
    return {
        "level": "full" if full else "fast",
        "passed": all(r.passed for r in results),
        "checks": [r.as_dict() for r in results],
    }
