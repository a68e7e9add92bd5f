"""Classical dynamics of coherent-state labels.

The Lagrangian of the coherent-state path integral is first order in the
velocities,

    L = hbar [A0 (phi' cos(theta) + psi') + A3] - H,
    A3 = -A1 sin(theta) phi' + A4 theta',

and its Euler-Lagrange equations M(Omega) Omega' = grad(H)/hbar have a
coefficient matrix with det M = 0 identically.  One velocity component is
therefore fixed by an explicit :class:`Gauge`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

import numpy as np
from scipy.integrate import simpson

from .coherent import FiducialVector, a_coefficients, a_zero, coherent_amplitudes, neighbour_sum
from .errors import InconsistentSystem, NoCyclicSolution, SingularReducedSystem
from .su2 import EulerAngles, spin_operators

DET_TOL = 1e-12
CONSISTENCY_TOL = 1e-8


@dataclass(frozen=True)
class FieldProtocol:
    """Rotating magnetic field B(t) = (b0 cos wt, b0 sin wt, b), H = -mu B.S."""

    b0: float
    b: float
    drive_omega: float
    mu: float = 1.0
    hbar: float = 1.0

    def field(self, t) -> np.ndarray:
        wt = self.drive_omega * t
        return np.array([self.b0 * math.cos(wt), self.b0 * math.sin(wt), self.b])

    def hamiltonian_matrix(self, spin, t) -> np.ndarray:
        S = spin_operators(spin)
        B = self.field(t)
        return -self.mu * (B[0] * S.S1 + B[1] * S.S2 + B[2] * S.S3)

    @property
    def period(self) -> float:
        """Duration of one revolution of the transverse field, 2 pi/|omega|."""
        if self.drive_omega == 0:
            raise ValueError("static field has no period")
        return 2 * math.pi / abs(self.drive_omega)


@dataclass(frozen=True)
class MatrixHamiltonian:
    """User-supplied Hamiltonian t -> (2s+1)x(2s+1) Hermitian matrix.

    Gradients of its coherent-state expectation are taken by central
    differences.
    """

    matrix: Callable[[float], np.ndarray]
    hbar: float = 1.0
    step: float = 1e-6

    def hamiltonian_matrix(self, spin, t) -> np.ndarray:
        return np.asarray(self.matrix(t))


class OmegaDot(NamedTuple):
    phi_dot: float
    theta_dot: float
    psi_dot: float


class Gauge(str, Enum):
    """Prescription removing the zero mode of the canonical equations."""

    PSI_FROZEN = "psi_frozen"  # psi' = 0
    PSI_LOCKED = "psi_locked"  # psi' = -phi'
    LEAST_NORM = "least_norm"  # minimum-norm velocity


# gauge parametrizations Omega' = G y, y = (phi', theta')
_GAUGE_MAPS = {
    Gauge.PSI_FROZEN: np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),
    Gauge.PSI_LOCKED: np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]]),
}


# --- expectation values ------------------------------------------------------

def _spin_vector_and_grad(a0, p, phi, theta, psi):
    """<S> and its (phi, theta, psi) derivatives for a fiducial with A0=a0, P=p.

    Returns arrays of shape (3,) and (3, 3): grad[i, k] = d<S_k>/d q_i.
    """
    ct, st = math.cos(theta), math.sin(theta)
    e_plus = complex(math.cos(phi + psi), math.sin(phi + psi)) * p
    e_minus = complex(math.cos(phi - psi), math.sin(phi - psi)) * p.conjugate()
    eiphi = complex(math.cos(phi), math.sin(phi))
    eipsi_p = complex(math.cos(psi), math.sin(psi)) * p
    a1, a4 = eipsi_p.real, eipsi_p.imag

    s3 = a0 * ct - a1 * st
    sp = a0 * st * eiphi + 0.5 * ((1 + ct) * e_plus - (1 - ct) * e_minus)
    d_phi_sp = 1j * sp
    d_theta_sp = a0 * ct * eiphi - 0.5 * st * (e_plus + e_minus)
    d_psi_sp = 0.5j * ((1 + ct) * e_plus + (1 - ct) * e_minus)

    vec = np.array([sp.real, sp.imag, s3])
    grad = np.array(
        [
            [d_phi_sp.real, d_phi_sp.imag, 0.0],
            [d_theta_sp.real, d_theta_sp.imag, -a0 * st - a1 * ct],
            [d_psi_sp.real, d_psi_sp.imag, a4 * st],
        ]
    )
    return vec, grad


def _expectation_direct(fid: FiducialVector, omega, matrix) -> float:
    amps = coherent_amplitudes(fid, *omega)
    return float(np.vdot(amps, matrix @ amps).real)


def hamiltonian_expectation(fid: FiducialVector, omega, field, t) -> float:
    """H(Omega, t) = <Omega|H(t)|Omega>."""
    phi, theta, psi = omega
    if isinstance(field, FieldProtocol):
        vec, _ = _spin_vector_and_grad(a_zero(fid), neighbour_sum(fid), phi, theta, psi)
        return float(-field.mu * field.field(t) @ vec)
    return _expectation_direct(fid, omega, field.hamiltonian_matrix(fid.spin, t))


def hamiltonian_gradient(fid: FiducialVector, omega, field, t) -> np.ndarray:
    """(dH/dphi, dH/dtheta, dH/dpsi)."""
    phi, theta, psi = omega
    if isinstance(field, FieldProtocol):
        _, grad = _spin_vector_and_grad(a_zero(fid), neighbour_sum(fid), phi, theta, psi)
        return -field.mu * grad @ field.field(t)
    matrix = field.hamiltonian_matrix(fid.spin, t)
    h = field.step
    q = np.array([phi, theta, psi], dtype=float)
    out = np.empty(3)
    for i in range(3):
        dq = np.zeros(3)
        dq[i] = h
        out[i] = (_expectation_direct(fid, q + dq, matrix) - _expectation_direct(fid, q - dq, matrix)) / (2 * h)
    return out


# --- Lagrangian ------------------------------------------------------------------

class TopologicalTerm(NamedTuple):
    a0_part: float
    a3_part: float

    @property
    def total(self):
        return self.a0_part + self.a3_part


def topological_term(fid: FiducialVector, omega, omega_dot, hbar=1.0) -> TopologicalTerm:
    """<Omega| i hbar d/dt |Omega> split into its A0 and A3 pieces.

    Accepts arrays of angles and rates (evaluated elementwise).
    """
    phi, theta, psi = (np.asarray(x, dtype=float) for x in omega)
    phid, thetad, psid = (np.asarray(x, dtype=float) for x in omega_dot)
    A = a_coefficients(fid, psi)
    a0_part = hbar * A.a0 * (phid * np.cos(theta) + psid)
    a3_part = hbar * (-A.a1 * np.sin(theta) * phid + A.a4 * thetad)
    return TopologicalTerm(a0_part, a3_part)


def lagrangian(fid: FiducialVector, omega, omega_dot, field, t) -> float:
    top = topological_term(fid, omega, omega_dot, field.hbar)
    return float(top.total) - hamiltonian_expectation(fid, omega, field, t)


# --- canonical equations ---------------------------------------------------------

def canonical_matrix(fid: FiducialVector, omega) -> np.ndarray:
    """M with M (phi', theta', psi') = (-dH/dtheta, dH/dphi, dH/dpsi)/hbar."""
    _, theta, psi = omega
    A = a_coefficients(fid, psi)
    return _canonical_matrix(A.a0, float(A.a1), float(A.a4), theta)


def _canonical_matrix(a0, a1, a4, theta):
    a = a0 * math.sin(theta) + a1 * math.cos(theta)
    b = a1
    c = a4 * math.sin(theta)
    return np.array([[a, 0.0, b], [0.0, a, -c], [c, b, 0.0]])


def canonical_residual(fid: FiducialVector, omega, omega_dot, field, t) -> float:
    """max |M Omega' - (-dH/dtheta, dH/dphi, dH/dpsi)/hbar|, times hbar."""
    M = canonical_matrix(fid, omega)
    dH = hamiltonian_gradient(fid, omega, field, t)
    g = np.array([-dH[1], dH[0], dH[2]]) / field.hbar
    return float(np.abs(M @ np.asarray(omega_dot, dtype=float) - g).max() * field.hbar)


class CanonicalRates(NamedTuple):
    omega_dot: OmegaDot
    residual: float  # |M Omega' - g| in Hamiltonian units
    vacuous: bool = False  # M = 0 and grad H = 0: the rates come from spin precession


def _solve_reduced(M, g, gauge: Gauge):
    if gauge is Gauge.LEAST_NORM:
        U, sv, Vt = np.linalg.svd(M)
        if sv[1] < DET_TOL:
            raise SingularReducedSystem(f"canonical matrix has rank < 2 (sigma = {sv})")
        return Vt[:2].T @ ((U[:, :2].T @ g) / sv[:2])
    G = _GAUGE_MAPS[gauge]
    MG = M @ G
    best, rows = -1.0, None
    for i, j in ((0, 1), (0, 2), (1, 2)):
        det = MG[i, 0] * MG[j, 1] - MG[i, 1] * MG[j, 0]
        if abs(det) > best:
            best, rows, d = abs(det), (i, j), det
    if best < DET_TOL:
        raise SingularReducedSystem(f"gauge-reduced matrix is singular (|det| = {best:.3e}) for {gauge.value}")
    i, j = rows
    y0 = (g[i] * MG[j, 1] - MG[i, 1] * g[j]) / d
    y1 = (MG[i, 0] * g[j] - g[i] * MG[j, 0]) / d
    return G @ np.array([y0, y1])


def _precession_rates(field: FieldProtocol, theta, phi, t):
    """Precession n' = (mu/hbar) n x B of the rotated z axis n(theta, phi)."""
    st = math.sin(theta)
    if abs(st) < 1e-9:
        raise SingularReducedSystem("spin axis at a coordinate pole")
    ct, cp, sp = math.cos(theta), math.cos(phi), math.sin(phi)
    B = field.field(t)
    k = field.mu / field.hbar
    d_theta_n = np.array([ct * cp, ct * sp, -st])
    d_phi_n = np.array([-st * sp, st * cp, 0.0])
    return k * (B @ d_theta_n) / st, -k * (B @ d_phi_n) / st


class CanonicalSystem:
    """Right-hand side of the gauge-fixed canonical equations.

    Fiducial-dependent constants are computed once, so repeated evaluation
    along a trajectory is cheap.
    """

    def __init__(self, fid: FiducialVector, field, gauge: Gauge = Gauge.PSI_FROZEN, tol: float = CONSISTENCY_TOL):
        self.fid = fid
        self.field = field
        self.gauge = Gauge(gauge)
        self.tol = tol
        self.a0 = a_zero(fid)
        self.p = neighbour_sum(fid)
        # zero spin expectation: the Lagrangian has no kinetic term at all
        self.vacuous = abs(self.a0) < DET_TOL and abs(self.p) < DET_TOL

    def gradient(self, q, t):
        if isinstance(self.field, FieldProtocol):
            _, grad = _spin_vector_and_grad(self.a0, self.p, *q)
            return -self.field.mu * grad @ self.field.field(t)
        return hamiltonian_gradient(self.fid, q, self.field, t)

    def rates(self, t, q) -> CanonicalRates:
        phi, theta, psi = q
        hbar = self.field.hbar
        e = complex(math.cos(psi), math.sin(psi)) * self.p
        M = _canonical_matrix(self.a0, e.real, e.imag, theta)
        dH = self.gradient(q, t)
        g = np.array([-dH[1], dH[0], dH[2]]) / hbar
        if self.vacuous:
            if np.abs(g).max() > self.tol:
                raise InconsistentSystem("canonical matrix vanishes but grad H does not", float(np.abs(g).max() * hbar), t)
            if isinstance(self.field, FieldProtocol):
                try:
                    phid, thetad = _precession_rates(self.field, theta, phi, t)
                except SingularReducedSystem as exc:
                    raise SingularReducedSystem(str(exc), t) from None
            else:
                phid = thetad = 0.0
            psid = -phid if self.gauge is Gauge.PSI_LOCKED else 0.0
            return CanonicalRates(OmegaDot(phid, thetad, psid), 0.0, True)
        try:
            x = _solve_reduced(M, g, self.gauge)
        except SingularReducedSystem as exc:
            raise SingularReducedSystem(f"{exc} at theta = {theta:g}", t) from None
        residual = float(np.abs(M @ x - g).max() * hbar)
        if residual > self.tol * (1.0 + float(np.abs(dH).max())):
            raise InconsistentSystem(
                f"canonical equations inconsistent in gauge {self.gauge.value} (residual {residual:.3e})", residual, t
            )
        return CanonicalRates(OmegaDot(*(float(v) for v in x)), residual)

    def __call__(self, t, q) -> np.ndarray:
        return np.array(self.rates(t, q).omega_dot)


def canonical_rhs(fid: FiducialVector, omega, field, t, gauge: Gauge = Gauge.PSI_FROZEN,
                  tol: float = CONSISTENCY_TOL) -> CanonicalRates:
    """Solve the generalized canonical equations for the velocities.

    The 3x3 system is rank 2; ``gauge`` supplies the missing condition and
    the best-conditioned pair of remaining equations is solved.  The third
    equation is checked as a consistency residual.  When the fiducial vector
    has zero spin expectation the Lagrangian vanishes identically and the
    rates of the classical precession of the rotated z axis are returned.
    """
    return CanonicalSystem(fid, field, gauge, tol).rates(t, tuple(float(x) for x in omega))


# --- trajectories ----------------------------------------------------------------

CLOSURE_TOL = 1e-6


def _wrap(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Time-sampled path Omega(t) with its velocities.

    ``omegas`` and ``omega_dots`` have shape (n, 3), columns (phi, theta, psi).
    Angles are stored unwrapped.
    """

    times: np.ndarray
    omegas: np.ndarray
    omega_dots: np.ndarray
    closure_tol: float = CLOSURE_TOL
    consistency_residual: float = 0.0

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        omegas = np.asarray(self.omegas, dtype=float).reshape(-1, 3)
        dots = np.asarray(self.omega_dots, dtype=float).reshape(-1, 3)
        if not (len(times) == len(omegas) == len(dots)):
            raise ValueError("times, omegas and omega_dots must have equal length")
        if len(times) > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("times must be strictly increasing")
        for name, arr in (("times", times), ("omegas", omegas), ("omega_dots", dots)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self):
        return len(self.times)

    @property
    def closure_residual(self) -> float:
        """Largest per-angle mismatch of Omega(T) and Omega(0) modulo 2 pi."""
        return float(np.abs(_wrap(self.omegas[-1] - self.omegas[0])).max())

    @property
    def closed(self) -> bool:
        return self.closure_residual < self.closure_tol

    @property
    def winding(self) -> np.ndarray:
        """Net change of each angle in units of 2 pi (rounded)."""
        return np.rint((self.omegas[-1] - self.omegas[0]) / (2 * np.pi)).astype(int)

    def angles(self, i) -> EulerAngles:
        return EulerAngles(*self.omegas[i])

    def reversed(self) -> "Trajectory":
        """Same path traversed backwards over the same time window."""
        t = self.times[0] + self.times[-1] - self.times[::-1]
        return Trajectory(t, self.omegas[::-1], -self.omega_dots[::-1], self.closure_tol, self.consistency_residual)

    @classmethod
    def from_functions(cls, times, omega_fn, omega_dot_fn, **kw) -> "Trajectory":
        """Sample an analytic path; the callables map a time array to (n, 3)."""
        times = np.asarray(times, dtype=float)
        return cls(times, np.asarray(omega_fn(times)).reshape(-1, 3), np.asarray(omega_dot_fn(times)).reshape(-1, 3), **kw)


def integrate_trajectory(fid: FiducialVector, omega0, field, gauge: Gauge, t_final: float, n_steps: int,
                         t0: float = 0.0, tol: float = CONSISTENCY_TOL) -> Trajectory:
    """Classical fourth-order Runge-Kutta with ``n_steps`` equal steps."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    system = CanonicalSystem(fid, field, gauge, tol)
    times = t0 + (t_final - t0) * np.arange(n_steps + 1) / n_steps
    h = (t_final - t0) / n_steps
    q = np.array(tuple(omega0), dtype=float)
    omegas = np.empty((n_steps + 1, 3))
    dots = np.empty((n_steps + 1, 3))
    worst = 0.0
    for i, t in enumerate(times):
        r = system.rates(t, q)
        omegas[i] = q
        dots[i] = r.omega_dot
        worst = max(worst, r.residual)
        if i == n_steps:
            break
        k1 = dots[i]
        k2 = system(t + h / 2, q + h / 2 * k1)
        k3 = system(t + h / 2, q + h / 2 * k2)
        k4 = system(t + h, q + h * k3)
        q = q + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return Trajectory(times, omegas, dots, consistency_residual=worst)


class CyclicCase(str, Enum):
    PURE_M = "pure_m"  # cot(theta0) = B/B0 + hbar w/(mu B0)
    A3 = "a3"  # tan(theta0) = -(B/B0 + hbar w/(mu B0))


def cyclic_theta(field: FieldProtocol, case: CyclicCase) -> float:
    """Polar angle theta0 in (0, pi) of the cyclic solution phi = w t."""
    case = CyclicCase(case)
    if field.b0 == 0:
        raise NoCyclicSolution("no cyclic orbit off the pole without a transverse field")
    x = field.b / field.b0 + field.hbar * field.drive_omega / (field.mu * field.b0)
    if case is CyclicCase.PURE_M:
        return math.pi / 2 - math.atan(x)
    y = -x
    if y == 0:
        raise NoCyclicSolution("tan(theta0) = 0 puts the orbit on a pole")
    return math.atan(y) if y > 0 else math.pi + math.atan(y)


def cyclic_path(field: FieldProtocol, theta0: float, gauge: Gauge, n_steps: int, phi0: float = 0.0,
                periods: int = 1) -> Trajectory:
    """Closed-form orbit phi = phi0 + w t, theta = theta0 over whole periods.

    psi follows the gauge: -phi for PSI_LOCKED, 0 otherwise.
    """
    w = field.drive_omega
    T = periods * field.period
    t = T * np.arange(n_steps + 1) / n_steps
    lock = -1.0 if Gauge(gauge) is Gauge.PSI_LOCKED else 0.0
    phi = phi0 + w * t
    omegas = np.column_stack([phi, np.full_like(t, theta0), lock * phi])
    dots = np.tile([w, 0.0, lock * w], (len(t), 1))
    return Trajectory(t, omegas, dots)


def action(fid: FiducialVector, traj: Trajectory, field) -> float:
    """S = integral of L dt along a sampled path (composite Simpson)."""
    top = topological_term(fid, traj.omegas.T, traj.omega_dots.T, field.hbar).total
    H = np.array([hamiltonian_expectation(fid, q, field, t) for t, q in zip(traj.times, traj.omegas)])
    return float(simpson(top - H, x=traj.times))
