"""Geometric and dynamical phases, the curvature 2-form and Stokes checks."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import simpson

from .coherent import FiducialVector, a_coefficients
from .dynamics import Trajectory, hamiltonian_expectation, topological_term
from .errors import ChartViolation, TooFewNodes
from .quadrature import QuadratureSpec


class OpenPathWarning(UserWarning):
    """Phase requested on a trajectory that does not close."""


@dataclass(frozen=True)
class PhaseResult:
    """Phases accumulated along a closed path, in action units.

    gamma  : geometric phase, line integral of <Omega| i hbar d/dt |Omega>
    delta  : dynamical phase, time integral of <Omega|H|Omega>
    """

    gamma: float
    delta: float
    gamma_a0_part: float
    gamma_a3_part: float
    hbar: float = 1.0

    @property
    def phase_angle(self) -> float:
        """(gamma - delta)/hbar, the exponent of the accumulated phase factor."""
        return (self.gamma - self.delta) / self.hbar

    @property
    def gamma_angle(self) -> float:
        return self.gamma / self.hbar

    def as_dict(self) -> dict:
        return {
            "gamma": self.gamma,
            "delta": self.delta,
            "gamma_a0_part": self.gamma_a0_part,
            "gamma_a3_part": self.gamma_a3_part,
            "hbar": self.hbar,
            "phase_angle": self.phase_angle,
        }


class GeometricPhase(NamedTuple):
    total: float
    a0_part: float
    a3_part: float


def _check_nodes(traj: Trajectory):
    if len(traj) < 3:
        raise TooFewNodes(f"need at least 3 trajectory nodes, got {len(traj)}")
    if not traj.closed:
        warnings.warn(
            f"trajectory is not closed (residual {traj.closure_residual:.3e}); phase is path-dependent",
            OpenPathWarning,
            stacklevel=3,
        )


def geometric_phase(fid: FiducialVector, traj: Trajectory, hbar: float = 1.0) -> GeometricPhase:
    """Composite-Simpson line integral of the topological term."""
    _check_nodes(traj)
    top = topological_term(fid, traj.omegas.T, traj.omega_dots.T, hbar)
    a0 = float(simpson(np.broadcast_to(top.a0_part, traj.times.shape), x=traj.times))
    a3 = float(simpson(np.broadcast_to(top.a3_part, traj.times.shape), x=traj.times))
    return GeometricPhase(a0 + a3, a0, a3)


def hamiltonian_along(fid: FiducialVector, traj: Trajectory, field) -> np.ndarray:
    return np.array([hamiltonian_expectation(fid, q, field, t) for t, q in zip(traj.times, traj.omegas)])


def dynamical_phase(fid: FiducialVector, traj: Trajectory, field) -> float:
    _check_nodes(traj)
    return float(simpson(hamiltonian_along(fid, traj, field), x=traj.times))


def phase_result(fid: FiducialVector, traj: Trajectory, field) -> PhaseResult:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", OpenPathWarning)
        gp = geometric_phase(fid, traj, field.hbar)
    delta = dynamical_phase(fid, traj, field)
    return PhaseResult(gp.total, delta, gp.a0_part, gp.a3_part, field.hbar)


def interference_intensity(result: PhaseResult) -> float:
    """Fringe maximum 1 + cos[(gamma - delta)/hbar] of the two-beam experiment."""
    return 1.0 + math.cos(result.phase_angle)


# --- forms -----------------------------------------------------------------------

class OneFormValue(NamedTuple):
    dphi: float
    dtheta: float
    dpsi: float


class TwoFormValue(NamedTuple):
    """Coefficients of dtheta^dphi, dphi^dpsi and dpsi^dtheta."""

    dtheta_dphi: float
    dphi_dpsi: float
    dpsi_dtheta: float


def one_form(fid: FiducialVector, omega, hbar: float = 1.0) -> OneFormValue:
    """The topological term as a 1-form on (phi, theta, psi)-space."""
    _, theta, psi = omega
    A = a_coefficients(fid, psi)
    return OneFormValue(
        hbar * (A.a0 * np.cos(theta) - A.a1 * np.sin(theta)),
        hbar * A.a4,
        hbar * A.a0 * np.ones_like(A.a1),
    )


def two_form(fid: FiducialVector, omega, hbar: float = 1.0) -> TwoFormValue:
    """Exterior derivative of :func:`one_form`.

    d omega = -hbar (A0 sin + A1 cos) dtheta^dphi - hbar A4 sin dphi^dpsi
              + hbar A1 dpsi^dtheta.
    Accepts array-valued angles.
    """
    _, theta, psi = omega
    A = a_coefficients(fid, psi)
    st, ct = np.sin(theta), np.cos(theta)
    return TwoFormValue(
        -hbar * (A.a0 * st + A.a1 * ct),
        -hbar * A.a4 * st,
        hbar * A.a1,
    )


def _pair(tf: TwoFormValue, X, Y):
    """d omega(X, Y) for tangent vectors in (phi, theta, psi) components."""
    xp, xt, xq = X
    yp, yt, yq = Y
    return (
        tf.dtheta_dphi * (xt * yp - xp * yt)
        + tf.dphi_dpsi * (xp * yq - xq * yp)
        + tf.dpsi_dtheta * (xq * yt - xt * yq)
    )


@dataclass(frozen=True)
class Surface:
    """Parametrized surface (s, r) in [0,1]^2 -> (phi, theta, psi).

    ``s`` runs once around the boundary loop at r = 1; the rest of the
    boundary (r = 0 and the seam s = 0 ~ s = 1) must carry no net line
    integral, e.g. seams differing by whole turns in phi and psi.
    ``point`` maps arrays (s, r) to a tuple of three arrays.  ``tangents``
    may return (d/ds, d/dr) of the same; central differences are used
    otherwise.
    """

    point: Callable
    tangents: Optional[Callable] = None
    fd_step: float = 1e-6

    def derivatives(self, s, r):
        if self.tangents is not None:
            return self.tangents(s, r)
        h = self.fd_step
        ds = [(a - b) / (2 * h) for a, b in zip(self.point(s + h, r), self.point(s - h, r))]
        r_hi, r_lo = np.minimum(r + h, 1.0), np.maximum(r - h, 0.0)
        dr = [(a - b) / (r_hi - r_lo) for a, b in zip(self.point(s, r_hi), self.point(s, r_lo))]
        return ds, dr

    @classmethod
    def radial_cap(cls, loop: Callable, theta_center: float = 0.0) -> "Surface":
        """Fill a loop s -> (phi, theta, psi) by interpolating theta to ``theta_center``.

        With theta_center = 0 the inner edge sits where the 1-form reduces to
        hbar A0 (dphi + dpsi), so it contributes nothing when A0 = 0 or when
        psi + phi returns to its start along the loop.
        """

        def point(s, r):
            phi, theta, psi = loop(s)
            return phi, theta_center + r * (np.asarray(theta) - theta_center), psi

        return cls(point)


def _check_chart(theta):
    theta = np.asarray(theta)
    if np.any(theta < -1e-12) or np.any(theta > np.pi + 1e-12):
        raise ChartViolation("surface leaves the coordinate chart 0 <= theta <= pi")


def surface_phase(fid: FiducialVector, surface: Surface, quad: QuadratureSpec, hbar: float = 1.0) -> float:
    """Integral of the 2-form over ``surface``, oriented so that it equals the
    line integral along the boundary loop (Stokes).

    Gauss-Legendre with ``quad.n_theta`` nodes across (r) and the periodic rule
    with ``quad.n_phi`` nodes along (s) the loop.
    """
    x, wx = np.polynomial.legendre.leggauss(quad.n_theta)
    r = 0.5 * (x + 1)
    wr = 0.5 * wx
    s = np.arange(quad.n_phi) / quad.n_phi
    ws = np.full(quad.n_phi, 1.0 / quad.n_phi)
    S, R = np.meshgrid(s, r, indexing="ij")
    W = ws[:, None] * wr[None, :]

    edge_s = np.linspace(0, 1, 4 * quad.n_phi + 1)
    for rr in (0.0, 1.0):
        _check_chart(surface.point(edge_s, np.full_like(edge_s, rr))[1])
    q = surface.point(S, R)
    _check_chart(q[1])

    ds, dr = surface.derivatives(S, R)
    tf = two_form(fid, q, hbar)
    return float(np.sum(W * _pair(tf, dr, ds)))


def loop_phase(fid: FiducialVector, loop: Callable, loop_tangent: Callable, n: int, hbar: float = 1.0) -> float:
    """Line integral of the 1-form along a periodic loop, s in [0, 1), periodic rule."""
    s = np.arange(n) / n
    q = loop(s)
    dq = loop_tangent(s)
    w = one_form(fid, q, hbar)
    return float(np.mean(w.dphi * dq[0] + w.dtheta * dq[1] + w.dpsi * dq[2]))
