"""Time-ordered propagator between coherent states and the insertion identity.

The propagator K(f; i) = <Omega_f| T exp(-i/hbar int H dt) |Omega_i> is
evaluated in the (2s+1)-dimensional basis.  Splitting it at an intermediate
time and inserting the coherent-state resolution of unity is the step every
time-sliced path integral rests on; :func:`insertion_identity_residual`
measures how well that step holds on a finite quadrature grid.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .coherent import FiducialVector, coherent_amplitudes, coherent_state
from .dynamics import FieldProtocol
from .quadrature import QuadratureSpec
from .su2 import as_spin, spin_operators


@dataclass(frozen=True)
class PropagatorResult:
    amplitude: complex
    n_slices: int
    insertion_residual: Optional[float] = None

    def __post_init__(self):
        if abs(self.amplitude) > 1 + 1e-10:
            raise ValueError(f"|K| = {abs(self.amplitude)} exceeds 1 for normalized states")


def _unitary_exp(h: np.ndarray, tau: float) -> np.ndarray:
    """exp(-i tau h) for Hermitian h, through its eigendecomposition."""
    lam, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * tau * lam)) @ v.conj().T


def sliced_evolution(spin, field, t_i: float, t_f: float, n_slices: int) -> np.ndarray:
    """Product of per-slice exponentials, Hamiltonian sampled at slice midpoints.

    Error is O(dt^2) in the slice width.
    """
    if n_slices < 1:
        raise ValueError("n_slices must be >= 1")
    spin = as_spin(spin)
    dt = (t_f - t_i) / n_slices
    U = np.eye(spin.dim, dtype=complex)
    for j in range(n_slices):
        t_mid = t_i + (j + 0.5) * dt
        U = _unitary_exp(field.hamiltonian_matrix(spin, t_mid) / field.hbar, dt) @ U
    return U


def rotating_frame_evolution(spin, field: FieldProtocol, t_i: float, t_f: float) -> np.ndarray:
    """Closed-form U(t_f, t_i) for the rotating field.

    H(t) = exp(-i w t S3) H0 exp(i w t S3) with H0 = -mu (b0 S1 + b S3), so
    U(t, 0) = exp(-i w t S3) exp(-i t (H0 - hbar w S3)/hbar).
    """
    spin = as_spin(spin)
    S = spin_operators(spin)
    w = field.drive_omega
    h_rot = (-field.mu * (field.b0 * S.S1 + field.b * S.S3) - field.hbar * w * S.S3) / field.hbar
    m = spin.m

    def from_zero(t):
        return np.exp(-1j * w * t * m)[:, None] * _unitary_exp(h_rot, t)

    return from_zero(t_f) @ from_zero(t_i).conj().T


def evolution_operator(spin, field, t_i: float, t_f: float, n_slices: Optional[int] = None) -> np.ndarray:
    """U(t_f, t_i); exact for a rotating field when ``n_slices`` is None."""
    if n_slices is None:
        if isinstance(field, FieldProtocol):
            return rotating_frame_evolution(spin, field, t_i, t_f)
        n_slices = 1000
    return sliced_evolution(spin, field, t_i, t_f, n_slices)


def exact_propagator(fid: FiducialVector, omega_f, omega_i, field, t_i: float, t_f: float,
                     n_slices: int) -> PropagatorResult:
    """<Omega_f| prod_j exp(-i H(t_j) dt/hbar) |Omega_i> with midpoint t_j."""
    U = sliced_evolution(fid.spin, field, t_i, t_f, n_slices)
    bra = coherent_state(fid, omega_f).amplitudes
    ket = coherent_state(fid, omega_i).amplitudes
    return PropagatorResult(complex(np.vdot(bra, U @ ket)), n_slices)


def _weighted_states(fid: FiducialVector, quad: QuadratureSpec):
    phi, theta, psi, w = quad.nodes()
    amps = coherent_amplitudes(fid, phi, theta, psi)  # (n, dim)
    return amps, w * (fid.spin.dim / (8 * np.pi**2))


def insertion_identity_residual(fid: FiducialVector, omega_f, omega_i, field, t_mid: float,
                                quad: QuadratureSpec, t_i: float = 0.0, t_f: Optional[float] = None,
                                n_slices: Optional[int] = None) -> float:
    """|K(f;i) - (2s+1)/(8 pi^2) sum_w K(f;Omega,t_mid) K(Omega,t_mid;i)|.

    The two half-propagators are evaluated independently; ``t_f`` defaults to
    2 t_mid - t_i.  With ``n_slices`` None a rotating field uses the closed
    form evolution operator.
    """
    if t_f is None:
        t_f = 2 * t_mid - t_i
    spin = fid.spin
    U1 = evolution_operator(spin, field, t_i, t_mid, n_slices)
    U2 = evolution_operator(spin, field, t_mid, t_f, n_slices)
    bra = coherent_state(fid, omega_f).amplitudes
    ket = coherent_state(fid, omega_i).amplitudes
    direct = np.vdot(bra, U2 @ U1 @ ket)
    amps, w = _weighted_states(fid, quad)
    k_late = (amps @ U2.T) @ bra.conj()  # <f|U2|Omega>
    k_early = amps.conj() @ (U1 @ ket)  # <Omega|U1|i>
    inserted = np.sum(w * k_late * k_early)
    return float(abs(direct - inserted))


def transition_amplitude(fid: FiducialVector, bra_state, ket_state, field, t_i: float, t_f: float,
                         quad: QuadratureSpec, n_slices: Optional[int] = None) -> complex:
    """<f|U|i> through two coherent-state resolutions of unity.

    [(2s+1)/(8 pi^2)]^2 sum_f sum_i w_f w_i <f|Omega_f> K(Omega_f; Omega_i) <Omega_i|i>,
    evaluated in factorized form (bra projections) . U . (ket projections).
    """
    f = np.asarray(bra_state, dtype=complex)
    i = np.asarray(ket_state, dtype=complex)
    for name, v in (("bra", f), ("ket", i)):
        if v.shape != (fid.spin.dim,):
            raise ValueError(f"{name} state needs {fid.spin.dim} components")
        if abs(np.linalg.norm(v) - 1) > 1e-10:
            raise ValueError(f"{name} state is not normalized")
    U = evolution_operator(fid.spin, field, t_i, t_f, n_slices)
    amps, w = _weighted_states(fid, quad)
    proj_f = (w * (amps.conj() @ f).conj()) @ amps.conj()  # sum_w <f|Omega><Omega|
    proj_i = amps.T @ (w * (amps.conj() @ i))  # sum_w |Omega><Omega|i>
    return complex(proj_f @ U @ proj_i)


def direct_amplitude(bra_state, ket_state, field, t_i: float, t_f: float, n_slices: Optional[int] = None) -> complex:
    """<f|U(t_f, t_i)|i> in the basis, the oracle for :func:`transition_amplitude`."""
    f = np.asarray(bra_state, dtype=complex)
    dim = f.size
    spin = as_spin((dim - 1) / 2)
    return complex(np.vdot(f, evolution_operator(spin, field, t_i, t_f, n_slices) @ np.asarray(ket_state)))
