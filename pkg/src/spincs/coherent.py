"""Coherent states generated by rotating an arbitrary fiducial vector."""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import AngleAtPole, GimbalDegenerate, SpinMismatch
from .quadrature import QuadratureSpec
from .su2 import (
    EulerAngles,
    GaussianParams,
    SpinQuantum,
    as_spin,
    compose_rotations,
    compose_three,
    ladder_factor,
    rotation_matrices,
    rotation_matrix,
    wigner_small_d,
)

NORM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class FiducialVector:
    """Normalized vector sum_m c_m |m>, coefficients ordered m = +s ... -s.

    The constructor rescales ``coeffs`` to unit norm; ``scale`` records the
    factor that was applied.
    """

    spin: SpinQuantum
    coeffs: np.ndarray
    scale: float = field(default=1.0)

    def __post_init__(self):
        spin = as_spin(self.spin)
        c = np.array(self.coeffs, dtype=complex).ravel()
        if c.shape != (spin.dim,):
            raise ValueError(f"spin {spin} needs {spin.dim} coefficients, got {c.size}")
        norm = np.linalg.norm(c)
        if not np.isfinite(norm) or norm == 0:
            raise ValueError("fiducial vector must be finite and non-zero")
        scale = 1.0 / norm
        c = c * scale
        c.setflags(write=False)
        object.__setattr__(self, "spin", spin)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "scale", float(scale))

    @classmethod
    def basis(cls, spin, m) -> "FiducialVector":
        """The pure state |m>."""
        spin = as_spin(spin)
        c = np.zeros(spin.dim, dtype=complex)
        c[spin.index(m)] = 1.0
        return cls(spin, c)

    @classmethod
    def from_mapping(cls, spin, amplitudes: dict) -> "FiducialVector":
        """Build from ``{m: c_m}``; missing entries are zero."""
        spin = as_spin(spin)
        c = np.zeros(spin.dim, dtype=complex)
        for m, value in amplitudes.items():
            c[spin.index(m)] = value
        return cls(spin, c)

    def coefficient(self, m) -> complex:
        return complex(self.coeffs[self.spin.index(m)])

    def __eq__(self, other):
        if not isinstance(other, FiducialVector):
            return NotImplemented
        return self.spin == other.spin and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash((self.spin, self.coeffs.tobytes()))

    def __repr__(self):
        return f"FiducialVector(spin={self.spin}, coeffs={np.array2string(self.coeffs, precision=6)})"


# fiducial vectors of the four model systems
def preset_fiducial(name: str, spin=None) -> FiducialVector:
    """Named fiducial vectors.

    ``"pure:m"`` (needs ``spin``), ``"spin1-2/3-1/3"``, ``"spin1-equal-pair"``
    and ``"spin1-uniform"``.
    """
    if name.startswith("pure:"):
        if spin is None:
            raise ValueError("preset 'pure:m' needs an explicit spin")
        return FiducialVector.basis(spin, Fraction(name[5:]))
    if spin is not None and as_spin(spin) != SpinQuantum(2):
        raise ValueError(f"preset {name!r} is a spin-1 vector")
    if name == "spin1-2/3-1/3":
        return FiducialVector.from_mapping(1, {1: math.sqrt(2 / 3), -1: math.sqrt(1 / 3)})
    if name == "spin1-equal-pair":
        return FiducialVector.from_mapping(1, {1: math.sqrt(0.5), -1: math.sqrt(0.5)})
    if name == "spin1-uniform":
        return FiducialVector(1, np.full(3, 1 / math.sqrt(3)))
    raise ValueError(f"unknown fiducial preset {name!r}")


@dataclass(frozen=True, eq=False)
class CoherentState:
    fiducial: FiducialVector
    omega: EulerAngles
    amplitudes: np.ndarray

    @property
    def spin(self) -> SpinQuantum:
        return self.fiducial.spin


def coherent_state(fid: FiducialVector, omega) -> CoherentState:
    """|Omega> = R(Omega)|Psi_0>, amplitudes on |m'> in descending order."""
    omega = omega if isinstance(omega, EulerAngles) else EulerAngles(*omega)
    amps = rotation_matrix(fid.spin, omega) @ fid.coeffs
    amps.setflags(write=False)
    return CoherentState(fid, omega, amps)


def coherent_amplitudes_componentwise(fid: FiducialVector, omega) -> np.ndarray:
    """Amplitudes from the explicit double sum over basis states.

    |Omega> = sum_m c_m sum_m' exp[-i(m' phi + m psi)] r_{m'm}(theta) |m'>.
    """
    phi, theta, psi = omega
    spin = fid.spin
    r = wigner_small_d(spin, theta)
    out = np.zeros(spin.dim, dtype=complex)
    for j, m in enumerate(spin.m):
        if fid.coeffs[j] == 0:
            continue
        for i, mp in enumerate(spin.m):
            out[i] += fid.coeffs[j] * cmath.exp(-1j * (mp * phi + m * psi)) * r[i, j]
    return out


def coherent_amplitudes(fid: FiducialVector, phi, theta, psi) -> np.ndarray:
    """Vectorized amplitudes, shape ``angles.shape + (dim,)``."""
    return rotation_matrices(fid.spin, phi, theta, psi) @ fid.coeffs


def _check_same_spin(a: CoherentState, b: CoherentState):
    if a.spin != b.spin:
        raise SpinMismatch(f"spin {a.spin} vs spin {b.spin}")


def overlap_direct(bra: CoherentState, ket: CoherentState) -> complex:
    _check_same_spin(bra, ket)
    return complex(np.vdot(bra.amplitudes, ket.amplitudes))


def overlap(bra: CoherentState, ket: CoherentState) -> complex:
    """<Omega_2|Omega_1> through the composed rotation R(Omega_2)^dagger R(Omega_1).

    With a common fiducial vector this is sum c_{m1} c*_{m2} R_{m2 m1}(composed);
    states built on different fiducial vectors fall back to the direct inner
    product.
    """
    _check_same_spin(bra, ket)
    if bra.fiducial != ket.fiducial:
        return overlap_direct(bra, ket)
    c = bra.fiducial.coeffs
    with warnings.catch_warnings():
        # at the pole only phi + psi matters and the composed matrix stays exact
        warnings.simplefilter("ignore", GimbalDegenerate)
        composed = compose_rotations(bra.omega.inverse(), ket.omega)
    return complex(np.vdot(c, rotation_matrix(bra.spin, composed) @ c))


def resolution_operator(fid: FiducialVector, quad: QuadratureSpec) -> np.ndarray:
    """(2s+1)/(8 pi^2) * sum_w |Omega><Omega| over the quadrature grid."""
    phi, theta, psi, w = quad.nodes()
    amps = coherent_amplitudes(fid, phi, theta, psi)
    return fid.spin.dim / (8 * np.pi**2) * (amps.T * w) @ amps.conj()


def resolution_residual(fid: FiducialVector, quad: QuadratureSpec) -> float:
    """Max-norm distance of the quadrature resolution operator from identity."""
    op = resolution_operator(fid, quad)
    return float(np.abs(op - np.eye(fid.spin.dim)).max())


# --- A coefficients ----------------------------------------------------------

class ACoefficients(NamedTuple):
    a0: float
    a1: float
    a4: float
    neighbour_sum: complex  # sum_m f(s,m) c*_m c_{m-1} = <Psi_0|S+|Psi_0>


def neighbour_sum(fid: FiducialVector) -> complex:
    """sum_m f(s, m) c*_m c_{m-1}, the fiducial expectation of S+."""
    spin = fid.spin
    c = fid.coeffs
    f = ladder_factor(spin.s, spin.m[:-1])
    return complex(np.sum(f * c[:-1].conj() * c[1:]))


def a_zero(fid: FiducialVector) -> float:
    return float(np.sum(fid.spin.m * np.abs(fid.coeffs) ** 2))


def a_coefficients(fid: FiducialVector, psi=0.0) -> ACoefficients:
    """A0, A1(psi) and A4(psi).

    A1 = Re[exp(i psi) P] and A4 = Im[exp(i psi) P] with P the neighbour sum;
    ``psi`` may be an array.
    """
    p = neighbour_sum(fid)
    rotated = np.exp(1j * np.asarray(psi, dtype=float)) * p
    return ACoefficients(a_zero(fid), rotated.real, rotated.imag, p)


def a_two(fid: FiducialVector, omega) -> complex:
    phi, theta, psi = omega
    p = neighbour_sum(fid)
    return 0.5 * (
        (1 + np.cos(theta)) * np.exp(1j * (phi + psi)) * p
        - (1 - np.cos(theta)) * np.exp(1j * (phi - psi)) * np.conj(p)
    )


class SpinExpectation(NamedTuple):
    s3: float
    s_plus: complex

    @property
    def s_minus(self) -> complex:
        return self.s_plus.conjugate()

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.s_plus.real, self.s_plus.imag, self.s3])


def expectation_spin(state: CoherentState) -> SpinExpectation:
    """<S3> = A0 cos(theta) - A1 sin(theta), <S+> = A0 sin(theta) e^{i phi} + A2."""
    phi, theta, psi = state.omega
    A = a_coefficients(state.fiducial, psi)
    s3 = A.a0 * math.cos(theta) - float(A.a1) * math.sin(theta)
    sp = A.a0 * math.sin(theta) * cmath.exp(1j * phi) + a_two(state.fiducial, state.omega)
    return SpinExpectation(float(s3), complex(sp))


def fiducial_spin_vector(fid: FiducialVector) -> np.ndarray:
    """<Psi_0|(S1, S2, S3)|Psi_0>."""
    p = neighbour_sum(fid)
    return np.array([p.real, p.imag, a_zero(fid)])


def generating_function(omega2, z: GaussianParams, omega1, fid: FiducialVector) -> complex:
    """X_N(z) = <Omega_2| exp(z+ S+) exp(z3 S3) exp(z- S-) |Omega_1>.

    Evaluated as <Psi_0|R(Omega'')|Psi_0> where Omega'' composes the inverse
    of Omega_2, the rotation encoded by z, and Omega_1.
    """
    if not all(np.isfinite([z.z_plus, z.z_3, z.z_minus])):
        raise AngleAtPole("Gaussian parameters are not finite")
    omega2 = omega2 if isinstance(omega2, EulerAngles) else EulerAngles(*omega2)
    omega_z = z.to_euler()
    if abs(math.cos(omega_z.theta / 2)) < 1e-9:
        raise AngleAtPole("rotation encoded by z is at theta = pi")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GimbalDegenerate)
        total = compose_three(omega2.inverse(), omega_z, omega1)
    c = fid.coeffs
    return complex(np.vdot(c, rotation_matrix(fid.spin, total) @ c))
