"""Spin-s representation matrices, spin operators and Euler-angle algebra.

Rows and columns of every matrix are ordered by magnetic quantum number
descending, m = +s, s-1, ..., -s.  Rotations follow the z-y-z convention

    R(phi, theta, psi) = exp(-i phi S3) exp(-i theta S2) exp(-i psi S3).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy.linalg import expm

from .errors import AngleAtPole, GimbalDegenerate
from .quadrature import QuadratureSpec

TWO_PI = 2 * np.pi

# sin(theta) below this means only phi +/- psi is determined
GIMBAL_EPS = 1e-9


@dataclass(frozen=True)
class SpinQuantum:
    """Spin quantum number stored as the integer 2s."""

    two_s: int

    def __post_init__(self):
        if int(self.two_s) != self.two_s or self.two_s < 0:
            raise ValueError(f"two_s must be a non-negative integer, got {self.two_s!r}")
        object.__setattr__(self, "two_s", int(self.two_s))

    @classmethod
    def from_s(cls, s) -> "SpinQuantum":
        two_s = Fraction(s).limit_denominator(2) * 2
        if two_s.denominator != 1 or abs(float(two_s) - 2 * float(s)) > 1e-12:
            raise ValueError(f"s must be a non-negative multiple of 1/2, got {s!r}")
        return cls(int(two_s))

    @property
    def s(self) -> float:
        return self.two_s / 2

    @property
    def dim(self) -> int:
        return self.two_s + 1

    @property
    def two_m(self) -> np.ndarray:
        """Twice the magnetic quantum numbers, descending."""
        return np.arange(self.two_s, -self.two_s - 1, -2)

    @property
    def m(self) -> np.ndarray:
        return self.two_m / 2

    @property
    def is_half_integer(self) -> bool:
        return self.two_s % 2 == 1

    def index(self, m) -> int:
        """Row index of magnetic number ``m`` (accepts floats or Fractions)."""
        two_m = 2 * Fraction(m).limit_denominator(2)
        if two_m.denominator != 1 or abs(two_m) > self.two_s or (self.two_s - two_m) % 2:
            raise ValueError(f"m = {m} is not a magnetic number of spin {self}")
        return (self.two_s - int(two_m)) // 2

    def __str__(self):
        return str(Fraction(self.two_s, 2))


SPIN_HALF = SpinQuantum(1)


def as_spin(spin) -> SpinQuantum:
    """Coerce a SpinQuantum or a plain number s into a SpinQuantum."""
    if isinstance(spin, SpinQuantum):
        return spin
    return SpinQuantum.from_s(spin)


@dataclass(frozen=True)
class EulerAngles:
    """Euler angles (phi, theta, psi) in radians.

    Values outside the canonical ranges are accepted everywhere; winding
    trajectories rely on that.
    """

    phi: float
    theta: float
    psi: float

    def __iter__(self):
        return iter((self.phi, self.theta, self.psi))

    def as_array(self) -> np.ndarray:
        return np.array([self.phi, self.theta, self.psi], dtype=float)

    def inverse(self) -> "EulerAngles":
        """Angles of R(Omega)^dagger, exactly (no sign ambiguity)."""
        return EulerAngles(-self.psi, -self.theta, -self.phi)

    def normalize(self) -> "EulerAngles":
        """Reduce to theta in [0, pi], phi and psi in [0, 2 pi).

        This picks the SO(3) representative: for half-integer spin the
        rotation matrix of the result may differ from the original by an
        overall sign.
        """
        phi, theta, psi = float(self.phi), float(self.theta), float(self.psi)
        theta = math.remainder(theta, 2 * math.pi)  # now in [-pi, pi]
        if theta < 0:
            # R(phi, -theta, psi) = R(phi + pi, theta, psi + pi) in SO(3)
            theta = -theta
            phi += math.pi
            psi += math.pi
        return EulerAngles(_mod_two_pi(phi), theta, _mod_two_pi(psi))


def _mod_two_pi(x: float) -> float:
    r = x % TWO_PI
    return 0.0 if r >= TWO_PI else r  # tiny negatives round up to 2 pi


class SpinOperators(NamedTuple):
    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray
    S_plus: np.ndarray
    S_minus: np.ndarray


def ladder_factor(s, m):
    """f(s, m) = sqrt((s + m)(s - m + 1)), the S+ matrix element <m|S+|m-1>."""
    return np.sqrt(np.maximum((s + m) * (s - m + 1), 0.0))


@lru_cache(maxsize=None)
def _spin_operators(two_s: int) -> SpinOperators:
    spin = SpinQuantum(two_s)
    m = spin.m
    S3 = np.diag(m).astype(complex)
    S_plus = np.zeros((spin.dim, spin.dim), dtype=complex)
    # column i+1 holds m[i] - 1
    idx = np.arange(spin.dim - 1)
    S_plus[idx, idx + 1] = ladder_factor(spin.s, m[:-1])
    S_minus = S_plus.conj().T.copy()
    S1 = (S_plus + S_minus) / 2
    S2 = (S_plus - S_minus) / 2j
    ops = SpinOperators(S1, S2, S3, S_plus, S_minus)
    for op in ops:
        op.setflags(write=False)
    return ops


def spin_operators(spin) -> SpinOperators:
    """Return S1, S2, S3, S+ and S- for spin ``spin`` (read-only arrays)."""
    return _spin_operators(as_spin(spin).two_s)


@lru_cache(maxsize=None)
def _d_terms(two_s: int):
    """Expansion terms of the Wigner formula for every (row, column) pair.

    Returns arrays ``(row, col, coef, cos_power, sin_power)`` such that
    d[row, col](beta) = sum coef * cos(beta/2)**cos_power * sin(beta/2)**sin_power.
    Factorial ratios are accumulated as log-gamma sums.
    """
    j2 = two_s
    rows, cols, coefs, pc, ps = [], [], [], [], []
    lf = lambda n: math.lgamma(n + 1)
    for r, mp2 in enumerate(range(j2, -j2 - 1, -2)):
        for c, m2 in enumerate(range(j2, -j2 - 1, -2)):
            jpmp, jmmp = (j2 + mp2) // 2, (j2 - mp2) // 2
            jpm, jmm = (j2 + m2) // 2, (j2 - m2) // 2
            dm = (mp2 - m2) // 2  # m' - m
            log_norm = 0.5 * (lf(jpmp) + lf(jmmp) + lf(jpm) + lf(jmm))
            for k in range(max(0, -dm), min(jpm, jmmp) + 1):
                log_den = lf(jpm - k) + lf(k) + lf(jmmp - k) + lf(k + dm)
                sign = -1.0 if (k + dm) % 2 else 1.0
                rows.append(r)
                cols.append(c)
                coefs.append(sign * math.exp(log_norm - log_den))
                pc.append(j2 - 2 * k - dm)
                ps.append(2 * k + dm)
    out = tuple(np.array(a) for a in (rows, cols, coefs, pc, ps))
    for a in out:
        a.setflags(write=False)
    return out


def wigner_small_d(spin, theta):
    """Real matrix r(theta) = exp(-i theta S2).

    ``theta`` may be a scalar or an array; the result has shape
    ``theta.shape + (dim, dim)``.
    """
    spin = as_spin(spin)
    theta = np.asarray(theta, dtype=float)
    rows, cols, coef, pc, ps = _d_terms(spin.two_s)
    c = np.cos(theta / 2)[..., None]
    s = np.sin(theta / 2)[..., None]
    terms = coef * c**pc * s**ps
    out = np.zeros(theta.shape + (spin.dim, spin.dim))
    flat = out.reshape(-1, spin.dim * spin.dim)
    np.add.at(flat, (slice(None), rows * spin.dim + cols), terms.reshape(-1, len(coef)))
    return flat.reshape(out.shape)


def rotation_matrices(spin, phi, theta, psi):
    """Vectorized R(phi, theta, psi); broadcasting over the angle arrays."""
    spin = as_spin(spin)
    phi, theta, psi = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (phi, theta, psi)))
    m = spin.m
    left = np.exp(-1j * phi[..., None] * m)
    right = np.exp(-1j * psi[..., None] * m)
    return left[..., :, None] * wigner_small_d(spin, theta) * right[..., None, :]


def rotation_matrix(spin, omega) -> np.ndarray:
    """R(Omega) with entries exp(-i phi m) r_{m m'}(theta) exp(-i psi m')."""
    phi, theta, psi = omega
    return rotation_matrices(spin, phi, theta, psi)


def conjugated_spin_operators(spin, omega):
    """R^dagger S3 R, R^dagger S+ R and R^dagger S- R from their closed forms."""
    S = spin_operators(spin)
    phi, theta, psi = omega
    ct, st = np.cos(theta), np.sin(theta)
    eq = np.exp(1j * psi)
    s3 = ct * S.S3 - 0.5 * st * (eq * S.S_plus + S.S_minus / eq)
    out = [s3]
    for sign in (+1, -1):
        ep = np.exp(1j * sign * phi)
        out.append(
            st * ep * S.S3
            + 0.5 * ((ct + sign) * ep * eq * S.S_plus + (ct - sign) * ep / eq * S.S_minus)
        )
    return tuple(out)


def maurer_cartan(spin, omega, omega_dot) -> np.ndarray:
    """Closed form of R^dagger dR/dt along a path with velocity ``omega_dot``."""
    S = spin_operators(spin)
    _, theta, psi = omega
    phid, thetad, psid = omega_dot
    ct, st = np.cos(theta), np.sin(theta)
    eq = np.exp(1j * psi)
    return (
        -1j * (phid * ct + psid) * S.S3
        + 0.5 * (1j * phid * st - thetad) * eq * S.S_plus
        + 0.5 * (1j * phid * st + thetad) / eq * S.S_minus
    )


# --- composition -----------------------------------------------------------

def _su2_pair(omega):
    """Entries (R_{--}, R_{-+}) of the spin-1/2 matrix.

    a = cos(theta/2) exp(i(phi+psi)/2), b = sin(theta/2) exp(i(phi-psi)/2);
    the pair fixes the SU(2) element completely.
    """
    phi, theta, psi = omega
    a = np.cos(theta / 2) * np.exp(0.5j * (phi + psi))
    b = np.sin(theta / 2) * np.exp(0.5j * (phi - psi))
    return a, b


def _canonical_su2(phi, theta, psi) -> EulerAngles:
    """phi in [0, 2pi), psi in [0, 4pi), keeping the SU(2) element fixed."""
    k = math.floor(phi / TWO_PI)
    phi -= k * TWO_PI
    psi += k * TWO_PI
    if phi >= TWO_PI:  # rounding at the upper edge
        phi -= TWO_PI
        psi += TWO_PI
    psi %= 2 * TWO_PI
    if psi >= 2 * TWO_PI:
        psi = 0.0
    return EulerAngles(float(phi), float(theta), float(psi))


def _angles_from_pair(a, b, cos_theta=None, sin_theta_exp_iphi=None) -> EulerAngles:
    if cos_theta is None:
        theta = 2 * math.atan2(abs(b), abs(a))
    else:
        sin_theta = 2 * abs(a) * abs(b) if sin_theta_exp_iphi is None else abs(sin_theta_exp_iphi)
        theta = math.atan2(sin_theta, float(np.clip(cos_theta, -1, 1)))
    if math.sin(theta) < GIMBAL_EPS:
        warnings.warn(
            "composed rotation is at a coordinate pole; phi set to 0",
            GimbalDegenerate,
            stacklevel=3,
        )
        if theta < math.pi / 2:
            return _canonical_su2(0.0, theta, 2 * np.angle(a))
        return _canonical_su2(0.0, theta, -2 * np.angle(b))
    if sin_theta_exp_iphi is not None:
        phi = float(np.angle(sin_theta_exp_iphi))
    else:
        phi = float(np.angle(a) + np.angle(b))
    # whichever half-angle entry is larger carries the sign information reliably
    if abs(a) >= abs(b):
        psi = 2 * float(np.angle(a)) - phi
    else:
        psi = phi - 2 * float(np.angle(b))
    return _canonical_su2(phi, theta, psi)


def compose_rotations(omega2, omega1) -> EulerAngles:
    """Euler angles of R(omega2) R(omega1).

    The polar angle and azimuth come from the spherical-trigonometry
    relations for two successive rotations; the half-angle relation fixes
    psi modulo 4 pi, so the result reproduces the product exactly for
    half-integer spin as well.  ``psi`` is returned in [0, 4 pi); call
    ``normalize()`` for the SO(3) representative.

    Emits :class:`GimbalDegenerate` and sets phi = 0 when sin(theta) < 1e-9.
    """
    p1, t1, q1 = (float(x) for x in omega1)
    p2, t2, q2 = (float(x) for x in omega2)
    g = p1 + q2
    cos_t = math.cos(t1) * math.cos(t2) - math.sin(t1) * math.sin(t2) * math.cos(g)
    sin_e = np.exp(1j * p2) * (
        math.cos(t1) * math.sin(t2)
        + math.sin(t1) * math.cos(t2) * math.cos(g)
        + 1j * math.sin(t1) * math.sin(g)
    )
    half = np.exp(0.5j * (p2 + q1)) * (
        math.cos(t1 / 2) * math.cos(t2 / 2) * np.exp(0.5j * g)
        - math.sin(t1 / 2) * math.sin(t2 / 2) * np.exp(-0.5j * g)
    )
    # companion entry sin(theta/2) exp(i(phi - psi)/2), needed near theta = pi
    half_b = np.exp(0.5j * (p2 - q1)) * (
        math.sin(t2 / 2) * math.cos(t1 / 2) * np.exp(-0.5j * g)
        + math.cos(t2 / 2) * math.sin(t1 / 2) * np.exp(0.5j * g)
    )
    return _angles_from_pair(half, half_b, cos_theta=cos_t, sin_theta_exp_iphi=sin_e)


def compose_three_cos_theta(omega2, omega, omega1) -> float:
    """cos(theta') of R(omega2) R(omega) R(omega1) by spherical trigonometry."""
    p1, t1, q1 = omega1
    p, t, q = omega
    p2, t2, q2 = omega2
    a, b = p1 + q, p + q2
    inner = math.cos(t1) * math.cos(t) - math.sin(t1) * math.sin(t) * math.cos(a)
    return inner * math.cos(t2) + (
        math.sin(t1) * (math.sin(a) * math.sin(b) - math.cos(a) * math.cos(t) * math.cos(b))
        - math.cos(t1) * math.sin(t) * math.cos(b)
    ) * math.sin(t2)


def compose_three(omega2, omega, omega1) -> EulerAngles:
    """Euler angles of R(omega2) R(omega) R(omega1).

    theta' comes from the closed-form cosine; phi' and psi' are read off the
    spin-1/2 matrix product.
    """
    U = rotation_matrix(SPIN_HALF, omega2) @ rotation_matrix(SPIN_HALF, omega) @ rotation_matrix(SPIN_HALF, omega1)
    return _angles_from_pair(U[1, 1], U[1, 0], cos_theta=compose_three_cos_theta(omega2, omega, omega1))


def euler_from_matrix(spin, R) -> EulerAngles:
    """Recover Euler angles from a spin-s rotation matrix (numerical extraction).

    For half-integer spin the SU(2) element is recovered exactly; for integer
    spin only the SO(3) rotation is defined.
    """
    spin = as_spin(spin)
    if spin.two_s == 0:
        return EulerAngles(0.0, 0.0, 0.0)
    R = np.asarray(R)
    s = spin.s
    # corner entries: R_{-s,-s} = a^{2s}, R_{-s,s} = b^{2s}
    a2s, b2s = R[-1, -1], R[-1, 0]
    theta = 2 * math.atan2(abs(b2s) ** (1 / spin.two_s), abs(a2s) ** (1 / spin.two_s))
    if math.sin(theta) < GIMBAL_EPS:
        warnings.warn("matrix is at a coordinate pole; phi set to 0", GimbalDegenerate, stacklevel=2)
        if theta < math.pi / 2:
            return _canonical_su2(0.0, theta, np.angle(a2s) / s)
        return _canonical_su2(0.0, theta, -np.angle(b2s) / s)
    # phases: R_{mm'} = exp(-i phi m) r exp(-i psi m'); use the s=+-s columns
    alpha = np.angle(a2s) / spin.two_s  # (phi+psi)/2 mod pi/s
    beta = np.angle(b2s) / spin.two_s  # (phi-psi)/2 mod pi/s
    best = None
    # resolve the 2s-fold ambiguity by testing candidates against the matrix
    for ka in range(spin.two_s):
        for kb in range(spin.two_s):
            A = alpha + ka * 2 * np.pi / spin.two_s
            B = beta + kb * 2 * np.pi / spin.two_s
            cand = EulerAngles(A + B, theta, A - B)
            err = np.abs(rotation_matrix(spin, cand) - R).max()
            if best is None or err < best[0]:
                best = (err, cand)
    return _canonical_su2(*best[1])


# --- Gaussian decomposition ------------------------------------------------

@dataclass(frozen=True)
class GaussianParams:
    """Complex parameters of R = exp(z+ S+) exp(z3 S3) exp(z- S-)."""

    z_plus: complex
    z_3: complex
    z_minus: complex

    def operator(self, spin) -> np.ndarray:
        S = spin_operators(spin)
        return expm(self.z_plus * S.S_plus) @ expm(self.z_3 * S.S3) @ expm(self.z_minus * S.S_minus)

    def to_euler(self, tol: float = 1e-10) -> EulerAngles:
        """Invert the parametrization; raises ValueError for non-unitary z."""
        zp, z3, zm = complex(self.z_plus), complex(self.z_3), complex(self.z_minus)
        if abs(abs(zp) - abs(zm)) > tol * (1 + abs(zp)):
            raise ValueError("|z+| != |z-|: parameters do not describe a rotation")
        half_theta = math.atan(abs(zp))
        theta = 2 * half_theta
        if abs(z3.real + 2 * math.log(math.cos(half_theta))) > tol * (1 + abs(z3)):
            raise ValueError("Re z3 inconsistent with |z+|: parameters do not describe a rotation")
        total = -z3.imag  # phi + psi, with its SU(2) sheet
        if abs(zp) > tol:
            phi = -float(np.angle(-zp))
            psi = total - phi
            if abs(np.exp(-1j * psi) - zm / abs(zm)) > 1e-7:
                raise ValueError("arg z- inconsistent with z+ and z3")
        else:
            phi, psi = 0.0, total
        return EulerAngles(phi, theta, psi)


def _check_pole(theta):
    if abs(math.cos(theta / 2)) < GIMBAL_EPS:
        raise AngleAtPole(f"theta = {theta!r} is at the pole of tan(theta/2)")


def gaussian_decomposition(omega) -> GaussianParams:
    """Normal-ordered parameters (z+, z3, z-) with R(Omega) = exp(z+S+)exp(z3S3)exp(z-S-).

    z3 = -2 Log[cos(theta/2) exp(i(phi+psi)/2)] with the principal logarithm;
    exp(z3 m) is single-valued for every allowed m.
    """
    phi, theta, psi = (float(x) for x in omega)
    _check_pole(theta)
    t = math.tan(theta / 2)
    z3 = -2 * np.log(math.cos(theta / 2) * np.exp(0.5j * (phi + psi)))
    return GaussianParams(-t * np.exp(-1j * phi), complex(z3), t * np.exp(-1j * psi))


def antinormal_decomposition(omega) -> GaussianParams:
    """Anti-normal parameters: R(Omega) = exp(y- S-) exp(y3 S3) exp(y+ S+).

    The returned object stores (y+, y3, y-) in (z_plus, z_3, z_minus); use
    :func:`antinormal_operator` to rebuild the matrix.
    """
    phi, theta, psi = (float(x) for x in omega)
    _check_pole(theta)
    t = math.tan(theta / 2)
    y3 = 2 * np.log(math.cos(theta / 2) * np.exp(-0.5j * (phi + psi)))
    return GaussianParams(-t * np.exp(1j * psi), complex(y3), t * np.exp(1j * phi))


def antinormal_operator(spin, y: GaussianParams) -> np.ndarray:
    S = spin_operators(spin)
    return expm(y.z_minus * S.S_minus) @ expm(y.z_3 * S.S3) @ expm(y.z_plus * S.S_plus)


# --- orthogonality ---------------------------------------------------------

def orthogonality_residual(spin, quadrature: QuadratureSpec, other=None) -> float:
    """Max deviation of the group integral of conj(R^s_{mm'}) R^{s'}_{nn'} from
    8 pi^2/(2s+1) delta delta delta_{ss'} on the quadrature grid.

    ``other`` selects s' (default s' = s).  Both spins must be integer or
    both half-integer so the integrand is 2 pi periodic.
    """
    spin = as_spin(spin)
    other = spin if other is None else as_spin(other)
    if spin.is_half_integer != other.is_half_integer:
        raise ValueError("mixed integer/half-integer spins are not 2 pi periodic")
    phi, theta, psi, w = quadrature.nodes()
    A = rotation_matrices(spin, phi, theta, psi).reshape(len(w), -1)
    B = A if other == spin else rotation_matrices(other, phi, theta, psi).reshape(len(w), -1)
    gram = (A.conj() * w[:, None]).T @ B
    if other == spin:
        expected = 8 * np.pi**2 / spin.dim * np.eye(gram.shape[0])
    else:
        expected = np.zeros_like(gram)
    return float(np.abs(gram - expected).max())
