import numpy as np
import pytest
from scipy.linalg import expm

from spincs import FiducialVector, SpinQuantum, spin_operators


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_fiducial(two_s, rng):
    spin = SpinQuantum(two_s)
    return FiducialVector(spin, rng.normal(size=spin.dim) + 1j * rng.normal(size=spin.dim))


def random_omega(rng, theta_max=np.pi):
    return (rng.uniform(0, 2 * np.pi), rng.uniform(0, theta_max), rng.uniform(0, 2 * np.pi))


def expm_rotation(two_s, omega):
    """Independent oracle: product of three generic matrix exponentials."""
    S = spin_operators(SpinQuantum(two_s))
    phi, theta, psi = omega
    return expm(-1j * phi * S.S3) @ expm(-1j * theta * S.S2) @ expm(-1j * psi * S.S3)
