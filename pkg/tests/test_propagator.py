
import numpy as np
import pytest

from spincs import (
    FiducialVector,
    FieldProtocol,
    PropagatorResult,
    QuadratureSpec,
    SpinQuantum,
    coherent_state,
    exact_propagator,
    insertion_identity_residual,
    overlap,
    preset_fiducial,
    resolution_residual,
    transition_amplitude,
)
from spincs.dynamics import MatrixHamiltonian
from spincs.propagator import direct_amplitude, evolution_operator, rotating_frame_evolution, sliced_evolution

from conftest import random_fiducial, random_omega

ROT = FieldProtocol(0.8, 0.5, 1.7, mu=0.9, hbar=1.1)


def test_zero_hamiltonian_is_overlap(rng):
    fid = random_fiducial(2, rng)
    of, oi = random_omega(rng), random_omega(rng)
    K = exact_propagator(fid, of, oi, FieldProtocol(0, 0, 0), 0.0, 2.0, 5).amplitude
    assert K == pytest.approx(overlap(coherent_state(fid, of), coherent_state(fid, oi)), abs=1e-12)


@pytest.mark.parametrize("m", [-1, 0, 1])
def test_static_z_field_diagonal(m):
    fid = FiducialVector.basis(SpinQuantum(2), m)
    f = FieldProtocol(0.0, 0.8, 0.0, mu=0.9, hbar=1.1)
    K = exact_propagator(fid, (0, 0, 0), (0, 0, 0), f, 0.5, 2.5, 3).amplitude
    assert K == pytest.approx(np.exp(1j * f.mu * m * f.b * 2.0 / f.hbar), abs=1e-12)


def test_slicing_converges_second_order(rng):
    fid = random_fiducial(2, rng)
    of, oi = random_omega(rng), random_omega(rng)
    exact = np.vdot(coherent_state(fid, of).amplitudes,
                    rotating_frame_evolution(fid.spin, ROT, 0.1, 2.1) @ coherent_state(fid, oi).amplitudes)
    errs = [abs(exact_propagator(fid, of, oi, ROT, 0.1, 2.1, n).amplitude - exact) for n in (20, 40, 80)]
    assert 4 * 0.8 < errs[0] / errs[1] < 4 * 1.2
    assert 4 * 0.8 < errs[1] / errs[2] < 4 * 1.2


def test_rotating_frame_operator_matches_slices():
    for two_s in (1, 2, 3):
        U = rotating_frame_evolution(SpinQuantum(two_s), ROT, 0.3, 1.4)
        assert np.abs(U - sliced_evolution(SpinQuantum(two_s), ROT, 0.3, 1.4, 4000)).max() < 1e-6
        assert np.abs(U @ U.conj().T - np.eye(two_s + 1)).max() < 1e-12


def test_amplitude_bound(rng):
    fid = random_fiducial(3, rng)
    for _ in range(10):
        r = exact_propagator(fid, random_omega(rng), random_omega(rng), ROT, 0.0, 1.0, 7)
        assert isinstance(r, PropagatorResult) and abs(r.amplitude) <= 1 + 1e-10
    with pytest.raises(ValueError):
        PropagatorResult(1.5 + 0j, 1)
    with pytest.raises(ValueError):
        sliced_evolution(SpinQuantum(1), ROT, 0, 1, 0)


def test_insertion_spin_half_static(rng):
    fid = FiducialVector.basis(SpinQuantum(1), -0.5)
    f = FieldProtocol(0.0, 1.0, 0.0)
    res = insertion_identity_residual(fid, random_omega(rng), random_omega(rng), f, 0.7, QuadratureSpec(5, 5, 5))
    assert res < 1e-10


def test_insertion_uniform_rotating(rng):
    fid = preset_fiducial("spin1-uniform")
    res = insertion_identity_residual(fid, random_omega(rng), random_omega(rng), ROT, 0.9, QuadratureSpec.uniform(4))
    assert res < 1e-8


@pytest.mark.parametrize("two_s", [1, 2, 3, 4])
def test_insertion_fiducial_independent(two_s, rng):
    for _ in range(3):
        fid = random_fiducial(two_s, rng)
        quad = QuadratureSpec.uniform(two_s + 2)
        assert insertion_identity_residual(fid, random_omega(rng), random_omega(rng), ROT, 0.6, quad, t_i=0.1) < 1e-8


def test_insertion_with_sliced_propagators(rng):
    fid = random_fiducial(2, rng)
    mh = MatrixHamiltonian(lambda t: ROT.hamiltonian_matrix(fid.spin, t), hbar=ROT.hbar)
    res = insertion_identity_residual(fid, random_omega(rng), random_omega(rng), mh, 0.5,
                                      QuadratureSpec.uniform(4), n_slices=20)
    assert res < 1e-8


def test_insertion_zero_duration_reduces_to_resolution(rng):
    fid = random_fiducial(2, rng)
    quad = QuadratureSpec.uniform(2)  # under-resolved on purpose
    of, oi = random_omega(rng), random_omega(rng)
    res = insertion_identity_residual(fid, of, oi, ROT, 0.3, quad, t_i=0.3)
    from spincs.coherent import resolution_operator

    bra, ket = coherent_state(fid, of).amplitudes, coherent_state(fid, oi).amplitudes
    expected = abs(np.vdot(bra, ket) - np.vdot(bra, resolution_operator(fid, quad) @ ket))
    assert res == pytest.approx(expected, abs=1e-14)
    assert resolution_residual(fid, quad) > 1e-6


def test_transition_eigenstate_phase():
    f = FieldProtocol(0.6, 0.9, 0.0, mu=1.2, hbar=0.8)
    spin = SpinQuantum(2)
    H = f.hamiltonian_matrix(spin, 0.0)
    lam, v = np.linalg.eigh(H)
    fid = FiducialVector(spin, [0.2, 0.5j, 0.7])
    quad = QuadratureSpec.uniform(5)
    for k in range(3):
        amp = transition_amplitude(fid, v[:, k], v[:, k], f, 0.2, 1.7, quad)
        assert amp == pytest.approx(np.exp(-1j * lam[k] * 1.5 / f.hbar), abs=1e-7)


def test_transition_zero_time(rng):
    a = rng.normal(size=3) + 1j * rng.normal(size=3)
    b = rng.normal(size=3) + 1j * rng.normal(size=3)
    a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
    amp = transition_amplitude(preset_fiducial("spin1-uniform"), b, a, ROT, 0.4, 0.4, QuadratureSpec.uniform(4))
    assert amp == pytest.approx(np.vdot(b, a), abs=1e-12)


def test_transition_random_rotating(rng):
    for two_s in (2, 3):
        dim = two_s + 1
        a = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        b = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        a, b = a / np.linalg.norm(a), b / np.linalg.norm(b)
        fid = random_fiducial(two_s, rng)
        quad = QuadratureSpec.uniform(two_s + 3)
        amp = transition_amplitude(fid, b, a, ROT, 0.0, 1.9, quad)
        assert abs(amp - direct_amplitude(b, a, ROT, 0.0, 1.9)) < 1e-7
        sliced = np.vdot(b, sliced_evolution(fid.spin, ROT, 0.0, 1.9, 20000) @ a)
        assert abs(amp - sliced) < 1e-7


def test_transition_rejects_unnormalized():
    with pytest.raises(ValueError):
        transition_amplitude(preset_fiducial("spin1-uniform"), [1, 1, 0], [1, 0, 0], ROT, 0, 1, QuadratureSpec.uniform(3))


def test_evolution_operator_dispatch():
    U = evolution_operator(SpinQuantum(2), ROT, 0.0, 1.0)
    assert np.allclose(U, rotating_frame_evolution(SpinQuantum(2), ROT, 0.0, 1.0))
