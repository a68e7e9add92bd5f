import math

import numpy as np
import pytest

from spincs import (
    CyclicCase,
    FiducialVector,
    FieldProtocol,
    Gauge,
    InconsistentSystem,
    MatrixHamiltonian,
    NoCyclicSolution,
    SingularReducedSystem,
    SpinQuantum,
    Trajectory,
    a_coefficients,
    action,
    canonical_matrix,
    canonical_rhs,
    cyclic_path,
    cyclic_theta,
    hamiltonian_expectation,
    integrate_trajectory,
    lagrangian,
    preset_fiducial,
    spin_operators,
    topological_term,
)
from spincs.coherent import coherent_amplitudes
from spincs.dynamics import canonical_residual, hamiltonian_gradient

from conftest import random_fiducial, random_omega

SQ2 = math.sqrt(2)
FIELD = FieldProtocol(b0=1.0, b=0.5, drive_omega=2.0, mu=1.3, hbar=0.9)


def s3_along(fid, traj):
    A0 = a_coefficients(fid).a0
    out = []
    for q in traj.omegas:
        out.append(A0 * math.cos(q[1]) - float(a_coefficients(fid, q[2]).a1) * math.sin(q[1]))
    return np.array(out)


# --- Hamiltonian expectation ---------------------------------------------------------

def test_expectation_matches_sandwich(rng):
    for i in range(100):
        fid = random_fiducial(1 + i % 5, rng)
        omega = random_omega(rng)
        t = rng.uniform(0, 5)
        amps = coherent_amplitudes(fid, *omega)
        direct = np.vdot(amps, FIELD.hamiltonian_matrix(fid.spin, t) @ amps).real
        assert hamiltonian_expectation(fid, omega, FIELD, t) == pytest.approx(direct, abs=1e-12)


@pytest.mark.parametrize("m", [-2, -1, 0, 1, 2])
def test_pure_m_hamiltonian(m):
    fid = FiducialVector.basis(SpinQuantum(4), m)
    phi, theta, t = 0.7, 1.1, 0.4
    f = FIELD
    expected = -f.mu * m * (f.b0 * math.sin(theta) * math.cos(phi - f.drive_omega * t) + f.b * math.cos(theta))
    assert hamiltonian_expectation(fid, (phi, theta, -phi), f, t) == pytest.approx(expected, abs=1e-12)
    assert hamiltonian_expectation(fid, (phi, 0.0, -phi), f, t) == pytest.approx(-f.mu * m * f.b, abs=1e-12)


def test_uniform_fiducial_hamiltonian(rng):
    fid = preset_fiducial("spin1-uniform")
    f = FIELD
    for _ in range(20):
        phi, theta, psi = random_omega(rng)
        t = rng.uniform(0, 3)
        x = phi - f.drive_omega * t
        expected = -(SQ2 / 3) * f.mu * (
            f.b0 * ((1 + math.cos(theta)) * math.cos(x + psi) - (1 - math.cos(theta)) * math.cos(x - psi))
            - 2 * f.b * math.cos(psi) * math.sin(theta)
        )
        assert hamiltonian_expectation(fid, (phi, theta, psi), f, t) == pytest.approx(expected, abs=1e-12)


def test_gradient_matches_matrix_fallback(rng):
    fid = random_fiducial(3, rng)
    mh = MatrixHamiltonian(lambda t: FIELD.hamiltonian_matrix(fid.spin, t), hbar=FIELD.hbar)
    for _ in range(10):
        omega, t = random_omega(rng), rng.uniform(0, 3)
        a = hamiltonian_gradient(fid, omega, FIELD, t)
        b = hamiltonian_gradient(fid, omega, mh, t)
        assert np.abs(a - b).max() < 1e-8
        assert hamiltonian_expectation(fid, omega, mh, t) == pytest.approx(hamiltonian_expectation(fid, omega, FIELD, t))


# --- Lagrangian ------------------------------------------------------------------------

def _fd_topological(fid, q, qd, hbar, h):
    a_plus = coherent_amplitudes(fid, *(np.asarray(q) + h * np.asarray(qd)))
    a_minus = coherent_amplitudes(fid, *(np.asarray(q) - h * np.asarray(qd)))
    a0 = coherent_amplitudes(fid, *q)
    return (1j * hbar * np.vdot(a0, (a_plus - a_minus) / (2 * h))).real


def test_topological_term_finite_difference(rng):
    for i in range(20):
        fid = random_fiducial(1 + i % 4, rng)
        q, qd = random_omega(rng), rng.normal(size=3)
        exact = float(topological_term(fid, q, qd, 0.7).total)
        errs = [abs(_fd_topological(fid, q, qd, 0.7, h) - exact) for h in (1e-2, 5e-3)]
        assert errs[0] < 1e-3
        if errs[1] > 1e-12:
            assert math.log2(errs[0] / errs[1]) > 1.9


def test_lagrangian_pure_and_static(rng):
    fid = FiducialVector.basis(SpinQuantum(4), 1)
    q, qd = (0.3, 0.8, -0.3), (1.2, -0.4, 0.5)
    t = 0.2
    H = hamiltonian_expectation(fid, q, FIELD, t)
    expected = FIELD.hbar * 1 * (qd[0] * math.cos(q[1]) + qd[2]) - H
    assert lagrangian(fid, q, qd, FIELD, t) == pytest.approx(expected, abs=1e-12)
    assert topological_term(fid, q, qd).a3_part == 0
    rf = random_fiducial(3, rng)
    assert lagrangian(rf, q, (0, 0, 0), FIELD, t) == pytest.approx(-hamiltonian_expectation(rf, q, FIELD, t))


def test_lagrangian_uniform_on_cone():
    fid = preset_fiducial("spin1-uniform")
    w, theta0, hbar = 1.7, 0.6, 1.1
    top = topological_term(fid, (0.4, theta0, 0.0), (w, 0.0, 0.0), hbar).total
    assert top == pytest.approx(-hbar * (2 * SQ2 / 3) * w * math.sin(theta0), abs=1e-12)
    assert _fd_topological(fid, (0.4, theta0, 0.0), (w, 0, 0), hbar, 1e-4) == pytest.approx(top, abs=1e-7)


# --- canonical equations -------------------------------------------------------------------

def test_canonical_matrix_degenerate(rng):
    for i in range(1000):
        fid = random_fiducial(1 + i % 5, rng)
        M = canonical_matrix(fid, random_omega(rng))
        assert abs(np.linalg.det(M)) < 1e-12 * max(np.linalg.norm(M, 2), 1e-300) ** 3 + 1e-300


def test_canonical_rows_dependent(rng):
    for _ in range(200):
        fid = random_fiducial(2, rng)
        M = canonical_matrix(fid, random_omega(rng))
        a, b, c = M[0, 0], M[0, 2], M[2, 0]
        if abs(a) > 1e-9:
            assert np.abs(M[2] - (c / a) * M[0] - (b / a) * M[1]).max() < 1e-12


@pytest.mark.parametrize("m", [-2, -1, 1, 2])
def test_pure_m_variation_equations(m, rng):
    fid = FiducialVector.basis(SpinQuantum(4), m)
    f = FIELD
    for _ in range(20):
        phi, theta, _ = random_omega(rng, theta_max=3.0)
        theta = max(theta, 0.1)
        t = rng.uniform(0, 3)
        r = canonical_rhs(fid, (phi, theta, -phi), f, t, Gauge.PSI_LOCKED)
        x = phi - f.drive_omega * t
        k = f.mu / f.hbar
        assert r.omega_dot.theta_dot == pytest.approx(k * f.b0 * math.sin(x), abs=1e-12)
        assert r.omega_dot.phi_dot == pytest.approx(k * (f.b0 / math.tan(theta) * math.cos(x) - f.b), abs=1e-12)
        assert r.omega_dot.psi_dot == pytest.approx(-r.omega_dot.phi_dot)


@pytest.mark.parametrize("gauge", list(Gauge))
def test_zero_hamiltonian_gives_rest(gauge, rng):
    fid = random_fiducial(2, rng)
    r = canonical_rhs(fid, (0.3, 1.0, 0.2), FieldProtocol(0.0, 0.0, 0.0), 0.0, gauge)
    assert np.allclose(r.omega_dot, 0, atol=1e-14)


def _uniform_fiducial_residual(q, qd, f, t):
    """The three variation equations of the uniform spin-1 fiducial, written out."""
    phi, theta, psi = q
    phid, thetad, psid = qd
    k = f.mu / f.hbar
    x = phi - f.drive_omega * t
    ct, st = math.cos(theta), math.sin(theta)
    e1 = ((phid * ct + psid) + k * (f.b0 * st * math.cos(x) + f.b * ct)) * math.cos(psi)
    e2 = thetad * math.cos(psi) * ct - psid * math.sin(psi) * st - 0.5 * k * f.b0 * (
        (1 + ct) * math.sin(x + psi) - (1 - ct) * math.sin(x - psi)
    )
    e3 = phid * math.sin(psi) * st + thetad * math.cos(psi) - 0.5 * k * (
        f.b0 * ((1 + ct) * math.sin(x + psi) + (1 - ct) * math.sin(x - psi)) - 2 * f.b * math.sin(psi) * st
    )
    return max(abs(e1), abs(e2), abs(e3))


def test_uniform_fiducial_cyclic_solution_oracle():
    fid = preset_fiducial("spin1-uniform")
    for f in (FIELD, FieldProtocol(0.6, -0.4, -1.1, mu=0.8)):
        theta0 = cyclic_theta(f, CyclicCase.A3)
        for t in np.linspace(0, f.period, 9):
            q, qd = (f.drive_omega * t, theta0, 0.0), (f.drive_omega, 0.0, 0.0)
            assert _uniform_fiducial_residual(q, qd, f, t) < 1e-10
            assert canonical_residual(fid, q, qd, f, t) < 1e-10
            r = canonical_rhs(fid, q, f, t, Gauge.PSI_FROZEN)
            assert np.allclose(r.omega_dot, qd, atol=1e-10)


def test_uniform_fiducial_rates_satisfy_written_equations(rng):
    fid = preset_fiducial("spin1-uniform")
    for _ in range(20):
        q = random_omega(rng, theta_max=2.8)
        t = rng.uniform(0, 2)
        try:
            r = canonical_rhs(fid, q, FIELD, t, Gauge.PSI_FROZEN)
        except (SingularReducedSystem, InconsistentSystem):
            continue
        assert _uniform_fiducial_residual(q, r.omega_dot, FIELD, t) < 1e-9


def test_singular_at_pole():
    with pytest.raises(SingularReducedSystem) as info:
        canonical_rhs(FiducialVector.basis(1, 1), (0.0, 0.0, 0.0), FIELD, 0.3, Gauge.PSI_LOCKED)
    assert info.value.t == 0.3


def test_linear_hamiltonian_always_consistent(rng):
    # grad H lies in the range of M whenever H depends on Omega only through <S>
    for i in range(100):
        fid = random_fiducial(1 + i % 4, rng)
        q = random_omega(rng, theta_max=3.0)
        r = canonical_rhs(fid, q, FIELD, rng.uniform(0, 2), Gauge.LEAST_NORM)
        assert r.residual < 1e-10


@pytest.mark.parametrize("gauge", list(Gauge))
def test_inconsistent_system_detected(gauge):
    fid = preset_fiducial("spin1-uniform")
    S = spin_operators(fid.spin)
    mh = MatrixHamiltonian(lambda t: S.S3 @ S.S3 + 0.3 * S.S1)
    with pytest.raises(InconsistentSystem) as info:
        canonical_rhs(fid, (0.3, 1.0, 0.4), mh, 0.0, gauge)
    assert info.value.residual > 1e-3
    assert info.value.t == 0.0


def test_least_norm_is_minimal(rng):
    fid = random_fiducial(3, rng)
    q, t = (0.4, 1.2, 0.9), 0.3
    ln = np.array(canonical_rhs(fid, q, FIELD, t, Gauge.LEAST_NORM).omega_dot)
    fr = np.array(canonical_rhs(fid, q, FIELD, t, Gauge.PSI_FROZEN).omega_dot)
    assert np.linalg.norm(ln) <= np.linalg.norm(fr) + 1e-12
    M = canonical_matrix(fid, q)
    assert np.allclose(M @ ln, M @ fr, atol=1e-10)


def test_vacuous_fiducial_precesses():
    fid = preset_fiducial("spin1-equal-pair")
    r = canonical_rhs(fid, (0.0, 1.0, 0.0), FieldProtocol(0.0, 1.0, 0.0, mu=2.0), 0.0, Gauge.PSI_LOCKED)
    assert r.vacuous
    assert r.omega_dot.phi_dot == pytest.approx(-2.0)
    assert r.omega_dot.theta_dot == pytest.approx(0.0)


# --- integration -------------------------------------------------------------------------

@pytest.mark.parametrize("m", [-2, -1, 1, 2])
def test_cyclic_orbit_closes(m):
    fid = FiducialVector.basis(SpinQuantum(4), m)
    theta0 = cyclic_theta(FIELD, CyclicCase.PURE_M)
    traj = integrate_trajectory(fid, (0.0, theta0, 0.0), FIELD, Gauge.PSI_LOCKED, FIELD.period, 2000)
    drift = traj.omegas[-1] - traj.omegas[0] - np.array([2 * np.pi, 0, -2 * np.pi])
    assert np.abs(drift).max() < 1e-8
    assert traj.closed
    assert list(traj.winding) == [1, 0, -1]


def test_static_field_larmor():
    fid = FiducialVector.basis(SpinQuantum(2), 1)
    f = FieldProtocol(0.0, 0.8, 0.0, mu=1.5, hbar=1.2)
    traj = integrate_trajectory(fid, (0.2, 0.9, -0.2), f, Gauge.PSI_LOCKED, 3.0, 300)
    assert np.allclose(traj.omegas[:, 1], 0.9, atol=1e-13)
    assert np.allclose(traj.omega_dots[:, 0], -f.mu * f.b / f.hbar, atol=1e-13)


def test_zero_field_constant(rng):
    fid = random_fiducial(2, rng)
    traj = integrate_trajectory(fid, (0.2, 0.9, 0.4), FieldProtocol(0, 0, 0), Gauge.PSI_FROZEN, 1.0, 10)
    assert np.allclose(traj.omegas, traj.omegas[0], atol=0)


def test_rk4_richardson_ratio():
    fid = FiducialVector.basis(SpinQuantum(2), 1)
    q0 = (0.3, 1.0, -0.3)
    ends = [integrate_trajectory(fid, q0, FIELD, Gauge.PSI_LOCKED, 2.0, n).omegas[-1] for n in (200, 400, 800)]
    ratio = np.linalg.norm(ends[0] - ends[1]) / np.linalg.norm(ends[1] - ends[2])
    assert 16 * 0.8 < ratio < 16 * 1.2


def test_gauge_invariance_of_observables():
    fid = preset_fiducial("spin1-2/3-1/3")
    q0 = (0.3, 1.0, 0.0)
    a = integrate_trajectory(fid, q0, FIELD, Gauge.PSI_FROZEN, 2.0, 400)
    b = integrate_trajectory(fid, q0, FIELD, Gauge.LEAST_NORM, 2.0, 400)
    c = integrate_trajectory(fid, q0, FIELD, Gauge.PSI_LOCKED, 2.0, 400)
    for other in (b, c):
        assert np.abs(s3_along(fid, a) - s3_along(fid, other)).max() < 1e-8
        Ha = [hamiltonian_expectation(fid, q, FIELD, t) for t, q in zip(a.times, a.omegas)]
        Hb = [hamiltonian_expectation(fid, q, FIELD, t) for t, q in zip(other.times, other.omegas)]
        assert np.abs(np.subtract(Ha, Hb)).max() < 1e-8


def test_matrix_hamiltonian_integration_agrees():
    fid = FiducialVector(SpinQuantum(2), [0.6, 0.3j, 0.2])
    mh = MatrixHamiltonian(lambda t: FIELD.hamiltonian_matrix(fid.spin, t), hbar=FIELD.hbar)
    a = integrate_trajectory(fid, (0.3, 1.0, 0.2), FIELD, Gauge.LEAST_NORM, 1.0, 100)
    b = integrate_trajectory(fid, (0.3, 1.0, 0.2), mh, Gauge.LEAST_NORM, 1.0, 100)
    assert np.abs(a.omegas - b.omegas).max() < 1e-6


# --- cyclic solutions --------------------------------------------------------------------

def test_cyclic_theta_examples():
    f = FieldProtocol(1.0, 1.0, 0.0)
    assert cyclic_theta(f, CyclicCase.PURE_M) == pytest.approx(math.pi / 4)
    b0, b, mu, hbar = 0.8, 0.6, -1.0, 1.0
    f = FieldProtocol(b0, b, -mu * (b0**2 + b**2) / (hbar * b), mu, hbar)
    assert 1 / math.tan(cyclic_theta(f, CyclicCase.PURE_M)) == pytest.approx(-b0 / b)


def test_cyclic_theta_a3_branches():
    eps = 1e-9
    below = cyclic_theta(FieldProtocol(1.0, 0.0, -eps), CyclicCase.A3)
    above = cyclic_theta(FieldProtocol(1.0, 0.0, eps), CyclicCase.A3)
    assert 0 < below < 1e-8
    assert math.pi - 1e-8 < above < math.pi
    with pytest.raises(NoCyclicSolution):
        cyclic_theta(FieldProtocol(1.0, 0.0, 0.0), CyclicCase.A3)
    with pytest.raises(NoCyclicSolution):
        cyclic_theta(FieldProtocol(0.0, 1.0, 1.0), CyclicCase.PURE_M)


def test_cyclic_theta_range(rng):
    for _ in range(100):
        f = FieldProtocol(rng.normal(), rng.normal(), rng.normal(), mu=rng.uniform(0.5, 2))
        for case in CyclicCase:
            theta = cyclic_theta(f, case)
            assert 0 < theta < math.pi
            x = f.b / f.b0 + f.hbar * f.drive_omega / (f.mu * f.b0)
            if case is CyclicCase.PURE_M:
                assert math.cos(theta) / math.sin(theta) == pytest.approx(x, rel=1e-9, abs=1e-12)
            else:
                assert math.tan(theta) == pytest.approx(-x, rel=1e-9, abs=1e-12)


def test_cyclic_path_needs_phase():
    # the resonant orbit must start in phase with the transverse field
    fid = FiducialVector.basis(SpinQuantum(2), 1)
    theta0 = cyclic_theta(FIELD, CyclicCase.PURE_M)
    traj = integrate_trajectory(fid, (0.3, theta0, -0.3), FIELD, Gauge.PSI_LOCKED, FIELD.period, 500)
    assert not traj.closed


# --- trajectory container and action ---------------------------------------------------

def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([0, 1], [[0, 0, 0]], [[0, 0, 0]] * 2)
    with pytest.raises(ValueError):
        Trajectory([0, 0], [[0, 0, 0]] * 2, [[0, 0, 0]] * 2)
    tr = cyclic_path(FIELD, 1.0, Gauge.PSI_LOCKED, 10)
    with pytest.raises(ValueError):
        tr.omegas[0, 0] = 1
    rev = tr.reversed()
    assert np.allclose(rev.omegas[0], tr.omegas[-1])
    assert np.allclose(rev.omega_dots[0], -tr.omega_dots[-1])
    assert np.allclose(rev.times, tr.times)


def test_action_stationary_on_cyclic_solution():
    fid = FiducialVector.basis(SpinQuantum(4), 1)
    f = FIELD
    theta0 = cyclic_theta(f, CyclicCase.PURE_M)
    T, w = f.period, f.drive_omega
    times = np.linspace(0, T, 4001)

    def make(eps):
        def q(t):
            bump = np.sin(np.pi * t / T) ** 2
            dphi, dth = eps * bump * np.cos(3 * t), eps * bump * np.sin(2 * t)
            return np.column_stack([w * t + dphi, theta0 + dth, -(w * t + dphi)])

        def qd(t, h=1e-6):
            return (q(t + h) - q(t - h)) / (2 * h)

        return Trajectory.from_functions(times, q, qd)

    s0 = action(fid, make(0.0), f)
    d1 = abs(action(fid, make(1e-2), f) - s0)
    d2 = abs(action(fid, make(5e-3), f) - s0)
    assert math.log2(d1 / d2) >= 1.9
