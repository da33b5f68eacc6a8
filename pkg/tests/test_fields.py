"""Field evaluation, exact sphere reference, far-field conventions."""

import math

import numpy as np
import pytest

from mrcscat import (
    BasisSet,
    DegenerateNodeError,
    IncidentWave,
    MrcSolution,
    boundary_trace_error,
    coeff_error,
    exact_sphere_coefficients,
    far_field_amplitude,
    incident,
    minimize_functional,
    scattered_field,
    sph_harm,
)
from mrcscat.specfun import HarmonicIndex, harmonic_indices

RNG = np.random.default_rng(7)


def _exact_solution(wave, L):
    c = exact_sphere_coefficients(wave, L)
    basis = BasisSet(L=L, centers=np.zeros((1, 3)))
    return MrcSolution(basis=basis, wave=wave, coefficients=c, F_star=0.0, diagnostics={})


# ---------------------------------------------------------------- incident

def test_incident_closed_forms(wave_x):
    assert incident(wave_x, np.array([0.0, 5.0, -3.0])) == pytest.approx(1.0)
    wz = IncidentWave(k=2.0, alpha=np.array([0.0, 0.0, 1.0]))
    assert incident(wz, np.array([0.0, 0.0, math.pi / 2])) == pytest.approx(-1.0)


def test_incident_unit_modulus(wave_x):
    pts = RNG.normal(size=(100, 3)) * 5
    vals = incident(wave_x, pts)
    assert vals.shape == (100,)
    np.testing.assert_allclose(np.abs(vals), 1.0, atol=1e-14)


# ------------------------------------------------- exact sphere coefficients

def test_exact_coefficients_cancel_incident_on_boundary(wave_x):
    # u0 + v -> 0 on |x| = 1 as L grows; L = 10 is far past convergence
    sol = _exact_solution(wave_x, 10)
    theta = RNG.uniform(0.05, math.pi - 0.05, size=40)
    phi = RNG.uniform(0, 2 * math.pi, size=40)
    pts = np.column_stack(
        [np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)]
    )
    total = incident(wave_x, pts) + scattered_field(sol, pts)
    assert np.max(np.abs(total)) <= 1e-6


def test_exact_coefficients_axial_wave_is_axisymmetric():
    wz = IncidentWave(k=1.0, alpha=np.array([0.0, 0.0, 1.0]))
    c = exact_sphere_coefficients(wz, 5)
    for p, idx in enumerate(harmonic_indices(5)):
        if idx.m != 0:
            assert abs(c[p]) <= 1e-16


def test_solver_matches_exact_coefficients(sphere_solution_L7, wave_x):
    err = coeff_error(sphere_solution_L7.coefficients,
                      exact_sphere_coefficients(wave_x, 7))
    assert err <= 5e-4


# ---------------------------------------------------------------- scattered

def test_scattered_field_zero_coefficients(wave_x):
    basis = BasisSet(L=2, centers=np.zeros((1, 3)))
    sol = MrcSolution(basis=basis, wave=wave_x,
                      coefficients=np.zeros(9, complex), F_star=0.0, diagnostics={})
    assert scattered_field(sol, np.array([2.0, 0.0, 0.0])) == 0
    assert np.all(scattered_field(sol, RNG.normal(size=(5, 3)) + 4) == 0)


def test_solver_field_matches_exact_series(sphere_solution_L7, wave_x):
    exact = _exact_solution(wave_x, 12)
    pts = RNG.normal(size=(20, 3))
    pts = 2.0 * pts / np.linalg.norm(pts, axis=1, keepdims=True)
    got = scattered_field(sphere_solution_L7, pts)
    ref = scattered_field(exact, pts)
    assert np.max(np.abs(got - ref)) <= 1e-3


def test_scattered_field_linear_in_coefficients(wave_x):
    basis = BasisSet(L=3, centers=np.zeros((1, 3)))
    c1 = RNG.normal(size=16) + 1j * RNG.normal(size=16)
    c2 = RNG.normal(size=16) + 1j * RNG.normal(size=16)
    x = np.array([1.3, -0.4, 2.0])
    mk = lambda c: MrcSolution(basis=basis, wave=wave_x, coefficients=c,
                               F_star=0.0, diagnostics={})
    lhs = scattered_field(mk(2 * c1 - 3j * c2), x)
    rhs = 2 * scattered_field(mk(c1), x) - 3j * scattered_field(mk(c2), x)
    assert lhs == pytest.approx(rhs, rel=1e-13)


def test_scattered_field_degenerate_at_center(wave_x):
    sol = _exact_solution(wave_x, 2)
    with pytest.raises(DegenerateNodeError):
        scattered_field(sol, np.zeros(3))


def test_scattered_field_satisfies_helmholtz(sphere_solution_L7, wave_x):
    # 7-point Laplacian at random exterior points: |(lap + k^2) v| small
    h = 1e-3
    pts = RNG.normal(size=(20, 3))
    pts = pts / np.linalg.norm(pts, axis=1, keepdims=True) * RNG.uniform(1.5, 4.0, (20, 1))
    for x in pts:
        v = lambda p: scattered_field(sphere_solution_L7, p)
        lap = sum(v(x + h * e) + v(x - h * e) for e in np.eye(3)) - 6 * v(x)
        assert abs(lap / h**2 + wave_x.k**2 * v(x)) <= 1e-4


# ---------------------------------------------------------------- far field

def test_far_field_projects_back_to_coefficients(wave_x):
    # quadrature-exact Gauss x uniform angular grid: the modal projection
    # of A recovers each origin-centered coefficient
    L = 6
    sol = _exact_solution(wave_x, L)
    nodes, gw = np.polynomial.legendre.leggauss(40)
    theta = np.arccos(nodes)
    nphi = 80
    phis = 2 * math.pi * np.arange(nphi) / nphi
    amp = np.empty((40, nphi), dtype=complex)
    for i, th in enumerate(theta):
        st, ct = math.sin(th), math.cos(th)
        for j, ph in enumerate(phis):
            amp[i, j] = far_field_amplitude(
                sol, np.array([st * math.cos(ph), st * math.sin(ph), ct]))
    c = np.asarray(sol.coefficients)
    for p, idx in enumerate(harmonic_indices(L)):
        Y = np.array([[sph_harm(idx, th, ph) for ph in phis] for th in theta])
        proj = (gw[:, None] * amp * np.conj(Y)).sum() * (2 * math.pi / nphi)
        assert proj == pytest.approx(c[p], rel=1e-8, abs=1e-10)


def test_far_field_matches_large_r_limit(sphere_solution_L7, wave_x):
    r = 1e4
    for beta in (np.array([0.0, 0.0, 1.0]),
                 np.array([1.0, 0.0, 0.0]),
                 np.array([1.0, -2.0, 0.5]) / np.linalg.norm([1.0, -2.0, 0.5])):
        v = scattered_field(sphere_solution_L7, r * beta)
        extracted = v * r * np.exp(-1j * wave_x.k * r)
        A = far_field_amplitude(sphere_solution_L7, beta)
        assert abs(extracted - A) <= 1e-3 * abs(A)


def test_far_field_requires_unit_direction(sphere_solution_L7):
    with pytest.raises(ValueError):
        far_field_amplitude(sphere_solution_L7, np.array([1.0, 1.0, 0.0]))


def test_far_field_rotational_symmetry(unit_sphere, wave_x):
    # unit-sphere scattering only depends on alpha'.alpha
    sol = _exact_solution(wave_x, 8)
    a1 = far_field_amplitude(sol, np.array([0.0, 0.0, 1.0]))
    a2 = far_field_amplitude(sol, np.array([0.0, 1.0, 0.0]))  # both orth. to alpha
    assert a1 == pytest.approx(a2, abs=1e-6)
    wz = IncidentWave(k=1.0, alpha=np.array([0.0, 0.0, 1.0]))
    solz = _exact_solution(wz, 8)
    b1 = far_field_amplitude(sol, np.array([1.0, 0.0, 0.0]))   # forward
    b2 = far_field_amplitude(solz, np.array([0.0, 0.0, 1.0]))  # forward
    assert b1 == pytest.approx(b2, abs=1e-6)


def test_shifted_center_conventions_consistent(wave_x):
    # same coefficients, center moved to z: field translates, amplitude
    # picks up exactly the e^{-ik beta.z} phase
    z = np.array([0.0, 0.0, 0.4])
    c = exact_sphere_coefficients(wave_x, 4)
    b0 = BasisSet(L=4, centers=np.zeros((1, 3)))
    bz = BasisSet(L=4, centers=z.reshape(1, 3))
    s0 = MrcSolution(basis=b0, wave=wave_x, coefficients=c, F_star=0.0, diagnostics={})
    sz = MrcSolution(basis=bz, wave=wave_x, coefficients=c, F_star=0.0, diagnostics={})
    x = np.array([1.1, 0.7, -2.0])
    assert scattered_field(sz, x + z) == pytest.approx(scattered_field(s0, x), rel=1e-12)
    beta = np.array([3.0, 0.0, 4.0]) / 5.0
    assert far_field_amplitude(sz, beta) == pytest.approx(
        far_field_amplitude(s0, beta) * np.exp(-1j * wave_x.k * (beta @ z)), rel=1e-12)


# ---------------------------------------------------------------- coeff_error

def test_coeff_error_basics():
    c = RNG.normal(size=9) + 1j * RNG.normal(size=9)
    assert coeff_error(c, c) == 0.0
    assert coeff_error(c, c + 3) == pytest.approx(9.0)
    with pytest.raises(ValueError):
        coeff_error(c, c[:4])


# ------------------------------------------------------- boundary validation

def test_boundary_trace_exact_solution(unit_sphere, wave_x):
    sol = _exact_solution(wave_x, 10)
    l2, mx = boundary_trace_error(sol, unit_sphere, 40, 20)
    assert l2 <= 1e-5 and mx <= 1e-5


def test_boundary_trace_zero_field_gives_incident_norm(unit_sphere, wave_x):
    basis = BasisSet(L=0, centers=np.zeros((1, 3)))
    sol = MrcSolution(basis=basis, wave=wave_x,
                      coefficients=np.zeros(1, complex), F_star=0.0, diagnostics={})
    l2, mx = boundary_trace_error(sol, unit_sphere, 40, 20)
    assert l2 == pytest.approx(math.sqrt(4 * math.pi), rel=1e-3)
    assert mx == pytest.approx(1.0, rel=1e-12)


def test_boundary_trace_tracks_residual_norm(sphere_solution_L7, unit_sphere):
    l2, _ = boundary_trace_error(sphere_solution_L7, unit_sphere, 20, 10)
    assert l2 / sphere_solution_L7.residual_norm == pytest.approx(1.0, rel=0.5)
