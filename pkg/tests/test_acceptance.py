"""Acceptance gate: the eight pinned end-to-end criteria, one test each.

Each test prints a single `criterion N: PASS/FAIL` line with the measured
numbers.  Criteria 1 and 4 assert reference values that the faithfully
implemented configuration cannot reproduce (the shipped solver lands orders
of magnitude *below* the criterion-1 error targets, and the criterion-4
multi-center floor sits above its caps at every precision); those tests
fail honestly rather than loosening the pins, and the attainable portion
of each is asserted separately as a passing sub-check.
"""

import csv
import math

import numpy as np
import pytest

from mrcscat import (
    BasisSet,
    IncidentWave,
    build_surface,
    coeff_error,
    exact_sphere_coefficients,
    far_field_amplitude,
    minimize_functional,
    quad_grid,
    scattered_field,
    sph_harm_table,
)
from mrcscat.cli import main
from mrcscat.fields import incident
from mrcscat.linalg import qr_least_squares
from mrcscat.mrc import MrcSolution, basis_column
from mrcscat.specfun import HarmonicIndex, sph_bessel_j_table, sph_bessel_y_table

WAVE_X = IncidentWave(k=1.0, alpha=np.array([1.0, 0.0, 0.0]))
ORIGIN = np.zeros((1, 3))
CUBE_CENTERS = np.array([[0.0, 0.0, 0.0],
                         [0.2, 0.0, 0.0], [-0.2, 0.0, 0.0],
                         [0.0, 0.2, 0.0], [0.0, -0.2, 0.0],
                         [0.0, 0.0, 0.2], [0.0, 0.0, -0.2]])
ELL_CENTERS = np.array([[0.0, 0.0, 0.0],
                        [0.5, 0.0, 0.0], [-0.5, 0.0, 0.0],
                        [0.0, 0.5, 0.0], [0.0, -0.5, 0.0],
                        [0.0, 0.0, 0.5], [0.0, 0.0, -0.5]])
DUMBBELL_CENTERS = np.array([[0.0, 0.0, z] for z in
                             (0.0, 0.1, -0.1, 0.2, -0.2, 0.3, -0.3, 0.4, -0.4, 0.5, -0.5)])


def _sphere_grid(n1, n2, scheme="standard"):
    return quad_grid(build_surface({"type": "sphere"}), n1, n2, scheme)


def _err_row(grid, wave, L_values, centers=ORIGIN):
    out = []
    for L in L_values:
        sol = minimize_functional(grid, BasisSet(L=L, centers=centers), wave)
        out.append(coeff_error(sol.coefficients, exact_sphere_coefficients(wave, L)))
    return out


def _norm_row(grid, wave, L_values, centers=ORIGIN, **kw):
    return [minimize_functional(grid, BasisSet(L=L, centers=centers), wave, **kw).residual_norm
            for L in L_values]


def _line(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} — {detail}")


@pytest.fixture(scope="module")
def cube_floors():
    grid = quad_grid(build_surface({"type": "cube"}), 10, 10, "paper")
    f1 = minimize_functional(grid, BasisSet(L=8, centers=ORIGIN), WAVE_X,
                             precision="extended").residual_norm
    f7 = minimize_functional(grid, BasisSet(L=8, centers=CUBE_CENTERS), WAVE_X,
                             precision="extended").residual_norm
    return f1, f7


@pytest.fixture(scope="module")
def dumbbell_row():
    grid = quad_grid(build_surface({"type": "dumbbell", "trim": True}), 20, 10, "paper")
    return _norm_row(grid, WAVE_X, range(8), centers=DUMBBELL_CENTERS,
                     precision="extended")


# -------------------------------------------------------------- criterion 1

def test_criterion_1_sphere_coefficient_recovery():
    """err(c) at L=0..3 matches (0.0303, 0.0172, 0.0020, 0.0004) ±30%,
    err ≤ 1e-3 at L=4..7, and the 40x20 rerun hits 0.0147 ±30% at L=0."""
    pinned = [0.0303, 0.0172, 0.0020, 0.0004]
    errs = _err_row(_sphere_grid(20, 10), WAVE_X, range(8))
    err40 = _err_row(_sphere_grid(40, 20), WAVE_X, [0])[0]
    ok = (all(abs(e - p) <= 0.3 * p for e, p in zip(errs, pinned))
          and all(e <= 1e-3 for e in errs[4:])
          and abs(err40 - 0.0147) <= 0.3 * 0.0147)
    _line(1, ok, "measured err(L=0..3) = (%s), 40x20 L=0 err = %.3g "
                 "vs pinned (0.0303, 0.0172, 0.0020, 0.0004) and 0.0147"
          % (", ".join(f"{e:.3g}" for e in errs[:4]), err40))
    for e, p in zip(errs, pinned):
        assert abs(e - p) <= 0.3 * p, (
            f"err {e:.4g} not within ±30% of the pinned {p}; the solver "
            f"recovers the coefficients far more accurately than the pin")
    for e in errs[4:]:
        assert e <= 1e-3
    assert abs(err40 - 0.0147) <= 0.3 * 0.0147


def test_criterion_1_high_L_recovery_clause():
    # the attainable clause: exact coefficient recovery once L >= 4
    errs = _err_row(_sphere_grid(20, 10), WAVE_X, range(4, 8))
    assert all(e <= 1e-3 for e in errs)
    assert errs == sorted(errs, reverse=True)


# -------------------------------------------------------------- criterion 2

def test_criterion_2_sphere_functional_values():
    """Table-scheme sqrt(F)(L=0..5) within ±25% of the pinned row; the
    standard scheme shows the same decay (successive ratios within 2x)."""
    pinned = [6.3219, 1.6547, 0.2785, 0.0368, 0.0034, 0.0003]
    f_paper = _norm_row(_sphere_grid(20, 10, "paper"), WAVE_X, range(6))
    f_std = _norm_row(_sphere_grid(20, 10), WAVE_X, range(6))
    ratios_pinned = [b / a for a, b in zip(pinned, pinned[1:])]
    ratios_std = [b / a for a, b in zip(f_std, f_std[1:])]
    ok = (all(abs(f - p) <= 0.25 * p for f, p in zip(f_paper, pinned))
          and all(0.5 <= s / r <= 2.0 for s, r in zip(ratios_std, ratios_pinned)))
    _line(2, ok, "measured table-scheme sqrt(F) = (%s)"
          % ", ".join(f"{v:.4f}" for v in f_paper))
    for f, p in zip(f_paper, pinned):
        assert abs(f - p) <= 0.25 * p
    for s, r in zip(ratios_std, ratios_pinned):
        assert 0.5 <= s / r <= 2.0


# -------------------------------------------------------------- criterion 3

def test_criterion_3_parameter_robustness():
    """k=2 and four oblique directions: err(L=7) ≤ 1e-3 and err decays
    without blow-up (≤ max(1.3 err(L), 1e-3) per step)."""
    grid = _sphere_grid(20, 10)
    s2, s3 = 1 / math.sqrt(2), 1 / math.sqrt(3)
    variants = [(2.0, (1, 0, 0)), (1.0, (0, 1, 0)), (1.0, (0, 0, 1)),
                (1.0, (s2, s2, 0)), (1.0, (s3, s3, s3))]
    finals = []
    for k, a in variants:
        wave = IncidentWave(k=k, alpha=np.array(a, dtype=float))
        errs = _err_row(grid, wave, range(8))
        finals.append(errs[7])
        assert errs[7] <= 1e-3, f"k={k} alpha={a}: err(L=7)={errs[7]:.3g}"
        for e1, e2 in zip(errs, errs[1:]):
            assert e2 <= max(1.3 * e1, 1e-3), (
                f"k={k} alpha={a}: err rose {e1:.3g} -> {e2:.3g}")
    _line(3, True, "err(L=7) over the five variants = (%s), all decaying"
          % ", ".join(f"{e:.2g}" for e in finals))


# -------------------------------------------------------------- criterion 4

def test_criterion_4_cube_multicenter_table(cube_floors):
    """Cube at L=8, n=10: 7-center residual ≤ 0.01x the single-center one
    and ≤ 0.02 absolute."""
    f1, f7 = cube_floors
    ok = f7 <= 0.01 * f1 and f7 <= 0.02
    _line(4, ok, f"measured sqrt(F): J=1 {f1:.4f}, J=7 {f7:.4f} "
                 f"(ratio {f7 / f1:.3f} vs pinned 0.01; cap 0.02)")
    assert f7 <= 0.01 * f1, (
        f"multi-center floor {f7:.4f} is {f7 / f1:.1%} of the single-center "
        f"{f1:.4f}; the pinned 1% cap is not attainable from this "
        f"configuration (the floor persists at extended precision and full rank)")
    assert f7 <= 0.02


def test_criterion_4_multicenter_gain_subcheck(cube_floors):
    # the attainable portion: the 7-center expansion beats one center by >= 5x
    f1, f7 = cube_floors
    assert f7 <= 0.2 * f1


# -------------------------------------------------------------- criterion 5

def test_criterion_5_ellipsoid_elongation():
    """7-center residual ≤ 1e-3 by L=4 (b=2,3,4) / L=5 (b=5); single-center
    L=7 residual grows monotonically with elongation."""
    fj = {}
    f_single = []
    for b in (2.0, 3.0, 4.0, 5.0):
        grid = quad_grid(build_surface({"type": "ellipsoid", "b": b}), 20, 10, "paper")
        L = 5 if b == 5.0 else 4
        fj[b] = minimize_functional(grid, BasisSet(L=L, centers=ELL_CENTERS),
                                    WAVE_X).residual_norm
        f_single.append(minimize_functional(grid, BasisSet(L=7, centers=ORIGIN),
                                            WAVE_X).residual_norm)
    ok = all(v <= 1e-3 for v in fj.values()) and f_single == sorted(f_single)
    _line(5, ok, "multi-center sqrt(F) = (%s); single-center L=7 row = (%s)"
          % (", ".join(f"b={b:g}: {v:.2g}" for b, v in fj.items()),
             ", ".join(f"{v:.4g}" for v in f_single)))
    for b, v in fj.items():
        assert v <= 1e-3, f"b={b}: sqrt(F)={v:.3g}"
    assert f_single == sorted(f_single), f_single


# -------------------------------------------------------------- criterion 6

def test_criterion_6_dumbbell_decay(dumbbell_row):
    """11-center residual decreases monotonically over L=0..7 and drops by
    ≥ 1000x overall."""
    row = dumbbell_row
    ratio = row[7] / row[0]
    ok = all(b <= a for a, b in zip(row, row[1:])) and ratio <= 1e-3
    _line(6, ok, "sqrt(F)(L=0..7) = (%s), ratio %.2g"
          % (", ".join(f"{v:.3g}" for v in row), ratio))
    for a, b in zip(row, row[1:]):
        assert b <= a, f"residual rose {a:.4g} -> {b:.4g}"
    assert ratio <= 1e-3


# -------------------------------------------------------------- criterion 7

def test_criterion_7_property_suite():
    """Always-on invariants: harmonic orthonormality, radial Wronskian,
    least-squares optimality, residual monotonicity on all four shapes,
    near/far-field consistency, and the Helmholtz equation itself."""
    rng = np.random.default_rng(2024)

    # spherical-harmonic orthonormality to 1e-8 for l <= 6 (quadrature-exact
    # Gauss x uniform angular grid)
    nodes, gw = np.polynomial.legendre.leggauss(40)
    nphi = 80
    phis = 2 * math.pi * np.arange(nphi) / nphi
    ct = np.repeat(nodes, nphi)
    st = np.sqrt(1 - ct**2)
    ph = np.tile(phis, 40)
    vals = sph_harm_table(6, ct, st, ph).T  # (nodes, 49)
    w = np.repeat(gw, nphi) * (2 * math.pi / nphi)
    gram = vals.conj().T @ (w[:, None] * vals)
    assert np.max(np.abs(gram - np.eye(49))) <= 1e-8

    # Bessel/Hankel Wronskian j_l y_{l-1} - j_{l-1} y_l = 1/z^2 to 1e-10
    for z in (0.3, 1.0, 2.7, 9.2):
        j = sph_bessel_j_table(8, z)
        y = sph_bessel_y_table(8, z)
        for l in range(1, 9):
            assert abs(j[l] * y[l - 1] - j[l - 1] * y[l] - 1 / z**2) <= 1e-10

    # pivoted-QR least squares vs the dense normal-equations oracle
    for _ in range(3):
        A = rng.normal(size=(50, 10)) + 1j * rng.normal(size=(50, 10))
        b = rng.normal(size=50) + 1j * rng.normal(size=50)
        c = qr_least_squares(A, b).coefficients
        c_ne = np.linalg.solve(A.conj().T @ A, A.conj().T @ b)
        assert np.linalg.norm(c - c_ne) <= 1e-9 * np.linalg.norm(c_ne)

    # residual monotone in L and in J on all four geometries
    shapes = [
        ({"type": "sphere"}, (20, 10), "standard", "double",
         np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.2]])),
        ({"type": "ellipsoid", "b": 2.0}, (20, 10), "paper", "double", ELL_CENTERS),
        ({"type": "cube"}, (10, 10), "standard", "double", CUBE_CENTERS),
        ({"type": "dumbbell", "trim": True}, (20, 10), "paper", "extended",
         DUMBBELL_CENTERS),
    ]
    for desc, (n1, n2), scheme, precision, centers in shapes:
        grid = quad_grid(build_surface(desc), n1, n2, scheme)
        row = _norm_row(grid, WAVE_X, range(5), precision=precision)
        for a, b2 in zip(row, row[1:]):
            assert b2 <= a * (1 + 1e-10), (desc, row)
        fj = minimize_functional(grid, BasisSet(L=3, centers=centers), WAVE_X,
                                 precision=precision).residual_norm
        assert fj <= row[3] * (1 + 1e-10), desc

    # scattered field of the L=7 sphere solve matches the exact series at |x|=2
    grid = _sphere_grid(20, 10)
    sol = minimize_functional(grid, BasisSet(L=7, centers=ORIGIN), WAVE_X)
    exact = MrcSolution(basis=BasisSet(L=12, centers=ORIGIN), wave=WAVE_X,
                        coefficients=exact_sphere_coefficients(WAVE_X, 12),
                        F_star=0.0, diagnostics={})
    pts = rng.normal(size=(12, 3))
    pts = 2.0 * pts / np.linalg.norm(pts, axis=1, keepdims=True)
    assert np.max(np.abs(scattered_field(sol, pts) - scattered_field(exact, pts))) <= 1e-3

    # far-field amplitude equals the r -> inf limit to 1e-3 relative
    r = 1e4
    for beta in (np.array([0.0, 0.0, 1.0]), np.array([0.6, 0.0, 0.8])):
        A = far_field_amplitude(sol, beta)
        extracted = scattered_field(sol, r * beta) * r * np.exp(-1j * WAVE_X.k * r)
        assert abs(extracted - A) <= 1e-3 * abs(A)

    # the expansion satisfies the Helmholtz equation (7-point FD check)
    h = 1e-3
    for x in (np.array([1.2, -0.7, 1.9]), np.array([0.0, 2.5, 0.4])):
        v = lambda p: scattered_field(sol, p)
        lap = sum(v(x + h * e) + v(x - h * e) for e in np.eye(3)) - 6 * v(x)
        assert abs(lap / h**2 + WAVE_X.k**2 * v(x)) <= 1e-4

    _line(7, True, "orthonormality, Wronskian, LS optimality, monotonicity, "
                   "field consistency, and the FD Helmholtz check all hold")


# -------------------------------------------------------------- criterion 8

def test_criterion_8_sweep_determinism(tmp_path):
    """Repeated sweeps are byte-identical apart from timing, independent of
    --threads."""
    scn = tmp_path / "scenario.yaml"
    scn.write_text("geometry: {type: sphere}\nwave: {k: 1.0}\nbasis: {L: 5}\n")
    stripped = []
    for threads, sub in (("1", "a"), ("4", "b"), ("1", "c")):
        outdir = tmp_path / sub
        assert main(["sweep", "--scenario", str(scn), "--L", "0..5",
                     "--outdir", str(outdir), "--threads", threads]) == 0
        with open(outdir / "sweep.csv", newline="") as fh:
            rows = list(csv.reader(fh))
        stripped.append("\n".join(",".join(r[:-1]) for r in rows))
    ok = stripped[0] == stripped[1] == stripped[2]
    _line(8, ok, "three runs (threads 1/4/1) agree byte-for-byte outside wall_time")
    assert stripped[0] == stripped[1] == stripped[2]
