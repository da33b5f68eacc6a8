"""Field evaluation and reference solutions.

The exact exterior solution for the unit sphere drives most of the
verification in this package: with the outgoing-normalized radial
functions, the plane wave expands as a spherical-harmonic series whose
scattered-field coefficients are

    c_lm = -4 pi i^l  j_l(k) / h_l(k, 1) . conj(Y_lm(alpha))

Substituting them into the expansion cancels the incident wave on |x| = 1
in the limit L -> infinity, and the same coefficients are the far-field
amplitudes (the normalization makes each mode behave like e^{ikr}/r).
"""

from __future__ import annotations

import math

import numpy as np

from .geometry import Surface, quad_grid, to_spherical
from .mrc import DegenerateNodeError, IncidentWave, MrcSolution
from .specfun import (
    HarmonicIndex,
    RadialKind,
    complex_dtype_for,
    outgoing_radial,
    outgoing_radial_table,
    sph_bessel_j,
    sph_harm,
    sph_harm_table,
)

__all__ = [
    "incident",
    "exact_sphere_coefficients",
    "scattered_field",
    "far_field_amplitude",
    "coeff_error",
    "boundary_trace_error",
]


def incident(wave: IncidentWave, x):
    """Incident plane wave u0(x) = e^{i k alpha . x}."""
    xa = np.asarray(x, dtype=float)
    phase = wave.k * (xa @ wave.alpha)
    val = np.exp(1j * phase)
    return complex(val) if xa.ndim == 1 else val


def exact_sphere_coefficients(wave: IncidentWave, L: int) -> np.ndarray:
    """Exact expansion coefficients for the unit sphere, flat (l, m) order."""
    if L < 0:
        raise ValueError("L must be >= 0")
    sc = to_spherical(wave.alpha)
    out = np.zeros((L + 1) ** 2, dtype=complex)
    ipow = (1 + 0j, 1j, -1 + 0j, -1j)
    for l in range(L + 1):
        ratio = -4.0 * math.pi * ipow[l % 4] * sph_bessel_j(l, wave.k) / outgoing_radial(
            l, RadialKind.OUTGOING_NORMALIZED, wave.k, 1.0
        )
        base = l * l + l
        for m in range(-l, l + 1):
            out[base + m] = ratio * np.conj(sph_harm(HarmonicIndex(l, m), sc.theta, sc.phi))
    return out


def _eval_expansion(basis, wave, coefficients, points):
    """sum_j sum_lm c_lmj psi_lm(points - x_j), vectorized over points."""
    cdt = coefficients.dtype if coefficients.dtype.kind == "c" else np.dtype(complex)
    rdt = np.dtype(np.longdouble) if cdt == np.dtype(np.clongdouble) else np.dtype(np.float64)
    P = np.atleast_2d(np.asarray(points)).astype(rdt)
    L, J = basis.L, basis.J
    cmat = coefficients.reshape((L + 1) ** 2, J)
    total = np.zeros(P.shape[0], dtype=cdt)
    for j in range(J):
        d = P - basis.centers.astype(rdt)[j]
        r = np.sqrt((d * d).sum(axis=1))
        if np.any(r == 0):
            raise DegenerateNodeError("evaluation point coincides with an expansion center")
        ct = np.clip(d[:, 2] / r, -1.0, 1.0)
        st = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2) / r
        ph = np.arctan2(d[:, 1], d[:, 0])
        Y = sph_harm_table(L, ct, st, ph)
        H = outgoing_radial_table(L, wave.k, r)
        for l in range(L + 1):
            base = l * l + l
            for m in range(-l, l + 1):
                total += cmat[base + m, j] * Y[base + m] * H[l]
    return total


def scattered_field(solution: MrcSolution, x):
    """Approximate scattered field at x (a 3-vector or an (N, 3) array)."""
    xa = np.asarray(x, dtype=float)
    single = xa.ndim == 1
    vals = _eval_expansion(solution.basis, solution.wave, np.asarray(solution.coefficients), xa)
    vals = vals.astype(complex)
    return complex(vals[0]) if single else vals


def far_field_amplitude(solution: MrcSolution, alpha_prime) -> complex:
    """Scattering amplitude A(alpha') of the expansion.

    A(alpha') = sum_j e^{-i k alpha'. x_j} sum_lm c_lmj Y_lm(alpha');
    the per-center phase comes from |x - x_j| = r - alpha'.x_j + O(1/r).
    """
    a = np.asarray(alpha_prime, dtype=float).reshape(3)
    if abs(np.linalg.norm(a) - 1.0) > 1e-12:
        raise ValueError("alpha_prime must be a unit vector")
    sc = to_spherical(a)
    basis, wave = solution.basis, solution.wave
    L, J = basis.L, basis.J
    cmat = np.asarray(solution.coefficients, dtype=complex).reshape((L + 1) ** 2, J)
    Y = np.array(
        [sph_harm(idx, sc.theta, sc.phi) for idx in basis.indices()], dtype=complex
    )
    out = 0.0 + 0.0j
    for j in range(J):
        phase = np.exp(-1j * wave.k * float(a @ basis.centers[j]))
        out += phase * (cmat[:, j] @ Y)
    return complex(out)


def coeff_error(c_star, c_exact) -> float:
    """Euclidean distance between two coefficient vectors on the same index map."""
    a = np.asarray(c_star)
    b = np.asarray(c_exact)
    if a.shape != b.shape:
        raise ValueError(f"coefficient vectors differ in shape: {a.shape} vs {b.shape}")
    d = a.astype(complex) - b.astype(complex)
    return float(np.linalg.norm(d))


def boundary_trace_error(
    solution: MrcSolution,
    surface: Surface,
    validation_n1: int,
    validation_n2: int,
):
    """Discrete L2 and max norms of u0 + v on an independent validation grid.

    Uses the standard scheme regardless of how the solve grid was built,
    since this is meant to approximate the true L2(S) norm.  Zero-weight
    nodes (poles, trimmed) take part in neither norm.
    """
    grid = quad_grid(surface, validation_n1, validation_n2, "standard")
    pos = grid.weights > 0
    pts = grid.points[pos]
    w = grid.weights[pos]
    total = incident(solution.wave, pts) + scattered_field(solution, pts)
    l2 = float(np.sqrt(np.sum(w * np.abs(total) ** 2)))
    mx = float(np.max(np.abs(total)))
    return l2, mx
