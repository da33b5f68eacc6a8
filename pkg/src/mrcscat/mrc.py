"""Boundary-residual least squares: assembly, minimization, escalation.

The scattered field is approximated by sum_j sum_{lm} c_{lmj}
Y_lm(theta_j, phi_j) h_l(k, r_j) with (r_j, theta_j, phi_j) the spherical
coordinates of x - x_j about expansion center x_j and h_l the outgoing
normalized radial function.  The Dirichlet condition asks this to cancel
the incident wave on the obstacle surface, so the coefficients minimize

    F(c) = sum_i omega_i |u0(s_i) + sum c psi(s_i)|^2

over the quadrature nodes s_i — a weighted linear least-squares problem
A c = b with A_{i,col} = psi_col(s_i) sqrt(omega_i), b_i = -u0(s_i)
sqrt(omega_i).

Column order: (l, m) pairs in flat order, centers innermost, i.e.
col = (l^2 + l + m) * J + j.  Rows follow the grid node order; rows of
zero quadrature weight (patch poles, trimmed nodes) stay in the system as
exact zero rows so row counts match the grid, but no basis function is
ever evaluated there — that is what makes axis-pole/center collisions
harmless.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .geometry import QuadratureGrid, Surface, quad_grid, to_spherical
from .linalg import qr_least_squares
from .specfun import (
    HarmonicIndex,
    RadialKind,
    complex_dtype_for,
    harmonic_indices,
    outgoing_radial,
    outgoing_radial_table,
    sph_harm,
    sph_harm_table,
)

__all__ = [
    "DegenerateNodeError",
    "BasisSet",
    "IncidentWave",
    "MrcSolution",
    "EscalationPlan",
    "basis_column",
    "assemble_system",
    "minimize_functional",
    "adaptive_solve",
]

_ASSEMBLY_CHUNK = 512  # rows per assembly task; fixed so results never depend on thread count


class DegenerateNodeError(ValueError):
    """A positive-weight quadrature node coincides with an expansion center."""


@dataclass(frozen=True)
class BasisSet:
    """Expansion centers and maximal degree; columns = J*(L+1)^2."""

    L: int
    centers: np.ndarray  # (J, 3)

    def __post_init__(self):
        if self.L < 0:
            raise ValueError("max degree L must be >= 0")
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        if c.ndim != 2 or c.shape[1] != 3:
            raise ValueError("centers must be a (J, 3) array")
        if c.shape[0] < 1:
            raise ValueError("need at least one center")
        for i in range(c.shape[0]):
            for j in range(i + 1, c.shape[0]):
                if np.array_equal(c[i], c[j]):
                    raise ValueError("centers must be pairwise distinct")
        object.__setattr__(self, "centers", c)

    @property
    def J(self) -> int:
        return self.centers.shape[0]

    @property
    def column_count(self) -> int:
        return self.J * (self.L + 1) ** 2

    def column_index(self, idx: HarmonicIndex, j: int) -> int:
        if not 0 <= j < self.J:
            raise ValueError("center index out of range")
        if idx.l > self.L:
            raise ValueError("degree exceeds basis maximum")
        return (idx.l * idx.l + idx.l + idx.m) * self.J + j

    def indices(self) -> list[HarmonicIndex]:
        return harmonic_indices(self.L)


@dataclass(frozen=True)
class IncidentWave:
    """Plane wave e^{i k alpha . x}; alpha must be unit length."""

    k: float
    alpha: np.ndarray

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError("wavenumber k must be > 0")
        a = np.asarray(self.alpha, dtype=float).reshape(3)
        if abs(np.linalg.norm(a) - 1.0) > 1e-12:
            raise ValueError("alpha must be a unit vector (normalize it first)")
        object.__setattr__(self, "alpha", a)


@dataclass(frozen=True)
class MrcSolution:
    basis: BasisSet
    wave: IncidentWave
    coefficients: np.ndarray   # solve-precision dtype; see minimize_functional
    F_star: float              # achieved functional value ||Ac - b||^2
    diagnostics: dict = field(default_factory=dict)
    converged: Optional[bool] = None
    history: tuple = ()        # ((J, L, F_star), ...) for adaptive runs

    @property
    def residual_norm(self) -> float:
        """sqrt(F_star): the discrete L2 boundary residual (the table scale)."""
        return math.sqrt(self.F_star)


def basis_column(idx: HarmonicIndex, center, k: float, point) -> complex:
    """psi_{lm}(point - center) = Y_lm(theta', phi') h_l(k, |point - center|)."""
    try:
        sc = to_spherical(point, center)
    except ValueError as e:
        raise DegenerateNodeError(f"evaluation point coincides with center {center}") from e
    return sph_harm(idx, sc.theta, sc.phi) * outgoing_radial(
        idx.l, RadialKind.OUTGOING_NORMALIZED, k, sc.r
    )


def _real_dtype(precision: str) -> np.dtype:
    if precision == "double":
        return np.dtype(np.float64)
    if precision == "extended":
        return np.dtype(np.longdouble)
    raise ValueError("precision must be 'double' or 'extended'")


def assemble_system(
    grid: QuadratureGrid,
    basis: BasisSet,
    wave: IncidentWave,
    *,
    precision: str = "double",
    threads: int = 1,
):
    """Weighted least-squares system (A, b) for the boundary functional.

    Requires every positive-weight node to be strictly outside every
    center (raises DegenerateNodeError otherwise).  Zero-weight rows are
    exact zero rows of A and zeros of b.
    """
    rdt = _real_dtype(precision)
    cdt = complex_dtype_for(rdt)
    P = grid.points.astype(rdt)
    w = grid.weights.astype(rdt)
    M = P.shape[0]
    L, J = basis.L, basis.J
    ncols = basis.column_count
    sq = np.sqrt(w)
    pos = np.flatnonzero(w > 0)
    A = np.zeros((M, ncols), dtype=cdt)
    centers = basis.centers.astype(rdt)

    def fill(rows):
        sqr = sq[rows]
        for j in range(J):
            d = P[rows] - centers[j]
            r = np.sqrt((d * d).sum(axis=1))
            if np.any(r == 0):
                raise DegenerateNodeError(
                    f"positive-weight grid node coincides with center {centers[j]}"
                )
            ct = np.clip(d[:, 2] / r, -1.0, 1.0)
            st = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2) / r
            ph = np.arctan2(d[:, 1], d[:, 0])
            Y = sph_harm_table(L, ct, st, ph)
            H = outgoing_radial_table(L, wave.k, r)
            for l in range(L + 1):
                row_block = H[l] * sqr
                base = l * l + l
                for m in range(-l, l + 1):
                    A[rows, (base + m) * J + j] = Y[base + m] * row_block

    nthreads = max(1, int(threads))
    chunks = [pos[i : i + _ASSEMBLY_CHUNK] for i in range(0, pos.size, _ASSEMBLY_CHUNK)]
    if nthreads == 1 or len(chunks) <= 1:
        for ch in chunks:
            fill(ch)
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as ex:
            # materialize to surface any DegenerateNodeError raised in a worker
            list(ex.map(fill, chunks))

    phase = (P * wave.alpha.astype(rdt)).sum(axis=1)
    b = -(np.cos(wave.k * phase) + np.asarray(1j, dtype=cdt) * np.sin(wave.k * phase)) * sq
    b = b.astype(cdt)
    return A, b


def minimize_functional(
    grid: QuadratureGrid,
    basis: BasisSet,
    wave: IncidentWave,
    rank_rtol: float = 0.0,
    *,
    equilibrate: bool = True,
    precision: str = "double",
    threads: int = 1,
) -> MrcSolution:
    """Coefficients minimizing the discrete boundary functional.

    equilibrate scales each column to unit norm before the QR and scales
    the coefficients back — exact-arithmetic-neutral, but it buys several
    orders of attainable residual on the badly conditioned multi-center
    systems.  precision='extended' runs assembly and solve in longdouble;
    the residual is evaluated in the solve precision before being reported
    (rounding the coefficients first would destroy the cancellation).
    """
    A, b = assemble_system(grid, basis, wave, precision=precision, threads=threads)
    if equilibrate:
        colnorm = np.sqrt((A.real ** 2 + A.imag ** 2).sum(axis=0))
        scale = np.where(colnorm > 0, colnorm, 1.0)
        res = qr_least_squares(A / scale, b, rank_rtol)
        c = res.coefficients / scale
    else:
        res = qr_least_squares(A, b, rank_rtol)
        c = res.coefficients
    r = b - A @ c
    F = float((r.real ** 2 + r.imag ** 2).sum())
    diag = {
        "numerical_rank": res.numerical_rank,
        "condition_estimate": float(
            1.0 / res.diagonal_ratios[res.numerical_rank - 1]
        ) if res.numerical_rank else float("inf"),
        "rows": A.shape[0],
        "cols": A.shape[1],
        "n1": grid.n1,
        "n2": grid.n2,
        "scheme": grid.scheme,
        "equilibrate": bool(equilibrate),
        "precision": precision,
        "rank_rtol": float(rank_rtol),
    }
    return MrcSolution(basis=basis, wave=wave, coefficients=c, F_star=F, diagnostics=diag)


@dataclass(frozen=True)
class EscalationPlan:
    """Degree/center escalation: sweep L first, then advance center sets."""

    L_start: int = 0
    L_max: int = 8
    center_sets: tuple = (((0.0, 0.0, 0.0),),)
    n1: int | tuple = 20
    n2: int | tuple = 10
    scheme: str = "standard"
    rank_rtol: float = 0.0
    equilibrate: bool = True
    precision: str = "double"
    threads: int = 1
    epsilon_convention: str = "norm"  # 'norm': sqrt(F) <= eps; 'norm_squared': F <= eps

    def __post_init__(self):
        if not 0 <= self.L_start <= self.L_max:
            raise ValueError("need 0 <= L_start <= L_max")
        if not self.center_sets:
            raise ValueError("need at least one center set")
        if self.epsilon_convention not in ("norm", "norm_squared"):
            raise ValueError("epsilon_convention must be 'norm' or 'norm_squared'")


def _converged(F_star: float, epsilon: float, convention: str) -> bool:
    value = math.sqrt(F_star) if convention == "norm" else F_star
    return value <= epsilon


def adaptive_solve(
    surface: Surface,
    wave: IncidentWave,
    epsilon: float,
    schedule: EscalationPlan,
) -> MrcSolution:
    """First solution with residual below epsilon under the escalation plan.

    Escalates L at fixed centers, then moves to the next (larger) center
    set and re-sweeps L.  If nothing reaches epsilon, returns the best
    solution found with converged=False — distinct from numerical errors,
    which raise.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    grid = quad_grid(surface, schedule.n1, schedule.n2, schedule.scheme)
    history: list = []
    best: Optional[MrcSolution] = None
    for centers in schedule.center_sets:
        for L in range(schedule.L_start, schedule.L_max + 1):
            basis = BasisSet(L=L, centers=np.asarray(centers, dtype=float))
            sol = minimize_functional(
                grid,
                basis,
                wave,
                schedule.rank_rtol,
                equilibrate=schedule.equilibrate,
                precision=schedule.precision,
                threads=schedule.threads,
            )
            history.append((basis.J, L, sol.F_star))
            if best is None or sol.F_star < best.F_star:
                best = sol
            if _converged(sol.F_star, epsilon, schedule.epsilon_convention):
                return MrcSolution(
                    basis=sol.basis,
                    wave=sol.wave,
                    coefficients=sol.coefficients,
                    F_star=sol.F_star,
                    diagnostics=sol.diagnostics,
                    converged=True,
                    history=tuple(history),
                )
    assert best is not None
    return MrcSolution(
        basis=best.basis,
        wave=best.wave,
        coefficients=best.coefficients,
        F_star=best.F_star,
        diagnostics=best.diagnostics,
        converged=False,
        history=tuple(history),
    )
