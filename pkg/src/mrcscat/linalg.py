"""Dense complex least squares via Householder QR with column pivoting.

Hand-rolled instead of LAPACK for one load-bearing reason: the expansion
matrices here get so ill-conditioned that double precision runs out of
headroom (multi-center bases on elongated/edged obstacles), and the cure
is to run the identical algorithm in extended precision.  This
implementation is dtype-generic over complex128 and clongdouble.

Column pivoting keeps |R_00| >= |R_11| >= ... so a relative diagonal
threshold gives a numerical rank; rank_rtol = 0 means "keep everything
except exact zeros" (full-rank solve), which is the default policy of the
solver layer: truncation discards precisely the directions that carry the
multi-center gain, so it is opt-in.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["LeastSquaresResult", "qr_least_squares"]


@dataclass
class LeastSquaresResult:
    coefficients: np.ndarray      # length-N, truncated entries exactly 0, un-permuted
    residual_norm_sq: float       # ||A c - b||^2 recomputed on the original system
    numerical_rank: int
    diagonal_ratios: np.ndarray   # |R_ii| / |R_00|, nonincreasing


def _complex_working_dtype(*arrays):
    dt = np.result_type(*[a.dtype for a in arrays])
    if dt in (np.dtype(np.longdouble), np.dtype(np.clongdouble)):
        return np.dtype(np.clongdouble)
    return np.dtype(np.complex128)


def qr_least_squares(A, b, rank_rtol: float = 0.0) -> LeastSquaresResult:
    """Minimize ||A c - b||_2 over the leading pivoted-QR column block.

    Factor A P = Q R by Householder reflections with greedy column
    pivoting (exact remaining-column norms each step, so the pivot order
    is deterministic), transform b along the way, back-substitute on the
    leading r1 x r1 block with r1 = #{i : |R_ii| >= rank_rtol |R_00|},
    zero-fill the truncated coefficients and un-permute.
    """
    A = np.asarray(A)
    b = np.asarray(b)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    if b.ndim != 1 or b.shape[0] != A.shape[0]:
        raise ValueError(f"b must be a vector of length {A.shape[0]}")
    if not (0.0 <= rank_rtol < 1.0):
        raise ValueError("rank_rtol must lie in [0, 1)")
    M, N = A.shape
    if M < 1 or N < 1:
        raise ValueError("empty system")
    cdt = _complex_working_dtype(A, b)
    rdt = np.dtype(np.longdouble) if cdt == np.dtype(np.clongdouble) else np.dtype(np.float64)

    A0 = A.astype(cdt, copy=False)     # kept for the residual recompute
    R = A0.copy()
    qb = b.astype(cdt, copy=True)
    piv = np.arange(N)
    kmax = min(M, N)
    diag = np.zeros(kmax, dtype=rdt)

    for j in range(kmax):
        block = R[j:, j:]
        norms2 = (block.real ** 2 + block.imag ** 2).sum(axis=0)
        p = int(np.argmax(norms2))
        if p != 0:
            R[:, [j, j + p]] = R[:, [j + p, j]]
            piv[[j, j + p]] = piv[[j + p, j]]
        normx = np.sqrt(norms2[p])
        diag[j] = normx
        if normx == 0:
            break
        x = R[j:, j]
        x0 = x[0]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0 else cdt.type(1.0)
        v = x.copy()
        v[0] += phase * normx
        vn2 = (v.real ** 2 + v.imag ** 2).sum()
        if vn2 > 0:
            beta = rdt.type(2.0) / vn2
            tail = R[j:, j + 1:]
            if tail.shape[1]:
                tail -= np.outer(v, beta * (np.conj(v) @ tail))
            qb[j:] -= v * (beta * (np.conj(v) @ qb[j:]))
        R[j, j] = -phase * normx
        R[j + 1 :, j] = 0

    d0 = diag[0] if kmax else rdt.type(0.0)
    if d0 == 0:
        rank = 0
    elif rank_rtol > 0.0:
        rank = int(np.sum(diag >= rank_rtol * d0))
    else:
        rank = int(np.sum(diag > 0))

    c_perm = np.zeros(N, dtype=cdt)
    # back-substitution on the leading block
    for i in range(rank - 1, -1, -1):
        s = qb[i]
        if i + 1 < rank:
            s = s - R[i, i + 1 : rank] @ c_perm[i + 1 : rank]
        c_perm[i] = s / R[i, i]
    c = np.zeros(N, dtype=cdt)
    c[piv] = c_perm

    resid = b.astype(cdt) - A0 @ c
    rns = float((resid.real ** 2 + resid.imag ** 2).sum())
    ratios = diag / d0 if d0 > 0 else np.zeros(kmax, dtype=rdt)
    return LeastSquaresResult(
        coefficients=c,
        residual_norm_sq=rns,
        numerical_rank=rank,
        diagonal_ratios=np.asarray(ratios, dtype=float),
    )
