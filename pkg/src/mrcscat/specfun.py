"""Special functions for outgoing-wave expansions.

Legendre polynomials, associated Legendre functions (positive convention,
no Condon-Shortley phase), orthonormal spherical harmonics, spherical
Bessel functions, and the outgoing radial functions normalized so that
h_l(k, r) ~ e^{ikr}/r as r -> infinity.

Everything is recurrence-based and dtype-generic: feed float64 and the
computation runs in float64, feed longdouble and it stays in longdouble
end to end.  That is why none of this defers to scipy at runtime.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "HarmonicIndex",
    "RadialKind",
    "harmonic_indices",
    "legendre_p",
    "legendre_assoc",
    "theta_lm",
    "sph_harm",
    "sph_bessel_j",
    "sph_bessel_y",
    "outgoing_radial",
    "theta_table",
    "sph_harm_table",
    "sph_bessel_j_table",
    "sph_bessel_y_table",
    "outgoing_radial_table",
    "complex_dtype_for",
]

_X_TOL = 1e-12  # slack on the |x| <= 1 domain checks


@dataclass(frozen=True)
class HarmonicIndex:
    """Degree/order pair (l, m) with l >= 0 and |m| <= l."""

    l: int
    m: int

    def __post_init__(self):
        if self.l < 0:
            raise ValueError(f"degree l must be >= 0, got {self.l}")
        if abs(self.m) > self.l:
            raise ValueError(f"order m={self.m} out of range for l={self.l}")


class RadialKind(Enum):
    # h_l^(1)(kr) as-is
    HANKEL1 = "hankel1"
    # i^(l+1) * k * h_l^(1)(kr): behaves like e^{ikr}/r for large r, so
    # expansion coefficients read directly as far-field amplitudes
    OUTGOING_NORMALIZED = "outgoing_normalized"


# alternate documented names for the two radial kinds
RadialKind.StandardHankel1 = RadialKind.HANKEL1
RadialKind.PaperOutgoing = RadialKind.OUTGOING_NORMALIZED


def harmonic_indices(L: int) -> list[HarmonicIndex]:
    """All (l, m) with 0 <= l <= L, m = -l..l, in flat column order."""
    return [HarmonicIndex(l, m) for l in range(L + 1) for m in range(-l, l + 1)]


def complex_dtype_for(real_dtype) -> np.dtype:
    """Matching complex dtype (float64 -> complex128, longdouble -> clongdouble)."""
    if np.dtype(real_dtype) == np.longdouble:
        return np.dtype(np.clongdouble)
    return np.dtype(np.complex128)


def _as_real_array(x):
    a = np.asarray(x)
    if a.dtype not in (np.dtype(np.float64), np.dtype(np.longdouble)):
        a = a.astype(np.float64)
    return a


def _check_x_domain(x):
    if np.any(np.abs(x) > 1.0 + _X_TOL):
        raise ValueError("argument x must lie in [-1, 1]")


def legendre_p(l: int, x):
    """Legendre polynomial P_l(x) by the three-term recurrence."""
    if l < 0:
        raise ValueError("degree l must be >= 0")
    xa = _as_real_array(x)
    _check_x_domain(xa)
    p_prev = np.ones_like(xa)
    if l == 0:
        return p_prev if xa.ndim else float(p_prev)
    p_cur = xa.copy()
    for n in range(1, l):
        # (n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}
        p_prev, p_cur = p_cur, ((2 * n + 1) * xa * p_cur - n * p_prev) / (n + 1)
    return p_cur if xa.ndim else float(p_cur)


def legendre_assoc(l: int, m: int, x):
    """Associated Legendre P_l^m(x), positive convention (no (-1)^m phase).

    P_l^m(x) = (1-x^2)^{m/2} d^m P_l / dx^m, evaluated by the stable
    recurrences: diagonal seed, then upward in degree.
    """
    if l < 0 or m < 0 or m > l:
        raise ValueError(f"need 0 <= m <= l, got l={l}, m={m}")
    xa = _as_real_array(x)
    _check_x_domain(xa)
    s = np.sqrt(np.maximum(1.0 - xa * xa, 0.0))  # sin(theta) >= 0 for x = cos(theta)
    # P_mm = (2m-1)!! s^m
    pmm = np.ones_like(xa)
    for i in range(1, m + 1):
        pmm = pmm * (2 * i - 1) * s
    if l == m:
        return pmm if xa.ndim else float(pmm)
    pm1 = (2 * m + 1) * xa * pmm
    if l == m + 1:
        return pm1 if xa.ndim else float(pm1)
    for n in range(m + 2, l + 1):
        pmm, pm1 = pm1, ((2 * n - 1) * xa * pm1 - (n + m - 1) * pmm) / (n - m)
    return pm1 if xa.ndim else float(pm1)


def theta_lm(idx: HarmonicIndex, x):
    """Normalized colatitude factor Theta_lm(x).

    Theta_lm = sqrt((2l+1)/2 * (l-m)!/(l+m)!) P_l^m(x) for m >= 0;
    negative orders follow the sign rule Theta_{l,-m} = (-1)^m Theta_{lm}.
    Orthonormal on [-1, 1]: integral Theta_lm Theta_l'm dx = delta_ll'.
    """
    l, m = idx.l, idx.m
    if m < 0:
        sign = -1.0 if (-m) % 2 else 1.0
        return sign * theta_lm(HarmonicIndex(l, -m), x)
    norm = math.sqrt((2 * l + 1) / 2.0 * math.factorial(l - m) / math.factorial(l + m))
    return norm * legendre_assoc(l, m, x)


def sph_harm(idx: HarmonicIndex, theta, phi):
    """Orthonormal spherical harmonic Y_lm(theta, phi).

    Y_lm = (2*pi)^{-1/2} e^{i m phi} Theta_lm(cos theta).  With the
    positive-convention Theta this gives Y_{l,-m} = (-1)^m conj(Y_lm).
    """
    th = _as_real_array(theta)
    ph = _as_real_array(phi)
    val = theta_lm(idx, np.cos(th)) * np.exp(1j * idx.m * ph) / math.sqrt(2.0 * math.pi)
    if np.ndim(theta) == 0 and np.ndim(phi) == 0:
        return complex(val)
    return val


def theta_table(L: int, cos_theta, sin_theta) -> np.ndarray:
    """Theta_lm(cos theta) for all 0 <= m <= l <= L, vectorized over nodes.

    Returns a ((L+1), (L+1), N) array T with T[l, m] = Theta_lm; entries
    with m > l are zero.  cos/sin are taken as given (callers that snapped
    sin(theta) to exactly 0 at the poles keep that exactness here, since
    the diagonal seed is a pure power of sin).
    """
    ct = np.atleast_1d(_as_real_array(cos_theta))
    st = np.atleast_1d(_as_real_array(sin_theta))
    if ct.shape != st.shape:
        raise ValueError("cos_theta and sin_theta shapes differ")
    dt = np.result_type(ct.dtype, st.dtype)
    N = ct.size
    T = np.zeros((L + 1, L + 1, N), dtype=dt)
    # fully normalized recurrences; all factors are O(1) so this is stable
    # far beyond the l <= 64 we care about
    T[0, 0] = 1.0 / np.sqrt(dt.type(2.0))
    for m in range(1, L + 1):
        T[m, m] = np.sqrt(dt.type((2 * m + 1) / (2.0 * m))) * st * T[m - 1, m - 1]
    for m in range(0, L):
        T[m + 1, m] = np.sqrt(dt.type(2 * m + 3)) * ct * T[m, m]
    for m in range(0, L - 1):
        for l in range(m + 2, L + 1):
            a = np.sqrt(dt.type(4 * l * l - 1) / dt.type(l * l - m * m))
            ap = np.sqrt(dt.type(4 * (l - 1) ** 2 - 1) / dt.type((l - 1) ** 2 - m * m))
            T[l, m] = a * (ct * T[l - 1, m] - T[l - 2, m] / ap)
    return T


def sph_harm_table(L: int, cos_theta, sin_theta, phi) -> np.ndarray:
    """Y_lm at each node for all (l, m) up to degree L.

    Returns ((L+1)^2, N) complex, rows in flat (l, m) order: (0,0),
    (1,-1), (1,0), (1,1), (2,-2), ...  Negative orders use
    Y_{l,-m} = (-1)^m conj(Y_{lm}) directly.
    """
    ph = np.atleast_1d(_as_real_array(phi))
    T = theta_table(L, cos_theta, sin_theta)
    dt = T.dtype
    cdt = complex_dtype_for(dt)
    N = ph.size
    out = np.zeros(((L + 1) ** 2, N), dtype=cdt)
    inv_sqrt_2pi = 1.0 / np.sqrt(dt.type(2.0) * np.pi)
    # e^{imphi} built up multiplicatively to stay in dtype
    eip = np.exp(np.asarray(1j, dtype=cdt) * ph.astype(dt))
    e_pos = np.ones(N, dtype=cdt)
    pos = {0: e_pos.copy()}
    for m in range(1, L + 1):
        e_pos = e_pos * eip
        pos[m] = e_pos.copy()
    for l in range(L + 1):
        base = l * l + l
        for m in range(0, l + 1):
            y = inv_sqrt_2pi * T[l, m] * pos[m]
            out[base + m] = y
            if m > 0:
                sign = -1.0 if m % 2 else 1.0
                out[base - m] = sign * np.conj(y)
    return out


def _bessel_dtype(z):
    za = np.atleast_1d(_as_real_array(z))
    return za, za.dtype


def sph_bessel_j_table(L: int, z) -> np.ndarray:
    """j_l(z) for l = 0..L, downward (Miller) recurrence, vectorized.

    Upward recurrence is unstable for l > z, so we seed well above L and
    recur down, then normalize against j_0 = sin(z)/z.  Rescales on the
    way down to avoid overflow for small z.
    """
    if L < 0:
        raise ValueError("degree L must be >= 0")
    za, dt = _bessel_dtype(z)
    if np.any(za <= 0):
        raise ValueError("argument z must be > 0")
    N = za.size
    out = np.zeros((L + 1, N), dtype=dt)
    zmax = float(np.max(za))
    extra = 30 if dt == np.dtype(np.longdouble) else 20
    start = L + extra + int(math.ceil(1.5 * zmax))
    big = np.sqrt(np.finfo(dt).max) / 16.0
    jp = np.zeros(N, dtype=dt)            # j_{l+1}, unnormalized
    jc = np.full(N, dt.type(1e-30))       # j_l
    for l in range(start, 0, -1):
        jm = (2 * l + 1) / za * jc - jp
        jp, jc = jc, jm
        if l - 1 <= L:
            out[l - 1] = jc
        m = np.abs(jc).max()
        if m > big:
            s = dt.type(1.0) / m
            jc *= s
            jp *= s
            out *= s
    # normalize each column against a true low-order value; prefer j_0 but
    # fall back to j_1 near the zeros of sin so the ratio never degenerates
    j0t = np.sin(za) / za
    j1t = np.sin(za) / (za * za) - np.cos(za) / za
    j1u = jp  # after the loop jc = unnormalized j_0, jp = unnormalized j_1
    use0 = np.abs(j0t) >= np.abs(j1t)
    den = np.where(use0, out[0], j1u)
    num = np.where(use0, j0t, j1t)
    out *= num / den
    return out


def sph_bessel_y_table(L: int, z) -> np.ndarray:
    """y_l(z) for l = 0..L by the (stable) upward recurrence."""
    if L < 0:
        raise ValueError("degree L must be >= 0")
    za, dt = _bessel_dtype(z)
    if np.any(za <= 0):
        raise ValueError("argument z must be > 0")
    N = za.size
    out = np.zeros((L + 1, N), dtype=dt)
    out[0] = -np.cos(za) / za
    if L >= 1:
        out[1] = -np.cos(za) / (za * za) - np.sin(za) / za
    for l in range(1, L):
        out[l + 1] = (2 * l + 1) / za * out[l] - out[l - 1]
    return out


def sph_bessel_j(l: int, z):
    """Regular spherical Bessel function j_l(z), z > 0."""
    if l < 0:
        raise ValueError("degree l must be >= 0")
    scalar = np.ndim(z) == 0
    tab = sph_bessel_j_table(l, z)
    return float(tab[l, 0]) if scalar else tab[l]


def sph_bessel_y(l: int, z):
    """Irregular spherical Bessel function y_l(z), z > 0."""
    if l < 0:
        raise ValueError("degree l must be >= 0")
    scalar = np.ndim(z) == 0
    tab = sph_bessel_y_table(l, z)
    return float(tab[l, 0]) if scalar else tab[l]


_IPOW = (1 + 0j, 1j, -1 + 0j, -1j)  # i^n cycle


def outgoing_radial_table(L: int, k, r, kind: RadialKind = RadialKind.OUTGOING_NORMALIZED) -> np.ndarray:
    """Radial factors for l = 0..L at kr, in the requested normalization.

    HANKEL1: h_l^(1)(kr) = j_l + i y_l.
    OUTGOING_NORMALIZED: i^{l+1} k h_l^(1)(kr); the i^{l+1} k multiple is
    exactly what makes the l-th mode behave like e^{ikr}/r at infinity.
    """
    ra, dt = _bessel_dtype(r)
    if k <= 0:
        raise ValueError("wavenumber k must be > 0")
    if np.any(ra <= 0):
        raise ValueError("radius r must be > 0")
    kz = dt.type(k) * ra
    cdt = complex_dtype_for(dt)
    h = sph_bessel_j_table(L, kz).astype(cdt)
    h += np.asarray(1j, dtype=cdt) * sph_bessel_y_table(L, kz)
    if kind is RadialKind.HANKEL1:
        return h
    for l in range(L + 1):
        h[l] *= cdt.type(_IPOW[(l + 1) % 4]) * dt.type(k)
    return h


def outgoing_radial(l: int, kind: RadialKind, k: float, r):
    """Single outgoing radial value (see outgoing_radial_table)."""
    if l < 0:
        raise ValueError("degree l must be >= 0")
    scalar = np.ndim(r) == 0
    tab = outgoing_radial_table(l, k, r, kind)
    return complex(tab[l, 0]) if scalar else tab[l]
