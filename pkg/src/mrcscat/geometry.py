"""Obstacle surfaces as unions of parametrized patches, plus quadrature.

A Surface is an ordered list of patches.  Each patch maps a rectangle of
parameters (t1, t2) to points in space and carries the area-weight factor
w(t1, t2) that turns a parameter integral into a surface integral.  Patch
kinds:

- star-radial: (t1, t2) = (phi, theta) about a local origin, point =
  origin + r(theta, phi) * unit(theta, phi); w is the first-fundamental
  form expression sqrt(r^2 r_phi^2 + r^2 r_theta^2 sin^2 + r^4 sin^2).
- plane: affine frame, w = |e1 x e2| (constant).
- cylinder: (t1, t2) = (phi, z) on a circular cylinder about the z axis
  through a local origin, w = radius.

quad_grid lays a closed composite-Simpson tensor rule over every patch.
Two coefficient schemes are supported: "standard" (textbook products of
{1,4,2,...,4,1}/3 per direction) and "paper" (the same coefficient
products without the 1/9 normalization, the convention behind the
reference residual tables; the two differ by the exact factor 9, so
minimizers are identical).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "RadialShape",
    "StarRadialPatch",
    "PlanePatch",
    "CylinderPatch",
    "Surface",
    "QuadratureGrid",
    "SphericalCoords",
    "SCHEME_STANDARD",
    "SCHEME_PAPER",
    "build_surface",
    "area_weight",
    "quad_grid",
    "to_spherical",
    "simpson_coefficients",
]

SCHEME_STANDARD = "standard"
SCHEME_PAPER = "paper"

# sin(theta) below this is an exact pole in float arithmetic; snapping to 0
# keeps pole rows at exactly zero quadrature weight (IEEE sin(pi) ~ 1.2e-16,
# which would otherwise leave poles with ~1e-16 weight and, worse, let a
# pole node participate in solves even when it coincides with an expansion
# center placed on the axis)
_POLE_SNAP = 1e-14

_FD_STEP = 1e-6  # central-difference step for shapes without analytic partials


@dataclass(frozen=True)
class RadialShape:
    """Radial function r(theta, phi) > 0 of a star-shaped patch.

    Partials may be omitted; area_weight then falls back to central
    finite differences with step 1e-6.
    """

    name: str
    r: Callable
    r_theta: Optional[Callable] = None
    r_phi: Optional[Callable] = None


def _const_shape(radius: float) -> RadialShape:
    c = float(radius)
    return RadialShape(
        name=f"constant({c!r})",
        r=lambda th, ph: np.full_like(np.asarray(th, dtype=float), c),
        r_theta=lambda th, ph: np.zeros_like(np.asarray(th, dtype=float)),
        r_phi=lambda th, ph: np.zeros_like(np.asarray(th, dtype=float)),
    )


def _ellipsoid_shape(b: float) -> RadialShape:
    # x^2 + y^2 + z^2/b^2 = 1 about the origin: r(theta) = (sin^2 + cos^2/b^2)^{-1/2}
    b2 = float(b) * float(b)

    def r(th, ph):
        th = np.asarray(th, dtype=float)
        s, c = np.sin(th), np.cos(th)
        return 1.0 / np.sqrt(s * s + c * c / b2)

    def r_theta(th, ph):
        th = np.asarray(th, dtype=float)
        s, c = np.sin(th), np.cos(th)
        rr = 1.0 / np.sqrt(s * s + c * c / b2)
        return -(rr ** 3) * s * c * (1.0 - 1.0 / b2)

    def r_phi(th, ph):
        return np.zeros_like(np.asarray(th, dtype=float))

    return RadialShape(name=f"ellipsoid({b!r})", r=r, r_theta=r_theta, r_phi=r_phi)


@dataclass(frozen=True)
class StarRadialPatch:
    kind = "star_radial"
    shape: RadialShape
    local_origin: tuple = (0.0, 0.0, 0.0)
    # (t1, t2) = (phi, theta)
    t1_range: tuple = (0.0, 2.0 * math.pi)
    t2_range: tuple = (0.0, math.pi)

    def points(self, t1, t2):
        ph = np.asarray(t1, dtype=float)
        th = np.asarray(t2, dtype=float)
        r = np.asarray(self.shape.r(th, ph), dtype=float)
        st = np.sin(th)
        st = np.where(np.abs(st) < _POLE_SNAP, 0.0, st)
        p = np.empty(np.broadcast(ph, th).shape + (3,))
        p[..., 0] = r * st * np.cos(ph)
        p[..., 1] = r * st * np.sin(ph)
        p[..., 2] = r * np.cos(th)
        return p + np.asarray(self.local_origin, dtype=float)

    def weight(self, t1, t2):
        ph = np.asarray(t1, dtype=float)
        th = np.asarray(t2, dtype=float)
        r = np.asarray(self.shape.r(th, ph), dtype=float)
        if self.shape.r_theta is not None:
            rt = np.asarray(self.shape.r_theta(th, ph), dtype=float)
        else:
            rt = (np.asarray(self.shape.r(th + _FD_STEP, ph), dtype=float)
                  - np.asarray(self.shape.r(th - _FD_STEP, ph), dtype=float)) / (2 * _FD_STEP)
        if self.shape.r_phi is not None:
            rp = np.asarray(self.shape.r_phi(th, ph), dtype=float)
        else:
            rp = (np.asarray(self.shape.r(th, ph + _FD_STEP), dtype=float)
                  - np.asarray(self.shape.r(th, ph - _FD_STEP), dtype=float)) / (2 * _FD_STEP)
        st = np.sin(th)
        st = np.where(np.abs(st) < _POLE_SNAP, 0.0, st)
        w = np.sqrt(r * r * rp * rp + r * r * rt * rt * st * st + r ** 4 * st * st)
        # poles carry no area (the snapped sin makes this exact for the
        # axisymmetric shapes; enforce it for finite-difference shapes too)
        return np.where(st == 0.0, 0.0, w)


@dataclass(frozen=True)
class PlanePatch:
    kind = "plane"
    origin: tuple
    e1: tuple
    e2: tuple
    t1_range: tuple
    t2_range: tuple

    def points(self, t1, t2):
        a = np.asarray(t1, dtype=float)[..., None]
        b = np.asarray(t2, dtype=float)[..., None]
        return (np.asarray(self.origin, dtype=float)
                + a * np.asarray(self.e1, dtype=float)
                + b * np.asarray(self.e2, dtype=float))

    def weight(self, t1, t2):
        w = float(np.linalg.norm(np.cross(self.e1, self.e2)))
        return np.full(np.broadcast(np.asarray(t1), np.asarray(t2)).shape, w)


@dataclass(frozen=True)
class CylinderPatch:
    kind = "cylinder"
    radius: float
    z_range: tuple
    local_origin: tuple = (0.0, 0.0, 0.0)

    @property
    def t1_range(self):
        return (0.0, 2.0 * math.pi)

    @property
    def t2_range(self):
        return tuple(self.z_range)

    def points(self, t1, t2):
        ph = np.asarray(t1, dtype=float)
        z = np.asarray(t2, dtype=float)
        p = np.empty(np.broadcast(ph, z).shape + (3,))
        p[..., 0] = self.radius * np.cos(ph)
        p[..., 1] = self.radius * np.sin(ph)
        p[..., 2] = z
        return p + np.asarray(self.local_origin, dtype=float)

    def weight(self, t1, t2):
        return np.full(np.broadcast(np.asarray(t1), np.asarray(t2)).shape, float(self.radius))


@dataclass(frozen=True)
class Surface:
    """Union of patches; optional per-patch strict-interior tests.

    When interior_tests is set (one callable per patch, points (N,3) ->
    bool (N,)), quadrature nodes of one patch that lie strictly inside any
    *other* patch's solid get zero weight ("trim" mode) so only the
    boundary of the union carries area.
    """

    patches: tuple
    interior_tests: tuple = None

    def __post_init__(self):
        if len(self.patches) == 0:
            raise ValueError("surface needs at least one patch")
        if self.interior_tests is not None and len(self.interior_tests) != len(self.patches):
            raise ValueError("interior_tests must have one entry per patch")


@dataclass(frozen=True)
class SphericalCoords:
    r: float
    theta: float
    phi: float


@dataclass(frozen=True)
class QuadratureGrid:
    """Flattened tensor grids of all patches of a surface.

    points: (M, 3); weights: (M,) combined simpson * area-weight * h1*h2,
    all >= 0 (pole rows are exactly 0); patch_index: (M,) which patch each
    node came from; per-patch slices in patch_slices.  Node order within a
    patch: t2 (rows) outer, t1 inner.
    """

    points: np.ndarray
    weights: np.ndarray
    patch_index: np.ndarray
    patch_slices: tuple
    n1: tuple
    n2: tuple
    scheme: str
    surface: Surface = field(repr=False, compare=False, default=None)


def simpson_coefficients(n: int) -> np.ndarray:
    """Closed composite Simpson coefficient vector 1,4,2,...,2,4,1 (n even)."""
    if n < 2 or n % 2:
        raise ValueError("Simpson rule needs an even number of intervals >= 2")
    c = np.ones(n + 1)
    c[1:-1:2] = 4.0
    c[2:-1:2] = 2.0
    return c


def _per_patch(value, npatches: int, name: str) -> tuple:
    if np.ndim(value) == 0:
        return (int(value),) * npatches
    vals = tuple(int(v) for v in value)
    if len(vals) != npatches:
        raise ValueError(f"{name} list must have one entry per patch ({npatches})")
    return vals


def quad_grid(surface: Surface, n1, n2, scheme: str = SCHEME_STANDARD) -> QuadratureGrid:
    """Tensor-product Simpson grid over every patch of the surface."""
    if scheme not in (SCHEME_STANDARD, SCHEME_PAPER):
        raise ValueError(f"unknown scheme {scheme!r}: use 'standard' or 'paper'")
    n1s = _per_patch(n1, len(surface.patches), "grid.n1")
    n2s = _per_patch(n2, len(surface.patches), "grid.n2")
    for n in n1s:
        if n < 2 or n % 2:
            raise ValueError("grid.n1 must be even and >= 2")
    for n in n2s:
        if n < 2 or n % 2:
            raise ValueError("grid.n2 must be even and >= 2")
    pts, wts, pidx, slices = [], [], [], []
    offset = 0
    for ip, patch in enumerate(surface.patches):
        m1, m2 = n1s[ip], n2s[ip]
        a1, b1 = patch.t1_range
        a2, b2 = patch.t2_range
        h1 = (b1 - a1) / m1
        h2 = (b2 - a2) / m2
        t1 = a1 + h1 * np.arange(m1 + 1)
        t2 = a2 + h2 * np.arange(m2 + 1)
        c = np.outer(simpson_coefficients(m2), simpson_coefficients(m1))
        if scheme == SCHEME_STANDARD:
            c = c / 9.0
        T2, T1 = np.meshgrid(t2, t1, indexing="ij")
        p = patch.points(T1, T2).reshape(-1, 3)
        w = np.asarray(patch.weight(T1, T2), dtype=float)
        omega = (c * w * h1 * h2).reshape(-1)
        if np.any(omega < 0):
            raise ValueError("negative quadrature weight (bad patch weight function?)")
        if surface.interior_tests is not None:
            occluded = np.zeros(p.shape[0], dtype=bool)
            for jp, test in enumerate(surface.interior_tests):
                if jp != ip:
                    occluded |= test(p)
            omega = np.where(occluded, 0.0, omega)
        count = (m1 + 1) * (m2 + 1)
        pts.append(p)
        wts.append(omega)
        pidx.append(np.full(count, ip, dtype=int))
        slices.append(slice(offset, offset + count))
        offset += count
    return QuadratureGrid(
        points=np.concatenate(pts, axis=0),
        weights=np.concatenate(wts),
        patch_index=np.concatenate(pidx),
        patch_slices=tuple(slices),
        n1=n1s,
        n2=n2s,
        scheme=scheme,
        surface=surface,
    )


def area_weight(patch, t1: float, t2: float) -> float:
    """Area-weight factor w(t1, t2) of a single patch at one parameter point."""
    a1, b1 = patch.t1_range
    a2, b2 = patch.t2_range
    tol = 1e-12
    if not (a1 - tol <= t1 <= b1 + tol) or not (a2 - tol <= t2 <= b2 + tol):
        raise ValueError("parameter point outside the patch ranges")
    return float(np.asarray(patch.weight(t1, t2)))


def to_spherical(point, origin=(0.0, 0.0, 0.0)) -> SphericalCoords:
    """Spherical coordinates of point - origin; phi in [0, 2*pi), axis phi = 0."""
    d = np.asarray(point, dtype=float) - np.asarray(origin, dtype=float)
    r = float(np.linalg.norm(d))
    if r == 0.0:
        raise ValueError("point coincides with the origin")
    theta = float(np.arccos(np.clip(d[2] / r, -1.0, 1.0)))
    phi = float(np.arctan2(d[1], d[0]))
    if phi < 0:
        phi += 2.0 * math.pi
    if phi >= 2.0 * math.pi:
        phi = 0.0
    return SphericalCoords(r=r, theta=theta, phi=phi)


def _cube_patches(half_side: float) -> tuple:
    s = float(half_side)
    if s <= 0:
        raise ValueError("cube half_side must be > 0")
    rng = (-s, s)
    faces = [
        # origin, e1, e2 — frames chosen so the six faces enumerate
        # +x, -x, +y, -y, +z, -z in a fixed order
        ((s, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
        ((-s, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
        ((0.0, s, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
        ((0.0, -s, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
        ((0.0, 0.0, s), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
        ((0.0, 0.0, -s), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
    ]
    return tuple(
        PlanePatch(origin=o, e1=e1, e2=e2, t1_range=rng, t2_range=rng)
        for (o, e1, e2) in faces
    )


def build_surface(desc) -> Surface:
    """Surface from a descriptor mapping.

    Descriptors: {"type": "sphere", "radius": r}; {"type": "ellipsoid",
    "b": b}; {"type": "cube", "half_side": s}; {"type": "dumbbell",
    "sphere_radius": R, "center_offset": d, "neck_radius": a,
    "neck_halfheight": h, "trim": bool}; {"type": "patches",
    "patches": [...]} with per-item kind-specific fields.
    """
    if isinstance(desc, Surface):
        return desc
    d = dict(desc)
    kind = d.pop("type")
    if kind == "sphere":
        radius = float(d.pop("radius", 1.0))
        if radius <= 0:
            raise ValueError("sphere radius must be > 0")
        _reject_extras(kind, d)
        return Surface(patches=(StarRadialPatch(shape=_const_shape(radius)),))
    if kind == "ellipsoid":
        b = float(d.pop("b"))
        if b <= 0:
            raise ValueError("ellipsoid semi-axis b must be > 0")
        _reject_extras(kind, d)
        return Surface(patches=(StarRadialPatch(shape=_ellipsoid_shape(b)),))
    if kind == "cube":
        s = float(d.pop("half_side", 1.0))
        _reject_extras(kind, d)
        return Surface(patches=_cube_patches(s))
    if kind == "dumbbell":
        R = float(d.pop("sphere_radius", 1.5))
        off = float(d.pop("center_offset", 1.0))
        a = float(d.pop("neck_radius", 1.0))
        h = float(d.pop("neck_halfheight", 1.0))
        trim = bool(d.pop("trim", False))
        _reject_extras(kind, d)
        if R <= 0 or a <= 0 or h <= 0:
            raise ValueError("dumbbell dimensions must be > 0")
        patches = (
            StarRadialPatch(shape=_const_shape(R), local_origin=(0.0, 0.0, off)),
            StarRadialPatch(shape=_const_shape(R), local_origin=(0.0, 0.0, -off)),
            CylinderPatch(radius=a, z_range=(-h, h)),
        )
        tests = None
        if trim:
            eps = 1e-12

            def inside_ball(center_z):
                c = np.array([0.0, 0.0, center_z])

                def test(p):
                    return np.linalg.norm(p - c, axis=-1) < R - eps

                return test

            def inside_cyl(p):
                rho2 = p[..., 0] ** 2 + p[..., 1] ** 2
                return (rho2 < (a - eps) ** 2) & (np.abs(p[..., 2]) < h - eps)

            tests = (inside_ball(off), inside_ball(-off), inside_cyl)
        return Surface(patches=patches, interior_tests=tests)
    if kind == "patches":
        items = d.pop("patches")
        _reject_extras(kind, d)
        return Surface(patches=tuple(_patch_from_item(item) for item in items))
    raise ValueError(f"unknown geometry type {kind!r}")


def _reject_extras(kind, d):
    if d:
        raise ValueError(f"unknown fields for geometry {kind!r}: {sorted(d)}")


def _patch_from_item(item) -> object:
    it = dict(item)
    kind = it.pop("kind")
    if kind == "star_radial":
        shape_name = it.pop("shape", "constant")
        origin = tuple(it.pop("local_origin", (0.0, 0.0, 0.0)))
        if shape_name == "constant":
            shape = _const_shape(float(it.pop("radius")))
        elif shape_name == "ellipsoid":
            shape = _ellipsoid_shape(float(it.pop("b")))
        else:
            raise ValueError(f"unknown star_radial shape {shape_name!r}")
        _reject_extras(kind, it)
        return StarRadialPatch(shape=shape, local_origin=origin)
    if kind == "plane":
        p = PlanePatch(
            origin=tuple(it.pop("origin")),
            e1=tuple(it.pop("e1")),
            e2=tuple(it.pop("e2")),
            t1_range=tuple(it.pop("t1_range")),
            t2_range=tuple(it.pop("t2_range")),
        )
        _reject_extras(kind, it)
        return p
    if kind == "cylinder":
        p = CylinderPatch(
            radius=float(it.pop("radius")),
            z_range=tuple(it.pop("z_range")),
            local_origin=tuple(it.pop("local_origin", (0.0, 0.0, 0.0))),
        )
        _reject_extras(kind, it)
        return p
    raise ValueError(f"unknown patch kind {kind!r}")
