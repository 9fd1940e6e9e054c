"""Surfaces of revolution: metric data, complex structure, Killing fields.

Points are charted by (r, theta) with the embedding
``(f(r) cos theta, f(r) sin theta, g(r))`` where the profile is unit speed,
``f_r**2 + g_r**2 = 1``.  Tangent vectors are written either in coordinate
components (d/dr, d/dtheta) or in the orthonormal frame (e_r, e_theta / f);
functions say which.  J rotates e_r onto e_theta / f.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline

from . import _fd
from .errors import DegenerateSpeed, InvalidSpec, OutOfDomain

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class SurfaceOfRevolution:
    f: Profile
    f_r: Profile
    f_rr: Profile
    g: Profile
    g_r: Profile
    r_domain: tuple
    name: str = "custom"
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = self.r_domain
        if not lo < hi:
            raise ValueError("empty r_domain")
        a = lo if np.isfinite(lo) else -10.0
        b = hi if np.isfinite(hi) else 10.0
        r = np.linspace(a, b, 102)[1:-1]
        if np.any(self.f(r) <= 0):
            raise ValueError("f must be positive inside r_domain")
        unit = self.f_r(r) ** 2 + self.g_r(r) ** 2
        if np.max(np.abs(unit - 1.0)) > 1e-10:
            raise ValueError("profile is not unit speed: f_r^2 + g_r^2 != 1")

    @property
    def is_cylinder(self) -> bool:
        return self.kind == "cylinder"

    def check_domain(self, r) -> None:
        r = np.asarray(r, dtype=float)
        lo, hi = self.r_domain
        if np.any(~np.isfinite(r)) or np.any(r <= lo) or np.any(r >= hi):
            raise OutOfDomain(f"r outside the open interval {self.r_domain}")

    def describe(self) -> dict:
        return {"kind": self.kind, "name": self.name, **self.params}


def sphere() -> SurfaceOfRevolution:
    """Unit sphere, r the polar angle from the north pole (0, 0, 1)."""
    return SurfaceOfRevolution(np.sin, np.cos, lambda r: -np.sin(r), np.cos,
                               lambda r: -np.sin(r), (0.0, np.pi), "unit sphere", "sphere")


def cylinder(r0: float = 1.0) -> SurfaceOfRevolution:
    """Round cylinder of radius r0 about the z-axis; r is the height."""
    if not r0 > 0:
        raise ValueError("cylinder radius must be positive")
    one = np.ones_like
    return SurfaceOfRevolution(lambda r: r0 * one(np.asarray(r, float)),
                               lambda r: 0.0 * one(np.asarray(r, float)),
                               lambda r: 0.0 * one(np.asarray(r, float)),
                               lambda r: np.asarray(r, float),
                               lambda r: one(np.asarray(r, float)),
                               (-np.inf, np.inf), f"cylinder r0={r0}", "cylinder", {"r0": r0})


def catenoid_band() -> SurfaceOfRevolution:
    """f = cosh r on |sinh r| < 1 (the band where a unit-speed g exists)."""
    rmax = np.arcsinh(1.0)
    gr = lambda r: np.sqrt(np.clip(1.0 - np.sinh(r) ** 2, 0.0, None))

    def g(r):
        r = np.atleast_1d(np.asarray(r, float))
        out = np.array([integrate.quad(gr, 0.0, x)[0] for x in r.ravel()]).reshape(r.shape)
        return out

    return SurfaceOfRevolution(np.cosh, np.sinh, np.cosh, g, gr, (-rmax, rmax),
                               "cosh band", "catenoid_band")


def gaussian_bump(amp: float = 0.3, base: float = 1.0, r_max: float = 4.0) -> SurfaceOfRevolution:
    """f = base + amp * exp(-r**2): a tube with a bulge, non-constant curvature."""
    f = lambda r: base + amp * np.exp(-np.asarray(r, float) ** 2)
    fr = lambda r: -2.0 * amp * np.asarray(r, float) * np.exp(-np.asarray(r, float) ** 2)
    frr = lambda r: amp * (4.0 * np.asarray(r, float) ** 2 - 2.0) * np.exp(-np.asarray(r, float) ** 2)
    if 2.0 * abs(amp) * np.exp(-0.5) / np.sqrt(2.0) >= 1.0:
        raise ValueError("bump amplitude too large for a unit-speed profile")
    gr = lambda r: np.sqrt(1.0 - fr(r) ** 2)

    def g(r):
        r = np.atleast_1d(np.asarray(r, float))
        return np.array([integrate.quad(gr, 0.0, x)[0] for x in r.ravel()]).reshape(r.shape)

    return SurfaceOfRevolution(f, fr, frr, g, gr, (-r_max, r_max),
                               f"gaussian bump amp={amp}", "gaussian_bump",
                               {"amp": amp, "base": base, "r_max": r_max})


def from_table(r, f, f_r, f_rr, g, g_r, name="table") -> SurfaceOfRevolution:
    """Custom profile from tabulated values with cubic interpolation.

    g_r is rebuilt from the f_r spline as +-sqrt(1 - f_r^2), signed like the
    tabulated column, so the interpolated profile stays unit speed between
    nodes; the tabulated g_r only has to agree with it at the nodes.
    """
    r = np.asarray(r, float)
    sf, sfr, sfrr, sg, sign = (CubicSpline(r, np.asarray(col, float)) for col in (f, f_r, f_rr, g, g_r))

    def sgr(x):
        return np.copysign(np.sqrt(np.clip(1.0 - sfr(x) ** 2, 0.0, None)), sign(x))

    if np.max(np.abs(np.asarray(g_r, float) - sgr(r))) > 1e-8:
        raise ValueError("tabulated g_r disagrees with sqrt(1 - f_r^2)")

    return SurfaceOfRevolution(sf, sfr, sfrr, sg, sgr, r_domain=(r[0], r[-1]), name=name, kind="custom")


def embed(surface: SurfaceOfRevolution, r, theta) -> np.ndarray:
    surface.check_domain(r)
    r = np.asarray(r, float)
    theta = np.asarray(theta, float)
    f = surface.f(r)
    return np.stack([f * np.cos(theta), f * np.sin(theta), surface.g(r) * np.ones_like(theta)], axis=-1)


def tangent_basis(surface: SurfaceOfRevolution, r, theta):
    """Coordinate tangent vectors (e_r, e_theta) in R^3; |e_r| = 1, |e_theta| = f."""
    surface.check_domain(r)
    r = np.asarray(r, float)
    theta = np.asarray(theta, float)
    fr, gr, f = surface.f_r(r), surface.g_r(r), surface.f(r)
    c, s = np.cos(theta), np.sin(theta)
    e_r = np.stack([fr * c, fr * s, gr * np.ones_like(c)], axis=-1)
    e_t = np.stack([-f * s, f * c, np.zeros_like(c)], axis=-1)
    return e_r, e_t


def unit_normal(surface: SurfaceOfRevolution, r, theta) -> np.ndarray:
    """Oriented normal e_r x (e_theta / f); J X equals normal x X."""
    e_r, e_t = tangent_basis(surface, r, theta)
    return np.cross(e_r, e_t / surface.f(np.asarray(r, float))[..., None])


def gauss_curvature(surface: SurfaceOfRevolution, r):
    surface.check_domain(r)
    r = np.asarray(r, float)
    return -surface.f_rr(r) / surface.f(r)


def rot90(v) -> np.ndarray:
    v = np.asarray(v, float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def complex_structure(surface, point, tangent) -> np.ndarray:
    """J on orthonormal-frame components: J(a, b) = (-b, a).

    In the frame (e_r, e_theta / f) J is the same rotation at every point;
    ``surface`` and ``point`` only validate the base point.
    """
    if point is not None:
        surface.check_domain(point[0])
    return rot90(tangent)


def to_frame(surface, r, coord):
    """Coordinate components -> orthonormal-frame components."""
    c = np.asarray(coord, float)
    return np.stack([c[..., 0], surface.f(np.asarray(r, float)) * c[..., 1]], axis=-1)


def from_frame(surface, r, comps):
    c = np.asarray(comps, float)
    return np.stack([c[..., 0], c[..., 1] / surface.f(np.asarray(r, float))], axis=-1)


@dataclass(frozen=True)
class KillingFieldSpec:
    """Rotation rate about the axis plus (cylinder only) axial translation rate."""

    omega: float = 0.0
    sigma: float = 0.0


def _check_killing(surface: SurfaceOfRevolution, spec: KillingFieldSpec):
    if spec.sigma != 0 and not surface.is_cylinder:
        raise InvalidSpec("axial translation is an isometry only of the cylinder")


def killing_vector(surface: SurfaceOfRevolution, spec: KillingFieldSpec, r, theta):
    """Killing field at (r, theta): (ambient 3-vector, coordinate 2-vector)."""
    _check_killing(surface, spec)
    surface.check_domain(r)
    r = np.asarray(r, float)
    theta = np.asarray(theta, float)
    f = surface.f(r)
    amb = np.stack([-spec.omega * f * np.sin(theta), spec.omega * f * np.cos(theta),
                    spec.sigma * np.ones_like(f * theta)], axis=-1)
    # on the cylinder g = r, so d/dr is the unit axial direction
    chart = np.stack([spec.sigma * np.ones_like(f * theta), spec.omega * np.ones_like(f * theta)], axis=-1)
    return amb, chart


@dataclass(frozen=True, eq=False)
class ChartCurve:
    """Samples (r(x), theta(x)) of a curve on a surface of revolution.

    For closed curves sample ``n`` equals sample ``0`` shifted by
    ``theta_jump`` (a multiple of 2 pi) and ``r_jump`` (non-zero only on a
    cylinder, where axial shifts are isometries).
    """

    r: np.ndarray
    theta: np.ndarray
    spacing: float
    closed: bool = False
    theta_jump: float = 0.0
    r_jump: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        r = np.array(self.r, float)
        th = np.array(self.theta, float)
        if r.shape != th.shape or r.ndim != 1:
            raise ValueError("r and theta must be 1-d arrays of equal length")
        if r.size < 4:
            raise ValueError("chart curves need at least 4 samples")
        if self.closed:
            turns = self.theta_jump / (2 * np.pi)
            if abs(turns - round(turns)) > 1e-9:
                raise ValueError("closed chart curve must wind by a multiple of 2 pi")
        for name, arr in (("r", r), ("theta", th)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.r.size

    @property
    def x(self) -> np.ndarray:
        return self.spacing * np.arange(self.n)

    @property
    def length(self) -> float:
        return self.spacing * (self.n if self.closed else self.n - 1)

    def stacked(self) -> np.ndarray:
        return np.stack([self.r, self.theta], axis=1)

    def jump(self) -> np.ndarray:
        return np.array([self.r_jump, self.theta_jump])

    def derivatives(self, orders=(1, 2, 3)):
        fwd, bwd = _fd.shift_map(self.jump()) if self.closed else (None, None)
        return _fd.derivatives(self.stacked(), self.spacing, self.closed, fwd, bwd, orders)

    def replace(self, **changes) -> "ChartCurve":
        kw = dict(r=self.r, theta=self.theta, spacing=self.spacing, closed=self.closed,
                  theta_jump=self.theta_jump, r_jump=self.r_jump, meta=dict(self.meta))
        kw.update(changes)
        return ChartCurve(**kw)


def _check_curve(surface: SurfaceOfRevolution, curve: ChartCurve):
    surface.check_domain(curve.r)
    if curve.r_jump != 0 and not surface.is_cylinder:
        raise InvalidSpec("an axial jump is only allowed on the cylinder")


def covariant_accel(surface: SurfaceOfRevolution, curve: ChartCurve) -> np.ndarray:
    """Coordinate components of nabla_x u_x along a chart curve."""
    _check_curve(surface, curve)
    d1, d2 = curve.derivatives((1, 2))
    f, fr = surface.f(curve.r), surface.f_r(curve.r)
    rp, tp = d1[:, 0], d1[:, 1]
    ar = d2[:, 0] - f * fr * tp**2
    at = d2[:, 1] + 2.0 * (fr / f) * rp * tp
    return np.stack([ar, at], axis=1)


def speed(surface: SurfaceOfRevolution, curve: ChartCurve) -> np.ndarray:
    (d1,) = curve.derivatives((1,))
    return np.hypot(d1[:, 0], surface.f(curve.r) * d1[:, 1])


def geodesic_curvature(surface: SurfaceOfRevolution, curve: ChartCurve) -> np.ndarray:
    """k_g = <nabla_x u_x, J u_x> / |u_x|**3."""
    acc = covariant_accel(surface, curve)
    (d1,) = curve.derivatives((1,))
    ux = to_frame(surface, curve.r, d1)
    v = np.hypot(ux[:, 0], ux[:, 1])
    if np.any(v <= 1e-10):
        raise DegenerateSpeed("curve speed vanishes")
    a = to_frame(surface, curve.r, acc)
    jux = rot90(ux)
    return np.sum(a * jux, axis=1) / v**3


@dataclass(frozen=True, eq=False)
class MagneticFieldSpec:
    """Scalar magnetic strength k(r, theta); the Lorentz force is k J X."""

    k_fn: Callable

    @staticmethod
    def constant(b: float) -> "MagneticFieldSpec":
        return MagneticFieldSpec(lambda r, theta: b + 0.0 * np.asarray(r, float))


def magnetic_rhs(surface: SurfaceOfRevolution, mfield: MagneticFieldSpec, point, velocity) -> np.ndarray:
    """Lorentz force k(point) J(velocity), coordinate components in and out."""
    r, theta = point
    vel = np.asarray(velocity, float)
    f = surface.f(np.asarray(r, float))
    kk = mfield.k_fn(r, theta)
    # J in coordinates: (r', theta') -> (-f theta', r' / f)
    return kk * np.stack([-f * vel[..., 1], vel[..., 0] / f], axis=-1)


def metric_norm(surface, r, coord) -> np.ndarray:
    c = np.asarray(coord, float)
    return np.hypot(c[..., 0], surface.f(np.asarray(r, float)) * c[..., 1])
