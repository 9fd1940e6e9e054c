"""Discrete space curves: resampling, Frenet data, reconstruction, energies."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import _fd
from .errors import (AllDegenerate, BadFrame, DegenerateCurve, NotArclength,
                     TooFewPoints)

ARCLENGTH = "arclength"
GENERAL = "general"
_EPS = np.finfo(float).eps


@dataclass(frozen=True, eq=False)
class DiscreteCurve:
    """Samples of a curve in R^3 on a uniform parameter grid.

    A closed curve is periodic: sample ``n`` coincides with sample ``0``.
    When ``monodromy = (R, a)`` is given, the curve is only periodic up to the
    rigid motion x -> R x + a, i.e. ``points[i + n] = R @ points[i] + a``.
    This covers helix-like solitons whose shape repeats after a screw motion.
    """

    points: np.ndarray
    spacing: float
    closed: bool = False
    param_kind: str = GENERAL
    monodromy: Optional[tuple] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must have shape (n, 3)")
        if pts.shape[0] < 4:
            raise TooFewPoints(f"need at least 4 points, got {pts.shape[0]}")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")
        if self.param_kind not in (ARCLENGTH, GENERAL):
            raise ValueError(f"unknown param_kind {self.param_kind!r}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.monodromy is not None:
            rot, trans = (np.asarray(m, dtype=float) for m in self.monodromy)
            object.__setattr__(self, "monodromy", (rot, trans))
        if self.param_kind == ARCLENGTH:
            chords = np.linalg.norm(np.diff(self._unrolled(), axis=0), axis=1)
            if np.max(np.abs(chords / self.spacing - 1.0)) > 0.01:
                raise NotArclength("chord lengths deviate from spacing by more than 1%")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def length(self) -> float:
        """Parameter length of the sampled span."""
        return self.spacing * (self.n if self.closed else self.n - 1)

    @property
    def s(self) -> np.ndarray:
        return self.spacing * np.arange(self.n)

    def ghost_maps(self):
        if not self.closed or self.monodromy is None:
            return None, None
        return _fd.rigid_map(*self.monodromy)

    def _unrolled(self) -> np.ndarray:
        """Samples plus the endpoint image of sample 0 for closed curves."""
        if not self.closed:
            return self.points
        fwd, _ = self.ghost_maps()
        end = self.points[:1] if fwd is None else fwd(self.points[:1])
        return np.vstack([self.points, end])

    def derivatives(self, orders=(1, 2, 3)):
        fwd, bwd = self.ghost_maps()
        return _fd.derivatives(self.points, self.spacing, self.closed, fwd, bwd, orders)

    def replace(self, **changes) -> "DiscreteCurve":
        kw = dict(points=self.points, spacing=self.spacing, closed=self.closed,
                  param_kind=self.param_kind, monodromy=self.monodromy, meta=dict(self.meta))
        kw.update(changes)
        return DiscreteCurve(**kw)


@dataclass(frozen=True, eq=False)
class FrenetFrameField:
    """Unit tangent, normal and binormal per sample (NaN where undefined)."""

    t: np.ndarray
    n: np.ndarray
    b: np.ndarray

    def triple(self, i: int = 0):
        return self.t[i], self.n[i], self.b[i]


@dataclass(frozen=True, eq=False)
class IntrinsicProfile:
    """Curvature and torsion samples of an arclength-parametrized curve."""

    k: np.ndarray
    tau: np.ndarray
    spacing: float
    closed: bool = False
    degenerate_mask: Optional[np.ndarray] = None

    def __post_init__(self):
        k = np.array(self.k, dtype=float)
        tau = np.array(self.tau, dtype=float)
        if k.shape != tau.shape or k.ndim != 1:
            raise ValueError("k and tau must be 1-d arrays of equal length")
        if np.any(k < 0):
            raise ValueError("curvature must be non-negative")
        if not np.all(np.isfinite(tau)):
            raise ValueError("torsion must be finite")
        mask = (np.zeros(k.shape, bool) if self.degenerate_mask is None
                else np.array(self.degenerate_mask, dtype=bool))
        for name, arr in (("k", k), ("tau", tau), ("degenerate_mask", mask)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.k.shape[0]

    @property
    def s(self) -> np.ndarray:
        return self.spacing * np.arange(self.n)

    @property
    def length(self) -> float:
        return self.spacing * (self.n if self.closed else self.n - 1)


def curvature_threshold(k: np.ndarray, curve: Optional[DiscreteCurve] = None) -> float:
    """Curvature below which the Frenet frame is treated as undefined.

    Relative cut 1e-8 * max k (floored at 1e-12), raised to the round-off
    level of a second difference when the sampled curve is known.
    """
    kmin = 1e-8 * max(float(np.max(k)) if k.size else 0.0, 1e-12)
    if curve is not None:
        extent = float(np.max(np.abs(curve.points)))
        kmin = max(kmin, 1e3 * _EPS * max(extent, 1.0) / curve.spacing**2)
    return kmin


def resample_arclength(curve: DiscreteCurve, n: int) -> DiscreteCurve:
    """Resample ``curve`` at ``n`` points equally spaced in arclength.

    A cubic spline (periodic for closed curves, natural for open ones) through
    the input samples, parametrized by chord length, defines the continuous
    curve; its arclength is integrated with Gauss-Legendre quadrature and
    inverted by safeguarded Newton iterations.
    """
    if n < 4:
        raise TooFewPoints("n must be at least 4")
    pts = curve._unrolled()
    chords = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if chords.sum() < 1e-12:
        raise DegenerateCurve("total length below 1e-12")
    keep = np.concatenate([[True], chords > 0])
    pts = pts[keep]
    u = np.concatenate([[0.0], np.cumsum(chords[chords > 0])])
    periodic = curve.closed and curve.monodromy is None
    bc = "periodic" if periodic else ("natural" if not curve.closed else "not-a-knot")
    spl = CubicSpline(u, pts, bc_type=bc, axis=0)
    dspl = spl.derivative()

    nodes, weights = np.polynomial.legendre.leggauss(10)

    def arc(a, b):
        # integral of |spl'| over [a, b], elementwise
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        x = mid[..., None] + half[..., None] * nodes
        speed = np.linalg.norm(dspl(x), axis=-1)
        return half * (speed @ weights)

    # subdivide each knot interval for the knot-level cumulative table
    sub = 4
    fine = np.concatenate([np.linspace(u[i], u[i + 1], sub, endpoint=False)
                           for i in range(len(u) - 1)] + [u[-1:]])
    cum = np.concatenate([[0.0], np.cumsum(arc(fine[:-1], fine[1:]))])
    total = cum[-1]
    m = n if curve.closed else n - 1
    spacing = total / m
    targets = spacing * np.arange(n)

    idx = np.clip(np.searchsorted(cum, targets, side="right") - 1, 0, len(fine) - 2)
    lo, hi = fine[idx], fine[idx + 1]
    base = cum[idx]
    x = lo + (targets - base) / np.maximum(cum[idx + 1] - base, 1e-300) * (hi - lo)
    for _ in range(50):
        g = base + arc(lo, x) - targets
        speed = np.linalg.norm(dspl(x), axis=-1)
        step = g / np.maximum(speed, 1e-300)
        x_new = np.clip(x - step, lo, hi)
        done = np.max(np.abs(x_new - x)) < 1e-15 * max(u[-1], 1.0)
        x = x_new
        if done:
            break
    new_pts = spl(x)
    if not curve.closed:
        new_pts[0], new_pts[-1] = pts[0], pts[-1]
    return curve.replace(points=new_pts, spacing=spacing, param_kind=ARCLENGTH)


def frenet_analyze(curve: DiscreteCurve):
    """Frenet frame, curvature and torsion from centered finite differences.

    Returns ``(FrenetFrameField, IntrinsicProfile)``.  Curvature uses the
    parametrization-invariant form ``|g' x g''| / |g'|**3``, torsion
    ``<g' x g'', g'''> / |g' x g''|**2``.  Samples with curvature below
    :func:`curvature_threshold` get NaN normal/binormal and zero torsion.
    """
    if curve.param_kind != ARCLENGTH:
        raise NotArclength("frenet_analyze needs an arclength-parametrized curve")
    d1, d2, d3 = curve.derivatives((1, 2, 3))
    speed = np.linalg.norm(d1, axis=1)
    cr = np.cross(d1, d2)
    crn = np.linalg.norm(cr, axis=1)
    k = crn / speed**3
    kmin = curvature_threshold(k, curve)
    mask = k < kmin
    if np.all(mask):
        raise AllDegenerate("curvature vanishes at every sample")
    ok = ~mask
    t = d1 / speed[:, None]
    normal = np.full_like(t, np.nan)
    binormal = np.full_like(t, np.nan)
    tau = np.zeros_like(k)
    perp = d2 - np.sum(d2 * t, axis=1)[:, None] * t
    normal[ok] = perp[ok] / np.linalg.norm(perp[ok], axis=1)[:, None]
    binormal[ok] = np.cross(t[ok], normal[ok])
    tau[ok] = np.sum(cr[ok] * d3[ok], axis=1) / crn[ok] ** 2
    frame = FrenetFrameField(t, normal, binormal)
    prof = IntrinsicProfile(k, tau, curve.spacing, curve.closed, mask)
    return frame, prof


def _orthonormalize(t, n):
    t = t / np.linalg.norm(t)
    n = n - np.dot(n, t) * t
    n = n / np.linalg.norm(n)
    return t, n, np.cross(t, n)


def _frame_error(t, n, b) -> float:
    m = np.array([t, n, b])
    dev = np.max(np.abs(m @ m.T - np.eye(3)))
    if np.linalg.det(m) <= 0:
        return np.inf
    return float(dev)


def reconstruct_from_intrinsics(profile: IntrinsicProfile, origin: Sequence[float] = (0, 0, 0),
                                frame0=None) -> DiscreteCurve:
    """Integrate the Frenet-Serret equations for a prescribed (k, tau).

    Classical RK4 on the 12-dimensional state (gamma, t, n, b) with the
    curvature and torsion interpolated by cubic splines at half steps, and a
    Gram-Schmidt re-orthonormalization after every step.  For closed profiles
    the gap between the end point gamma(L) and gamma(0) is stored in
    ``meta["closure_gap"]``.
    """
    if frame0 is None:
        frame0 = (np.array([1.0, 0, 0]), np.array([0, 1.0, 0]), np.array([0, 0, 1.0]))
    elif isinstance(frame0, FrenetFrameField):
        frame0 = frame0.triple(0)
    t0, n0, b0 = (np.asarray(v, dtype=float) for v in frame0)
    if _frame_error(t0, n0, b0) > 1e-8:
        raise BadFrame("initial frame is not right-handed orthonormal within 1e-8")
    h = profile.spacing
    s = profile.s
    if profile.closed:
        ss = np.append(s, profile.length)
        kspl = CubicSpline(ss, np.append(profile.k, profile.k[0]), bc_type="periodic")
        tspl = CubicSpline(ss, np.append(profile.tau, profile.tau[0]), bc_type="periodic")
        steps = profile.n
    else:
        kspl = CubicSpline(s, profile.k, bc_type="natural")
        tspl = CubicSpline(s, profile.tau, bc_type="natural")
        steps = profile.n - 1

    def rhs(si, y):
        kk, tt = float(kspl(si)), float(tspl(si))
        t, n, b = y[3:6], y[6:9], y[9:12]
        return np.concatenate([t, kk * n, -kk * t + tt * b, -tt * n])

    y = np.concatenate([np.asarray(origin, float), t0, n0, b0])
    out = np.empty((steps + 1, 3))
    out[0] = y[:3]
    for i in range(steps):
        si = s[0] + i * h
        k1 = rhs(si, y)
        k2 = rhs(si + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(si + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(si + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        t, n, b = _orthonormalize(y[3:6], y[6:9])
        y[3:6], y[6:9], y[9:12] = t, n, b
        out[i + 1] = y[:3]
    meta = {}
    closed = profile.closed
    if closed:
        gap = float(np.linalg.norm(out[-1] - out[0]))
        meta["closure_gap"] = gap
        # a periodic profile need not give a closed curve; keep the end point then
        closed = gap <= 1e-2 * h
        if closed:
            out = out[:-1]
    return DiscreteCurve(out, h, closed, ARCLENGTH, meta=meta)


def bending_energy(profile: IntrinsicProfile) -> float:
    """Total squared curvature, integral of k**2 ds."""
    k2 = profile.k**2
    if profile.closed:
        return float(profile.spacing * k2.sum())
    return float(profile.spacing * (k2.sum() - 0.5 * (k2[0] + k2[-1])))


def tangent_map(curve: DiscreteCurve) -> DiscreteCurve:
    """Tangent indicatrix u = gamma' of an arclength curve, as samples on S^2."""
    if curve.param_kind != ARCLENGTH:
        raise NotArclength("tangent_map needs an arclength-parametrized curve")
    (d1,) = curve.derivatives((1,))
    u = d1 / np.linalg.norm(d1, axis=1)[:, None]
    mono = None
    if curve.closed and curve.monodromy is not None:
        mono = (curve.monodromy[0], np.zeros(3))
    return DiscreteCurve(u, curve.spacing, curve.closed, GENERAL, mono)


def sphere_map_intrinsics(u: np.ndarray, h: float, closed: bool = True, rot=None):
    """Speed |u_x| and geodesic curvature of a sampled map into S^2.

    For the tangent map of an arclength curve these are the curvature k and
    tau / k respectively.
    """
    fwd = bwd = None
    if closed and rot is not None:
        fwd, bwd = _fd.rigid_map(rot, np.zeros(3))
    d1, d2 = _fd.derivatives(u, h, closed, fwd, bwd, (1, 2))
    v = np.linalg.norm(d1, axis=1)
    kg = np.einsum("ij,ij->i", np.cross(u, d1), d2) / v**3
    return v, kg


def rigid_align(a: np.ndarray, b: np.ndarray):
    """Best rotation R and shift x minimizing |R a_i + x - b_i|; returns (R, x, rms)."""
    ca, cb = a.mean(axis=0), b.mean(axis=0)
    hmat = (a - ca).T @ (b - cb)
    uu, _, vt = np.linalg.svd(hmat)
    dcorr = np.diag([1.0, 1.0, np.sign(np.linalg.det(vt.T @ uu.T))])
    rot = vt.T @ dcorr @ uu.T
    shift = cb - rot @ ca
    rms = float(np.sqrt(np.mean(np.sum((a @ rot.T + shift - b) ** 2, axis=1))))
    return rot, shift, rms
