"""Geometric solitons: u(t, x) = phi_t(v(x - c t)).

A soliton is a generator ``v`` together with a one-parameter isometry group
``phi_t`` of the target (generated by a Killing field V) and the domain
translation x -> x - c t.  A generator is a soliton of a flow u_t = F(u)
exactly when the reduced equation

    F(v) - V(v) + c v_x = 0

holds; the residual functions below evaluate its left side pointwise.  The
module also integrates magnetic geodesics (on surfaces and in R^3), builds
elastic curvature profiles from Jacobi elliptic functions and provides the
explicit cylinder and parallel soliton families of the KdV map flow.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Union

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline
from scipy.linalg import expm

from . import _fd
from ._kernels import python_backend as _ref
from .curvegeo import ARCLENGTH, DiscreteCurve, IntrinsicProfile
from .elliptic import ellipj, ellipk, jacobi_sn
from .errors import (DegenerateProfile, DegenerateSpeed, InvalidParams, InvalidSpec,
                     NoRoot, NotArclength, OutOfDomain)
from .flows import KDV, LIE, SCHRODINGER, FlowKind, FlowState, SphereMap, StepControl, chart_velocity, simulate
from .report import ResidualReport
from .surface import (ChartCurve, KillingFieldSpec, MagneticFieldSpec, SurfaceOfRevolution, cylinder,
                      killing_vector, rot90, to_frame)

log = logging.getLogger(__name__)

EZ = np.array([0.0, 0.0, 1.0])


# --- Killing fields of R^3 ---------------------------------------------------

def _cross_matrix(a) -> np.ndarray:
    x, y, z = a
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


@dataclass(frozen=True, eq=False)
class AmbientKilling:
    """V(x) = omega * axis x (x - point) + translation."""

    omega: float = 0.0
    axis: tuple = (0.0, 0.0, 1.0)
    point: tuple = (0.0, 0.0, 0.0)
    translation: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        axis = np.asarray(self.axis, float)
        nrm = np.linalg.norm(axis)
        if axis.shape != (3,) or nrm == 0:
            raise InvalidSpec("axis must be a non-zero 3-vector")
        object.__setattr__(self, "axis", tuple(axis / nrm))
        object.__setattr__(self, "point", tuple(np.asarray(self.point, float)))
        object.__setattr__(self, "translation", tuple(np.asarray(self.translation, float)))

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, float)
        a, p, t = (np.asarray(v) for v in (self.axis, self.point, self.translation))
        return self.omega * np.cross(a, x - p) + t

    def generator(self) -> np.ndarray:
        """4x4 affine generator of the flow."""
        a, p, t = (np.asarray(v) for v in (self.axis, self.point, self.translation))
        g = np.zeros((4, 4))
        k = self.omega * _cross_matrix(a)
        g[:3, :3] = k
        g[:3, 3] = t - k @ p
        return g

    def flow(self, t: float):
        """(R, b) with phi_t(x) = R x + b."""
        m = expm(t * self.generator())
        return m[:3, :3], m[:3, 3]

    def conjugate(self, rot, shift=(0.0, 0.0, 0.0)) -> "AmbientKilling":
        """Field of the moved configuration: x -> R V(R^T (x - shift))."""
        rot = np.asarray(rot, float)
        shift = np.asarray(shift, float)
        return AmbientKilling(self.omega, tuple(rot @ np.asarray(self.axis)),
                              tuple(rot @ np.asarray(self.point) + shift),
                              tuple(rot @ np.asarray(self.translation)))

    def to_dict(self) -> dict:
        return {"omega": self.omega, "axis": list(self.axis), "point": list(self.point),
                "translation": list(self.translation)}


def fit_ambient_killing(curve: DiscreteCurve, c: float = 0.0):
    """Least-squares Killing field V(x) = W x x + T with V(gamma) = gamma' x gamma'' + c gamma'.

    Returns ``(AmbientKilling, rms misfit)``.
    """
    d1, d2 = curve.derivatives((1, 2))
    target = np.cross(d1, d2) + c * d1
    x = curve.points
    n = x.shape[0]
    # W x x = -x x W, stacked for the unknowns (W, T)
    a = np.zeros((3 * n, 6))
    for i in range(n):
        a[3 * i:3 * i + 3, :3] = -_cross_matrix(x[i])
        a[3 * i:3 * i + 3, 3:] = np.eye(3)
    sol, *_ = np.linalg.lstsq(a, target.ravel(), rcond=None)
    w, t = sol[:3], sol[3:]
    rms = float(np.sqrt(np.mean((a @ sol - target.ravel()) ** 2)))
    om = float(np.linalg.norm(w))
    if om < 1e-14:
        return AmbientKilling(0.0, translation=tuple(t)), rms
    axis = w / om
    # split T into a point on the axis and a translation along it
    along = float(np.dot(t, axis))
    perp = t - along * axis
    point = np.cross(axis, perp) / om
    return AmbientKilling(om, tuple(axis), tuple(point), tuple(along * axis)), rms


# --- soliton specification ---------------------------------------------------

Generator = Union[DiscreteCurve, ChartCurve, SphereMap]
Killing = Union[KillingFieldSpec, AmbientKilling]


@dataclass(frozen=True, eq=False)
class SolitonSpec:
    """Generator v, target isometry group and domain speed c (psi_t(x) = x - c t).

    ``generator_fn`` optionally evaluates the generator exactly at arbitrary x:
    points of shape (m, 3) for curves and sphere maps, an (r, theta) pair for
    chart curves.  Without it the generator is interpolated by cubic splines.
    """

    generator: Generator
    killing: Killing
    c: float
    flow_kind: FlowKind
    surface: Optional[SurfaceOfRevolution] = None
    generator_fn: Optional[Callable] = None
    verified: bool = False
    residual: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        g, k = self.generator, self.killing
        if isinstance(g, DiscreteCurve):
            if not isinstance(k, AmbientKilling):
                raise InvalidSpec("space-curve solitons need an ambient Killing field")
        elif isinstance(g, ChartCurve):
            if self.surface is None or not isinstance(k, KillingFieldSpec):
                raise InvalidSpec("chart solitons need a surface and a KillingFieldSpec")
            if k.sigma != 0 and not self.surface.is_cylinder:
                raise InvalidSpec("axial translation is an isometry only of the cylinder")
        elif isinstance(g, SphereMap):
            if not isinstance(k, KillingFieldSpec) or k.sigma != 0:
                raise InvalidSpec("sphere-map solitons rotate about the z-axis only")
        else:
            raise InvalidSpec(f"unsupported generator {type(g).__name__}")


def _screw_power(rot, trans, q: int):
    r, b = np.eye(3), np.zeros(3)
    step_r, step_b = (rot, trans) if q >= 0 else (rot.T, -rot.T @ trans)
    for _ in range(abs(q)):
        r, b = step_r @ r, step_r @ b + step_b
    return r, b


def _spline_points(samples, h, closed, fwd, bwd, pad=8):
    """Cubic spline through samples extended by ``pad`` ghost samples per side."""
    samples = np.asarray(samples, float)
    if not closed:
        return CubicSpline(h * np.arange(samples.shape[0]), samples, axis=0)
    left, right = [], []
    lo, hi = samples, samples
    while sum(len(x) for x in right) < pad:
        hi = fwd(hi)
        right.append(hi)
        lo = bwd(lo)
        left.insert(0, lo)
    ext = np.concatenate(left + [samples] + right, axis=0)
    m = sum(len(x) for x in left)
    x = h * (np.arange(ext.shape[0]) - m)
    return CubicSpline(x, ext, axis=0)


def _curve_at(gen: DiscreteCurve, x: np.ndarray, fn) -> np.ndarray:
    if fn is not None:
        return np.asarray(fn(x), float)
    if not gen.closed:
        if np.any(x < -1e-12) or np.any(x > gen.length + 1e-12):
            raise InvalidSpec("shift leaves the sampled span of an open generator")
        return _spline_points(gen.points, gen.spacing, False, None, None)(x)
    rot, trans = gen.monodromy if gen.monodromy is not None else (np.eye(3), np.zeros(3))
    fwd, bwd = _fd.rigid_map(rot, trans)
    spl = _spline_points(gen.points, gen.spacing, True, fwd, bwd)
    period = gen.length
    q = np.floor(x / period).astype(int)
    base = spl(x - q * period)
    out = np.empty_like(base)
    for qq in np.unique(q):
        r, b = _screw_power(rot, trans, int(qq))
        sel = q == qq
        out[sel] = base[sel] @ r.T + b
    return out


def _chart_at(gen: ChartCurve, x: np.ndarray, fn):
    if fn is not None:
        r, th = fn(x)
        return np.asarray(r, float), np.asarray(th, float)
    y = gen.stacked()
    if not gen.closed:
        if np.any(x < -1e-12) or np.any(x > gen.length + 1e-12):
            raise InvalidSpec("shift leaves the sampled span of an open generator")
        out = _spline_points(y, gen.spacing, False, None, None)(x)
        return out[:, 0], out[:, 1]
    fwd, bwd = _fd.shift_map(gen.jump())
    out = _spline_points(y, gen.spacing, True, fwd, bwd)
    period = gen.length
    q = np.floor(x / period)
    base = out(x - q * period)
    return base[:, 0] + q * gen.r_jump, base[:, 1] + q * gen.theta_jump


def _rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def evolve_soliton(spec: SolitonSpec, t: float, x=None):
    """Closed-form u(t, x) = phi_t(v(x - c t)), returned as a payload like the generator.

    ``x`` defaults to the generator grid; other sample points are only
    supported for chart generators (used for ghost boundary values).
    """
    gen, fn, c = spec.generator, spec.generator_fn, spec.c
    shift = c * t
    if isinstance(gen, ChartCurve):
        xs = gen.x if x is None else np.asarray(x, float)
        if shift == 0.0 and x is None:
            r, th = gen.r.copy(), gen.theta.copy()
        else:
            r, th = _chart_at(gen, xs - shift, fn)
        r = r + spec.killing.sigma * t
        th = th + spec.killing.omega * t
        if x is not None:
            return np.stack([r, th], axis=1)
        return gen.replace(r=r, theta=th)
    if x is not None:
        raise InvalidSpec("custom sample points are only supported for chart generators")
    if isinstance(gen, SphereMap):
        if shift == 0.0:
            u = gen.u
        else:
            as_curve = DiscreteCurve(gen.u, gen.spacing, True, monodromy=None if gen.rot is None
                                     else (gen.rot, np.zeros(3)))
            u = _curve_at(as_curve, gen.spacing * np.arange(gen.n) - shift, fn)
            u = u / np.linalg.norm(u, axis=1)[:, None]
        return SphereMap(u @ _rot_z(spec.killing.omega * t).T, gen.spacing, True, gen.rot)
    pts = gen.points if shift == 0.0 else _curve_at(gen, gen.s - shift, fn)
    rot, b = spec.killing.flow(t)
    moved = pts @ rot.T + b
    mono = gen.monodromy
    if mono is not None:
        # the screw motion of the moved curve is conjugated by phi_t
        r0, a0 = mono
        mono = (rot @ r0 @ rot.T, rot @ a0 + b - rot @ r0 @ rot.T @ b)
    return gen.replace(points=moved, monodromy=mono, param_kind=gen.param_kind)


def chart_boundary(spec: SolitonSpec):
    """Ghost-value callable t -> (left, right) for open chart generators.

    Uses ``generator_fn`` when present; a static shape (c = 0) may instead be
    extended by its interpolating spline.
    """
    gen = spec.generator
    if not isinstance(gen, ChartCurve) or gen.closed:
        raise InvalidSpec("only open chart generators need boundary values")
    h, L = gen.spacing, gen.length
    xl = np.array([-2 * h, -h])
    xr = np.array([L + h, L + 2 * h])
    if spec.generator_fn is not None:
        return lambda t: (evolve_soliton(spec, t, xl), evolve_soliton(spec, t, xr))
    if spec.c != 0:
        raise InvalidSpec("boundary values of a moving open generator need generator_fn")
    spl = _spline_points(gen.stacked(), h, False, None, None)
    ends = spl(xl), spl(xr)
    sig, om = spec.killing.sigma, spec.killing.omega
    return lambda t: (ends[0] + [sig * t, om * t], ends[1] + [sig * t, om * t])


def initial_state(spec: SolitonSpec, t0: float = 0.0) -> FlowState:
    boundary = None
    if isinstance(spec.generator, ChartCurve) and not spec.generator.closed:
        boundary = chart_boundary(spec)
    payload = spec.generator if t0 == 0.0 else evolve_soliton(spec, t0)
    return FlowState(t0, payload, spec.flow_kind, spec.surface, boundary)


def _payload_array(p) -> np.ndarray:
    if isinstance(p, DiscreteCurve):
        return p.points
    if isinstance(p, SphereMap):
        return p.u
    return p.stacked()


def flow_check(spec: SolitonSpec, t_end: float, dt: Optional[float] = None, save_every: int = 0,
               backend: Optional[str] = None) -> dict:
    """Evolve the generator numerically and compare with :func:`evolve_soliton`.

    Returns ``{"sup_error", "times", "errors", "dt", "nsteps"}``; the error is
    the largest sample difference over all saved frames.  For chart curves the
    difference is measured in the orthonormal frame scale (r, f(r) theta).
    """
    from .flows import stability_bound

    h = spec.generator.spacing
    dt = stability_bound(spec.flow_kind, h) if dt is None else float(dt)
    nsteps = max(1, int(round(t_end / dt)))
    dt = t_end / nsteps
    # the rounded step may exceed the bound by a hair; take one more step then
    if dt > stability_bound(spec.flow_kind, h):
        nsteps += 1
        dt = t_end / nsteps
    every = save_every or max(1, nsteps // 10)
    frames = simulate(initial_state(spec), StepControl(dt, t_end, save_every=every), backend)
    times, errs = [], []
    for fr in frames:
        exact = _payload_array(evolve_soliton(spec, fr.time))
        got = _payload_array(fr.payload)
        diff = got - exact
        if isinstance(spec.generator, ChartCurve):
            diff = np.stack([diff[:, 0], spec.surface.f(exact[:, 0]) * diff[:, 1]], axis=1)
        times.append(fr.time)
        errs.append(float(np.max(np.linalg.norm(diff, axis=1))))
    return {"sup_error": max(errs), "times": times, "errors": errs, "dt": dt, "nsteps": nsteps}


# --- residuals of the reduced equations ---------------------------------------

def _chart_residual_vector(surface, v: ChartCurve, killing: KillingFieldSpec, c: float, kind: str):
    if v.r_jump != 0 and not surface.is_cylinder:
        raise InvalidSpec("an axial jump is only allowed on the cylinder")
    surface.check_domain(v.r)
    d1, d2, d3 = v.derivatives((1, 2, 3)) if kind == KDV else (*v.derivatives((1, 2)), None)
    vel = chart_velocity(surface, v.r, d1, d2, d3, kind)
    _, kv = killing_vector(surface, killing, v.r, v.theta)
    return vel - kv + c * d1, d1, kv


def _tangent_frame(surface, r, d1):
    ux = to_frame(surface, r, d1)
    speed = np.hypot(ux[:, 0], ux[:, 1])
    if np.any(speed <= 1e-10):
        raise DegenerateSpeed("generator speed vanishes")
    t = ux / speed[:, None]
    return t, rot90(t), speed


def schrodinger_reduced_residual(v, killing: KillingFieldSpec, c: float,
                                 surface: Optional[SurfaceOfRevolution] = None) -> ResidualReport:
    """Pointwise J tau_1(v) - V(v) + c v_x, split along T and J T.

    ``v`` is a :class:`ChartCurve` (with ``surface``) or a :class:`SphereMap`
    (the unit sphere, rotations about z).  ``extras["normal_V"]`` is the
    largest normal component of V along v: a Schrodinger soliton needs it to
    vanish, and it is reported on its own because it is a property of the
    curve and the field rather than of c.
    """
    if isinstance(v, SphereMap):
        rot = np.eye(3) if v.rot is None else v.rot
        vel, _ = _ref.schrodinger_rhs(v.u, v.spacing, rot)
        fwd, bwd = _fd.rigid_map(rot, np.zeros(3))
        (d1,) = _fd.derivatives(v.u, v.spacing, True, fwd, bwd, (1,))
        kv = killing.omega * np.cross(EZ, v.u)
        res = vel - kv + c * d1
        speed = np.linalg.norm(d1, axis=1)
        if np.any(speed <= 1e-10):
            raise DegenerateSpeed("generator speed vanishes")
        t = d1 / speed[:, None]
        n = np.cross(v.u, t)
        comps = {"tangential": np.sum(res * t, axis=1), "normal": np.sum(res * n, axis=1)}
        normal_v = np.abs(np.sum(kv * n, axis=1))
        cell = v.spacing
    else:
        if surface is None:
            raise InvalidSpec("chart curves need the surface")
        res, d1, kv = _chart_residual_vector(surface, v, killing, c, SCHRODINGER)
        t, n, _ = _tangent_frame(surface, v.r, d1)
        rf = to_frame(surface, v.r, res)
        vf = to_frame(surface, v.r, kv)
        comps = {"tangential": np.sum(rf * t, axis=1), "normal": np.sum(rf * n, axis=1)}
        normal_v = np.abs(np.sum(vf * n, axis=1))
        cell = v.spacing
    return ResidualReport.build("schrodinger_soliton", comps, cell,
                                {"normal_V": float(np.max(normal_v))})


def kdv_reduced_residual(v, killing: KillingFieldSpec, c: float,
                         surface: Optional[SurfaceOfRevolution] = None) -> ResidualReport:
    """Residual of J tau_2(v) = V(v) - c v_x as three scalar equations.

    With R the residual vector: ``tangential`` is <R, v_x>, ``normal`` is
    <R, J v_x>, and ``speed`` checks v^2 = r'^2 + f^2 theta'^2 against the
    ambient speed of the embedded curve.  Written out, the first two read

        v v'' - v^4 k_g^2 + (G/2) v^4 + c v^2 = sigma r' + omega f^2 theta'
        3 v^2 v' k_g + v^3 k_g' = omega f r' - sigma f theta'.

    Sphere maps are accepted as well (``surface`` is then ignored).
    """
    if isinstance(v, SphereMap):
        rot = np.eye(3) if v.rot is None else v.rot
        vel, _ = _ref.kdv_projected_rhs(v.u, v.spacing, rot)
        fwd, bwd = _fd.rigid_map(rot, np.zeros(3))
        (d1,) = _fd.derivatives(v.u, v.spacing, True, fwd, bwd, (1,))
        res = vel - killing.omega * np.cross(EZ, v.u) + c * d1
        comps = {"tangential": np.sum(res * d1, axis=1),
                 "normal": np.sum(res * np.cross(v.u, d1), axis=1)}
        return ResidualReport.build("kdv_soliton", comps, v.spacing)
    if surface is None:
        raise InvalidSpec("chart curves need the surface")
    res, d1, _ = _chart_residual_vector(surface, v, killing, c, KDV)
    f, fr, gr = surface.f(v.r), surface.f_r(v.r), surface.g_r(v.r)
    rp, tp = d1[:, 0], d1[:, 1]
    tangential = res[:, 0] * rp + f**2 * res[:, 1] * tp
    normal = f * (rp * res[:, 1] - tp * res[:, 0])
    speed = rp**2 * (fr**2 + gr**2) + f**2 * tp**2 - (rp**2 + f**2 * tp**2)
    return ResidualReport.build("kdv_soliton", {"tangential": tangential, "normal": normal,
                                                "speed": speed}, v.spacing)


def kdv_reduced_intrinsic(v: ChartCurve, killing: KillingFieldSpec, c: float,
                          surface: SurfaceOfRevolution) -> ResidualReport:
    """The same two equations evaluated from speed and geodesic curvature.

    Independent of :func:`kdv_reduced_residual` (no Christoffel expansion of
    the third covariant derivative); agrees with it to discretization error.
    Open curves lose two samples at each end.
    """
    from .surface import geodesic_curvature, gauss_curvature, speed as chart_speed

    sp = chart_speed(surface, v)
    kg = geodesic_curvature(surface, v)
    fwd, bwd = _fd.shift_map(0.0) if v.closed else (None, None)
    dv1, dv2 = _fd.derivatives(sp, v.spacing, v.closed, fwd, bwd, (1, 2))
    (dk1,) = _fd.derivatives(kg, v.spacing, v.closed, fwd, bwd, (1,))
    (d1,) = v.derivatives((1,))
    f = surface.f(v.r)
    g = gauss_curvature(surface, v.r)
    rp, tp = d1[:, 0], d1[:, 1]
    om, sg = killing.omega, killing.sigma
    tangential = sp * dv2 - sp**4 * kg**2 + 0.5 * g * sp**4 + c * sp**2 - sg * rp - om * f**2 * tp
    normal = 3 * sp**2 * dv1 * kg + sp**3 * dk1 - om * f * rp + sg * f * tp
    if not v.closed:
        # differences of differenced quantities: the one-sided end values are not second order
        tangential, normal = tangential[2:-2], normal[2:-2]
    return ResidualReport.build("kdv_soliton_intrinsic", {"tangential": tangential, "normal": normal},
                                v.spacing)


def lie_soliton_residual(gamma0: DiscreteCurve, V: AmbientKilling, c: float) -> ResidualReport:
    """Pointwise gamma' x gamma'' - V(gamma) + c gamma' of an arclength curve.

    The per-sample size is the Euclidean norm, so the report is invariant
    under rigid motions; ``extras["vector"]`` keeps the residual itself.
    """
    if gamma0.param_kind != ARCLENGTH:
        raise NotArclength("lie_soliton_residual needs an arclength-parametrized curve")
    d1, d2 = gamma0.derivatives((1, 2))
    res = np.cross(d1, d2) - V(gamma0.points) + c * d1
    return ResidualReport.build("lie_soliton", {"ambient": np.linalg.norm(res, axis=1)}, gamma0.spacing,
                                {"vector": res})


# --- magnetic geodesics on surfaces -------------------------------------------

def magnetic_geodesic_integrate(surface: SurfaceOfRevolution, mfield: MagneticFieldSpec, start,
                                velocity, length: float, n: int, substeps: int = 8) -> ChartCurve:
    """Integrate nabla_s gamma' = k J gamma' by RK4 (``substeps`` per output sample).

    ``velocity`` holds orthonormal-frame components (along e_r and e_theta/f)
    and must be a unit vector.  Alongside the curve the magnetic flux
    P(s) = int k f r' ds is integrated; ``meta`` carries it together with the
    coordinate velocity per sample.
    """
    if n < 4 or not length > 0:
        raise InvalidParams("need n >= 4 samples and a positive length")
    vel = np.asarray(velocity, float)
    if abs(np.hypot(*vel) - 1.0) > 1e-12:
        raise InvalidParams("initial velocity must be a unit vector")
    r0, th0 = (float(x) for x in start)
    surface.check_domain(r0)
    f0 = float(surface.f(r0))
    y = np.array([r0, th0, vel[0], vel[1] / f0, 0.0])

    def rhs(y):
        r, th, rp, tp = y[0], y[1], y[2], y[3]
        if not surface.r_domain[0] < r < surface.r_domain[1]:
            raise OutOfDomain(f"trajectory left r_domain {surface.r_domain} (r = {r:g})")
        f, fr = float(surface.f(r)), float(surface.f_r(r))
        k = float(mfield.k_fn(r, th))
        return np.array([rp, tp, f * fr * tp**2 - k * f * tp,
                         -2.0 * (fr / f) * rp * tp + k * rp / f, k * f * rp])

    h = length / (n - 1)
    dh = h / substeps
    out = np.empty((n, 5))
    out[0] = y
    for i in range(1, n):
        for _ in range(substeps):
            k1 = rhs(y)
            k2 = rhs(y + 0.5 * dh * k1)
            k3 = rhs(y + 0.5 * dh * k2)
            k4 = rhs(y + dh * k3)
            y = y + (dh / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i] = y
    surface.check_domain(out[:, 0])
    meta = {"velocity": out[:, 2:4].copy(), "flux": out[:, 4].copy()}
    return ChartCurve(out[:, 0], out[:, 1], h, False, meta=meta)


def _unit_velocity(surface, curve: ChartCurve) -> np.ndarray:
    if "velocity" in curve.meta:
        return np.asarray(curve.meta["velocity"], float)
    (d1,) = curve.derivatives((1,))
    sp = np.hypot(d1[:, 0], surface.f(curve.r) * d1[:, 1])
    return d1 / sp[:, None]


def quasislope(surface: SurfaceOfRevolution, killing: KillingFieldSpec, curve: ChartCurve,
               corrected: bool = True) -> np.ndarray:
    """<V, T> along a surface magnetic geodesic, minus omega times the flux.

    For a Lorentz force k J T one has d/ds <V, T> = k <V, J T> = omega k f r',
    so <V, T> - omega P is the conserved combination (P from
    :func:`magnetic_geodesic_integrate`).  ``corrected=False`` returns the
    bare <V, T>, conserved only when the field vanishes.
    """
    vel = _unit_velocity(surface, curve)
    f = surface.f(curve.r)
    q = killing.sigma * vel[:, 0] + killing.omega * f**2 * vel[:, 1]
    if not corrected:
        return q
    if "flux" not in curve.meta:
        raise InvalidSpec("curve carries no magnetic flux; integrate it with magnetic_geodesic_integrate")
    return q - killing.omega * np.asarray(curve.meta["flux"], float)


def kg_speed_drift(surface, curve: ChartCurve) -> float:
    """Largest deviation of |gamma'| from 1 along an integrated magnetic geodesic."""
    vel = _unit_velocity(surface, curve)
    return float(np.max(np.abs(np.hypot(vel[:, 0], surface.f(curve.r) * vel[:, 1]) - 1.0)))


def schrodinger_parallel_field(surface: SurfaceOfRevolution, r0: float, omega: float):
    """(c, MagneticFieldSpec) for the parallel soliton through r0 with V = omega d/dtheta.

    Along the unit-speed parallel V = q T with q = omega f(r0); the soliton
    condition k_g = c - q fixes c, and k(r) = c - omega f(r) is the field
    whose magnetic geodesic through r0 along e_theta is that parallel.
    """
    f0, fr0 = float(surface.f(r0)), float(surface.f_r(r0))
    c = fr0 / f0 + omega * f0
    return c, MagneticFieldSpec(lambda r, th: c - omega * surface.f(np.asarray(r, float)))


# --- Killing magnetic geodesics in R^3 ---------------------------------------

def _frame_at(V: AmbientKilling, x, t):
    t = t / np.linalg.norm(t)
    acc = np.cross(V(x), t)
    nrm = np.linalg.norm(acc)
    if nrm < 1e-12:
        raise DegenerateProfile("curvature vanishes at the period end")
    n = acc / nrm
    return np.stack([t, n, np.cross(t, n)], axis=1)


def _kmg_fields(V: AmbientKilling):
    a, p = np.asarray(V.axis), np.asarray(V.point)
    w = V.omega * a
    shift = np.asarray(V.translation) - np.cross(w, p)

    def rhs(s, y):
        # V(x) = w x x + shift, expanded by hand: np.cross dominates the cost otherwise
        x1, x2, x3, v1, v2, v3 = y
        b1 = w[1] * x3 - w[2] * x2 + shift[0]
        b2 = w[2] * x1 - w[0] * x3 + shift[1]
        b3 = w[0] * x2 - w[1] * x1 + shift[2]
        return np.array([v1, v2, v3, b2 * v3 - b3 * v2, b3 * v1 - b1 * v3, b1 * v2 - b2 * v1])

    def radial(s, y):
        d = y[:3] - p
        d = d - np.dot(d, a) * a
        v = y[3:] - np.dot(y[3:], a) * a
        return float(np.dot(d, v))

    return rhs, radial


def kmg_integrate(V: AmbientKilling, x0, t0, length: Optional[float] = None, rtol: float = 1e-12,
                  max_length: float = 500.0):
    """Solve gamma'' = V(gamma) x gamma' by DOP853.

    Without ``length`` the integration stops at the screw period: the second
    return of the distance to the axis of V to its initial value.  Returns
    ``(dense solution, length, quasislope)``.
    """
    x0 = np.asarray(x0, float)
    t0 = np.asarray(t0, float)
    t0 = t0 / np.linalg.norm(t0)
    rhs, radial = _kmg_fields(V)
    y0 = np.concatenate([x0, t0])
    if length is None:
        if V.omega == 0:
            raise InvalidSpec("a screw period needs a rotating Killing field")
        if abs(radial(0.0, y0)) > 1e-9:
            raise InvalidSpec("start the period search at a turning point of the axis distance")
        sol = integrate.solve_ivp(rhs, (0.0, max_length), y0, method="DOP853", rtol=rtol,
                                  atol=rtol * 1e-2, dense_output=True, events=radial)
        ev = [s for s in sol.t_events[0] if s > 1e-9]
        if len(ev) < 2:
            raise InvalidSpec("no screw period found within max_length")
        length = float(ev[1])
    sol = integrate.solve_ivp(rhs, (0.0, length), y0, method="DOP853", rtol=rtol,
                              atol=rtol * 1e-2, dense_output=True)
    return sol.sol, float(length), float(np.dot(V(x0), t0))


_GL_C = np.array([0.5 - np.sqrt(15) / 10, 0.5, 0.5 + np.sqrt(15) / 10])
_GL_A = np.array([[5 / 36, 2 / 9 - np.sqrt(15) / 15, 5 / 36 - np.sqrt(15) / 30],
                  [5 / 36 + np.sqrt(15) / 24, 2 / 9, 5 / 36 - np.sqrt(15) / 24],
                  [5 / 36 + np.sqrt(15) / 30, 2 / 9 + np.sqrt(15) / 15, 5 / 36]])
_GL_B = np.array([5 / 18, 4 / 9, 5 / 18])


def _gl6_samples(rhs, y0, length: float, n: int, sub: int) -> np.ndarray:
    """States at s = i length / n (i = 0..n) by fixed-step 3-stage Gauss-Legendre.

    The order-6 implicit scheme keeps |gamma'| = 1 exactly (quadratic
    invariant) and its error is smooth along the curve, unlike the
    interpolation error of an adaptive dense output.
    """
    dh = length / (n * sub)
    y = np.asarray(y0, float).copy()
    out = np.empty((n + 1, y.size))
    out[0] = y
    k = np.tile(rhs(0.0, y), (3, 1))
    for i in range(n):
        for _ in range(sub):
            for _ in range(60):
                stages = y + dh * (_GL_A @ k)
                new = np.array([rhs(0.0, st) for st in stages])
                done = np.max(np.abs(new - k)) <= 1e-15 * max(1.0, np.max(np.abs(k)))
                k = new
                if done:
                    break
            y = y + dh * (_GL_B @ k)
        out[i + 1] = y
    return out


def kmg_soliton(V: AmbientKilling, x0, t0, n: int, tol: float = 1e-3) -> SolitonSpec:
    """LIE soliton from a Killing magnetic geodesic, one screw period sampled at n points.

    gamma'' = V x gamma' with <V, gamma'> = c is equivalent to
    gamma' x gamma'' = V(gamma) - c gamma', so the curve moves rigidly by
    phi_t while sliding along itself at speed c.
    """
    dense, period, c = kmg_integrate(V, x0, t0)
    rhs, radial = _kmg_fields(V)
    y0 = dense(0.0)
    sub = max(1, int(np.ceil(period / n / 4e-3)))
    # refine the period with the sampling integrator itself (secant on the
    # radial velocity) so the screw closure holds to round-off
    p0, p1 = period, period * (1 + 1e-9)
    g0 = radial(0.0, _gl6_samples(rhs, y0, p0, n, sub)[-1])
    for _ in range(8):
        path = _gl6_samples(rhs, y0, p1, n, sub)
        g1 = radial(0.0, path[-1])
        if g1 == g0 or abs(g1) < 1e-16:
            break
        p0, p1, g0 = p1, p1 - g1 * (p1 - p0) / (g1 - g0), g1
    period = p1
    path = _gl6_samples(rhs, y0, period, n, sub)
    y1 = path[-1]
    f0, f1 = _frame_at(V, y0[:3], y0[3:]), _frame_at(V, y1[:3], y1[3:])
    rot = f1 @ f0.T
    trans = y1[:3] - rot @ y0[:3]
    h = period / n

    def generator_fn(x):
        x = np.asarray(x, float)
        q = np.floor(x / period).astype(int)
        base = dense(x - q * period)[:3].T
        out = np.empty_like(base)
        for qq in np.unique(q):
            r, b = _screw_power(rot, trans, int(qq))
            sel = q == qq
            out[sel] = base[sel] @ r.T + b
        return out

    curve = DiscreteCurve(path[:-1, :3], h, True, ARCLENGTH, (rot, trans),
                          meta={"period": period, "quasislope": c})
    rep = lie_soliton_residual(curve, V, c)
    return SolitonSpec(curve, V, c, FlowKind.lie(), None, generator_fn, rep.sup_residual < tol,
                       rep.sup_residual, {"family": "magnetic", "period": period})


# --- explicit KdV families ------------------------------------------------------

def cylinder_kdv_soliton(r: float, k: float, sigma: float = 0.0, C1: float = 0.0, C2: float = 0.0,
                         C3: float = 0.0, n: int = 512, x_range=None, tol: float = 1e-6) -> SolitonSpec:
    """Rolled polynomial curve (r cos kx, r sin kx, h(x)), h = sigma x^3/6 + C3 x^2 + C2 x + C1.

    On the flat cylinder nabla^2 u_x = (h''', 0) = (sigma, 0) in (height,
    angle) coordinates, so the curve translates along the axis at rate sigma
    and does not rotate (omega = 0, c = 0).  When h is linear the generator is
    closed (one turn, helix); otherwise it is sampled at x = lo + i (hi - lo) / n
    for ``x_range = (lo, hi)`` and evolved with exact ghost values.  The
    default (-4, 4) makes the spacing a power of two for power-of-two n, so
    the polynomial samples and their differences are exact in floating point.
    """
    if not r > 0:
        raise InvalidParams("cylinder radius must be positive")
    if k == 0:
        raise InvalidParams("winding k must be non-zero")
    surf = cylinder(r)
    coeffs = (sigma / 6.0, C3, C2, C1)

    def height(x):
        return np.polyval(coeffs, x)

    def generator_fn(x):
        x = np.asarray(x, float)
        return height(x), k * x

    killing = KillingFieldSpec(0.0, sigma)
    closed = sigma == 0 and C3 == 0
    if closed:
        span = 2 * np.pi / abs(k)
        h = span / n
        x = h * np.arange(n)
        gen = ChartCurve(height(x), k * x, h, True, 2 * np.pi * np.sign(k), C2 * span)
    else:
        lo, hi = (-4.0, 4.0) if x_range is None else (float(x_range[0]), float(x_range[1]))
        h = (hi - lo) / n
        x = lo + h * np.arange(n)
        gen = ChartCurve(height(x), k * x, h, False, meta={"x0": lo})
        # generator_fn takes the grid coordinate x - x0
        base_fn = generator_fn

        def generator_fn(xg):  # noqa: F811
            return base_fn(np.asarray(xg, float) + lo)

    rep = kdv_reduced_residual(gen, killing, 0.0, surf)
    return SolitonSpec(gen, killing, 0.0, FlowKind.kdv(), surf, generator_fn, rep.sup_residual < tol,
                       rep.sup_residual, {"family": "cylinder", "r": r, "k": k, "sigma": sigma,
                                          "C1": C1, "C2": C2, "C3": C3})


def parallel_equation(surface: SurfaceOfRevolution, r, c: float, omega: float, m: float = 1.0):
    """m^3 (f_r^2 + f f_rr / 2) - c m + omega, zero exactly on KdV-soliton parallels theta = m x."""
    r = np.asarray(r, float)
    return m**3 * (surface.f_r(r) ** 2 + 0.5 * surface.f(r) * surface.f_rr(r)) - c * m + omega


def parallel_soliton_roots(surface: SurfaceOfRevolution, c: float, omega: float, m: float = 1.0,
                           scan: int = 256) -> list:
    """All roots of :func:`parallel_equation` bracketed on a 256-point scan."""
    lo, hi = surface.r_domain
    lo = lo if np.isfinite(lo) else -10.0
    hi = hi if np.isfinite(hi) else 10.0
    grid = np.linspace(lo, hi, scan + 2)[1:-1]
    vals = parallel_equation(surface, grid, c, omega, m)
    if np.max(np.abs(vals)) < 1e-14:
        raise InvalidParams("every parallel solves the equation for these constants")
    roots = []
    for i in range(scan - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0:
            roots.append(float(optimize.brentq(lambda x: float(parallel_equation(surface, x, c, omega, m)),
                                               grid[i], grid[i + 1], xtol=1e-12, rtol=4 * np.finfo(float).eps)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))
    return roots


def parallel_generator(surface: SurfaceOfRevolution, r0: float, m: float = 1.0, n: int = 256) -> ChartCurve:
    """Parallel r = r0, theta = m x closed after one turn."""
    span = 2 * np.pi / abs(m)
    h = span / n
    return ChartCurve(np.full(n, float(r0)), m * h * np.arange(n), h, True, 2 * np.pi * np.sign(m))


def parallel_soliton_find(surface: SurfaceOfRevolution, c: float, omega: float, C: Optional[float] = None,
                          m: float = 1.0, index: int = 0, tol: float = 1e-8) -> float:
    """Radius r0 of a parallel that is a KdV soliton with V = omega d/dtheta.

    Along theta = m x the quantity v^3 k_g = m^3 f^2 f_r is fixed by r0; when
    ``C`` is given, roots where it differs from C by more than 1e-8 are
    discarded.  Every returned root is checked against
    :func:`kdv_reduced_residual`.
    """
    roots = parallel_soliton_roots(surface, c, omega, m)
    if C is not None:
        roots = [r for r in roots if abs(m**3 * surface.f(r) ** 2 * surface.f_r(r) - C) <= 1e-8]
    if not roots:
        raise NoRoot("no parallel solves the soliton equation on r_domain")
    if not -len(roots) <= index < len(roots):
        raise NoRoot(f"only {len(roots)} root(s) found")
    r0 = roots[index]
    rep = kdv_reduced_residual(parallel_generator(surface, r0, m), KillingFieldSpec(omega), c, surface)
    if rep.sup_residual >= tol:
        raise NoRoot(f"root {r0:.12g} fails the residual check ({rep.sup_residual:.3g})")
    return r0


def parallel_kdv_soliton(surface: SurfaceOfRevolution, c: float, omega: float, m: float = 1.0,
                         n: int = 256, index: int = 0) -> SolitonSpec:
    r0 = parallel_soliton_find(surface, c, omega, m=m, index=index)
    gen = parallel_generator(surface, r0, m, n)
    killing = KillingFieldSpec(omega)
    rep = kdv_reduced_residual(gen, killing, c, surface)

    def generator_fn(x):
        x = np.asarray(x, float)
        return np.full_like(x, r0), m * x

    return SolitonSpec(gen, killing, c, FlowKind.kdv(), surface, generator_fn, True, rep.sup_residual,
                       {"family": "parallel", "r0": r0, "m": m})


def great_circle_kdv_soliton(n: int = 256, tol: float = 1e-3) -> SolitonSpec:
    """The equator traveling at speed 1/2: c = -1/2 with psi_t(x) = x - c t."""
    h = 2 * np.pi / n
    x = h * np.arange(n)
    gen = SphereMap(np.stack([np.cos(x), np.sin(x), np.zeros(n)], axis=1), h)

    def generator_fn(xx):
        xx = np.asarray(xx, float)
        return np.stack([np.cos(xx), np.sin(xx), np.zeros_like(xx)], axis=1)

    killing = KillingFieldSpec(0.0)
    rep = kdv_reduced_residual(gen, killing, -0.5)
    return SolitonSpec(gen, killing, -0.5, FlowKind.kdv(), None, generator_fn, rep.sup_residual < tol,
                       rep.sup_residual, {"family": "greatcircle"})


# --- elastic curves --------------------------------------------------------------

@dataclass(frozen=True)
class ElasticParams:
    """Constants of the elliptic curvature profile k^2 = k0^2 (1 - (p/w)^2 sn^2(k0 s / 2w, p))."""

    k0: float
    p: float
    w: float
    lam: float
    c: float

    def __post_init__(self):
        if not self.k0 > 0:
            raise InvalidParams("k0 must be positive")
        if not (0.0 <= self.p <= self.w <= 1.0) or self.w == 0:
            raise InvalidParams("need 0 <= p <= w <= 1 and w > 0")
        r1, r2 = self.relation_defects()
        if r1 > 1e-10 or r2 > 1e-10:
            raise InvalidParams(f"parameter relations violated ({r1:.3g}, {r2:.3g})")

    @staticmethod
    def from_kpw(k0: float, p: float, w: float) -> "ElasticParams":
        """Derive lambda and the non-negative c from (k0, p, w)."""
        if not w > 0:
            raise InvalidParams("w must be positive")
        lam = k0**2 * (3 * w**2 - p**2 - 1) / (2 * w**2)
        c2 = k0**6 * (1 - w**2) * (w**2 - p**2) / (4 * w**4)
        if c2 < -1e-15:
            raise InvalidParams("need p <= w <= 1")
        return ElasticParams(float(k0), float(p), float(w), float(lam), float(np.sqrt(max(c2, 0.0))))

    def relation_defects(self):
        k0, p, w = self.k0, self.p, self.w
        r1 = abs(2 * self.lam * w**2 - k0**2 * (3 * w**2 - p**2 - 1))
        r2 = abs(4 * self.c**2 * w**4 - k0**6 * (1 - w**2) * (w**2 - p**2))
        return r1, r2

    def period(self) -> float:
        """Period of k in s: 4 w K(p) / k0 (sn^2 has period 2K)."""
        if self.p >= 1.0:
            return np.inf
        return 4 * self.w * ellipk(self.p) / self.k0

    def to_dict(self) -> dict:
        return {"k0": self.k0, "p": self.p, "w": self.w, "lambda": self.lam, "c": self.c}


def _elastic_sq(params: ElasticParams, s):
    """k^2, its first two s-derivatives (analytic)."""
    k0, p, w = params.k0, params.p, params.w
    q = (p / w) ** 2
    dz = k0 / (2 * w)
    sn, cn, dn = ellipj(dz * np.asarray(s, float), p)
    f = k0**2 * (cn**2 + (1.0 - q) * sn**2)
    f1 = -2 * k0**2 * q * dz * sn * cn * dn
    f2 = -2 * k0**2 * q * dz**2 * (cn**2 * dn**2 - sn**2 * dn**2 - p**2 * sn**2 * cn**2)
    return f, f1, f2


def elastic_profile(params: ElasticParams, length: Optional[float] = None, n: int = 1024) -> IntrinsicProfile:
    """Sample k and tau = c / k^2 on n points.

    Without ``length`` one full period is sampled and the profile is closed.
    Samples where k vanishes (possible only for p = w, where c = 0) are masked
    and get tau = 0.
    """
    if n < 4:
        raise InvalidParams("need at least 4 samples")
    closed = length is None
    if closed:
        length = params.period()
        if not np.isfinite(length):
            raise InvalidParams("p = 1 has no finite period; pass a length")
        h = length / n
    else:
        if not length > 0:
            raise InvalidParams("length must be positive")
        h = length / (n - 1)
    s = h * np.arange(n)
    f, _, _ = _elastic_sq(params, s)
    f = np.clip(f, 0.0, None)
    k = np.sqrt(f)
    mask = k <= 1e-10 * params.k0
    if np.any(mask) and params.c != 0:
        raise InvalidParams("curvature vanishes although c != 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        tau = np.where(mask, 0.0, params.c / np.where(mask, 1.0, f))
    return IntrinsicProfile(k, tau, h, closed, mask)


def elastic_residual_analytic(params: ElasticParams, s) -> np.ndarray:
    """k^3 k'' + k^6/2 - (lambda/2) k^4 - c^2 using exact derivatives of k^2."""
    f, f1, f2 = _elastic_sq(params, s)
    return 0.5 * f * f2 - 0.25 * f1**2 + 0.5 * f**3 - 0.5 * params.lam * f**2 - params.c**2


def elastic_residual(profile: IntrinsicProfile, params: ElasticParams) -> ResidualReport:
    """Finite-difference residual of k^3 k'' + k^6/2 - (lambda/2) k^4 = c^2."""
    (k2,) = _fd.derivatives(profile.k, profile.spacing, profile.closed, orders=(2,))
    k = profile.k
    res = k**3 * k2 + 0.5 * k**6 - 0.5 * params.lam * k**4 - params.c**2
    if not profile.closed:
        res = res[1:-1]
    first = k**2 * profile.tau
    return ResidualReport.build("elastic", {"elastic": res}, profile.spacing,
                                {"first_integral_spread": float(np.ptp(first))})


def elastic_curve(params: ElasticParams, n: int = 1024, length: Optional[float] = None) -> DiscreteCurve:
    """Space curve with the elastic profile (Frenet-Serret reconstruction, open)."""
    from .curvegeo import reconstruct_from_intrinsics

    prof = elastic_profile(params, length, n)
    if prof.closed:
        prof = IntrinsicProfile(np.append(prof.k, prof.k[0]), np.append(prof.tau, prof.tau[0]),
                                prof.spacing, False)
    return reconstruct_from_intrinsics(prof)


def elastic_lie_soliton(params: ElasticParams, n: int = 1024, tol: float = 1e-3) -> SolitonSpec:
    """An elastic curve as a c = 0 LIE soliton: gamma' x gamma'' is a Killing field.

    The field is recovered by least squares from the reconstructed curve.
    """
    curve = elastic_curve(params, n)
    V, rms = fit_ambient_killing(curve, 0.0)
    rep = lie_soliton_residual(curve, V, 0.0)
    return SolitonSpec(curve, V, 0.0, FlowKind.lie(), None, None, rep.sup_residual < tol,
                       rep.sup_residual, {"family": "elastic", **params.to_dict(), "fit_rms": rms})


# --- intrinsic soliton systems ------------------------------------------------------

@dataclass(frozen=True)
class LIEKind:
    """k'' + k^3/2 - k tau^2 + A1 k = -c k tau,  2 k' tau + k tau' = c k'."""

    c: float
    A1: float


@dataclass(frozen=True)
class KdVKind:
    """3k''tau + 3k'tau' + k tau'' - k tau^3 + 3/2 k^3 tau + A1 k = -c k tau,
    k''' - 3k' tau^2 - 3k tau tau' + 3/2 k^2 k' = -c k'."""

    c: float
    A1: float


@dataclass(frozen=True)
class ElasticaKind:
    """k'' + k^3/2 - k tau^2 - (lam/2) k = 0,  2 k' tau + k tau' = 0."""

    lam: float


@dataclass(frozen=True)
class KMGKind:
    """k'' + k^3/2 - k tau^2 + A k = -omega k tau,  2 k' tau + k tau' = omega k'."""

    omega: float
    A: float


def _lie_system(k, tau, d, c, a1):
    k1, k2, t1 = d["k1"], d["k2"], d["t1"]
    e1 = k2 + 0.5 * k**3 - k * tau**2 + a1 * k + c * k * tau
    e2 = 2 * k1 * tau + k * t1 - c * k1
    return e1, e2


def intrinsic_soliton_residual(profile: IntrinsicProfile, kind) -> ResidualReport:
    """Both equations of the chosen intrinsic soliton system, centered differences.

    Elastica(lam) is evaluated as LIE(c = 0, A1 = -lam/2) and KMG(omega, A) as
    LIE(c = omega, A1 = A): the systems coincide term by term.
    """
    if profile.degenerate_mask is not None and np.any(profile.degenerate_mask):
        raise DegenerateProfile("profile has degenerate (k = 0) samples")
    k, tau = profile.k, profile.tau
    orders = (1, 2, 3)
    kd = _fd.derivatives(k, profile.spacing, profile.closed, orders=orders)
    td = _fd.derivatives(tau, profile.spacing, profile.closed, orders=orders)
    d = {"k1": kd[0], "k2": kd[1], "k3": kd[2], "t1": td[0], "t2": td[1]}
    if isinstance(kind, LIEKind):
        e1, e2 = _lie_system(k, tau, d, kind.c, kind.A1)
        eid = "lie"
    elif isinstance(kind, ElasticaKind):
        e1, e2 = _lie_system(k, tau, d, 0.0, -0.5 * kind.lam)
        eid = "elastica"
    elif isinstance(kind, KMGKind):
        e1, e2 = _lie_system(k, tau, d, kind.omega, kind.A)
        eid = "kmg"
    elif isinstance(kind, KdVKind):
        k1, k2, k3, t1, t2 = d["k1"], d["k2"], d["k3"], d["t1"], d["t2"]
        c = kind.c
        e1 = (3 * k2 * tau + 3 * k1 * t1 + k * t2 - k * tau**3 + 1.5 * k**3 * tau
              + kind.A1 * k + c * k * tau)
        e2 = k3 - 3 * k1 * tau**2 - 3 * k * tau * t1 + 1.5 * k**2 * k1 + c * k1
        eid = "kdv"
    else:
        raise InvalidParams(f"unknown soliton kind {kind!r}")
    if not profile.closed:
        trim = slice(2, -2) if eid == "kdv" else slice(1, -1)
        e1, e2 = e1[trim], e2[trim]
    return ResidualReport.build(eid, {"first": e1, "second": e2}, profile.spacing)


# --- generic verification -----------------------------------------------------------

def reduced_residual(spec: SolitonSpec) -> ResidualReport:
    """The reduced-equation residual for the flow and generator of a soliton spec."""
    g, name = spec.generator, spec.flow_kind.name
    if isinstance(g, DiscreteCurve):
        if name != LIE:
            raise InvalidSpec("space-curve solitons are checked against the lie flow")
        return lie_soliton_residual(g, spec.killing, spec.c)
    if name == KDV:
        return kdv_reduced_residual(g, spec.killing, spec.c, spec.surface)
    if name == SCHRODINGER:
        return schrodinger_reduced_residual(g, spec.killing, spec.c, spec.surface)
    raise InvalidSpec(f"no reduced equation for {name} on {type(g).__name__}")


def verify(spec: SolitonSpec, tol: float) -> SolitonSpec:
    rep = reduced_residual(spec)
    return replace(spec, verified=rep.sup_residual < tol, residual=rep.sup_residual)


__all__ = [
    "AmbientKilling", "SolitonSpec", "ElasticParams", "ResidualReport",
    "LIEKind", "KdVKind", "ElasticaKind", "KMGKind",
    "jacobi_sn", "elastic_profile", "elastic_residual", "elastic_residual_analytic", "elastic_curve",
    "elastic_lie_soliton", "evolve_soliton", "chart_boundary", "initial_state", "flow_check",
    "schrodinger_reduced_residual", "kdv_reduced_residual", "kdv_reduced_intrinsic",
    "lie_soliton_residual", "magnetic_geodesic_integrate", "quasislope", "kg_speed_drift",
    "schrodinger_parallel_field", "kmg_integrate", "kmg_soliton", "fit_ambient_killing",
    "cylinder_kdv_soliton", "parallel_equation", "parallel_soliton_roots", "parallel_soliton_find",
    "parallel_generator", "parallel_kdv_soliton", "great_circle_kdv_soliton",
    "intrinsic_soliton_residual", "reduced_residual", "verify",
]
