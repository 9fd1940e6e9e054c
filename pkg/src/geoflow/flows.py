"""Method-of-lines integrators for the filament and map flows.

Four flows are supported:

* ``lie``: gamma_t = gamma' x gamma'' on closed space curves;
* ``axial``: gamma_t = alpha gamma' x gamma'' + beta (gamma''' + 3/2 gamma'' x (gamma' x gamma''));
* ``schrodinger``: u_t = J tau_1(u), on S^2 this is u x u_xx;
* ``kdv``: u_t = J tau_2(u) = nabla_x^2 u_x + (G/2) |u_x|^2 u_x.

Space is discretized with second-order centered differences on a uniform
periodic grid and time with classical RK4.  Sphere maps are renormalized
after every full step.  The stepping loops for curves and sphere maps live in
:mod:`geoflow._kernels`; chart curves on surfaces of revolution are stepped
here in NumPy.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np

from . import _fd
from ._kernels import backend as _default_backend
from ._kernels import get_backend
from .curvegeo import DiscreteCurve
from .errors import BlowUp, InvalidSpec, StabilityError
from .surface import ChartCurve, SurfaceOfRevolution, rot90, to_frame

log = logging.getLogger(__name__)

BLOWUP_D2 = 1e6
LIE, AXIAL, SCHRODINGER, KDV = "lie", "axial", "schrodinger", "kdv"
# RK4 step limits, in units of h**2 (second-order flows) and h**3 (third-order)
STABILITY = {LIE: (0.2, 2), SCHRODINGER: (0.2, 2), AXIAL: (0.2, 3), KDV: (0.2, 3)}


@dataclass(frozen=True)
class FlowKind:
    name: str
    alpha: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.name not in STABILITY:
            raise InvalidSpec(f"unknown flow {self.name!r}")

    @staticmethod
    def lie() -> "FlowKind":
        return FlowKind(LIE)

    @staticmethod
    def axial(alpha: float, beta: float) -> "FlowKind":
        return FlowKind(AXIAL, float(alpha), float(beta))

    @staticmethod
    def schrodinger() -> "FlowKind":
        return FlowKind(SCHRODINGER)

    @staticmethod
    def kdv() -> "FlowKind":
        return FlowKind(KDV)

    def order(self) -> int:
        if self.name == AXIAL and self.beta == 0.0:
            return 2
        return STABILITY[self.name][1]


@dataclass(frozen=True, eq=False)
class SphereMap:
    """Unit vectors u_i = u(x_i) on a periodic grid.

    ``rot`` allows twisted periodicity u_{i+n} = rot @ u_i, which is what the
    tangent map of a screw-periodic curve satisfies.
    """

    u: np.ndarray
    spacing: float
    closed: bool = True
    rot: Optional[np.ndarray] = None

    def __post_init__(self):
        u = np.array(self.u, dtype=float)
        if u.ndim != 2 or u.shape[1] != 3 or u.shape[0] < 4:
            raise ValueError("sphere map needs an (n >= 4, 3) array")
        if not self.closed:
            raise InvalidSpec("sphere maps are periodic")
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if self.rot is not None:
            object.__setattr__(self, "rot", np.asarray(self.rot, dtype=float))

    @property
    def n(self) -> int:
        return self.u.shape[0]

    def norm_defect(self) -> float:
        return float(np.max(np.abs(np.linalg.norm(self.u, axis=1) - 1.0)))

    @staticmethod
    def from_curve(curve: DiscreteCurve) -> "SphereMap":
        """Interpret the samples of a (tangent indicatrix) curve as a sphere map."""
        rot = None if curve.monodromy is None else curve.monodromy[0]
        u = curve.points / np.linalg.norm(curve.points, axis=1)[:, None]
        return SphereMap(u, curve.spacing, True, rot)


Payload = Union[DiscreteCurve, SphereMap, ChartCurve]
# boundary(t) -> (left, right): chart values at the two ghost samples on each side
Boundary = Callable[[float], tuple]


@dataclass(frozen=True, eq=False)
class FlowState:
    time: float
    payload: Payload
    flow: FlowKind
    surface: Optional[SurfaceOfRevolution] = None
    boundary: Optional[Boundary] = None

    def with_payload(self, payload, time) -> "FlowState":
        return replace(self, payload=payload, time=time)


@dataclass(frozen=True)
class StepControl:
    dt: float
    t_end: float
    projection: str = "normalize"
    save_every: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")
        if self.save_every < 1:
            raise ValueError("save_every must be a positive integer")
        if self.projection not in ("normalize", "none"):
            raise ValueError("projection must be 'normalize' or 'none'")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_end / self.dt))


def stability_bound(flow: FlowKind, h: float) -> float:
    coeff = STABILITY[flow.name][0]
    return coeff * h ** flow.order()


def check_dt(flow: FlowKind, h: float, dt: float) -> None:
    bound = stability_bound(flow, h)
    if dt > bound * (1.0 + 1e-9):
        raise StabilityError(f"dt = {dt:g} exceeds the {flow.name} bound {bound:g}")


def _spacing(payload) -> float:
    return float(payload.spacing)


# --- curves and sphere maps (compiled kernels) ------------------------------

def _advance_curve(curve: DiscreteCurve, flow: FlowKind, dt: float, nsteps: int, kern):
    if not curve.closed:
        raise InvalidSpec("curve flows need a closed (periodic) curve")
    alpha, beta = (1.0, 0.0) if flow.name == LIE else (flow.alpha, flow.beta)
    rot, trans = curve.monodromy if curve.monodromy is not None else (np.eye(3), np.zeros(3))
    pts, m = kern.curve_advance(curve.points, curve.spacing, dt, nsteps, alpha, beta, rot, trans)
    _check_blowup(pts, m)
    return curve.replace(points=pts)


def _advance_sphere(smap: SphereMap, flow: FlowKind, dt: float, nsteps: int, kern):
    rot = np.eye(3) if smap.rot is None else smap.rot
    u, m = kern.sphere_advance(smap.u, smap.spacing, dt, nsteps, flow.name, rot)
    _check_blowup(u, m)
    return SphereMap(u, smap.spacing, True, smap.rot)


def _check_blowup(arr, max_d2):
    if not np.all(np.isfinite(arr)) or not max_d2 <= BLOWUP_D2:
        raise BlowUp(f"second differences exceeded {BLOWUP_D2:g}")


# --- chart curves on surfaces of revolution ---------------------------------

def _pad_chart(y, curve: ChartCurve, boundary: Optional[Boundary], t: float):
    if curve.closed:
        fwd, bwd = _fd.shift_map(curve.jump())
        return _fd.pad_periodic(y, 2, fwd, bwd)
    if boundary is None:
        raise InvalidSpec("open chart curves need a boundary callable for ghost values")
    left, right = boundary(t)
    return np.concatenate([np.asarray(left, float), y, np.asarray(right, float)], axis=0)


def chart_velocity(surface: SurfaceOfRevolution, r, d1, d2, d3, kind: str) -> np.ndarray:
    """Coordinate components of J tau_1 (``schrodinger``) or J tau_2 (``kdv``).

    ``d1, d2, d3`` are the x-derivatives of (r, theta).  For the KdV flow
    this is nabla_x^2 u_x + (G/2) |u_x|^2 u_x with the covariant derivatives
    expanded through the Christoffel symbols of dr^2 + f^2 dtheta^2.
    """
    f, fr, frr = surface.f(r), surface.f_r(r), surface.f_rr(r)
    rp, tp = d1[:, 0], d1[:, 1]
    rpp, tpp = d2[:, 0], d2[:, 1]
    ar = rpp - f * fr * tp**2
    at = tpp + 2.0 * (fr / f) * rp * tp
    if kind == SCHRODINGER:
        return np.stack([-f * at, ar / f], axis=1)
    ar_x = d3[:, 0] - (fr**2 + f * frr) * rp * tp**2 - 2.0 * f * fr * tp * tpp
    at_x = d3[:, 1] + 2.0 * ((frr / f - fr**2 / f**2) * rp**2 * tp + (fr / f) * (rpp * tp + rp * tpp))
    br = ar_x - f * fr * tp * at
    bt = at_x + (fr / f) * (rp * at + tp * ar)
    half_gv2 = 0.5 * (-frr / f) * (rp**2 + f**2 * tp**2)
    return np.stack([br + half_gv2 * rp, bt + half_gv2 * tp], axis=1)


def chart_rhs(surface: SurfaceOfRevolution, y: np.ndarray, h: float, kind: str, padded: np.ndarray):
    """Flow velocity of the samples ``y``; ``padded`` adds two ghosts per side."""
    d1, d2, d3 = _fd.centered_from_padded(padded, h)
    surface.check_domain(y[:, 0])
    return chart_velocity(surface, y[:, 0], d1, d2, d3, kind), d2


def _advance_chart(state: FlowState, dt: float, nsteps: int):
    curve, surface = state.payload, state.surface
    if surface is None:
        raise InvalidSpec("chart payloads need a surface")
    if state.flow.name not in (SCHRODINGER, KDV):
        raise InvalidSpec(f"{state.flow.name} flow is not defined for chart curves")
    if curve.r_jump != 0 and not surface.is_cylinder:
        raise InvalidSpec("an axial jump is only allowed on the cylinder")
    h, kind = curve.spacing, state.flow.name
    y = curve.stacked().copy()
    t = state.time

    def rhs(yy, tt):
        out, d2 = chart_rhs(surface, yy, h, kind, _pad_chart(yy, curve, state.boundary, tt))
        return out, d2

    for _ in range(nsteps):
        k1, d2 = rhs(y, t)
        # metric-weighted size of the coordinate second derivative
        _check_blowup(y, float(np.max(np.hypot(d2[:, 0], surface.f(y[:, 0]) * d2[:, 1]))))
        k2, _ = rhs(y + 0.5 * dt * k1, t + 0.5 * dt)
        k3, _ = rhs(y + 0.5 * dt * k2, t + 0.5 * dt)
        k4, _ = rhs(y + dt * k3, t + dt)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += dt
    _check_blowup(y, 0.0)
    surface.check_domain(y[:, 0])
    return curve.replace(r=y[:, 0], theta=y[:, 1])


# --- public stepping API -----------------------------------------------------

def advance(state: FlowState, dt: float, nsteps: int = 1, backend: Optional[str] = None) -> FlowState:
    """Take ``nsteps`` RK4 steps of size ``dt``."""
    payload = state.payload
    check_dt(state.flow, _spacing(payload), dt)
    kern = _default_backend if backend is None else get_backend(backend)
    if nsteps == 0:
        return state
    if isinstance(payload, DiscreteCurve):
        if state.flow.name not in (LIE, AXIAL):
            raise InvalidSpec("space curves evolve under the lie or axial flow")
        new = _advance_curve(payload, state.flow, dt, nsteps, kern)
    elif isinstance(payload, SphereMap):
        if state.flow.name not in (SCHRODINGER, KDV):
            raise InvalidSpec("sphere maps evolve under the schrodinger or kdv flow")
        new = _advance_sphere(payload, state.flow, dt, nsteps, kern)
    elif isinstance(payload, ChartCurve):
        new = _advance_chart(state, dt, nsteps)
    else:
        raise InvalidSpec(f"unsupported payload {type(payload).__name__}")
    return state.with_payload(new, state.time + nsteps * dt)


def _require(state: FlowState, name: str):
    if state.flow.name != name:
        raise InvalidSpec(f"expected a {name} state, got {state.flow.name}")


def step_lie(state: FlowState, dt: float) -> FlowState:
    _require(state, LIE)
    return advance(state, dt)


def step_axial_lie(state: FlowState, dt: float) -> FlowState:
    _require(state, AXIAL)
    return advance(state, dt)


def step_schrodinger_map(state: FlowState, dt: float) -> FlowState:
    _require(state, SCHRODINGER)
    return advance(state, dt)


def step_kdv_map(state: FlowState, dt: float) -> FlowState:
    _require(state, KDV)
    return advance(state, dt)


def simulate(state: FlowState, control: StepControl, backend: Optional[str] = None):
    """Integrate to ``control.t_end``; returns the saved frames (initial included)."""
    check_dt(state.flow, _spacing(state.payload), control.dt)
    if control.projection == "none" and isinstance(state.payload, SphereMap):
        log.warning("sphere maps are always renormalized; projection='none' ignored")
    total = control.nsteps
    frames = [state]
    done = 0
    while done < total:
        k = min(control.save_every, total - done)
        state = advance(state, control.dt, k, backend)
        done += k
        frames.append(state)
    log.debug("simulated %d steps of %s, %d frames", total, state.flow.name, len(frames))
    return frames


# --- conserved quantities ----------------------------------------------------

def _quad(values: np.ndarray, h: float, closed: bool) -> float:
    if closed:
        return float(h * values.sum())
    return float(h * (values.sum() - 0.5 * (values[0] + values[-1])))


def _payload(obj):
    return obj.payload if isinstance(obj, FlowState) else obj


def energy_e1(state, surface: Optional[SurfaceOfRevolution] = None) -> float:
    """Dirichlet energy 1/2 int |u_x|^2 dx.

    Sphere maps use forward differences, for which the discrete energy is an
    exact invariant of the semi-discrete Schrodinger flow.
    """
    p = _payload(state)
    if isinstance(p, SphereMap):
        rot = np.eye(3) if p.rot is None else p.rot
        nxt = np.vstack([p.u[1:], p.u[:1] @ rot.T])
        return float(0.5 * np.sum((nxt - p.u) ** 2) / p.spacing)
    if isinstance(p, ChartCurve):
        surface = _surface(state, surface)
        (d1,) = p.derivatives((1,))
        v2 = d1[:, 0] ** 2 + (surface.f(p.r) * d1[:, 1]) ** 2
        return 0.5 * _quad(v2, p.spacing, p.closed)
    raise InvalidSpec("energies are defined for map payloads")


def energy_e2(state, surface: Optional[SurfaceOfRevolution] = None) -> float:
    """Pseudo-helicity 1/2 int <nabla_x u_x, J u_x> dx."""
    p = _payload(state)
    if isinstance(p, SphereMap):
        fwd, bwd = _fd.rigid_map(p.rot, np.zeros(3)) if p.rot is not None else (None, None)
        d1, d2 = _fd.derivatives(p.u, p.spacing, True, fwd, bwd, (1, 2))
        dens = np.einsum("ij,ij->i", np.cross(p.u, d1), d2)
        return 0.5 * _quad(dens, p.spacing, True)
    if isinstance(p, ChartCurve):
        surface = _surface(state, surface)
        (d1,) = p.derivatives((1,))
        f, fr = surface.f(p.r), surface.f_r(p.r)
        d2 = p.derivatives((2,))[0]
        acc = np.stack([d2[:, 0] - f * fr * d1[:, 1] ** 2,
                        d2[:, 1] + 2.0 * (fr / f) * d1[:, 0] * d1[:, 1]], axis=1)
        a, ux = to_frame(surface, p.r, acc), to_frame(surface, p.r, d1)
        return 0.5 * _quad(np.sum(a * rot90(ux), axis=1), p.spacing, p.closed)
    raise InvalidSpec("energies are defined for map payloads")


def _surface(state, surface):
    if surface is None and isinstance(state, FlowState):
        surface = state.surface
    if surface is None:
        raise InvalidSpec("chart energies need the surface")
    return surface


__all__ = [
    "FlowKind", "SphereMap", "FlowState", "StepControl", "advance", "simulate",
    "step_lie", "step_axial_lie", "step_schrodinger_map", "step_kdv_map",
    "energy_e1", "energy_e2", "stability_bound", "check_dt", "chart_rhs", "chart_velocity",
]
