"""Hasimoto transform and the NLS / mKdV residuals of filament motions.

Phi(s) = k(s) exp(i int_0^s tau) turns a curve moving by the LIE into a
solution of -i Phi_t = Phi_ss + 1/2 (|Phi|^2 + A(t)) Phi, and one moving by
the third-order axial flow into Phi_t = Phi_sss + 3/2 |Phi|^2 Phi_s.
For closed curves the phase need not close up: the samples satisfy
Phi_{j+n} = exp(i Theta) Phi_j with holonomy Theta = int_0^L tau, which is
what the periodic stencils here use.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _fd
from .curvegeo import IntrinsicProfile, sphere_map_intrinsics
from .errors import TooFewFrames
from .report import ResidualReport


@dataclass(frozen=True, eq=False)
class ComplexProfile:
    phi: np.ndarray
    spacing: float
    closed: bool = False
    holonomy: float = 0.0
    t: Optional[float] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        phi = np.array(self.phi, dtype=complex)
        if not np.all(np.isfinite(phi)):
            raise ValueError("phi must be finite")
        phi.setflags(write=False)
        object.__setattr__(self, "phi", phi)

    @property
    def n(self) -> int:
        return self.phi.size

    @property
    def s(self) -> np.ndarray:
        return self.spacing * np.arange(self.n)


@dataclass(frozen=True, eq=False)
class GaugeFit:
    a_of_t: np.ndarray
    residual_norm: float


def _cumulative_phase(tau: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(tau)
    out[1:] = np.cumsum(0.5 * h * (tau[1:] + tau[:-1]))
    return out


def hasimoto_transform(profile: IntrinsicProfile, base_index: int = 0, t: Optional[float] = None) -> ComplexProfile:
    """Phi = k exp(i int tau) with the phase measured from sample ``base_index``."""
    h = profile.spacing
    phase = _cumulative_phase(profile.tau, h)
    phase = phase - phase[base_index]
    holonomy = float(h * np.sum(profile.tau)) if profile.closed else 0.0
    phi = profile.k * np.exp(1j * phase)
    return ComplexProfile(phi, h, profile.closed, holonomy, t)


def profile_from_sphere_map(u: np.ndarray, h: float, rot=None) -> IntrinsicProfile:
    """Filament data (k, tau) = (|u_x|, |u_x| k_g) of a periodic tangent map."""
    v, kg = sphere_map_intrinsics(u, h, True, rot)
    return IntrinsicProfile(v, v * kg, h, True)


def _space_derivs(p: ComplexProfile):
    """Centered d/ds, d2/ds2, d3/ds3 and a mask of valid samples."""
    if p.closed:
        rot = np.exp(1j * p.holonomy)
        z = np.concatenate([p.phi[-2:] / rot, p.phi, p.phi[:2] * rot])
        n = p.n
        d1 = (z[3:n + 3] - z[1:n + 1]) / (2 * p.spacing)
        d2 = (z[3:n + 3] - 2 * z[2:n + 2] + z[1:n + 1]) / p.spacing**2
        d3 = (z[4:n + 4] - 2 * z[3:n + 3] + 2 * z[1:n + 1] - z[0:n]) / (2 * p.spacing**3)
        return d1, d2, d3, np.ones(n, bool)
    z = p.phi
    n = p.n
    d1 = np.zeros(n, complex)
    d2 = np.zeros(n, complex)
    d3 = np.zeros(n, complex)
    d1[1:-1] = (z[2:] - z[:-2]) / (2 * p.spacing)
    d2[1:-1] = (z[2:] - 2 * z[1:-1] + z[:-2]) / p.spacing**2
    d3[2:-2] = (z[4:] - 2 * z[3:-1] + 2 * z[1:-3] - z[:-4]) / (2 * p.spacing**3)
    mask = np.zeros(n, bool)
    mask[2:-2] = True
    return d1, d2, d3, mask


def _frame_times(frames: Sequence[ComplexProfile], times) -> np.ndarray:
    if len(frames) < 3:
        raise TooFewFrames("need at least 3 frames")
    if times is None:
        if any(f.t is None for f in frames):
            raise ValueError("frame times are required")
        times = [f.t for f in frames]
    times = np.asarray(times, float)
    dts = np.diff(times)
    if np.any(dts <= 0) or np.max(np.abs(dts - dts.mean())) > 1e-9 * abs(dts.mean()):
        raise ValueError("frames must be uniformly spaced in time")
    if len({f.n for f in frames}) != 1:
        raise ValueError("frames must share one grid")
    return times


def _time_derivative(frames, dt) -> np.ndarray:
    """Second-order d/dt of the frame stack (one-sided at the first and last frame)."""
    z = np.stack([f.phi for f in frames])
    (re,) = _fd.derivatives(z.real, dt, False, orders=(1,))
    (im,) = _fd.derivatives(z.imag, dt, False, orders=(1,))
    return re + 1j * im


def _nls_base(frames, times):
    """-i Phi_t - Phi_ss - 1/2 |Phi|^2 Phi for every frame, and the sample mask."""
    times = _frame_times(frames, times)
    dt = times[1] - times[0]
    phit = _time_derivative(frames, dt)
    out = []
    mask = None
    for j, f in enumerate(frames):
        _, d2, _, mask = _space_derivs(f)
        out.append(-1j * phit[j] - d2 - 0.5 * np.abs(f.phi) ** 2 * f.phi)
    return np.stack(out), mask, times


def fit_gauge(frames: Sequence[ComplexProfile], times=None) -> GaugeFit:
    """Per-frame least-squares A(t) for the NLS (closed form, the residual is affine in A)."""
    base, mask, times = _nls_base(frames, times)
    a = np.empty(len(frames))
    for j, f in enumerate(frames):
        phi = f.phi[mask]
        den = float(np.sum(np.abs(phi) ** 2))
        a[j] = 0.0 if den == 0 else 2.0 * float(np.real(np.vdot(phi, base[j][mask]))) / den
    rep = nls_residual(frames, a, times)
    return GaugeFit(a, rep.l2_residual)


def nls_residual(frames: Sequence[ComplexProfile], a_of_t, times=None) -> ResidualReport:
    """Residual of -i Phi_t = Phi_ss + 1/2 (|Phi|^2 + A) Phi on interior frames."""
    base, mask, times = _nls_base(frames, times)
    a = np.asarray(a_of_t, float)
    if a.shape != (len(frames),):
        raise ValueError("a_of_t needs one value per frame")
    phi = np.stack([f.phi for f in frames])
    res = (base - 0.5 * a[:, None] * phi)[1:-1][:, mask]
    cell = frames[0].spacing * (times[1] - times[0])
    return ResidualReport.build("nls", {"nls": res}, cell)


def mkdv_residual(frames: Sequence[ComplexProfile], times=None, gauge=None) -> ResidualReport:
    """Residual of Phi_t = Phi_sss + 3/2 |Phi|^2 Phi_s on interior frames.

    ``gauge`` optionally adds a phase rotation term i a(t) Phi to the right side.
    """
    times = _frame_times(frames, times)
    dt = times[1] - times[0]
    phit = _time_derivative(frames, dt)
    rows = []
    mask = None
    for j, f in enumerate(frames):
        d1, _, d3, mask = _space_derivs(f)
        r = phit[j] - d3 - 1.5 * np.abs(f.phi) ** 2 * d1
        if gauge is not None:
            r = r - 1j * gauge[j] * f.phi
        rows.append(r)
    res = np.stack(rows)[1:-1][:, mask]
    return ResidualReport.build("mkdv", {"mkdv": res}, frames[0].spacing * dt)
