import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoflow import (ComplexProfile, FlowKind, FlowState, IntrinsicProfile, StepControl, TooFewFrames,
                     fit_gauge, frenet_analyze, hasimoto_transform, mkdv_residual, nls_residual, simulate,
                     stability_bound)
from geoflow.hasimoto import profile_from_sphere_map
from oracles import closed_helix, latitude, trefoil


def _plane_frames(k0, tau0, omega, n, h, dt, nframes=5, closed=False, gauge=lambda t: 0.0):
    s = h * np.arange(n)
    out = []
    for j in range(nframes):
        t = j * dt
        phi = k0 * np.exp(1j * (tau0 * s - omega * t + gauge(t)))
        out.append(ComplexProfile(phi, h, closed, tau0 * n * h if closed else 0.0, t))
    return out


def test_transform_of_constant_profile():
    prof = IntrinsicProfile(np.full(50, 0.5), np.full(50, 0.5), 0.1)
    phi = hasimoto_transform(prof, t=0.3)
    assert np.allclose(np.abs(phi.phi), 0.5)
    assert np.allclose(np.angle(phi.phi * np.exp(-0.05j * np.arange(50))), 0.0, atol=1e-14)
    assert phi.t == 0.3 and not phi.closed


def test_transform_base_index_and_holonomy():
    rng = np.random.default_rng(1)
    tau = rng.uniform(-1, 1, 40)
    prof = IntrinsicProfile(np.full(40, 0.2), tau, 0.05, closed=True)
    a = hasimoto_transform(prof)
    b = hasimoto_transform(prof, base_index=7)
    assert a.holonomy == pytest.approx(0.05 * tau.sum())
    assert abs(b.phi[7] - 0.2) < 1e-15
    # moving the base point multiplies by one constant phase
    ratio = b.phi / a.phi
    assert np.allclose(ratio, ratio[0])


@pytest.mark.parametrize("closed", [False, True])
def test_nls_plane_wave(closed):
    k0, tau0 = 0.7, 1.3
    omega = tau0**2 - 0.5 * k0**2
    errs = []
    for n, dt in ((200, 1e-2), (400, 5e-3)):
        h = 2 * np.pi / n
        frames = _plane_frames(k0, tau0, omega, n, h, dt, closed=closed)
        errs.append(nls_residual(frames, np.zeros(5)).sup_residual)
    assert errs[0] < 1e-2
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)


def test_constant_wave_gauge():
    k0 = 0.9
    n, h = 64, 0.1
    frames = _plane_frames(k0, 0.0, 0.0, n, h, 0.01)
    good = nls_residual(frames, np.full(5, -k0**2))
    assert good.sup_residual < 1e-14
    assert nls_residual(frames, np.zeros(5)).sup_residual == pytest.approx(0.5 * k0**3)
    fit = fit_gauge(frames)
    assert np.allclose(fit.a_of_t, -k0**2, atol=1e-14)


@given(st.floats(-2, 2), st.floats(0.1, 1), st.floats(-1, 1))
def test_fit_gauge_recovers_a(a0, k0, tau0):
    n, h, dt = 256, 2 * np.pi / 256, 1e-3
    omega = tau0**2 - 0.5 * k0**2 - 0.5 * a0
    fit = fit_gauge(_plane_frames(k0, tau0, omega, n, h, dt))
    # only the stencil errors of Phi_ss (h^2) and Phi_t (dt^2, one-sided at the ends) separate the fit from a0
    bound = 2 * (tau0**4 * h**2 / 12 + abs(omega) ** 3 * dt**2 / 3)
    assert np.max(np.abs(fit.a_of_t - a0)) < 1.01 * bound + 1e-12


@given(st.floats(-1, 1))
def test_gauge_covariance(c2):
    """A time-dependent phase e^{i theta(t)} shifts the gauge by 2 theta'."""
    k0, tau0 = 0.6, 0.4
    n, h, dt = 128, 2 * np.pi / 128, 1e-4
    omega = tau0**2 - 0.5 * k0**2
    base = fit_gauge(_plane_frames(k0, tau0, omega, n, h, dt))
    moved = fit_gauge(_plane_frames(k0, tau0, omega, n, h, dt, gauge=lambda t: c2 * t))
    assert np.allclose(moved.a_of_t - base.a_of_t, 2 * c2, atol=1e-7)
    assert moved.residual_norm == pytest.approx(base.residual_norm, abs=1e-9)


@pytest.mark.parametrize("closed", [False, True])
def test_mkdv_plane_wave(closed):
    k0, tau0 = 0.8, 1.1
    c = tau0**2 - 1.5 * k0**2
    errs = []
    for n, dt in ((200, 1e-2), (400, 5e-3)):
        h = 2 * np.pi / n
        frames = _plane_frames(k0, tau0, tau0 * c, n, h, dt, closed=closed)
        errs.append(mkdv_residual(frames).sup_residual)
    assert errs[0] < 1e-2
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)


def test_mkdv_gauge_term():
    k0, tau0, a = 0.5, 0.0, 0.3
    frames = _plane_frames(k0, tau0, -a, 64, 0.1, 0.01)
    assert mkdv_residual(frames).sup_residual == pytest.approx(a * k0, rel=1e-4)
    assert mkdv_residual(frames, gauge=np.full(5, a)).sup_residual < 1e-5


def test_frame_validation():
    frames = _plane_frames(0.5, 0.5, 0.0, 32, 0.1, 0.01)
    with pytest.raises(TooFewFrames):
        nls_residual(frames[:2], np.zeros(2))
    with pytest.raises(TooFewFrames):
        fit_gauge(frames[:1])
    with pytest.raises(ValueError):
        nls_residual(frames, np.zeros(5), times=[0, 0.01, 0.03, 0.04, 0.05])
    with pytest.raises(ValueError):
        nls_residual(frames, np.zeros(4))
    untimed = [ComplexProfile(f.phi, f.spacing) for f in frames]
    with pytest.raises(ValueError):
        nls_residual(untimed, np.zeros(5))
    nls_residual(untimed, np.zeros(5), times=[f.t for f in frames])
    with pytest.raises(ValueError):
        ComplexProfile(np.array([np.nan, 1.0]), 0.1)


def test_latitude_tangent_map_profile():
    z0 = 0.6
    h = 2 * np.pi / 256
    prof = profile_from_sphere_map(latitude(256, z0).u, h)
    rho = np.sqrt(1 - z0**2)
    assert np.allclose(prof.k, rho, rtol=h**2)
    # the latitude circle is the tangent map of a helix with tau / k = k_g = z0 / rho
    assert np.allclose(np.abs(prof.tau), z0, rtol=h**2)


def test_helix_transform_is_plane_wave():
    _, prof = frenet_analyze(closed_helix(256))
    phi = hasimoto_transform(prof)
    assert phi.holonomy == pytest.approx(np.pi * np.sqrt(2), rel=1e-4)
    assert np.allclose(np.abs(phi.phi), 0.5, rtol=1e-4)


def _lie_nls_sup(n):
    c = trefoil(n)
    h = c.spacing
    dt = 0.1 * h**2
    every = 4 * n // 64
    frames = simulate(FlowState(0.0, c, FlowKind.lie()), StepControl(dt, 8 * every * dt, save_every=every))
    phis = [hasimoto_transform(frenet_analyze(f.payload)[1], t=f.time) for f in frames]
    fit = fit_gauge(phis)
    return nls_residual(phis, fit.a_of_t).sup_residual


def test_lie_frames_satisfy_nls():
    # the trefoil is only asymptotic (second order) from about n = 256
    a, b = _lie_nls_sup(256), _lie_nls_sup(512)
    assert b < a
    assert a / b > 3.0
    assert stability_bound(FlowKind.lie(), 1.0) == 0.2
