import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoflow import (ARCLENGTH, BlowUp, DiscreteCurve, FlowKind, FlowState, SphereMap, StabilityError,
                     StepControl, advance, energy_e1, energy_e2, simulate, stability_bound, tangent_map)
from geoflow.errors import InvalidSpec
from geoflow.flows import step_axial_lie, step_kdv_map, step_lie, step_schrodinger_map
from oracles import circle, closed_helix, frozen, great_circle, latitude, trefoil, wobbly_sphere_map


def _run(payload, flow, t_end, dt=None, every=None, backend=None, surface=None):
    dt = dt or stability_bound(flow, payload.spacing)
    n = int(np.ceil(t_end / dt - 1e-9))
    dt = t_end / n
    return simulate(FlowState(0.0, payload, flow, surface), StepControl(dt, t_end, save_every=every or n),
                    backend)


def _hausdorff(a, b):
    d = np.linalg.norm(a[:, None, :] - b[None, :, :], axis=2)
    return max(d.min(axis=0).max(), d.min(axis=1).max())


# --- validation -------------------------------------------------------------------

def test_step_control_validation():
    with pytest.raises(ValueError):
        StepControl(0.0, 1.0)
    with pytest.raises(ValueError):
        StepControl(0.1, -1.0)
    with pytest.raises(ValueError):
        StepControl(0.1, 1.0, save_every=0)
    with pytest.raises(ValueError):
        StepControl(0.1, 1.0, projection="clip")


def test_unknown_flow():
    with pytest.raises(InvalidSpec):
        FlowKind("heat")


def test_stability_bound_enforced():
    c = circle(64)
    state = FlowState(0.0, c, FlowKind.lie())
    bound = stability_bound(FlowKind.lie(), c.spacing)
    assert bound == pytest.approx(0.2 * c.spacing**2)
    assert stability_bound(FlowKind.kdv(), 0.1) == pytest.approx(0.2e-3)
    assert stability_bound(FlowKind.axial(1.0, 0.0), 0.1) == pytest.approx(0.2e-2)
    assert stability_bound(FlowKind.axial(1.0, 0.5), 0.1) == pytest.approx(0.2e-3)
    with pytest.raises(StabilityError):
        advance(state, 1.1 * bound)


def test_payload_flow_mismatch():
    with pytest.raises(InvalidSpec):
        advance(FlowState(0.0, circle(32), FlowKind.kdv()), 1e-6)
    with pytest.raises(InvalidSpec):
        advance(FlowState(0.0, great_circle(32), FlowKind.lie()), 1e-6)
    with pytest.raises(InvalidSpec):
        step_lie(FlowState(0.0, circle(32), FlowKind.axial(1.0, 0.0)), 1e-6)
    s = np.arange(8) * 0.1
    open_curve = DiscreteCurve(np.stack([s, 0 * s, 0 * s], axis=1), 0.1, False, ARCLENGTH)
    with pytest.raises(InvalidSpec):
        advance(FlowState(0.0, open_curve, FlowKind.lie()), 1e-4)


def test_sphere_map_validation():
    with pytest.raises(InvalidSpec):
        SphereMap(great_circle(16).u, 0.1, closed=False)
    with pytest.raises(ValueError):
        SphereMap(np.zeros((3, 3)), 0.1)


def test_blowup():
    rng = np.random.default_rng(0)
    c = circle(64)
    noisy = c.replace(points=c.points + 1e-2 * rng.standard_normal(c.points.shape), param_kind="general")
    dt = stability_bound(FlowKind.lie(), c.spacing)
    with pytest.raises(BlowUp):
        # a rough curve with a too-coarse step parameter is driven to blow up
        advance(FlowState(0.0, noisy.replace(spacing=1e-3), FlowKind.lie()), 0.2e-6, 2000)
    assert dt > 0


# --- LIE ---------------------------------------------------------------------------

def test_lie_circle_translates():
    c = circle(128)
    frames = _run(c, FlowKind.lie(), 0.1)
    shift = frames[-1].payload.points - c.points
    assert np.max(np.abs(shift - [0, 0, 0.1])) < 1e-4
    assert frames[-1].time == pytest.approx(0.1)


def test_lie_large_circle_speed():
    big = circle(96, radius=10.0)
    t = 2.0
    frames = _run(big, FlowKind.lie(), t, dt=stability_bound(FlowKind.lie(), big.spacing))
    dz = frames[-1].payload.points[:, 2].mean()
    hp = 2 * np.pi / 96
    # central differences scale the binormal speed 1/R by these symbols
    discrete = 0.1 * np.sin(hp) / hp * (2 - 2 * np.cos(hp)) / hp**2
    assert dz / t == pytest.approx(discrete, rel=1e-10)
    assert dz / t == pytest.approx(0.1, rel=2e-3)


def test_lie_preserves_arclength():
    c = trefoil(256)
    frames = _run(c, FlowKind.lie(), 0.1, every=100)

    def dev(curve):
        (d1,) = curve.derivatives((1,))
        return np.max(np.abs(np.linalg.norm(d1, axis=1) - 1))

    growth = max(dev(f.payload) for f in frames) - dev(c)
    assert growth / 0.1 < 1e-5


def test_lie_kmg_soliton_profile_is_rigid():
    from geoflow.curvegeo import frenet_analyze
    from geoflow.soliton import AmbientKilling, kmg_soliton

    spec = kmg_soliton(AmbientKilling(1.0, translation=(0, 0, 0.5)), (0.8, 0, 0), (0, 0.5, -0.8), 128)
    frames = _run(spec.generator, FlowKind.lie(), 0.05)
    _, p0 = frenet_analyze(spec.generator)
    _, p1 = frenet_analyze(frames[-1].payload)
    # best co-moving shift over the periodic profile
    shifts = [np.max(np.abs(np.roll(p1.k, j) - p0.k)) for j in range(-8, 9)]
    assert min(shifts) < 5e-3


def test_step_functions():
    c = circle(32)
    dt = stability_bound(FlowKind.lie(), c.spacing)
    st1 = step_lie(FlowState(0.0, c, FlowKind.lie()), dt)
    st2 = step_axial_lie(FlowState(0.0, c, FlowKind.axial(1.0, 0.0)), dt)
    assert np.array_equal(st1.payload.points, st2.payload.points)
    u = great_circle(32)
    assert step_schrodinger_map(FlowState(0.0, u, FlowKind.schrodinger()), 1e-4).time == 1e-4
    assert step_kdv_map(FlowState(0.0, u, FlowKind.kdv()), 1e-6).time == 1e-6


# --- axial ---------------------------------------------------------------------------

@given(st.integers(0, 1000))
def test_axial_reduces_to_lie_bitwise(seed):
    rng = np.random.default_rng(seed)
    c = trefoil(64)
    c = c.replace(points=c.points + 1e-3 * rng.standard_normal(c.points.shape), param_kind="general")
    dt = stability_bound(FlowKind.lie(), c.spacing)
    a = advance(FlowState(0.0, c, FlowKind.lie()), dt, 5)
    b = advance(FlowState(0.0, c, FlowKind.axial(1.0, 0.0)), dt, 5)
    assert np.array_equal(a.payload.points, b.payload.points)


def test_axial_beta_circle_image_invariant():
    c = circle(64)
    frames = _run(c, FlowKind.axial(0.0, 1.0), 0.1)
    end = frames[-1].payload.points
    # samples slide along the circle, the image stays put
    assert np.max(np.abs(np.linalg.norm(end[:, :2], axis=1) - 1)) < 1e-5
    assert np.max(np.abs(end[:, 2])) < 1e-5
    gaps = np.diff(np.sort(np.arctan2(end[:, 1], end[:, 0])))
    assert np.max(gaps) < 2 * np.pi / 64 + 1e-5


def test_axial_beta_large_circle_drift():
    R = 10.0
    c = circle(64, radius=R)
    t = 1.0
    frames = _run(c, FlowKind.axial(0.0, 1.0), t)
    end = frames[-1].payload.points
    assert np.max(np.abs(np.linalg.norm(end, axis=1) - R)) < 1e-5
    assert np.max(np.abs(end[:, 2])) < 1e-5
    # parameter drift: gamma_t = 1/2 k^2 t moves each sample along the circle at 1/(2 R^2)
    ang = np.unwrap(np.arctan2(end[:, 1], end[:, 0]) - np.arctan2(c.points[:, 1], c.points[:, 0]))
    assert np.mean(ang) * R / t == pytest.approx(1 / (2 * R**2), rel=1e-2)


# --- Schrodinger map ----------------------------------------------------------------

def test_schrodinger_fixed_points():
    const = SphereMap(np.tile([0.0, 0.6, 0.8], (32, 1)), 0.2)
    frames = _run(const, FlowKind.schrodinger(), 0.01)
    assert np.max(np.abs(frames[-1].payload.u - const.u)) < 1e-15
    g = great_circle(128)
    frames = _run(g, FlowKind.schrodinger(), 0.05)
    assert np.max(np.abs(frames[-1].payload.u - g.u)) < 1e-12


def _latitude_rate(n, z0):
    h = 2 * np.pi / n
    # semi-discrete: D2 u = -(2 - 2 cos h)/h^2 u_horizontal, so u x D2 u rotates about z at -z0 * that
    return -z0 * (2 - 2 * np.cos(h)) / h**2


def test_schrodinger_latitude_rotates():
    z0 = 1 / np.sqrt(2)
    n = 128
    u = latitude(n, z0)
    t = 0.1
    frames = _run(u, FlowKind.schrodinger(), t)
    end = frames[-1].payload.u
    ang = np.mean(np.unwrap(np.arctan2(end[:, 1], end[:, 0]) - np.arctan2(u.u[:, 1], u.u[:, 0])))
    assert ang / t == pytest.approx(-z0, abs=1e-3)
    assert ang / t == pytest.approx(_latitude_rate(n, z0), rel=1e-8)


def test_rk4_time_order():
    z0 = 0.6
    n = 32
    u = latitude(n, z0)
    rate = _latitude_rate(n, z0)
    t = 2.0
    errs = []
    for dt in (0.19 * u.spacing**2, 0.095 * u.spacing**2):
        nsteps = int(round(t / dt))
        end = advance(FlowState(0.0, u, FlowKind.schrodinger()), t / nsteps, nsteps).payload.u
        c, s = np.cos(rate * t), np.sin(rate * t)
        exact = u.u @ np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]]).T
        errs.append(np.max(np.abs(end - exact)))
    assert errs[0] / errs[1] == pytest.approx(16, rel=0.15)


def test_sphere_constraint_every_frame():
    frames = _run(wobbly_sphere_map(128), FlowKind.schrodinger(), 0.05, every=50)
    assert max(f.payload.norm_defect() for f in frames) < 1e-10
    frames = _run(wobbly_sphere_map(128), FlowKind.kdv(), 0.01, every=200)
    assert max(f.payload.norm_defect() for f in frames) < 1e-10


# --- KdV map ----------------------------------------------------------------------------

def test_kdv_constant_map_fixed():
    const = SphereMap(np.tile([0.0, 0.0, 1.0], (32, 1)), 0.2)
    frames = _run(const, FlowKind.kdv(), 0.001)
    assert np.array_equal(frames[-1].payload.u, const.u)


def test_kdv_great_circle_travels_at_half_speed():
    g = great_circle(128)
    t = 0.05
    frames = _run(g, FlowKind.kdv(), t)
    end = frames[-1].payload.u
    ang = np.mean(np.unwrap(np.arctan2(end[:, 1], end[:, 0]) - np.arctan2(g.u[:, 1], g.u[:, 0])))
    assert ang / t == pytest.approx(0.5, abs=1e-3)


# --- energies -------------------------------------------------------------------------------

def test_energy_examples():
    n = 256
    g = great_circle(n)
    assert energy_e1(g) == pytest.approx(np.pi, rel=(2 * np.pi / n) ** 2)
    const = SphereMap(np.tile([1.0, 0.0, 0.0], (16, 1)), 0.1)
    assert energy_e1(const) == 0 and energy_e2(const) == 0
    u = tangent_map(closed_helix(n))
    e2 = energy_e2(SphereMap.from_curve(u))
    assert e2 == pytest.approx(frozen()["helix"]["e2_tangent"], rel=1e-3)
    with pytest.raises(InvalidSpec):
        energy_e1(circle(16))


def test_energy_of_chart_curve_matches_sphere_map():
    from geoflow import sphere
    from geoflow.surface import ChartCurve, embed

    n = 256
    h = 2 * np.pi / n
    x = h * np.arange(n)
    curve = ChartCurve(1.1 + 0.3 * np.sin(x), x, h, True, 2 * np.pi)
    smap = SphereMap(embed(sphere(), curve.r, curve.theta), h)
    assert energy_e1(curve, sphere()) == pytest.approx(energy_e1(smap), rel=1e-3)
    assert energy_e2(curve, sphere()) == pytest.approx(energy_e2(smap), rel=1e-3)
    with pytest.raises(InvalidSpec):
        energy_e1(curve)


def test_conservation_short():
    u = wobbly_sphere_map(128)
    frames = _run(u, FlowKind.schrodinger(), 0.1, dt=1e-5, every=1000)
    e1 = np.array([energy_e1(f) for f in frames])
    assert np.max(np.abs(e1 - e1[0])) / e1[0] < 1e-10
    frames = _run(u, FlowKind.kdv(), 0.01, every=500)
    e2 = np.array([energy_e2(f) for f in frames])
    assert np.max(np.abs(e2 - e2[0])) / abs(e2[0]) < 1e-10


# --- chart flows -----------------------------------------------------------------------------

def test_chart_flow_matches_sphere_map_flow():
    from geoflow import sphere
    from geoflow.surface import ChartCurve, embed

    n = 64
    h = 2 * np.pi / n
    x = h * np.arange(n)
    curve = ChartCurve(1.1 + 0.2 * np.sin(x), x, h, True, 2 * np.pi)
    smap = SphereMap(embed(sphere(), curve.r, curve.theta), h)
    t = 0.01
    a = _run(curve, FlowKind.schrodinger(), t, surface=sphere())[-1].payload
    b = _run(smap, FlowKind.schrodinger(), t)[-1].payload
    # both are O(h^2) discretizations of the same flow
    assert np.max(np.abs(embed(sphere(), a.r, a.theta) - b.u)) < 5e-3


def test_chart_flow_needs_surface_and_map_flow():
    from geoflow.surface import ChartCurve

    n = 16
    h = 2 * np.pi / n
    curve = ChartCurve(np.ones(n), h * np.arange(n), h, True, 2 * np.pi)
    with pytest.raises(InvalidSpec):
        advance(FlowState(0.0, curve, FlowKind.kdv()), 1e-6)


# --- backends -----------------------------------------------------------------------------------

def _backends():
    from geoflow._kernels import compiled_backend

    return ["python"] + (["cython"] if compiled_backend is not None else [])


@pytest.mark.parametrize("backend", _backends())
def test_backends_agree(backend):
    c = trefoil(64).replace(param_kind="general")
    u = wobbly_sphere_map(64)
    for payload, flow in ((c, FlowKind.lie()), (c, FlowKind.axial(0.7, 0.3)),
                          (u, FlowKind.schrodinger()), (u, FlowKind.kdv())):
        dt = stability_bound(flow, payload.spacing)
        ref = advance(FlowState(0.0, payload, flow), dt, 20, "python").payload
        got = advance(FlowState(0.0, payload, flow), dt, 20, backend).payload
        a = ref.points if hasattr(ref, "points") else ref.u
        b = got.points if hasattr(got, "points") else got.u
        assert np.max(np.abs(a - b)) < 1e-12


def test_screw_periodic_curve_flow():
    # the closed helix moves under the LIE by a rigid screw motion (a KMG with V = translation)
    c = closed_helix(128)
    frames = _run(c, FlowKind.lie(), 0.02)
    from geoflow.curvegeo import rigid_align

    _, _, rms = rigid_align(c.points, frames[-1].payload.points)
    assert rms < 1e-2
