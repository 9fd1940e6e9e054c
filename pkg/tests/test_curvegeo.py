import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoflow import (ARCLENGTH, GENERAL, AllDegenerate, BadFrame, DegenerateCurve, DiscreteCurve,
                     IntrinsicProfile, NotArclength, TooFewPoints, bending_energy, frenet_analyze,
                     reconstruct_from_intrinsics, resample_arclength, tangent_map)
from geoflow.curvegeo import curvature_threshold, rigid_align, sphere_map_intrinsics
from geoflow.soliton import ElasticParams, elastic_profile
from oracles import SQRT2, circle, closed_helix, frozen, helix, random_rotation


# --- construction -------------------------------------------------------------

def test_too_few_points():
    with pytest.raises(TooFewPoints):
        DiscreteCurve(np.zeros((3, 3)), 0.1)


def test_arclength_chords_checked():
    pts = np.stack([np.arange(6.0) ** 2, np.zeros(6), np.zeros(6)], axis=1)
    with pytest.raises(NotArclength):
        DiscreteCurve(pts, 1.0, False, ARCLENGTH)


def test_points_are_read_only():
    c = circle(16)
    with pytest.raises(ValueError):
        c.points[0, 0] = 3.0


def test_bad_spacing_and_kind():
    with pytest.raises(ValueError):
        DiscreteCurve(np.zeros((5, 3)), 0.0)
    with pytest.raises(ValueError):
        DiscreteCurve(np.zeros((5, 3)), 1.0, param_kind="weird")


def test_profile_validation():
    with pytest.raises(ValueError):
        IntrinsicProfile([1.0, -1.0], [0.0, 0.0], 0.1)
    with pytest.raises(ValueError):
        IntrinsicProfile([1.0, 1.0], [0.0, np.inf], 0.1)
    with pytest.raises(ValueError):
        IntrinsicProfile([1.0, 1.0], [0.0], 0.1)


# --- resampling -----------------------------------------------------------------

def _uneven_circle(m, seed=3):
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, 2 * np.pi, m))
    return DiscreteCurve(np.stack([np.cos(ang), np.sin(ang), np.zeros(m)], axis=1), 1.0, True)


@pytest.mark.xfail(strict=True, reason="a cubic spline through 17 random angles is not within 1e-6 of the circle")
def test_resample_circle_from_17_uneven_angles():
    out = resample_arclength(_uneven_circle(17), 64)
    assert out.n == 64 and out.param_kind == ARCLENGTH
    assert np.max(np.abs(np.linalg.norm(out.points, axis=1) - 1)) < 1e-6
    assert abs(out.spacing - 2 * np.pi / 64) < 1e-6


def test_resample_circle_uniform_chords():
    out = resample_arclength(_uneven_circle(17), 64)
    chords = np.linalg.norm(np.diff(np.vstack([out.points, out.points[:1]]), axis=0), axis=1)
    # equal arclength steps of the spline give chords equal to within its curvature variation
    assert np.ptp(chords) / out.spacing < 1e-2
    assert abs(out.spacing - 2 * np.pi / 64) < 0.05


def test_resample_fine_circle_is_accurate():
    base = 2 * np.pi * np.arange(200) / 200
    ang = base + np.random.default_rng(0).uniform(-0.3, 0.3, 200) * (2 * np.pi / 200)
    c = DiscreteCurve(np.stack([np.cos(ang), np.sin(ang), np.zeros(200)], axis=1), 1.0, True)
    out = resample_arclength(c, 64)
    assert np.max(np.abs(np.linalg.norm(out.points, axis=1) - 1)) < 1e-6
    assert abs(out.spacing - 2 * np.pi / 64) < 1e-6


def test_resample_segment():
    x = np.array([0.0, 0.1, 0.45, 0.5, 1.0])
    c = DiscreteCurve(np.stack([x, 0 * x, 0 * x], axis=1), 0.25)
    out = resample_arclength(c, 5)
    assert np.allclose(out.points[:, 0], [0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)
    assert np.allclose(out.points[:, 1:], 0)


def test_resample_helix_spacing():
    th = np.linspace(0, 2 * np.pi, 100)
    c = DiscreteCurve(np.stack([np.cos(th), np.sin(th), th], axis=1), th[1], False)
    out = resample_arclength(c, 256)
    assert abs(out.spacing - frozen()["helix"]["resample_spacing_256"]) < 1e-6
    assert out.param_kind == ARCLENGTH


def test_resample_errors():
    with pytest.raises(DegenerateCurve):
        resample_arclength(DiscreteCurve(np.zeros((5, 3)), 1.0), 8)
    with pytest.raises(TooFewPoints):
        resample_arclength(circle(16), 3)


@given(st.integers(64, 200), st.floats(0.2, 3.0))
def test_resample_preserves_length(n, radius):
    th = np.linspace(0, 2 * np.pi, 60, endpoint=False)
    c = DiscreteCurve(np.stack([radius * np.cos(th), radius * np.sin(th), 0 * th], axis=1), 1.0, True)
    out = resample_arclength(c, n)
    assert abs(out.length - 2 * np.pi * radius) / (2 * np.pi * radius) < 1e-3


# --- Frenet analysis -----------------------------------------------------------------

def test_frenet_circle():
    frame, prof = frenet_analyze(circle(128))
    assert np.max(np.abs(prof.k - 1)) < 1e-3
    assert np.max(np.abs(prof.tau)) < 1e-3
    assert not prof.degenerate_mask.any()
    assert np.allclose(frame.b, [0, 0, 1], atol=1e-12)


def test_frenet_helix():
    _, prof = frenet_analyze(helix(512))
    assert np.max(np.abs(prof.k - 0.5)) < 1e-3
    assert np.max(np.abs(prof.tau - 0.5)) < 1e-3


def test_frenet_closed_helix_monodromy():
    _, prof = frenet_analyze(closed_helix(256))
    assert np.max(np.abs(prof.k - 0.5)) < 1e-3
    assert np.max(np.abs(prof.tau - 0.5)) < 1e-3


def test_frenet_straight_line():
    s = 0.1 * np.arange(20)
    line = DiscreteCurve(np.stack([s, 2 * s, 0 * s], axis=1) / np.sqrt(5), 0.1, False, ARCLENGTH)
    with pytest.raises(AllDegenerate):
        frenet_analyze(line)


def test_frenet_needs_arclength():
    with pytest.raises(NotArclength):
        frenet_analyze(circle(32).replace(param_kind=GENERAL))


def test_frame_orthonormal():
    frame, _ = frenet_analyze(helix(200))
    for i in range(0, 200, 17):
        m = np.array(frame.triple(i))
        assert np.max(np.abs(m @ m.T - np.eye(3))) < 1e-8
        assert np.linalg.det(m) > 0


def test_degenerate_samples_masked():
    # straight middle piece between two arcs: k = 0 there
    s = np.linspace(-2, 2, 161)
    h = s[1] - s[0]
    pts = np.stack([s, np.where(np.abs(s) > 1, (np.abs(s) - 1) ** 4, 0.0), 0 * s], axis=1)
    c = resample_arclength(DiscreteCurve(pts, h), 161)
    _, prof = frenet_analyze(c)
    kmin = curvature_threshold(prof.k, c)
    assert np.array_equal(prof.degenerate_mask, prof.k < kmin)
    assert np.all(prof.tau[prof.degenerate_mask] == 0)


def _moved_profiles(seed, n=256):
    rng = np.random.default_rng(seed)
    c = helix(n)
    _, p0 = frenet_analyze(c)
    _, p1 = frenet_analyze(c.replace(points=c.points @ random_rotation(rng).T + rng.uniform(-3, 3, 3)))
    return c, p0, p1


@given(st.integers(0, 10**6))
def test_isometry_equivariance(seed):
    c, p0, p1 = _moved_profiles(seed)
    assert np.max(np.abs(p1.k - p0.k)) < 1e-11
    # torsion uses third differences: storing R x + b rounds at eps |x|, amplified by 1/h^3
    bound = 1e3 * np.finfo(float).eps * 5.0 / c.spacing**3
    assert np.max(np.abs(p1.tau - p0.tau)) < bound


@pytest.mark.xfail(strict=True, reason="third-difference round-off of a moved curve exceeds 1e-12 in tau")
def test_isometry_equivariance_generic_motion_1e12():
    _, p0, p1 = _moved_profiles(7)
    assert np.max(np.abs(p1.k - p0.k)) < 1e-12
    assert np.max(np.abs(p1.tau - p0.tau)) < 1e-12


def test_isometry_equivariance_exact_motion():
    # a coordinate permutation is exact in floating point, so the profile is reproduced bitwise
    c = helix(256)
    rot = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    _, p0 = frenet_analyze(c)
    _, p1 = frenet_analyze(c.replace(points=c.points @ rot.T))
    assert np.max(np.abs(p1.k - p0.k)) < 1e-12
    assert np.max(np.abs(p1.tau - p0.tau)) < 1e-12


# --- reconstruction --------------------------------------------------------------------

def test_reconstruct_circle():
    n = 256
    prof = IntrinsicProfile(np.ones(n), np.zeros(n), 2 * np.pi / n, True)
    c = reconstruct_from_intrinsics(prof)
    assert c.param_kind == ARCLENGTH and c.closed
    assert c.meta["closure_gap"] < 1e-6
    assert np.max(np.abs(np.linalg.norm(c.points - [0, 1, 0], axis=1) - 1)) < 1e-8


def test_reconstruct_helix_geometry():
    n = 1024
    length = frozen()["helix"]["length"]
    prof = IntrinsicProfile(np.full(n, 0.5), np.full(n, 0.5), length / (n - 1), False)
    c = reconstruct_from_intrinsics(prof)
    _, _, rms = rigid_align(c.points, helix(n).points)
    assert rms < 1e-4
    # radius k/(k^2+tau^2) = 1 and pitch 2 pi tau/(k^2+tau^2) = 2 pi
    rot, shift, _ = rigid_align(helix(n).points, c.points)
    axis = rot @ np.array([0, 0, 1.0])
    rel = c.points - (shift + rot @ np.zeros(3))
    radial = rel - np.outer(rel @ axis, axis)
    assert np.max(np.abs(np.linalg.norm(radial, axis=1) - 1.0)) < 1e-4
    assert abs((c.points[-1] - c.points[0]) @ axis - 2 * np.pi) < 1e-3


def test_reconstruct_bad_frame():
    prof = IntrinsicProfile(np.ones(8), np.zeros(8), 0.1)
    with pytest.raises(BadFrame):
        reconstruct_from_intrinsics(prof, frame0=([1, 0, 0], [1, 1e-3, 0], [0, 0, 1]))
    with pytest.raises(BadFrame):
        reconstruct_from_intrinsics(prof, frame0=([1, 0, 0], [0, 1, 0], [0, 0, -1]))


def test_reconstruct_with_degenerate_elastic_profile():
    params = ElasticParams.from_kpw(1.0, 0.5, 0.5)
    prof = elastic_profile(params, n=512)
    assert prof.k.min() < 1e-10 and prof.degenerate_mask.any()
    c = reconstruct_from_intrinsics(prof)
    assert np.all(np.isfinite(c.points))
    # k^2 tau = c = 0: a planar curve that does not close after one period of k
    assert not c.closed and c.n == prof.n + 1
    assert np.ptp(c.points[:, 2]) < 1e-12


def test_round_trip_second_order():
    errs = []
    for n in (256, 512):
        _, p0 = frenet_analyze(helix(n))
        _, p1 = frenet_analyze(reconstruct_from_intrinsics(p0))
        errs.append(max(np.max(np.abs(p1.k - 0.5)), np.max(np.abs(p1.tau - 0.5))))
    assert errs[1] <= 1e-3
    assert errs[0] / errs[1] >= 3.5


def test_reconstruction_frame_stays_orthonormal():
    n = 400
    s = np.linspace(0, 6, n)
    prof = IntrinsicProfile(1 + 0.5 * np.sin(s), 0.3 * np.cos(2 * s), s[1] - s[0])
    c = reconstruct_from_intrinsics(prof)
    frame, _ = frenet_analyze(c)
    for i in range(2, n - 2, 37):
        m = np.array(frame.triple(i))
        assert np.max(np.abs(m @ m.T - np.eye(3))) < 1e-8


# --- energies and tangent map -------------------------------------------------------

def test_bending_energy():
    n = 200
    assert abs(bending_energy(IntrinsicProfile(np.ones(n), np.zeros(n), 2 * np.pi / n, True)) - 2 * np.pi) < 1e-6
    assert bending_energy(IntrinsicProfile(np.zeros(n), np.zeros(n), 0.1)) == 0
    prof = IntrinsicProfile(np.full(n, 0.5), np.full(n, 0.5), frozen()["helix"]["length"] / (n - 1))
    assert abs(bending_energy(prof) - frozen()["helix"]["bending"]) < 1e-12


def test_tangent_map_circle():
    c = circle(64)
    u = tangent_map(c)
    s = c.s
    expect = np.stack([-np.sin(s), np.cos(s), 0 * s], axis=1)
    assert np.max(np.linalg.norm(u.points - expect, axis=1)) < 1e-3
    assert np.max(np.abs(np.linalg.norm(u.points, axis=1) - 1)) < 1e-12


def test_tangent_map_line():
    s = 0.1 * np.arange(10)
    line = DiscreteCurve(np.stack([s, 0 * s, 0 * s], axis=1), 0.1, False, ARCLENGTH)
    assert np.allclose(tangent_map(line).points, [1, 0, 0])


def test_tangent_map_helix_latitude():
    c = closed_helix(256)
    u = tangent_map(c)
    assert np.allclose(u.points[:, 2], 1 / SQRT2, atol=1e-4)
    assert np.allclose(np.hypot(u.points[:, 0], u.points[:, 1]), 1 / SQRT2, atol=1e-4)
    v, kg = sphere_map_intrinsics(u.points, u.spacing, True, u.monodromy[0])
    assert np.max(np.abs(v - 0.5)) < 1e-3
    assert np.max(np.abs(kg - 1.0)) < 1e-3  # tau / k
    with pytest.raises(NotArclength):
        tangent_map(c.replace(param_kind=GENERAL))


@given(st.floats(0.3, 3.0), st.integers(32, 128))
def test_tangent_map_unit_norms(radius, n):
    u = tangent_map(circle(n, radius))
    assert np.max(np.abs(np.linalg.norm(u.points, axis=1) - 1)) < 1e-6
