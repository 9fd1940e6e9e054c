"""Analytic test curves and the frozen reference values."""
import json
from functools import lru_cache
from pathlib import Path

import numpy as np

from geoflow import ARCLENGTH, DiscreteCurve, SphereMap

SQRT2 = np.sqrt(2.0)


@lru_cache(maxsize=None)
def frozen() -> dict:
    return json.loads((Path(__file__).parent / "frozen" / "expected.json").read_text())


def circle(n, radius=1.0, center=(0.0, 0.0, 0.0)):
    """Closed arclength circle in the xy-plane (chords differ from h by O(h^2))."""
    h = 2 * np.pi * radius / n
    s = h * np.arange(n)
    pts = np.stack([radius * np.cos(s / radius), radius * np.sin(s / radius), np.zeros(n)], axis=1)
    return DiscreteCurve(pts + np.asarray(center), h, True, ARCLENGTH)


def helix(n, turns=1.0):
    """Open arclength helix (cos(s/c), sin(s/c), s/c), c = sqrt 2, k = tau = 1/2."""
    length = 2 * np.pi * SQRT2 * turns
    h = length / (n - 1)
    s = h * np.arange(n)
    return DiscreteCurve(np.stack([np.cos(s / SQRT2), np.sin(s / SQRT2), s / SQRT2], axis=1), h, False,
                         ARCLENGTH)


def closed_helix(n):
    """One helix turn as a screw-periodic closed curve."""
    length = 2 * np.pi * SQRT2
    h = length / n
    s = h * np.arange(n)
    pts = np.stack([np.cos(s / SQRT2), np.sin(s / SQRT2), s / SQRT2], axis=1)
    return DiscreteCurve(pts, h, True, ARCLENGTH, (np.eye(3), np.array([0.0, 0.0, 2 * np.pi])))


def latitude(n, z0):
    rho = np.sqrt(1 - z0**2)
    h = 2 * np.pi / n
    x = h * np.arange(n)
    return SphereMap(np.stack([rho * np.cos(x), rho * np.sin(x), np.full(n, z0)], axis=1), h)


def great_circle(n):
    return latitude(n, 0.0)


def wobbly_sphere_map(n, amp=0.3, lift=0.5):
    """A generic smooth closed curve on S^2 without symmetries (E_2 != 0 for lift != 0)."""
    h = 2 * np.pi / n
    x = h * np.arange(n)
    v = np.stack([np.cos(x), np.sin(x), lift + amp * np.sin(2 * x) + 0.2 * np.cos(3 * x)], axis=1)
    return SphereMap(v / np.linalg.norm(v, axis=1)[:, None], h)


def trefoil(n):
    """Closed trefoil knot resampled to arclength."""
    from geoflow import resample_arclength

    t = 2 * np.pi * np.arange(4 * n) / (4 * n)
    pts = np.stack([np.sin(t) + 2 * np.sin(2 * t), np.cos(t) - 2 * np.cos(2 * t), -np.sin(3 * t)], axis=1)
    return resample_arclength(DiscreteCurve(pts, t[1], True), n)


def random_rotation(rng):
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q
