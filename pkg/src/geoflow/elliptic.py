"""Jacobi elliptic functions by the descending Landen (AGM) transformation.

The second argument is the modulus ``p`` (so the parameter is m = p**2),
sn(u, 0) = sin u and sn(u, 1) = tanh u.
"""
from __future__ import annotations

import numpy as np

_MAX_LEVELS = 60


def _agm_levels(p: float):
    a, b, c = 1.0, np.sqrt(max(0.0, 1.0 - p * p)), p
    levels = [(a, c)]
    for _ in range(_MAX_LEVELS):
        if abs(c) <= 1e-17 * a:
            break
        a, b, c = 0.5 * (a + b), np.sqrt(a * b), 0.5 * (a - b)
        levels.append((a, c))
    return levels


def _check_modulus(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError("modulus must lie in [0, 1]")
    return p


def ellipj(u, p):
    """Return (sn, cn, dn) of ``u`` for modulus ``p`` in [0, 1]."""
    p = _check_modulus(p)
    u = np.asarray(u, dtype=float)
    if p == 1.0:
        sech = 1.0 / np.cosh(u)
        return np.tanh(u), sech, sech.copy()
    levels = _agm_levels(p)
    nlev = len(levels) - 1
    a_n = levels[-1][0]
    phi = (2.0**nlev) * a_n * u
    for j in range(nlev, 0, -1):
        a, c = levels[j]
        phi = 0.5 * (phi + np.arcsin(np.clip(c / a * np.sin(phi), -1.0, 1.0)))
    sn, cn = np.sin(phi), np.cos(phi)
    dn = np.sqrt(1.0 - (p * sn) ** 2)
    return sn, cn, dn


def jacobi_sn(u, p):
    return ellipj(u, p)[0]


def jacobi_cn(u, p):
    return ellipj(u, p)[1]


def jacobi_dn(u, p):
    return ellipj(u, p)[2]


def ellipk(p: float) -> float:
    """Quarter period K(p) = pi / (2 AGM(1, sqrt(1 - p**2)))."""
    p = _check_modulus(p)
    if p == 1.0:
        return np.inf
    a, b = 1.0, np.sqrt(1.0 - p * p)
    for _ in range(_MAX_LEVELS):
        if abs(a - b) <= 4 * np.finfo(float).eps * a:
            break
        a, b = 0.5 * (a + b), np.sqrt(a * b)
    return float(np.pi / (2.0 * a))
