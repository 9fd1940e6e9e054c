"""Second-order finite differences on uniform grids.

Closed grids are handled by padding with ghost samples.  A ghost map lets a
"closed" sample set be periodic only up to an isometry (a winding angle, an
axial shift, or a rigid screw motion of a curve).
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Callable, Optional

import numpy as np

GhostMap = Callable[[np.ndarray], np.ndarray]


@lru_cache(maxsize=None)
def fd_weights(offsets: tuple, order: int) -> np.ndarray:
    """Weights w with sum_j w_j f(x + o_j h) ~ h**order f^(order)(x).

    Solved in exact rational arithmetic so the weights are correctly rounded.
    """
    n = len(offsets)
    rows = [[Fraction(o) ** p for o in offsets] + [Fraction(factorial(order) if p == order else 0)]
            for p in range(n)]
    for col in range(n):
        piv = next(i for i in range(col, n) if rows[i][col] != 0)
        rows[col], rows[piv] = rows[piv], rows[col]
        lead = rows[col][col]
        rows[col] = [v / lead for v in rows[col]]
        for i in range(n):
            if i != col and rows[i][col] != 0:
                fac = rows[i][col]
                rows[i] = [a - fac * b for a, b in zip(rows[i], rows[col])]
    w = np.array([float(r[-1]) for r in rows])
    w.setflags(write=False)
    return w


def pad_periodic(a: np.ndarray, width: int, forward: Optional[GhostMap] = None,
                 backward: Optional[GhostMap] = None) -> np.ndarray:
    """Pad along axis 0 with `width` ghost samples on both sides.

    ``forward`` maps samples of the first period onto the following one
    (identity when omitted), ``backward`` is its inverse.
    """
    a = np.asarray(a, dtype=float)
    head = a[:width]
    tail = a[-width:]
    right = head if forward is None else forward(head)
    left = tail if backward is None else backward(tail)
    return np.concatenate([left, a, right], axis=0)


def centered_from_padded(p: np.ndarray, h: float, width: int = 2):
    """First three centered derivatives of a padded array (width >= 2)."""
    n = p.shape[0] - 2 * width
    c = width
    fm2, fm1 = p[c - 2:c - 2 + n], p[c - 1:c - 1 + n]
    f0 = p[c:c + n]
    fp1, fp2 = p[c + 1:c + 1 + n], p[c + 2:c + 2 + n]
    d1 = (fp1 - fm1) / (2.0 * h)
    d2 = (fp1 - 2.0 * f0 + fm1) / (h * h)
    d3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) / (2.0 * h**3)
    return d1, d2, d3


def _open_derivative(a: np.ndarray, h: float, order: int) -> np.ndarray:
    n = a.shape[0]
    reach = 1 if order < 3 else 2
    out = np.empty_like(a)
    c = fd_weights(tuple(range(-reach, reach + 1)), order)
    acc = np.zeros_like(a[reach:n - reach])
    for j, w in zip(range(-reach, reach + 1), c):
        acc = acc + w * a[reach + j:n - reach + j]
    out[reach:n - reach] = acc
    # second-order one-sided stencils need order + 2 points
    width = order + 2
    for i in range(reach):
        offs = tuple(range(-i, -i + width))
        w = fd_weights(offs, order)
        out[i] = np.tensordot(w, a[i + np.array(offs)], axes=1)
        j = n - 1 - i
        offs_r = tuple(-o for o in offs)
        w = fd_weights(offs_r, order)
        out[j] = np.tensordot(w, a[j + np.array(offs_r)], axes=1)
    return out / h**order


def derivatives(a: np.ndarray, h: float, closed: bool, forward: Optional[GhostMap] = None,
                backward: Optional[GhostMap] = None, orders=(1, 2, 3)):
    """Return the requested derivatives of samples ``a`` along axis 0."""
    a = np.asarray(a, dtype=float)
    if closed:
        d = centered_from_padded(pad_periodic(a, 2, forward, backward), h)
        return tuple(d[o - 1] for o in orders)
    if a.shape[0] < 5 and 3 in orders:
        raise ValueError("open third derivatives need at least 5 samples")
    return tuple(_open_derivative(a, h, o) for o in orders)


def shift_map(jump) -> tuple:
    """Ghost maps for samples that advance by a constant ``jump`` per period."""
    jump = np.asarray(jump, dtype=float)
    return (lambda x: x + jump), (lambda x: x - jump)


def rigid_map(rot: np.ndarray, trans: np.ndarray) -> tuple:
    """Ghost maps for points obeying p[i + n] = rot @ p[i] + trans."""
    rot = np.asarray(rot, dtype=float)
    trans = np.asarray(trans, dtype=float)
    inv = rot.T

    def fwd(x):
        return x @ rot.T + trans

    def bwd(x):
        return (x - trans) @ inv.T

    return fwd, bwd
