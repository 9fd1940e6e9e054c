"""NumPy reference kernels for the periodic method-of-lines flows.

Every ``*_advance`` function takes ``nsteps`` classical RK4 steps and returns
``(state, max_d2)`` where ``max_d2`` is the largest second-difference norm
seen at the start of a step (used for blow-up detection).
"""
import numpy as np

IDENTITY = np.eye(3)
ZERO3 = np.zeros(3)


def _pad(p, rot, trans):
    left = (p[-2:] - trans) @ rot
    right = p[:2] @ rot.T + trans
    return np.concatenate([left, p, right], axis=0)


def _diffs(e, h):
    n = e.shape[0] - 4
    fm2, fm1, f0, fp1, fp2 = e[0:n], e[1:n + 1], e[2:n + 2], e[3:n + 3], e[4:n + 4]
    d1 = (fp1 - fm1) * (0.5 / h)
    d2 = (fp1 - 2.0 * f0 + fm1) * (1.0 / (h * h))
    d3 = (fp2 - 2.0 * fp1 + 2.0 * fm1 - fm2) * (0.5 / (h * h * h))
    return d1, d2, d3


def curve_rhs(p, h, alpha, beta, rot=IDENTITY, trans=ZERO3):
    """alpha g' x g'' + beta (g''' + 3/2 g'' x (g' x g''))."""
    d1, d2, d3 = _diffs(_pad(p, rot, trans), h)
    c = np.cross(d1, d2)
    out = alpha * c
    if beta != 0.0:
        out = out + beta * (d3 + 1.5 * np.cross(d2, c))
    return out, d2


def schrodinger_rhs(u, h, rot=IDENTITY):
    """u x u_xx."""
    d1, d2, _ = _diffs(_pad(u, rot, ZERO3), h)
    return np.cross(u, d2), d2


def kdv_rhs(u, h, rot=IDENTITY):
    """Hamiltonian stencil for the KdV map flow.

    The lattice flow of H = 1/(2 h**2) sum det(u_i, u_{i+1}, u_{i-1}) for the
    product area form, a second-order approximation of
    u_xxx + 3/2 |u_x|^2 u_x projected to the tangent plane.  H is the
    centered-difference pseudo-helicity, so it is conserved exactly.
    """
    e = _pad(u, rot, ZERO3)
    n = u.shape[0]
    um2, um1, u0, up1, up2 = e[0:n], e[1:n + 1], e[2:n + 2], e[3:n + 3], e[4:n + 4]
    g = np.cross(up1, up2) + np.cross(um2, um1) + np.cross(up1, um1)
    d2 = (up1 - 2.0 * u0 + um1) * (1.0 / (h * h))
    return np.cross(g, u0) * (0.5 / (h * h * h)), d2


def kdv_projected_rhs(u, h, rot=IDENTITY):
    """Tangential projection of u_xxx + 3/2 |u_x|^2 u_x (no exact invariant)."""
    d1, d2, d3 = _diffs(_pad(u, rot, ZERO3), h)
    w = d3 + 1.5 * np.sum(d1 * d1, axis=1)[:, None] * d1
    w = w - np.sum(w * u, axis=1)[:, None] * u
    return w, d2


def _rk4(y, dt, nsteps, rhs):
    max_d2 = 0.0
    for _ in range(nsteps):
        k1, d2 = rhs(y)
        m = float(np.max(np.sum(d2 * d2, axis=1)))
        if not m <= 1e300:
            return y, np.inf
        max_d2 = max(max_d2, m)
        k2, _ = rhs(y + (0.5 * dt) * k1)
        k3, _ = rhs(y + (0.5 * dt) * k2)
        k4, _ = rhs(y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if rhs.normalize:
            y = y / np.linalg.norm(y, axis=1)[:, None]
    return y, float(np.sqrt(max_d2))


class _Rhs:
    def __init__(self, fn, normalize):
        self.fn = fn
        self.normalize = normalize

    def __call__(self, y):
        return self.fn(y)


def curve_advance(p, h, dt, nsteps, alpha, beta, rot=IDENTITY, trans=ZERO3):
    rot = np.asarray(rot, float)
    trans = np.asarray(trans, float)
    rhs = _Rhs(lambda y: curve_rhs(y, h, alpha, beta, rot, trans), False)
    return _rk4(np.array(p, float), dt, nsteps, rhs)


def sphere_advance(u, h, dt, nsteps, kind, rot=IDENTITY):
    rot = np.asarray(rot, float)
    fn = {"schrodinger": schrodinger_rhs, "kdv": kdv_rhs, "kdv_projected": kdv_projected_rhs}[kind]
    rhs = _Rhs(lambda y: fn(y, h, rot), True)
    return _rk4(np.array(u, float), dt, nsteps, rhs)
