"""Boundary functionals: directional distances, slab widths and averaged weights."""
import numpy as np

from .constants import ParameterError, sphere_moment
from .domains import Ball, Box, HalfSpace, Polytope, as_directions, as_points
from .sphere import build_sphere_quadrature

DEFAULT_RESOLUTION = {1: 2, 2: 2048, 3: 64}


def default_quadrature(n):
    return build_sphere_quadrature(n, DEFAULT_RESOLUTION[n])


def ray_intervals(domain, x, w):
    return domain.ray_intervals(x, w)


def dir_dist(domain, x, w):
    """``(d_w, delta_w)`` at a single point and direction."""
    w = as_directions(w, domain.n)
    d, delta = domain.dir_dist(as_points(x, domain.n), w)
    return float(d[0, 0]), float(delta[0, 0])


def dist_to_boundary(domain, X):
    return domain.dist_to_boundary(X)


def width(domain, X):
    return domain.width(X)


def _reciprocal(t):
    with np.errstate(divide="ignore"):
        return np.where(np.isinf(t), 0.0, 1.0 / t)


def m_weight(domain, X, alpha, quad=None, two_sided=True, chunk=4096):
    """Direction-averaged boundary weight.

    With ``two_sided`` this is ``1/M_alpha(x)^alpha``: the sphere average of
    ``(1/d_w + 1/delta_w)^alpha`` normalised by the integral of ``|w_n|^alpha``.
    Otherwise the one-sided ``1/m_alpha(x)^alpha`` built from ``d_w^{-alpha}``.
    """
    if two_sided and not 1.0 < alpha < 2.0:
        raise ParameterError(f"two-sided weight needs alpha in (1, 2), got {alpha}")
    if not two_sided and not alpha > 1.0:
        raise ParameterError(f"one-sided weight needs alpha > 1, got {alpha}")
    quad = quad or default_quadrature(domain.n)
    quad.check_antipodal()
    nodes, weights = quad.half()
    X = domain.require_inside(X)
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], max(1, chunk * 256 // max(len(weights), 1))):
        sl = slice(start, start + max(1, chunk * 256 // max(len(weights), 1)))
        d, delta = domain.dir_dist(X[sl], nodes)
        if two_sided:
            vals = (_reciprocal(d) + _reciprocal(delta)) ** alpha
        else:
            vals = _reciprocal(d) ** alpha
        out[sl] = vals @ weights
    return out / sphere_moment(domain.n, alpha)


def convex_weight(domain, X, alpha):
    """``(1/d + 1/(D - d))^alpha`` with the second term dropped for infinite width."""
    if not 1.0 < alpha < 2.0:
        raise ParameterError(f"convex weight needs alpha in (1, 2), got {alpha}")
    X = domain.require_inside(X)
    d = domain.dist_to_boundary(X)
    D = domain.width(X)
    return (1.0 / d + _reciprocal(D - d)) ** alpha


def nearest_supports(domain, x):
    """Supporting planes at the nearest boundary points of ``x``: ``[(u, D_P), ...]``.

    ``u`` is the inward unit normal of the plane and ``D_P`` the width of the
    smallest slab containing the domain bounded by that plane.
    """
    x = domain.require_inside(x)[0]
    if isinstance(domain, HalfSpace):
        return [(domain.normal.copy(), np.inf)]
    if isinstance(domain, Ball):
        r = x - domain.center
        nr = np.linalg.norm(r)
        if nr < 1e-14 * domain.radius:
            # every tangent plane is nearest; the coordinate axes represent them
            normals = list(np.eye(domain.n))
        else:
            normals = [-r / nr]
        return [(u, 2.0 * domain.radius) for u in normals]
    if isinstance(domain, Box):
        S = domain.face_slacks(x[None])[0]
        eye = np.eye(domain.n)
        normals = np.vstack([eye, -eye])
        extent = np.tile(domain.hi - domain.lo, 2)
    elif isinstance(domain, Polytope):
        S = domain.facet_slacks(x[None])[0]
        normals = domain.normals
        extent = domain.facet_widths()
    else:
        raise TypeError(f"no supporting planes for {domain.type_name}")
    near = S <= S.min() * (1 + 1e-12) + 1e-15
    return [(normals[i], float(extent[i])) for i in np.flatnonzero(near)]


def slab_bound_margin(domain, X, alpha, quad=None):
    """Smallest relative margin of the pointwise slab bound over points and nodes.

    For each point, nearest supporting plane ``P`` (normal ``u``) and node ``w``
    compares ``(1/d_w + 1/delta_w)^alpha`` with
    ``|<w,u>|^alpha (1/d + 1/(D_P - d))^alpha``. Nonnegative when the bound holds.
    """
    quad = quad or default_quadrature(domain.n)
    X = domain.require_inside(X)
    d_all = domain.dist_to_boundary(X)
    worst = np.inf
    for x, d in zip(X, d_all):
        dw, dlt = domain.dir_dist(x[None], quad.nodes)
        lhs = ((_reciprocal(dw) + _reciprocal(dlt)) ** alpha)[0]
        for u, DP in nearest_supports(domain, x[None]):
            rhs = np.abs(quad.nodes @ u) ** alpha * (1.0 / d + _reciprocal(np.array(DP - d))) ** alpha
            pos = rhs > 0
            if np.any(pos):
                worst = min(worst, float(np.min((lhs[pos] - rhs[pos]) / rhs[pos])))
    return worst
