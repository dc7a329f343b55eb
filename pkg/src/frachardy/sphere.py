"""Antipodally symmetric quadrature on S^{n-1}, n <= 3."""
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import sphere_area

CACHE_ENV = "FRAC_HARDY_CACHE"


class QuadratureError(ValueError):
    """Quadrature rule unsuitable for the requested use."""


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Nodes and weights; ``nodes[i + m//2] == -nodes[i]`` for ``i < m//2``."""

    nodes: np.ndarray
    weights: np.ndarray
    resolution: int

    @property
    def n(self):
        return self.nodes.shape[1]

    def __len__(self):
        return self.nodes.shape[0]

    def integrate(self, values):
        """Apply the rule along the last axis of ``values``."""
        return np.asarray(values) @ self.weights

    def half(self):
        """One node of each antipodal pair with doubled weight (for even integrands)."""
        m = len(self) // 2
        return self.nodes[:m], 2.0 * self.weights[:m]

    def check_antipodal(self, atol=1e-14):
        m = len(self) // 2
        if 2 * m != len(self):
            raise QuadratureError("odd node count cannot be antipodally paired")
        ok = (np.allclose(self.nodes[m:], -self.nodes[:m], rtol=0, atol=atol)
              and np.array_equal(self.weights[m:], self.weights[:m]))
        if not ok:
            raise QuadratureError("quadrature nodes are not antipodally symmetric")


def _circle(count):
    count = max(4, 4 * ((count + 3) // 4))
    theta = 2.0 * np.pi * np.arange(count) / count
    nodes = np.column_stack([np.cos(theta), np.sin(theta)])
    return nodes, np.full(count, 2.0 * np.pi / count)


def _sphere3(count):
    n_phi = max(4, 4 * ((count + 3) // 4))
    n_z = max(2, n_phi // 2)
    # Gauss-Legendre per hemisphere in cos(theta) and per quadrant in phi: the kinks
    # of |w_i|^a for coordinate axes sit on panel edges
    g, gw = np.polynomial.legendre.leggauss(n_z)
    z, wz = 0.5 * (g + 1.0), 0.5 * gw
    q, qw = np.polynomial.legendre.leggauss(n_phi // 4)
    quarter = 0.25 * np.pi * (q + 1.0)
    phi = np.concatenate([quarter, quarter + 0.5 * np.pi])
    wphi = np.tile(0.25 * np.pi * qw, 2)
    # nodes with phi in [0, pi) on both hemispheres; antipodes (phi + pi, -z) appended
    Z = np.concatenate([np.repeat(z, phi.size), np.repeat(-z, phi.size)])
    P = np.tile(phi, 2 * n_z)
    W = np.tile(np.outer(wz, wphi).ravel(), 2)
    r = np.sqrt(np.clip(1.0 - Z ** 2, 0.0, None))
    half = np.column_stack([r * np.cos(P), r * np.sin(P), Z])
    return np.vstack([half, -half]), np.concatenate([W, W])


def build_sphere_quadrature(n: int, resolution: int = 256) -> SphereQuadrature:
    """Quadrature on S^{n-1}.

    n = 1 gives the exact two-point rule, n = 2 the uniform trapezoid rule with
    ``resolution`` (rounded up to a multiple of 4) nodes, n = 3 a product of
    hemispherical Gauss-Legendre rules in ``cos(theta)`` (``resolution // 2``
    per hemisphere) and quadrant-wise Gauss-Legendre azimuths (``resolution``
    in total).
    """
    if n not in (1, 2, 3):
        raise QuadratureError(f"sphere quadrature supports n in 1..3, got {n}")
    resolution = int(resolution)
    cache = os.environ.get(CACHE_ENV)
    path = Path(cache) / f"sphere_n{n}_r{resolution}.npz" if cache else None
    if path is not None and path.exists():
        data = np.load(path)
        return SphereQuadrature(data["nodes"], data["weights"], resolution)
    if n == 1:
        nodes, weights = np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    elif n == 2:
        nodes, weights = _circle(resolution)
        m = len(weights) // 2
        nodes = np.vstack([nodes[:m], -nodes[:m]])
    else:
        nodes, weights = _sphere3(resolution)
    # weights sum to |S^{n-1}| up to rounding; rescale removes the last ulps
    weights = weights * (sphere_area(n) / weights.sum())
    quad = SphereQuadrature(nodes, weights, resolution)
    if path is not None:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savez(path, nodes=nodes, weights=weights)
    return quad
