"""Lattice sums over Z^n used to correct punctured trapezoidal rules.

A punctured lattice sum of ``|z|^{-n-alpha} S(z)`` with ``S(z) ~ |z|^p`` near the
origin misses a contribution of order ``h^{p-alpha}`` whose coefficient is an
Epstein zeta value at ``s = n + alpha - p``, taken by analytic continuation.
"""
import functools
import itertools
import math

import numpy as np
from scipy import special


def _upper_gamma(a, x):
    # non-regularized upper incomplete gamma, any real a != 0, -1, ...
    if a > 0:
        return special.gammaincc(a, x) * special.gamma(a)
    return (_upper_gamma(a + 1.0, x) - x ** a * math.exp(-x)) / a


@functools.lru_cache(maxsize=256)
def epstein_zeta(n: int, s: float, terms: int = 4) -> float:
    """``sum_{m in Z^n, m != 0} |m|^{-s}``, analytically continued in ``s``.

    Uses the theta-function splitting at t = 1, which converges like
    ``exp(-pi M^2)`` in the truncation radius ``M = terms``. Poles at ``s = n``
    and ``s = 0``; the latter is removable with value -1.
    """
    if s == n:
        raise ValueError("epstein_zeta has a pole at s = n")
    if s == 0:
        return -1.0
    if n == 1:
        return 2.0 * float(special.zeta(s))
    half = s / 2.0
    dual = (n - s) / 2.0
    total = 0.0
    rng = range(-terms, terms + 1)
    for m in itertools.product(rng, repeat=n):
        r2 = sum(k * k for k in m)
        if r2 == 0:
            continue
        x = math.pi * r2
        total += x ** (-half) * _upper_gamma(half, x)
        total += x ** (-dual) * _upper_gamma(dual, x)
    total += 2.0 / (s - n) - 2.0 / s
    return math.pi ** half / special.gamma(half) * total


def kernel_table(shape, h, n, alpha):
    """``|h m|^{-n-alpha}`` on the wrapped offset grid of an FFT of ``shape``; 0 at m = 0."""
    axes = [np.fft.fftfreq(k, 1.0 / k) for k in shape]
    r2 = np.zeros(shape)
    for ax, idx in enumerate(np.meshgrid(*axes, indexing="ij")):
        r2 += idx.astype(float) ** 2
    r2.flat[0] = 1.0
    ker = (h * h * r2) ** (-(n + alpha) / 2.0)
    ker.flat[0] = 0.0
    return ker


def outer_kernel_sum(offset_shape, h, n, alpha):
    """``h^n * sum |h m|^{-n-alpha}`` over m outside the centred box of ``offset_shape``.

    ``offset_shape`` lists half-widths: the box is ``|m_i| <= offset_shape[i]``.
    """
    total = epstein_zeta(n, n + alpha)
    axes = [np.arange(-k, k + 1, dtype=float) for k in offset_shape]
    r2 = np.zeros(tuple(2 * k + 1 for k in offset_shape))
    for idx in np.meshgrid(*axes, indexing="ij"):
        r2 += idx ** 2
    r2 = r2[r2 > 0]
    inner = float(np.sum(r2 ** (-(n + alpha) / 2.0)))
    return h ** (-alpha) * (total - inner)


def singular_correction(n, p, alpha, h, gradient_moment):
    """Leading correction added to a punctured lattice sum of the p-energy.

    ``gradient_moment`` is ``int |grad f|^p dx`` (n = 1: ``int |f'|^p``). For
    ``p == 2`` or ``n == 1`` the correction is exact at order ``h^{p-alpha}``;
    otherwise the direction dependence of ``|grad f . w|^p`` is replaced by its
    spherical mean.
    """
    from .constants import sphere_area, sphere_moment

    mean_factor = sphere_moment(n, p) / sphere_area(n) if n > 1 else 1.0
    zeta = epstein_zeta(n, n + alpha - p)
    return -(h ** (p - alpha)) * mean_factor * gradient_moment * zeta
