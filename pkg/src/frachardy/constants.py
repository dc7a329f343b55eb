"""Sharp constants for fractional Hardy inequalities.

All functions are pure and operate in double precision.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate


class ParameterError(ValueError):
    """Parameters fall outside the window an operation is valid on."""


class ConvergenceError(RuntimeError):
    """A quadrature failed to reach its requested tolerance."""


@dataclass(frozen=True)
class FracParams:
    n: int
    alpha: float
    p: float = 2.0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.n}")

    def require_kappa(self):
        _check_open("alpha", self.alpha, 0.0, 2.0)

    def require_two_sided(self):
        _check_open("alpha", self.alpha, 1.0, 2.0)

    def require_fs(self):
        _check_open("p", self.p, 1.0, math.inf)
        _check_open("alpha", self.alpha, 1.0, self.p)


def _check_open(name, value, lo, hi):
    if not (lo < value < hi) or math.isnan(value):
        raise ParameterError(f"{name}={value} outside ({lo}, {hi})")


def _check_dim(n):
    if int(n) != n or n < 1:
        raise ParameterError(f"dimension must be a positive integer, got {n}")


def gamma_fn(x: float) -> float:
    """Gamma function on (0, 50]."""
    if not (0.0 < x <= 50.0):
        raise ParameterError(f"gamma_fn defined on (0, 50], got {x}")
    return math.gamma(x)


def sphere_alpha_integral(n: int, alpha: float) -> float:
    """Closed form of the integral of ``|w_n|**alpha`` over the unit sphere S^{n-1}."""
    _check_dim(n)
    if not (0.0 < alpha <= 2.0):
        raise ParameterError(f"alpha={alpha} outside (0, 2]")
    return sphere_moment(n, alpha)


def sphere_moment(n, power):
    # same closed form, any power > -1; used for |w.e|^p averages
    if n == 1:
        return 2.0
    return 2.0 * math.pi ** ((n - 1) / 2) * math.gamma((1 + power) / 2) / math.gamma((n + power) / 2)


def sphere_area(n):
    """Surface measure of S^{n-1}."""
    return 2.0 * math.pi ** (n / 2) / math.gamma(n / 2)


def kappa(n: int, alpha: float) -> float:
    """Sharp half-space constant for the p = 2 inequality with the 1/2 convention.

    Vanishes at ``alpha == 1`` and is positive elsewhere on (0, 2).
    """
    _check_dim(n)
    _check_open("alpha", alpha, 0.0, 2.0)
    if alpha == 1.0:
        return 0.0
    lead = math.pi ** ((n - 1) / 2) * math.gamma((1 + alpha) / 2) / math.gamma((n + alpha) / 2)
    bracket = (
        2.0 ** (1 - alpha) / math.sqrt(math.pi)
        * math.gamma((2 - alpha) / 2) * math.gamma((1 + alpha) / 2)
        - 1.0
    )
    return lead * bracket / alpha


def _fs_radial_integral(p, alpha, tol):
    # int_0^1 |1 - r^q|^p (1-r)^{-1-alpha} dr, q = (alpha-1)/p
    q = (alpha - 1.0) / p

    def lower(r):
        return abs(1.0 - r ** q) ** p / (1.0 - r) ** (1.0 + alpha)

    def upper(u):
        # r = 1 - u; (1 - r^q)/u is smooth near u = 0, the u^{p-1-alpha} factor is the weight
        if u <= 0.0:
            return q ** p
        return abs(-math.expm1(q * math.log1p(-u)) / u) ** p

    lo, lo_err = integrate.quad(lower, 0.0, 0.5, epsabs=tol / 4, epsrel=0.0, limit=400)
    hi, hi_err = integrate.quad(
        upper, 0.0, 0.5, weight="alg", wvar=(p - 1.0 - alpha, 0.0),
        epsabs=tol / 4, epsrel=0.0, limit=400,
    )
    if lo_err + hi_err > tol:
        raise ConvergenceError(
            f"fs radial integral: error estimate {lo_err + hi_err:.3g} exceeds {tol:.3g}"
        )
    return lo + hi


def fs_constant(n: int, p: float, alpha: float, tol: float = 1e-10) -> float:
    """Sharp constant of the L^p inequality (no 1/2 in front of the energy).

    Parameters
    ----------
    n : int
        Dimension.
    p : float
        Lebesgue exponent, ``1 < p < inf``.
    alpha : float
        Order, ``1 < alpha < p``.
    tol : float
        Absolute error target for the radial integral.
    """
    _check_dim(n)
    _check_open("p", p, 1.0, math.inf)
    _check_open("alpha", alpha, 1.0, p)
    return sphere_moment(n, alpha) * _fs_radial_integral(p, alpha, tol)


def kappa_ground_state(alpha: float, tol: float = 1e-11) -> float:
    """One-dimensional half-line constant from the logarithmic ground-state integral.

    Evaluates ``int_R (cosh(g u) - 1) |2 sinh(u/2)|^{-1-alpha} du`` with
    ``g = (alpha-1)/2``. Mathematically equal to ``kappa(1, alpha)`` for
    ``alpha`` in (0, 2); numerically it is an independent route.
    """
    _check_open("alpha", alpha, 0.0, 2.0)
    g = (alpha - 1.0) / 2.0

    def near(u):
        # (cosh(gu)-1)/u^2 * (u / (2 sinh(u/2)))^{1+alpha}; the u^{1-alpha} part is the weight
        if u == 0.0:
            return g * g / 2.0
        c = 2.0 * math.sinh(g * u / 2.0) ** 2 / (u * u)
        return c * (u / (2.0 * math.sinh(u / 2.0))) ** (1.0 + alpha)

    def far(u):
        # stable for large u: write every factor with exponentials of -u
        return (
            0.5 * (math.exp((g - (1 + alpha) / 2) * u) + math.exp((-g - (1 + alpha) / 2) * u))
            - math.exp(-(1 + alpha) / 2 * u)
        ) * (-math.expm1(-u)) ** (-1.0 - alpha)

    a, ea = integrate.quad(near, 0.0, 1.0, weight="alg", wvar=(1.0 - alpha, 0.0),
                           epsabs=tol / 4, epsrel=0.0, limit=200)
    b, eb = integrate.quad(far, 1.0, np.inf, epsabs=tol / 4, epsrel=0.0, limit=200)
    if ea + eb > tol:
        raise ConvergenceError(f"ground-state integral error {ea + eb:.3g} exceeds {tol:.3g}")
    return 2.0 * (a + b)
