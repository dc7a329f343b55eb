"""Gagliardo p-energies ``int int |f(x)-f(y)|^p |x-y|^{-n-alpha}`` (no leading 1/2).

Every path starts from a punctured lattice pair sum over all of R^n, adds the
Epstein zeta correction for the singular diagonal (``lattice`` module), and
removes the pairs with one point outside the domain through the complement
potential ``T(x) = int_{R^n \\ domain} |x-y|^{-n-alpha} dy``.
"""
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .constants import ConvergenceError, ParameterError
from .lattice import epstein_zeta, kernel_table, singular_correction
from .sphere import build_sphere_quadrature

RICHARDSON_ORDER = 2.0


@dataclass(frozen=True)
class EnergyResult:
    value: float
    h: float
    error: float
    method: str
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.value < 0:
            # rounding can push an exactly-zero energy a hair negative
            if self.value < -1e-12 * max(1.0, self.error):
                raise ValueError(f"negative energy {self.value}")
            object.__setattr__(self, "value", 0.0)

    def to_dict(self):
        return {"value": self.value, "h": self.h, "error": self.error,
                "method": self.method, **self.meta}


def _check_exponents(p, alpha):
    if not p > 1.0:
        raise ParameterError(f"p={p} must exceed 1")
    if not 0.0 < alpha < p:
        raise ParameterError(f"alpha={alpha} must lie in (0, p={p})")


def _richardson_error(fine, coarse, order=RICHARDSON_ORDER):
    return abs(fine - coarse) / (2.0 ** order - 1.0)


def _map(fn, items, workers):
    # ordered results keep the final reduction independent of the worker count
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# -- one dimension --------------------------------------------------------------

def line_energies(F, h, p, alpha):
    """Full-line energies of each row of ``F`` (rows vanish outside the sampled window)."""
    _check_exponents(p, alpha)
    F = np.atleast_2d(np.asarray(F, dtype=float))
    lines, L = F.shape
    if L == 0:
        return np.zeros(lines)
    m = np.arange(1, L, dtype=float)
    ker = (h * m) ** (-1.0 - alpha)
    mass = np.sum(np.abs(F) ** p, axis=1)
    if p == 2.0:
        G = np.fft.rfft(F, 2 * L, axis=1)
        C = np.fft.irfft(np.abs(G) ** 2, 2 * L, axis=1)[:, 1:L]
        S = 2.0 * mass[:, None] - 2.0 * C
    else:
        S = np.empty((lines, L - 1))
        for j in range(1, L):
            inner = np.sum(np.abs(F[:, j:] - F[:, :-j]) ** p, axis=1)
            S[:, j - 1] = inner + np.sum(np.abs(F[:, :j]) ** p, axis=1) + np.sum(np.abs(F[:, -j:]) ** p, axis=1)
    # offsets |m| >= L never overlap: S = 2 * mass there
    outer = h ** (-1.0 - alpha) * float(special.zeta(1.0 + alpha, L))
    total = 2.0 * (S @ ker + 2.0 * mass * outer) * h * h
    gm = np.sum(np.abs(derivative(F, h, axis=1)) ** p, axis=1) * h
    return total + singular_correction(1, p, alpha, h, gm)


def complement_tail(x, a, b, alpha):
    """``int_{R \\ (a,b)} |x-y|^{-1-alpha} dy`` in closed form."""
    x = np.asarray(x, dtype=float)
    if np.any((x <= a) | (x >= b)):
        raise ParameterError(f"points must lie in ({a}, {b})")
    tail = (x - a) ** -alpha
    if np.isfinite(b):
        tail = tail + (b - x) ** -alpha
    return tail / alpha


def oneD_energy(samples, p, alpha, h, interval=None, s0=0.0):
    """Energy of lattice samples ``f(s0 + i h)`` over ``interval x interval``.

    ``interval=None`` means the whole line (samples vanish off the window).
    """
    f = np.asarray(samples, dtype=float).ravel()
    value = float(line_energies(f[None, :], h, p, alpha)[0])
    if interval is None:
        return max(value, 0.0)
    a, b = interval
    s = s0 + h * np.arange(f.size)
    live = f != 0
    tail = complement_tail(s[live], a, b, alpha)
    return max(value - 2.0 * h * float(np.sum(np.abs(f[live]) ** p * tail)), 0.0)


def fullline_energy(f, a, b, alpha, p=2.0):
    """Energy over R x R of ``f`` extended by zero, assembled as interval part plus tails."""
    vals = f.values
    s = f.axes()[0]
    live = vals != 0
    inner = oneD_energy(vals, p, alpha, f.h, interval=(a, b), s0=f.origin[0])
    tails = 2.0 * f.h * float(np.sum(np.abs(vals[live]) ** p * complement_tail(s[live], a, b, alpha)))
    return inner + tails


# -- full space lattice sums --------------------------------------------------

def derivative(F, h, axis=-1):
    """Fourth-order central difference; samples are taken as zero beyond the array."""
    F = np.moveaxis(np.asarray(F, dtype=float), axis, -1)
    P = np.pad(F, [(0, 0)] * (F.ndim - 1) + [(2, 2)])
    D = (P[..., :-4] - 8.0 * P[..., 1:-3] + 8.0 * P[..., 3:-1] - P[..., 4:]) / (12.0 * h)
    return np.moveaxis(D, -1, axis)


def _gradient_moment(values, h, p):
    grads = [derivative(values, h, axis=i) for i in range(values.ndim)]
    norm = np.sqrt(sum(g * g for g in grads))
    return float(np.sum(norm ** p)) * h ** values.ndim


def _offset_block(args):
    values, powers, offsets, p = args
    mass = float(np.sum(powers))
    out = np.empty(len(offsets))
    for i, m in enumerate(offsets):
        # overlap of the window with its shift by m; outside it one term vanishes
        hi = tuple(slice(int(c), None) if c >= 0 else slice(0, int(c)) for c in m)
        lo = tuple(slice(0, k - int(c)) if c >= 0 else slice(-int(c), None)
                   for c, k in zip(m, values.shape))
        out[i] = (float(np.sum(np.abs(values[hi] - values[lo]) ** p))
                  + 2.0 * mass - float(np.sum(powers[hi])) - float(np.sum(powers[lo])))
    return out


def lattice_energy(values, h, p, alpha, workers=1):
    """R^n energy of lattice samples (zero off the array) with the singular correction."""
    _check_exponents(p, alpha)
    values = np.asarray(values, dtype=float)
    n = values.ndim
    shape = values.shape
    mass = float(np.sum(np.abs(values) ** p))
    if mass == 0.0:
        return 0.0
    if n == 1:
        return float(line_energies(values[None, :], h, p, alpha)[0])
    if p == 2.0:
        pad = [2 * k for k in shape]
        axes = tuple(range(n))
        G = np.fft.rfftn(values, pad, axes=axes)
        C = np.fft.irfftn(np.abs(G) ** 2, pad, axes=axes)
        ker = kernel_table(pad, h, n, alpha)
        inner = 2.0 * mass * h ** (-n - alpha) * epstein_zeta(n, n + alpha) - 2.0 * float(np.sum(ker * C))
    else:
        # offsets with a nonzero first nonzero coordinate; S(m) = S(-m)
        ranges = [np.arange(-(k - 1), k) for k in shape]
        grid = np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, n)
        first = np.array([next((c for c in m if c != 0), 0) for m in grid])
        offsets = grid[first > 0]
        powers = np.abs(values) ** p
        blocks = np.array_split(offsets, max(1, min(len(offsets), 8 * max(workers, 1))))
        S = np.concatenate(_map(_offset_block, [(values, powers, b, p) for b in blocks], workers))
        r = h * np.sqrt(np.sum(offsets.astype(float) ** 2, axis=1))
        inner_sum = 2.0 * float(np.sum(r ** (-n - alpha) * S))
        # offsets outside the box never overlap
        box_r2 = np.sum(grid.astype(float) ** 2, axis=1)
        box_r2 = box_r2[box_r2 > 0]
        in_box = float(np.sum((h * np.sqrt(box_r2)) ** (-n - alpha)))
        outer = h ** (-n - alpha) * epstein_zeta(n, n + alpha) - in_box
        inner = inner_sum + 2.0 * mass * outer
    total = inner * h ** (2 * n)
    return total + singular_correction(n, p, alpha, h, _gradient_moment(values, h, p))


def complement_potential(domain, X, alpha, quad=None, chunk=2048):
    """``T(x) = int_{R^n \\ domain} |x-y|^{-n-alpha} dy`` as a sphere average of ray tails."""
    if quad is None:
        quad = build_sphere_quadrature(domain.n, _default_res(domain.n))
    X = domain.require_inside(X)
    out = np.empty(X.shape[0])
    step = max(1, chunk * 64 // len(quad))
    for start in range(0, X.shape[0], step):
        sl = slice(start, start + step)
        out[sl] = domain.complement_kernel(X[sl], quad.nodes, alpha) @ quad.weights
    return out


def _default_res(n):
    from .geometry import DEFAULT_RESOLUTION

    return DEFAULT_RESOLUTION[n]


def _direct_value(f, domain, p, alpha, quad, workers):
    e_full = lattice_energy(f.values, f.h, p, alpha, workers)
    X, v = f.support_points()
    if X.shape[0] == 0:
        return 0.0
    T = complement_potential(domain, X, alpha, quad)
    return e_full - 2.0 * f.h ** f.n * float(np.sum(np.abs(v) ** p * T))


def gagliardo_direct(f, domain, p, alpha, quad=None, workers=1, check=True):
    """Lattice double sum over all node pairs, restricted to ``domain x domain``."""
    _check_exponents(p, alpha)
    if check:
        f.check_support(domain)
    if quad is None:
        quad = build_sphere_quadrature(domain.n, _default_res(domain.n))
    fine = _direct_value(f, domain, p, alpha, quad, workers)
    coarse = _direct_value(f.subsampled(2), domain, p, alpha, quad, workers)
    return EnergyResult(max(fine, 0.0), f.h, _richardson_error(fine, coarse), "direct",
                        {"sphere_nodes": len(quad)})


# -- reduction to lines ---------------------------------------------------------

def _support_ball(f):
    X, _ = f.support_points()
    lo, hi = X.min(axis=0), X.max(axis=0)
    c = 0.5 * (lo + hi)
    c = f.origin + f.h * np.round((c - f.origin) / f.h)
    r = float(np.max(np.linalg.norm(X - c, axis=1))) + 2.0 * f.h
    return c, r


def _plane_offsets(basis, radius, h_line):
    k = basis.shape[1]
    if k == 0:
        return np.zeros((1, basis.shape[0]))
    j = int(math.ceil(radius / h_line))
    ranges = [np.arange(-j, j + 1)] * k
    J = np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, k) * h_line
    J = J[np.sum(J * J, axis=1) <= radius * radius]
    return J @ basis.T


def _direction_term(args):
    f, domain, p, alpha, w, center, radius, h_line = args
    from .functions import _orthonormal_complement

    basis = _orthonormal_complement(w) if f.n > 1 else np.zeros((1, 0))
    bases = center + _plane_offsets(basis, radius, h_line)
    I = int(math.ceil(radius / h_line)) + 2
    s = h_line * np.arange(-I, I + 1)
    pts = bases[:, None, :] + s[None, :, None] * w
    flat = pts.reshape(-1, f.n)
    vals = f(flat)
    live = vals != 0
    if np.any(live):
        live_idx = np.flatnonzero(live)
        inside = domain.contains(flat[live_idx])
        vals[live_idx[~inside]] = 0.0
        live[live_idx[~inside]] = False
    F = vals.reshape(bases.shape[0], s.size)
    keep = np.any(F != 0, axis=1)
    if not np.any(keep):
        return 0.0
    F = F[keep]
    e_lines = line_energies(F, h_line, p, alpha)
    P = flat[live]
    W = np.vstack([w, -w])
    T = domain.complement_kernel(P, W, alpha).sum(axis=1)
    tails = 2.0 * h_line * float(np.sum(np.abs(vals[live]) ** p * T))
    return (float(np.sum(e_lines)) - tails) * h_line ** (f.n - 1)


def _reduced_value(f, domain, p, alpha, quad, h_line, workers):
    nodes, weights = quad.half()
    center, radius = _support_ball(f)
    jobs = [(f, domain, p, alpha, w, center, radius, h_line) for w in nodes]
    terms = np.array(_map(_direction_term, jobs, workers))
    # half nodes carry doubled weights; the line formula has a factor 1/2
    return 0.5 * float(np.dot(weights, terms))


def gagliardo_reduced(f, domain, p, alpha, quad=None, h_line=None, workers=1, check=True):
    """Direction average of one-dimensional line energies (the line reduction identity)."""
    _check_exponents(p, alpha)
    if check:
        f.check_support(domain)
    if quad is None:
        quad = build_sphere_quadrature(domain.n, _default_res(domain.n))
    quad.check_antipodal()
    h_line = f.h if h_line is None else float(h_line)
    if not np.any(f.support_mask):
        return EnergyResult(0.0, h_line, 0.0, "reduced", {"sphere_nodes": len(quad)})
    fine = _reduced_value(f, domain, p, alpha, quad, h_line, workers)
    coarse = _reduced_value(f, domain, p, alpha, quad, 2.0 * h_line, workers)
    return EnergyResult(max(fine, 0.0), h_line, _richardson_error(fine, coarse), "reduced",
                        {"sphere_nodes": len(quad)})


def gagliardo_fullline(f, p, alpha):
    """R x R energy of a 1-d grid function, no domain restriction."""
    fine = lattice_energy(f.values, f.h, p, alpha)
    coarse = lattice_energy(f.subsampled(2).values, 2 * f.h, p, alpha)
    return EnergyResult(max(fine, 0.0), f.h, _richardson_error(fine, coarse), "fullline")


# -- ground-state potential -------------------------------------------------

def _omega_gap(x, q):
    # t -> omega(x) - omega(x + t) without cancellation
    wx = x ** q
    return lambda t: -wx * np.expm1(q * np.log1p(t / x))


def fs_potential(x, p, alpha, upper=1.0, rtol=1e-10):
    """``V(x) = 2 omega^{1-p} PV int_0^upper (omega(x)-omega(y))^{<p-1>} |x-y|^{-1-alpha} dy``.

    ``omega(y) = y^{(alpha-1)/p}``. The principal value pairs ``y = x +- t``
    for ``t < min(x, upper - x)``; the paired integrand behaves like
    ``t^{p-1-alpha}`` and is integrated with that algebraic weight.
    """
    if not (p > 1 and 1 < alpha < p):
        raise ParameterError(f"need 1 < alpha < p, got p={p}, alpha={alpha}")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.array([_fs_point(float(xi), p, alpha, float(upper), rtol) for xi in xs])
    return out if np.ndim(x) else float(out[0])


def _signed_power(d, p):
    return d * abs(d) ** (p - 2.0) if d != 0 else 0.0


def _fs_point(x, p, alpha, upper, rtol):
    if not 0.0 < x < upper:
        raise ParameterError(f"x={x} outside (0, {upper})")
    q = (alpha - 1.0) / p
    gap = _omega_gap(x, q)

    def pair(t):
        if t <= 0.0:
            return 0.0
        return (_signed_power(gap(t), p) + _signed_power(gap(-t), p)) / t ** p

    def single(y):
        return _signed_power(gap(y - x), p) / abs(x - y) ** (1.0 + alpha)

    rho = min(x, upper - x)
    opts = dict(limit=400, epsabs=0.0, epsrel=rtol)
    with warnings.catch_warnings():
        # roundoff notices at the requested tolerance; the error estimates are checked below
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        v, err = integrate.quad(pair, 0.0, rho, weight="alg", wvar=(p - 1.0 - alpha, 0.0), **opts)
        errs = [abs(err)]
        if x < upper - x:
            cuts = [x + rho, min(upper, 2.0 * x + 1.0), upper]
        else:
            cuts = [0.0, x - rho]
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            if hi > lo:
                piece, e = integrate.quad(single, lo, hi, **opts)
                v += piece
                errs.append(abs(e))
    scale = 2.0 / x ** (q * (p - 1.0))
    if sum(errs) > max(1e-6 * abs(v), 1e-300):
        raise ConvergenceError(f"principal value at x={x} did not settle (err {sum(errs):.2e})")
    return scale * v


def fs_tail_bound(x, p, alpha, upper):
    """Bound on the part of the half-line potential beyond ``upper``."""
    a = (alpha - 1.0) / p
    x = np.asarray(x, dtype=float)
    expo = a * (p - 1.0) - alpha
    return (2.0 / x ** (a * (p - 1.0)) * (1.0 - x / upper) ** (-1.0 - alpha)
            * upper ** expo / (-expo))


# -- log-variable energy for the half-line family ---------------------------

def _sinh_factor(u, alpha):
    # (u / (2 sinh(u/2)))^{1+alpha}, equal to 1 at u = 0
    u = np.abs(np.asarray(u, dtype=float))
    out = np.ones_like(u)
    nz = u > 0
    y = u[nz] / 2.0
    out[nz] = np.exp((1.0 + alpha) * (np.log(u[nz]) - y - np.log1p(-np.exp(-2.0 * y))))
    return out


def log_kernel_energy(trial, hs=None):
    """``(E_K[phi], int phi^2 ds)`` with ``K(u) = |2 sinh(u/2)|^{-1-alpha}``.

    For ``u = x^{(alpha-1)/2} phi(log x)`` the half-line energy splits as
    ``2 kappa int phi^2 + E_K[phi]``.
    """
    hs = trial.hs if hs is None else hs
    alpha = trial.alpha
    phi = trial.log_profile(trial.log_grid(hs))
    N = phi.size
    G = np.fft.rfft(phi, 2 * N)
    C = np.fft.irfft(np.abs(G) ** 2, 2 * N)[:N] * hs
    # past the window S = 2 C[0]; the kernel decays like exp(-(1+alpha) u / 2)
    M = N + int(math.ceil(80.0 / ((1.0 + alpha) * hs)))
    m = np.arange(1, M, dtype=float)
    ker = (m * hs) ** (-1.0 - alpha) * _sinh_factor(m * hs, alpha)
    S = np.full(M - 1, 2.0 * C[0])
    S[: N - 1] -= 2.0 * C[1:]
    lattice = 2.0 * hs * float(np.sum(ker * S))
    dphi = derivative(phi, hs)
    gm = float(np.sum(dphi * dphi)) * hs
    return lattice + singular_correction(1, 2.0, alpha, hs, gm), float(C[0])
