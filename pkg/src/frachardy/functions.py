"""Discrete trial functions on regular lattices."""
import csv
import io
import math
import struct
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .constants import ParameterError
from .domains import as_directions, as_points

FORMAT_VERSION = 1
_MAGIC = b"FHGF"
MIN_NODES_ACROSS = 8


class SupportError(ValueError):
    """Trial function support is not strictly inside the domain."""


class ResolutionError(RuntimeError):
    """A refinement loop hit its cap before meeting its criterion."""


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values on the lattice ``origin + h * index``; zero off the stored window."""

    origin: np.ndarray
    h: float
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        origin = np.atleast_1d(np.asarray(self.origin, dtype=float)).copy()
        if values.ndim != origin.size:
            raise ParameterError(f"origin has {origin.size} entries for a {values.ndim}-d array")
        if not self.h > 0:
            raise ParameterError(f"lattice spacing must be positive, got {self.h}")
        values.setflags(write=False)
        origin.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "h", float(self.h))
        object.__setattr__(self, "_coeffs", None)

    @property
    def n(self):
        return self.values.ndim

    @property
    def shape(self):
        return self.values.shape

    def axes(self):
        return [self.origin[i] + self.h * np.arange(k) for i, k in enumerate(self.shape)]

    def points(self):
        grids = np.meshgrid(*self.axes(), indexing="ij")
        return np.column_stack([g.ravel() for g in grids])

    @property
    def support_mask(self):
        return self.values != 0

    def support_points(self):
        idx = np.argwhere(self.support_mask)
        return self.origin + self.h * idx, self.values[self.support_mask]

    def nodes_across_support(self):
        """Number of nonzero nodes spanned along each axis."""
        idx = np.argwhere(self.support_mask)
        if idx.size == 0:
            return np.zeros(self.n, dtype=int)
        return idx.max(axis=0) - idx.min(axis=0) + 1

    def norm_p(self, p, weight=None):
        """Lattice quadrature of ``|f|^p`` (times ``weight`` at support nodes)."""
        X, v = self.support_points()
        vals = np.abs(v) ** p
        if weight is not None:
            vals = vals * weight
        return float(np.sum(vals)) * self.h ** self.n

    def check_support(self, domain):
        """Raise unless every nonzero node keeps distance > h from the complement."""
        if domain.n != self.n:
            raise ParameterError(f"{self.n}-d function on a {domain.n}-d domain")
        X, _ = self.support_points()
        if X.shape[0] == 0:
            return
        inside = domain.contains(X)
        if not np.all(inside):
            raise SupportError(f"nonzero value at {X[~inside][0].tolist()} outside the domain")
        d = domain.dist_to_boundary(X)
        if np.any(d <= self.h):
            raise SupportError(f"nonzero value within one lattice step of the boundary "
                               f"(distance {d.min():.3g}, h={self.h:.3g})")
        if np.any(self.nodes_across_support() < MIN_NODES_ACROSS):
            raise SupportError(f"support spans fewer than {MIN_NODES_ACROSS} nodes on some axis")

    def scaled(self, factor):
        return GridFunction(self.origin, self.h, factor * self.values, self.label)

    def translated(self, shift):
        return GridFunction(self.origin + np.asarray(shift, dtype=float), self.h, self.values, self.label)

    def subsampled(self, step=2):
        """Every ``step``-th node, keeping the origin."""
        sl = tuple(slice(None, None, step) for _ in range(self.n))
        return GridFunction(self.origin, self.h * step, self.values[sl], self.label)

    # -- interpolation ------------------------------------------------------
    def _spline(self):
        if self._coeffs is None:
            coeffs = ndimage.spline_filter(self.values, order=3, mode="grid-constant")
            object.__setattr__(self, "_coeffs", coeffs)
        return self._coeffs

    def __call__(self, X):
        """Cubic spline interpolant; exactly 0 in cells with no nonzero corner."""
        X = as_points(X, self.n)
        idx = ((X - self.origin) / self.h).T
        out = ndimage.map_coordinates(self._spline(), idx, order=3, mode="grid-constant",
                                      cval=0.0, prefilter=False)
        near = ndimage.map_coordinates(self.support_mask.astype(float), idx, order=1,
                                       mode="grid-constant", cval=0.0)
        return np.where(near > 0, out, 0.0)

    # -- serialization ------------------------------------------------------
    def header(self):
        return {"version": FORMAT_VERSION, "n": self.n, "h": self.h,
                "origin": self.origin.tolist(), "shape": list(self.shape)}

    def to_csv(self, path=None):
        """Header comment, then one row ``x0,...,x{n-1},value`` per node in C order."""
        buf = io.StringIO()
        hd = self.header()
        buf.write(f"# frachardy-gridfunction version={hd['version']} n={hd['n']} "
                  f"h={self.h!r} origin={','.join(repr(float(o)) for o in self.origin)} "
                  f"shape={','.join(str(k) for k in self.shape)}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"x{i}" for i in range(self.n)] + ["value"])
        for x, v in zip(self.points(), self.values.ravel()):
            writer.writerow([repr(float(c)) for c in x] + [repr(float(v))])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text

    @classmethod
    def from_csv(cls, source):
        text = _read_text(source)
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# frachardy-gridfunction"):
            raise ValueError("missing grid function header line")
        fields = dict(tok.split("=", 1) for tok in lines[0][1:].split()[1:])
        if int(fields["version"]) != FORMAT_VERSION:
            raise ValueError(f"unsupported grid function version {fields['version']}")
        n = int(fields["n"])
        shape = tuple(int(k) for k in fields["shape"].split(","))
        origin = np.array([float(o) for o in fields["origin"].split(",")])
        rows = list(csv.reader(lines[2:]))
        values = np.array([float(r[n]) for r in rows]).reshape(shape)
        return cls(origin, float(fields["h"]), values)

    def to_bytes(self):
        """Little-endian: magic, u8 version, u8 n, u32 shape[n], f64 origin[n], f64 h, f64 values."""
        head = _MAGIC + struct.pack("<BB", FORMAT_VERSION, self.n)
        head += struct.pack(f"<{self.n}I", *self.shape)
        head += struct.pack(f"<{self.n}d", *self.origin)
        head += struct.pack("<d", self.h)
        return head + np.ascontiguousarray(self.values, dtype="<f8").tobytes()

    @classmethod
    def from_bytes(cls, data):
        if data[:4] != _MAGIC:
            raise ValueError("not a grid function binary blob")
        version, n = struct.unpack_from("<BB", data, 4)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported grid function version {version}")
        pos = 6
        shape = struct.unpack_from(f"<{n}I", data, pos)
        pos += 4 * n
        origin = np.array(struct.unpack_from(f"<{n}d", data, pos))
        pos += 8 * n
        (h,) = struct.unpack_from("<d", data, pos)
        pos += 8
        count = int(np.prod(shape))
        values = np.frombuffer(data, dtype="<f8", count=count, offset=pos).reshape(shape)
        return cls(origin, h, values.astype(float))


def _read_text(source):
    if isinstance(source, str) and "\n" in source:
        return source
    with open(source) as fh:
        return fh.read()


@dataclass(frozen=True)
class BumpSpec:
    center: tuple
    radius: float
    amplitude: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in np.atleast_1d(self.center)))
        if not self.radius > 0:
            raise ParameterError(f"bump radius must be positive, got {self.radius}")

    @property
    def label(self):
        c = ",".join(f"{x:g}" for x in self.center)
        return f"bump(c=[{c}],r={self.radius:g},A={self.amplitude:g})"

    def evaluate(self, X):
        X = as_points(X, len(self.center))
        rho2 = np.sum((X - np.asarray(self.center)) ** 2, axis=1) / self.radius ** 2
        out = np.zeros(X.shape[0])
        inside = rho2 < 1.0
        out[inside] = self.amplitude * np.exp(-1.0 / (1.0 - rho2[inside]))
        return out


def sample_bump(spec, domain, h):
    """Sample ``A exp(-1/(1 - |x-c|^2/r^2))`` on a lattice through the centre.

    ``spec`` may also be a list of bumps; their sum is sampled on one lattice
    through the first centre.
    """
    specs = [spec] if isinstance(spec, BumpSpec) else list(spec)
    n = domain.n
    for sp in specs:
        c = np.asarray(sp.center, dtype=float)
        if c.size != n:
            raise ParameterError(f"bump centre has {c.size} coordinates for a {n}-d domain")
        if not domain.contains(c)[0] or domain.dist_to_boundary(c)[0] <= sp.radius:
            raise SupportError(f"closed ball of radius {sp.radius} around {c.tolist()} leaves the domain")
        if 2.0 * sp.radius / h < MIN_NODES_ACROSS:
            raise SupportError(f"h={h} gives fewer than {MIN_NODES_ACROSS} nodes across the bump")
    anchor = np.asarray(specs[0].center, dtype=float)
    lo = np.min([np.asarray(sp.center) - sp.radius for sp in specs], axis=0)
    hi = np.max([np.asarray(sp.center) + sp.radius for sp in specs], axis=0)
    k_lo = np.floor((lo - anchor) / h).astype(int) - 2
    k_hi = np.ceil((hi - anchor) / h).astype(int) + 2
    axes = [anchor[i] + h * np.arange(k_lo[i], k_hi[i] + 1) for i in range(n)]
    grids = np.meshgrid(*axes, indexing="ij")
    X = np.column_stack([g.ravel() for g in grids])
    vals = np.sum([sp.evaluate(X) for sp in specs], axis=0)
    # nodes hugging the sphere carry values below exp(-r/h); clear those within h of the boundary
    live = vals != 0
    if np.any(live):
        d = domain.dist_to_boundary(X[live])
        sub = vals[live]
        sub[d <= h] = 0.0
        vals[live] = sub
    label = "+".join(sp.label for sp in specs)
    return GridFunction(anchor + h * k_lo, h, vals.reshape(grids[0].shape), label)


def default_bumps(domain, count=3):
    """Bumps inside the largest inscribed ball: centred, shifted and shrunk."""
    center, radius = domain.inner_ball()
    center = np.asarray(center, dtype=float)
    r = 0.8 * radius
    shift = np.zeros(domain.n)
    shift[-1] = 0.35 * radius
    specs = [BumpSpec(center, r, 1.0),
             BumpSpec(center + shift, 0.55 * radius, 2.0),
             BumpSpec(center - shift, 0.45 * radius, 0.5)]
    return specs[:count]


def inversion_1d(f, alpha, h_out=None):
    """``g(y) = |y|^{alpha-1} f(1/y)`` resampled on a lattice over the image window."""
    if f.n != 1:
        raise ParameterError("inversion_1d needs a 1-d grid function")
    if not 0.0 < alpha < 2.0:
        raise ParameterError(f"alpha={alpha} outside (0, 2)")
    lo = f.origin[0]
    hi = lo + f.h * (f.shape[0] - 1)
    X, _ = f.support_points()
    if lo <= 0.0 or (X.size and X.min() <= 0.0):
        raise SupportError("inversion needs the window to stay in (0, inf)")
    if h_out is None:
        h_out = f.h / max(hi, 1.0) ** 2
    y0 = 1.0 / hi
    count = int(math.floor((1.0 / lo - y0) / h_out)) + 1
    y = y0 + h_out * np.arange(count)
    vals = y ** (alpha - 1.0) * f(1.0 / y)
    return GridFunction([y0], h_out, vals, f"inv({f.label})")


def _orthonormal_complement(w):
    n = w.size
    q, _ = np.linalg.qr(np.column_stack([w, np.eye(n)]))
    basis = q[:, 1:n]
    return basis


def restrict_to_line(f, x, w, h_line):
    """Samples ``s -> f(x + s w)`` on the lattice ``s = j h_line`` covering the window."""
    x = as_points(x, f.n)[0]
    w = as_directions(w, f.n)[0]
    lo, hi = _window_chord(f, x, w)
    if not lo < hi:
        return np.zeros(0), np.zeros(0)
    j0 = int(math.floor(lo / h_line)) - 1
    j1 = int(math.ceil(hi / h_line)) + 1
    s = h_line * np.arange(j0, j1 + 1)
    return s, f(x + s[:, None] * w)


def _window_chord(f, x, w):
    lo_box = f.origin - f.h
    hi_box = f.origin + f.h * np.asarray(f.shape)
    t0, t1 = -np.inf, np.inf
    for i in range(f.n):
        if abs(w[i]) < 1e-15:
            if not lo_box[i] <= x[i] <= hi_box[i]:
                return 0.0, 0.0
            continue
        a = (lo_box[i] - x[i]) / w[i]
        b = (hi_box[i] - x[i]) / w[i]
        t0, t1 = max(t0, min(a, b)), min(t1, max(a, b))
    return t0, t1


# -- half-line trial family ---------------------------------------------------

def smoothstep(t):
    """C-infinity ramp from 0 (t <= 0) to 1 (t >= 1)."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class HalfLineTrial:
    """``u(x) = x^{(alpha-1)/2 + eps} chi(x)`` on the half-line, stored in ``s = log x``.

    ``chi`` is 1 on ``[exp(-plateau), 1]`` and vanishes outside
    ``(exp(-plateau - edge), exp(edge))``; both ramps are smoothsteps in ``s``.
    """

    alpha: float
    eps: float
    plateau: float
    edge: float
    hs: float
    label: str = ""

    @property
    def gamma(self):
        return 0.5 * (self.alpha - 1.0)

    @property
    def delta(self):
        return math.exp(-self.plateau)

    @property
    def upper(self):
        return math.exp(self.edge)

    def log_grid(self, hs=None):
        hs = self.hs if hs is None else hs
        s0 = -self.plateau - self.edge - hs
        count = int(math.ceil((self.edge + hs - s0) / hs)) + 1
        return s0 + hs * np.arange(count)

    def log_profile(self, s):
        """``phi(s) = x^{-(alpha-1)/2} u(x)`` at ``x = exp(s)``."""
        s = np.asarray(s, dtype=float)
        lo = smoothstep((s + self.plateau + self.edge) / self.edge)
        hi = 1.0 - smoothstep(s / self.edge)
        return np.exp(self.eps * s) * lo * hi

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        pos = x > 0
        s = np.log(x[pos])
        out[pos] = np.exp((self.gamma) * s) * self.log_profile(s)
        return out

    def to_grid(self, h):
        """Uniform x-lattice sampling; practical only for moderate scale ratios."""
        lo = self.delta * math.exp(-self.edge)
        count = int(math.ceil((self.upper - lo) / h)) + 3
        start = h * max(1, int(math.floor(lo / h)) - 1)
        x = start + h * np.arange(count)
        return GridFunction([start], h, self(x), self.label)


def sharpness_schedule(k):
    """``(eps, plateau, edge)`` for family index k; plateau and ramps in log units."""
    return 1.0 / k ** 3, 60.0 * k, 6.0 * k


def halfline_sharpness_family(alpha, k, hs=None, rel_change=0.01, hs_start=0.4, hs_min=1e-3):
    """Member k of the trial sequence whose quotients decrease to the half-line constant.

    Without ``hs`` the log-lattice step is halved from ``hs_start`` until the
    kernel energy changes by less than ``rel_change``.
    """
    from .energy import log_kernel_energy

    if not 1.0 < alpha < 2.0:
        raise ParameterError(f"alpha={alpha} outside (1, 2)")
    if int(k) != k or k < 1:
        raise ParameterError(f"family index must be a positive integer, got {k}")
    eps, plateau, edge = sharpness_schedule(k)
    label = f"halfline(alpha={alpha:g},k={k})"
    if hs is not None:
        return HalfLineTrial(alpha, eps, plateau, edge, hs, label)
    trial = HalfLineTrial(alpha, eps, plateau, edge, hs_start, label)
    prev = log_kernel_energy(trial)[0]
    h = hs_start
    while h / 2 >= hs_min:
        h /= 2
        trial = HalfLineTrial(alpha, eps, plateau, edge, h, label)
        cur = log_kernel_energy(trial)[0]
        if abs(cur - prev) <= rel_change * abs(cur):
            return trial
        prev = cur
    raise ResolutionError(f"log-lattice refinement did not settle above hs={hs_min}")
