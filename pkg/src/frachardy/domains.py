"""Declarative domains with membership and ray-chord oracles.

Every domain is open. Points are arrays of shape ``(k, n)`` and directions
arrays of shape ``(m, n)``; chord queries return ``(k, m)`` parameter arrays.
A chord of a convex part is the open parameter interval ``(lo, hi)`` of
``{t : x + t w in part}``; a miss is encoded as ``lo = +inf, hi = -inf``.
"""
import json
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
from scipy import optimize


class DomainError(ValueError):
    """Invalid domain description."""


class OutsideDomainError(ValueError):
    """A query point does not lie in the (open) domain."""


class ConvexityError(ValueError):
    """Operation needs a convex domain."""


def as_points(X, n):
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(1, -1) if X.shape[0] == n else X.reshape(-1, 1)
    if X.shape[1] != n:
        raise ValueError(f"expected points of dimension {n}, got shape {X.shape}")
    return X


def as_directions(W, n):
    W = as_points(W, n)
    norms = np.linalg.norm(W, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-12):
        raise ValueError("directions must be unit vectors")
    return W


class Domain:
    """Base class; subclasses set ``n`` and ``convex``."""

    n: int
    convex: bool = True
    type_name: str = ""

    # -- per-part interface -------------------------------------------------
    def parts(self):
        return (self,)

    def chord(self, X, W):
        raise NotImplementedError

    def slack(self, X):
        """Signed distance-like quantity, positive exactly on the open part."""
        raise NotImplementedError

    # -- public oracles -----------------------------------------------------
    def contains(self, X):
        X = as_points(X, self.n)
        return np.logical_or.reduce([part.slack(X) > 0 for part in self.parts()])

    def require_inside(self, X):
        X = as_points(X, self.n)
        inside = self.contains(X)
        if not np.all(inside):
            bad = X[~inside][0]
            raise OutsideDomainError(f"point {bad.tolist()} is not in the open domain")
        return X

    def part_index(self, X):
        X = as_points(X, self.n)
        idx = np.full(X.shape[0], -1)
        for j, part in enumerate(self.parts()):
            idx[(part.slack(X) > 0) & (idx < 0)] = j
        return idx

    def chords(self, X, W):
        """Per-part chords ``[(lo, hi), ...]`` for every point/direction pair."""
        X = as_points(X, self.n)
        W = as_points(W, self.n)
        return [part.chord(X, W) for part in self.parts()]

    def ray_intervals(self, x, w):
        """Sorted disjoint parameter intervals of ``{t : x + t w in domain}``."""
        x = self.require_inside(x)
        w = as_directions(w, self.n)
        out = []
        for lo, hi in self.chords(x, w):
            if lo[0, 0] < hi[0, 0]:
                out.append((float(lo[0, 0]), float(hi[0, 0])))
        out.sort()
        merged = []
        for lo, hi in out:
            if merged and lo < merged[-1][1]:
                merged[-1] = (merged[-1][0], max(hi, merged[-1][1]))
            else:
                merged.append((lo, hi))
        return merged

    def dir_dist(self, X, W):
        """Directional exit distance ``d_w`` and farthest in-domain parameter ``delta_w``."""
        X = self.require_inside(X)
        W = as_points(W, self.n)
        d = np.full((X.shape[0], W.shape[0]), np.inf)
        delta = np.zeros_like(d)
        for lo, hi in self.chords(X, W):
            hit = lo < hi
            own = hit & (lo < 0) & (hi > 0)
            d = np.where(own, np.minimum(-lo, hi), d)
            far = np.where(hit, np.maximum(np.abs(lo), np.abs(hi)), 0.0)
            delta = np.maximum(delta, far)
        return d, delta

    def forward_exit(self, X, W):
        """Parameter where the ray ``x + t w, t > 0`` first leaves the domain."""
        X = as_points(X, self.n)
        W = as_points(W, self.n)
        exit_ = np.full((X.shape[0], W.shape[0]), np.nan)
        for lo, hi in self.chords(X, W):
            own = (lo < 0) & (hi > 0)
            exit_ = np.where(own, hi, exit_)
        return exit_

    def complement_kernel(self, X, W, alpha):
        """``int r^{-1-alpha} dr`` over the forward ray parameters outside the domain."""
        X = as_points(X, self.n)
        W = as_points(W, self.n)
        chords = self.chords(X, W)
        t_out = np.full((X.shape[0], W.shape[0]), np.nan)
        for lo, hi in chords:
            t_out = np.where((lo < 0) & (hi > 0), hi, t_out)
        if np.any(np.isnan(t_out)):
            raise OutsideDomainError("complement_kernel needs points inside the domain")
        total = t_out ** -alpha
        for lo, hi in chords:
            ahead = (lo < hi) & (lo >= t_out)
            start = np.where(ahead, lo, 1.0)
            stop = np.where(ahead, hi, 1.0)
            total = total - np.where(ahead, start ** -alpha - stop ** -alpha, 0.0)
        return total / alpha

    def dist_to_boundary(self, X):
        X = self.require_inside(X)
        idx = self.part_index(X)
        out = np.empty(X.shape[0])
        for j, part in enumerate(self.parts()):
            sel = idx == j
            if np.any(sel):
                out[sel] = part._distance(X[sel])
        return out

    def width(self, X):
        """Slab width of the narrowest supporting slab at a nearest boundary point."""
        if not self.convex:
            raise ConvexityError(f"width needs a convex domain, got {self.type_name}")
        X = self.require_inside(X)
        return self._width(X)

    def bounding_box(self):
        raise NotImplementedError

    def inner_ball(self):
        """A ball ``(center, radius)`` contained in the closure of the domain."""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _facet_chord(S, UW):
    # S: (k, F) slacks, UW: (m, F) normal.direction; constraint t*uw > -s
    k, m = S.shape[0], UW.shape[0]
    lo = np.full((k, m), -np.inf)
    hi = np.full((k, m), np.inf)
    empty = np.zeros((k, m), dtype=bool)
    for f in range(S.shape[1]):
        s = S[:, f][:, None]
        uw = UW[:, f][None, :]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            bound = -s / uw
        pos = np.broadcast_to(uw > 0, (k, m))
        neg = np.broadcast_to(uw < 0, (k, m))
        lo = np.where(pos, np.maximum(lo, bound), lo)
        hi = np.where(neg, np.minimum(hi, bound), hi)
        empty |= (uw == 0) & (s <= 0)
    miss = empty | (lo >= hi)
    lo = np.where(miss, np.inf, lo)
    hi = np.where(miss, -np.inf, hi)
    return lo, hi


@dataclass(frozen=True, eq=False)
class Polytope(Domain):
    """Intersection of open half-spaces ``<u_i, x> > c_i`` (u_i normalized)."""

    normals: np.ndarray
    offsets: np.ndarray
    interior_point: np.ndarray
    type_name = "polytope"

    def __post_init__(self):
        U = np.atleast_2d(np.asarray(self.normals, dtype=float))
        c = np.asarray(self.offsets, dtype=float).reshape(-1)
        if U.shape[0] != c.shape[0] or U.shape[0] == 0:
            raise DomainError("polytope needs matching, nonempty normals and offsets")
        norms = np.linalg.norm(U, axis=1)
        if np.any(norms == 0):
            raise DomainError("zero normal in polytope")
        object.__setattr__(self, "normals", U / norms[:, None])
        object.__setattr__(self, "offsets", c / norms)
        x0 = np.asarray(self.interior_point, dtype=float).reshape(-1)
        if x0.shape[0] != U.shape[1]:
            raise DomainError("interior point has the wrong dimension")
        object.__setattr__(self, "interior_point", x0)
        if np.any(self.slack(x0[None, :]) <= 0):
            raise DomainError("interior point is not strictly inside: empty interior not certified")
        object.__setattr__(self, "_support", {})

    @property
    def n(self):
        return self.normals.shape[1]

    def facet_slacks(self, X):
        return X @ self.normals.T - self.offsets[None, :]

    def slack(self, X):
        return np.min(self.facet_slacks(as_points(X, self.n)), axis=1)

    _distance = slack

    def chord(self, X, W):
        return _facet_chord(self.facet_slacks(X), W @ self.normals.T)

    def support(self, u):
        """``sup_{y in domain} <y, u>`` (inf when unbounded)."""
        key = tuple(np.round(u, 15))
        cache = self._support
        if key not in cache:
            res = optimize.linprog(
                -np.asarray(u, dtype=float), A_ub=-self.normals, b_ub=-self.offsets,
                bounds=[(None, None)] * self.n, method="highs",
            )
            if res.status == 3:
                cache[key] = math.inf
            elif res.status == 0:
                cache[key] = -res.fun
            else:
                raise DomainError(f"support function LP failed: {res.message}")
        return cache[key]

    @property
    def bounded(self):
        return all(
            np.isfinite(self.support(s * e)) for e in np.eye(self.n) for s in (1.0, -1.0)
        )

    def facet_widths(self):
        return np.array([self.support(u) - c for u, c in zip(self.normals, self.offsets)])

    def _width(self, X):
        S = self.facet_slacks(X)
        dmin = S.min(axis=1, keepdims=True)
        # supporting planes at nearest points are the facet planes attaining the min slack
        nearest = S <= dmin * (1 + 1e-12) + 1e-15
        widths = np.broadcast_to(self.facet_widths()[None, :], S.shape)
        return np.min(np.where(nearest, widths, np.inf), axis=1)

    def bounding_box(self):
        eye = np.eye(self.n)
        hi = np.array([self.support(e) for e in eye])
        lo = -np.array([self.support(-e) for e in eye])
        return lo, hi

    def inner_ball(self):
        # Chebyshev centre; radius capped so unbounded polytopes still give a finite ball
        n = self.n
        cost = np.zeros(n + 1)
        cost[-1] = -1.0
        A = np.hstack([-self.normals, np.ones((self.normals.shape[0], 1))])
        res = optimize.linprog(cost, A_ub=A, b_ub=-self.offsets,
                               bounds=[(None, None)] * n + [(0, 1e6)], method="highs")
        if res.status != 0:
            return self.interior_point, float(self.slack(self.interior_point[None])[0])
        return res.x[:n], float(res.x[-1])

    def to_dict(self):
        return {
            "type": "polytope",
            "halfspaces": [
                {"normal": u.tolist(), "offset": float(c)}
                for u, c in zip(self.normals, self.offsets)
            ],
            "interior_point": self.interior_point.tolist(),
        }


def slab(n, axis, lo, hi):
    """Open slab ``lo < x_axis < hi`` in R^n as an unbounded polytope."""
    e = np.eye(n)[axis]
    x0 = np.zeros(n)
    x0[axis] = 0.5 * (lo + hi)
    return Polytope(np.vstack([e, -e]), np.array([lo, -hi]), x0)


@dataclass(frozen=True, eq=False)
class Box(Domain):
    lo: np.ndarray
    hi: np.ndarray
    type_name = "box"

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or not np.all(lo < hi):
            raise DomainError(f"box needs lo < hi componentwise, got {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self):
        return self.lo.shape[0]

    def face_slacks(self, X):
        return np.hstack([X - self.lo[None, :], self.hi[None, :] - X])

    def slack(self, X):
        return np.min(self.face_slacks(as_points(X, self.n)), axis=1)

    _distance = slack

    def chord(self, X, W):
        eye = np.eye(self.n)
        return _facet_chord(self.face_slacks(X), W @ np.vstack([eye, -eye]).T)

    def _width(self, X):
        S = self.face_slacks(X)
        dmin = S.min(axis=1, keepdims=True)
        nearest = S <= dmin * (1 + 1e-12) + 1e-15
        extent = np.tile(self.hi - self.lo, 2)
        return np.min(np.where(nearest, extent[None, :], np.inf), axis=1)

    def bounding_box(self):
        return self.lo.copy(), self.hi.copy()

    def inner_ball(self):
        return 0.5 * (self.lo + self.hi), 0.5 * float(np.min(self.hi - self.lo))

    def to_dict(self):
        return {"type": "box", "lo": self.lo.tolist(), "hi": self.hi.tolist()}


class Interval(Box):
    """Open interval ``(a, b)`` as a one-dimensional domain."""

    type_name = "interval"

    def __init__(self, a, b):
        super().__init__(np.array([float(a)]), np.array([float(b)]))

    @property
    def a(self):
        return float(self.lo[0])

    @property
    def b(self):
        return float(self.hi[0])

    def to_dict(self):
        return {"type": "interval", "a": self.a, "b": self.b}


@dataclass(frozen=True, eq=False)
class Ball(Domain):
    center: np.ndarray
    radius: float
    type_name = "ball"

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.center, dtype=float))
        if not self.radius > 0:
            raise DomainError(f"ball radius must be positive, got {self.radius}")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def n(self):
        return self.center.shape[0]

    def slack(self, X):
        X = as_points(X, self.n)
        return self.radius - np.linalg.norm(X - self.center[None, :], axis=1)

    _distance = slack

    def chord(self, X, W):
        Y = X - self.center[None, :]
        b = Y @ W.T
        c = np.sum(Y * Y, axis=1)[:, None] - self.radius ** 2
        disc = b * b - c
        root = np.sqrt(np.maximum(disc, 0.0))
        miss = disc <= 0
        lo = np.where(miss, np.inf, -b - root)
        hi = np.where(miss, -np.inf, -b + root)
        return lo, hi

    def _width(self, X):
        return np.full(X.shape[0], 2.0 * self.radius)

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def inner_ball(self):
        return self.center.copy(), self.radius

    def to_dict(self):
        return {"type": "ball", "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class HalfSpace(Domain):
    """``{x : <u, x> > offset}`` with inward unit normal ``u``."""

    normal: np.ndarray
    offset: float = 0.0
    type_name = "halfspace"

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.normal, dtype=float))
        nu = np.linalg.norm(u)
        if nu == 0:
            raise DomainError("half-space normal must be nonzero")
        object.__setattr__(self, "normal", u / nu)
        object.__setattr__(self, "offset", float(self.offset) / nu)

    @property
    def n(self):
        return self.normal.shape[0]

    def slack(self, X):
        return as_points(X, self.n) @ self.normal - self.offset

    _distance = slack

    def chord(self, X, W):
        return _facet_chord(self.slack(X)[:, None], (W @ self.normal)[:, None])

    def _width(self, X):
        return np.full(X.shape[0], np.inf)

    def bounding_box(self):
        lo = np.full(self.n, -np.inf)
        hi = np.full(self.n, np.inf)
        for i, u in enumerate(self.normal):
            if abs(abs(u) - 1.0) < 1e-15:
                if u > 0:
                    lo[i] = self.offset
                else:
                    hi[i] = -self.offset
        return lo, hi

    def inner_ball(self):
        return self.normal * (self.offset + 1.0), 1.0

    def to_dict(self):
        return {"type": "halfspace", "normal": self.normal.tolist(), "offset": self.offset}


class _Union(Domain):
    convex = False

    def parts(self):
        return self._parts

    def slack(self, X):
        return np.max([part.slack(X) for part in self._parts], axis=0)

    def chord(self, X, W):
        raise TypeError("a union has one chord per part; use chords()")

    def bounding_box(self):
        boxes = [part.bounding_box() for part in self._parts]
        return np.min([b[0] for b in boxes], axis=0), np.max([b[1] for b in boxes], axis=0)

    def inner_ball(self):
        return self._parts[0].inner_ball()


class IntervalUnion(_Union):
    """Finite union of pairwise disjoint open intervals, sorted."""

    type_name = "interval_union"
    n = 1

    def __init__(self, intervals):
        ivs = [(float(a), float(b)) for a, b in intervals]
        if not ivs:
            raise DomainError("interval_union needs at least one interval")
        for a, b in ivs:
            if not a < b:
                raise DomainError(f"interval ({a}, {b}) is empty")
        for (a0, b0), (a1, b1) in zip(ivs, ivs[1:]):
            if not b0 <= a1:
                raise DomainError("intervals must be sorted and pairwise disjoint")
        self.intervals = tuple(ivs)
        self._parts = tuple(Interval(a, b) for a, b in ivs)

    def to_dict(self):
        return {"type": "interval_union", "intervals": [list(iv) for iv in self.intervals]}


class ConvexUnion(_Union):
    """Union of convex parts with pairwise disjoint interiors."""

    type_name = "convex_union"

    def __init__(self, parts):
        parts = tuple(parts)
        if not parts:
            raise DomainError("convex_union needs at least one part")
        dims = {p.n for p in parts}
        if len(dims) != 1 or not all(p.convex for p in parts):
            raise DomainError("convex_union parts must be convex and of equal dimension")
        for i, p in enumerate(parts):
            x0, _ = p.inner_ball()
            for q in parts[i + 1:]:
                if q.contains(x0[None])[0]:
                    raise DomainError("convex_union parts overlap")
        self._parts = parts
        self.n = dims.pop()

    def to_dict(self):
        return {"type": "convex_union", "parts": [p.to_dict() for p in self._parts]}


# -- serialization ------------------------------------------------------------

def domain_schema():
    return json.loads(resources.files("frachardy").joinpath("schema/domain.schema.json").read_text())


def domain_from_dict(spec):
    """Build a domain from its JSON object; validates against the bundled schema."""
    import jsonschema

    try:
        jsonschema.validate(spec, domain_schema())
    except jsonschema.ValidationError as exc:
        raise DomainError(f"domain spec does not match schema: {exc.message}") from exc
    return _build(spec)


def _build(spec):
    kind = spec["type"]
    if kind == "interval":
        return Interval(spec["a"], spec["b"])
    if kind == "interval_union":
        return IntervalUnion(spec["intervals"])
    if kind == "box":
        return Box(np.array(spec["lo"]), np.array(spec["hi"]))
    if kind == "ball":
        return Ball(np.array(spec["center"]), spec["radius"])
    if kind == "halfspace":
        return HalfSpace(np.array(spec["normal"]), spec.get("offset", 0.0))
    if kind == "polytope":
        hs = spec["halfspaces"]
        poly = Polytope(
            np.array([h["normal"] for h in hs]), np.array([h["offset"] for h in hs]),
            np.array(spec["interior_point"]),
        )
        if "bounded" in spec and bool(spec["bounded"]) != poly.bounded:
            raise DomainError("polytope 'bounded' flag contradicts its halfspaces")
        return poly
    if kind == "convex_union":
        return ConvexUnion([_build(part) for part in spec["parts"]])
    raise DomainError(f"unknown domain type {kind!r}")


def load_domain(text_or_path):
    """Parse a domain from inline JSON or a path to a JSON file."""
    text = str(text_or_path).strip()
    if not text.startswith("{"):
        with open(text) as fh:
            text = fh.read()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"domain spec is not valid JSON: {exc}") from exc
    return domain_from_dict(spec)
