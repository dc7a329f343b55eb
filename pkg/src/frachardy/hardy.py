"""Weights, Rayleigh-type quotients and inequality checks."""
import csv
import enum
import io
import json
from dataclasses import asdict, dataclass, field

import mpmath
import numpy as np

from . import geometry
from .constants import ParameterError, fs_constant, kappa
from .domains import HalfSpace, Interval, IntervalUnion
from .energy import (fs_potential, fs_tail_bound, gagliardo_direct, gagliardo_reduced,
                     log_kernel_energy)
from .functions import GridFunction, HalfLineTrial, halfline_sharpness_family
from .sphere import build_sphere_quadrature

SCHEMA_VERSION = 1
DEFAULT_TOL = 0.02


class KindError(ValueError):
    """Weight kind does not apply to the given domain or exponents."""


class WeightKind(enum.Enum):
    """Weight families paired with their sharp constants.

    ``factor`` multiplies the energy in the quotient: 1/2 for the p = 2
    two-sided families and the half-line, 1 for the p-families.
    """

    M_ALPHA = "m_alpha"
    CONVEX_TWO_SIDED = "convex_two_sided"
    DIST = "dist"
    M_SMALL = "m_small"
    ONE_D_TWO_SIDED = "one_d_two_sided"
    ONE_D_UNION = "one_d_union"
    MIN_DIST = "min_dist"
    HALF_LINE = "half_line"

    @property
    def factor(self):
        return 1.0 if self in _P_KINDS else 0.5

    @property
    def p_family(self):
        return self in _P_KINDS

    def constant(self, n, alpha, p=2.0):
        self.check_exponents(alpha, p)
        if self.p_family:
            return fs_constant(n, p, alpha)
        return kappa(n, alpha)

    def check_exponents(self, alpha, p):
        if self.p_family:
            if not (p > 1.0 and 1.0 < alpha < p):
                raise ParameterError(f"{self.value} needs 1 < alpha < p, got alpha={alpha}, p={p}")
        else:
            if p != 2.0:
                raise ParameterError(f"{self.value} is a p = 2 inequality, got p={p}")
            if not 1.0 < alpha < 2.0:
                raise ParameterError(f"{self.value} needs alpha in (1, 2), got {alpha}")

    def check_domain(self, domain):
        ok = {
            WeightKind.M_ALPHA: True,
            WeightKind.CONVEX_TWO_SIDED: domain.convex,
            WeightKind.DIST: domain.convex,
            WeightKind.M_SMALL: True,
            WeightKind.ONE_D_TWO_SIDED: isinstance(domain, Interval),
            WeightKind.ONE_D_UNION: domain.n == 1 and isinstance(domain, (Interval, IntervalUnion)),
            WeightKind.MIN_DIST: isinstance(domain, Interval),
            WeightKind.HALF_LINE: isinstance(domain, HalfSpace),
        }[self]
        if not ok:
            raise KindError(f"weight {self.value} does not apply to a {domain.type_name} domain")


_P_KINDS = {WeightKind.DIST, WeightKind.M_SMALL, WeightKind.MIN_DIST}


def parse_kind(name):
    if isinstance(name, WeightKind):
        return name
    try:
        return WeightKind(str(name).lower())
    except ValueError:
        try:
            return WeightKind[str(name).upper()]
        except KeyError:
            raise KindError(f"unknown weight kind {name!r}") from None


def weight_field(domain, alpha, p, kind, X, quad=None):
    """The kind's weight (the factor multiplying ``|f|^p``) at the points ``X``."""
    kind = parse_kind(kind)
    kind.check_exponents(alpha, p)
    kind.check_domain(domain)
    X = domain.require_inside(X)
    if kind is WeightKind.M_ALPHA:
        return geometry.m_weight(domain, X, alpha, quad, two_sided=True)
    if kind is WeightKind.M_SMALL:
        return geometry.m_weight(domain, X, alpha, quad, two_sided=False)
    if kind is WeightKind.CONVEX_TWO_SIDED:
        return geometry.convex_weight(domain, X, alpha)
    if kind in (WeightKind.DIST, WeightKind.MIN_DIST, WeightKind.HALF_LINE):
        return domain.dist_to_boundary(X) ** -alpha
    # one-dimensional two-sided weights: d and delta along the line
    d, delta = domain.dir_dist(X, np.array([[1.0]]))
    return (1.0 / d[:, 0] + 1.0 / delta[:, 0]) ** alpha


@dataclass
class QuotientDetail:
    value: float
    energy: float
    energy_error: float
    denominator: float
    method: str
    h: float

    @property
    def rel_error(self):
        return self.energy_error / self.energy if self.energy > 0 else 0.0


def halfline_quotient(trial):
    """Quotient of a log-lattice half-line trial against ``x^{-alpha}`` with the 1/2 convention."""
    e_k, norm2 = log_kernel_energy(trial)
    e_half, _ = log_kernel_energy(trial, 2.0 * trial.hs)
    base = kappa(1, trial.alpha)
    value = base + 0.5 * e_k / norm2
    # the 2 kappa norm^2 part of the energy is exact; only E_K carries lattice error
    err = abs(e_k - e_half) / 3.0
    energy = 2.0 * base * norm2 + e_k
    return QuotientDetail(value, energy, err, norm2, "log-lattice", trial.hs)


def quotient_detail(f, domain, alpha, p, kind, quad=None, method="auto", workers=1, energy=None):
    kind = parse_kind(kind)
    kind.check_exponents(alpha, p)
    if isinstance(f, HalfLineTrial):
        if kind is not WeightKind.HALF_LINE:
            raise KindError("half-line trials pair only with the half_line weight")
        return halfline_quotient(f)
    kind.check_domain(domain)
    f.check_support(domain)
    X, v = f.support_points()
    weights = weight_field(domain, alpha, p, kind, X, quad)
    denom = float(np.sum(np.abs(v) ** p * weights)) * f.h ** f.n
    if not denom > 0:
        raise ParameterError("zero trial function has no quotient")
    if energy is None:
        energy = trial_energy(f, domain, p, alpha, method, workers)
    value = kind.factor * energy.value / denom
    return QuotientDetail(value, energy.value, kind.factor * energy.error, denom / kind.factor,
                          energy.method, f.h)


def trial_energy(f, domain, p, alpha, method="auto", workers=1, quad=None):
    """Domain energy of a grid function; direct for p = 2 or n = 1, lines otherwise."""
    if method == "auto":
        method = "direct" if (p == 2.0 or f.n == 1) else "reduced"
    if method == "direct":
        return gagliardo_direct(f, domain, p, alpha, workers=workers, check=False)
    if method == "reduced":
        if quad is None:
            quad = build_sphere_quadrature(f.n, REDUCED_RESOLUTION[f.n])
        return gagliardo_reduced(f, domain, p, alpha, quad=quad, workers=workers, check=False)
    raise ParameterError(f"unknown energy method {method!r}")


REDUCED_RESOLUTION = {1: 2, 2: 256, 3: 24}


def quotient(f, domain, alpha, p, kind, quad=None, method="auto", workers=1):
    """``factor * E_p[f] / sum |f_i|^p w(x_i) h^n`` for the kind's weight ``w``."""
    return quotient_detail(f, domain, alpha, p, kind, quad, method, workers).value


@dataclass
class VerificationReport:
    kind: str
    n: int
    alpha: float
    p: float
    trial: str
    quotient: float
    constant: float
    margin: float
    tol: float
    passed: bool
    meta: dict = field(default_factory=dict)
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        return cls(**json.loads(text))


CSV_COLUMNS = ["schema_version", "kind", "n", "alpha", "p", "trial", "quotient", "constant",
               "margin", "tol", "passed", "h", "energy_rel_error"]


def reports_to_jsonl(reports):
    return "".join(r.to_json() + "\n" for r in reports)


def reports_to_csv(reports):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in reports:
        row = r.to_dict()
        row.update(h=r.meta.get("h", ""), energy_rel_error=r.meta.get("energy_rel_error", ""))
        writer.writerow([_csv_cell(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


def _csv_cell(v):
    return repr(v) if isinstance(v, float) else str(v)


def make_report(kind, n, alpha, p, trial, value, constant, tol, meta):
    margin = (value - constant) / constant
    return VerificationReport(kind.value, n, alpha, p, trial, value, constant, margin, tol,
                              bool(margin >= -tol), meta)


def verify(domain, alpha, p, kind, family, tol=DEFAULT_TOL, quad=None, constant_scale=1.0,
           method="auto", workers=1):
    """One report per trial function; the suite passes iff every margin is at least ``-tol``."""
    kind = parse_kind(kind)
    if not family:
        raise ParameterError("empty trial family")
    constant = kind.constant(domain.n, alpha, p) * constant_scale
    if not constant > 0:
        raise ParameterError("vanishing constant makes the check vacuous")
    reports = []
    for f in family:
        q = quotient_detail(f, domain, alpha, p, kind, quad, method, workers)
        meta = {"h": q.h, "energy_rel_error": q.rel_error, "energy_method": q.method,
                "constant_scale": constant_scale, "domain": domain.to_dict()}
        if quad is not None:
            meta["sphere_nodes"] = len(quad)
        reports.append(make_report(kind, domain.n, alpha, p, f.label, q.value, constant, tol, meta))
    return reports


@dataclass
class ProbeResult:
    alpha: float
    quotients: list
    kappa: float

    @property
    def gap(self):
        return (self.quotients[-1] - self.kappa) / self.kappa

    @property
    def nonincreasing(self):
        return all(b <= a for a, b in zip(self.quotients, self.quotients[1:]))


def sharpness_probe(alpha, k_max=6):
    """Quotients of the half-line trial sequence ``k = 1..k_max`` and the final gap."""
    if not 1.0 < alpha < 2.0:
        raise ParameterError(f"alpha={alpha} outside (1, 2)")
    qs = [halfline_quotient(halfline_sharpness_family(alpha, k)).value for k in range(1, k_max + 1)]
    return ProbeResult(alpha, qs, kappa(1, alpha))


def remainder(x, alpha):
    """``1 - x^alpha - (1-x)^alpha``."""
    if not 1.0 < alpha < 2.0:
        raise ParameterError(f"alpha={alpha} outside (1, 2)")
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ParameterError("x must lie in [0, 1]")
    return 1.0 - x ** alpha - (1.0 - x) ** alpha


def remainder_exact(x, alpha, dps=50):
    """``remainder`` in ``dps``-digit arithmetic; ``x`` and ``alpha`` may be Fractions or strings."""
    with mpmath.workdps(dps):
        xm = mpmath.mpf(x.numerator) / x.denominator if hasattr(x, "numerator") else mpmath.mpf(x)
        am = mpmath.mpf(alpha.numerator) / alpha.denominator if hasattr(alpha, "numerator") else mpmath.mpf(alpha)
        return 1 - xm ** am - (1 - xm) ** am


def fs_inequality_check(p, alpha, xs, upper=1.0, tol=1e-4):
    """Compare the truncated ground-state potential with ``D_{1,p,alpha} x^{-alpha}``."""
    D = fs_constant(1, p, alpha)
    xs = np.asarray(xs, dtype=float)
    V = fs_potential(xs, p, alpha, upper=upper)
    target = D / xs ** alpha
    margins = (V - target) / target
    meta = {"x": xs.tolist(), "margins": margins.tolist(), "upper": upper}
    worst = int(np.argmin(margins))
    rep = VerificationReport("fs_potential", 1, alpha, p, f"x={xs[worst]:g}", float(V[worst]),
                             float(target[worst]), float(margins[worst]), tol,
                             bool(margins.min() >= -tol), meta)
    return rep


def fs_halfline_check(p, alpha, xs, upper=1e3):
    """Truncated half-line identity: ``0 <= V_upper(x) - D x^{-alpha} <= tail bound``.

    The dropped part beyond ``upper`` has a negative integrand, so truncation
    can only raise the potential.
    """
    D = fs_constant(1, p, alpha)
    xs = np.asarray(xs, dtype=float)
    V = fs_potential(xs, p, alpha, upper=upper)
    defect = V - D / xs ** alpha
    bound = fs_tail_bound(xs, p, alpha, upper)
    return defect, bound


def weight_bound_margin(domain, X, alpha, quad=None):
    """Smallest relative excess of ``1/M_alpha^alpha`` over the convex two-sided weight."""
    m = geometry.m_weight(domain, X, alpha, quad, two_sided=True)
    c = geometry.convex_weight(domain, X, alpha)
    return float(np.min((m - c) / c))


__all__ = ["WeightKind", "KindError", "weight_field", "quotient", "quotient_detail", "verify",
           "VerificationReport", "sharpness_probe", "remainder", "remainder_exact",
           "fs_inequality_check", "fs_halfline_check", "halfline_quotient", "trial_energy",
           "reports_to_jsonl", "reports_to_csv", "weight_bound_margin", "GridFunction"]
