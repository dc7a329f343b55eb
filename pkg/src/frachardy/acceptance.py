"""The acceptance matrix, shared by ``frachardy selftest`` and the test suite.

Each check returns a ``CriterionResult`` whose ``details`` hold only computed
numbers, so the JSON of a run is reproducible bit for bit.
"""
import json
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from . import geometry
from .constants import fs_constant, kappa, sphere_alpha_integral
from .domains import Ball, Box, HalfSpace, Interval, IntervalUnion, slab
from .energy import fullline_energy, gagliardo_direct, gagliardo_reduced
from .functions import BumpSpec, halfline_sharpness_family, inversion_1d, sample_bump
from .hardy import (DEFAULT_TOL, WeightKind, fs_halfline_check, fs_inequality_check,
                    quotient_detail, remainder_exact, sharpness_probe, trial_energy,
                    verify, weight_bound_margin)
from .sphere import build_sphere_quadrature

ALPHAS = (1.25, 1.5, 1.75)
P3_ALPHAS = (1.5, 2.0, 2.5)
LEVELS = ("full", "quick")


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.name} ({self.seconds:.1f}s)"

    def to_dict(self):
        out = asdict(self)
        out.pop("seconds")
        return out


def _fl(x):
    return float(np.float64(x))


# -- 1..3: constants ------------------------------------------------------------

def check_constant_identity(level="full", **_):
    worst = 0.0
    for n in (1, 2, 3):
        for i in range(19):
            a = round(1.05 + 0.05 * i, 2)
            two_k = 2.0 * kappa(n, a)
            worst = max(worst, abs(fs_constant(n, 2.0, a) - two_k) / max(1.0, abs(two_k)))
    return worst <= 1e-9, {"max_defect": _fl(worst)}


def check_sphere_integral(level="full", **_):
    worst = 0.0
    for n in (2, 3):
        quad = geometry.default_quadrature(n)
        for a in (1.1, 1.5, 1.9):
            exact = sphere_alpha_integral(n, a)
            approx = quad.integrate(np.abs(quad.nodes[:, -1]) ** a)
            worst = max(worst, abs(approx - exact) / exact)
    return worst <= 1e-6, {"max_rel_error": _fl(worst)}


def check_kappa_vanishing(level="full", **_):
    vals = [kappa(n, 1.0) for n in (1, 2, 3, 4)]
    return max(abs(v) for v in vals) <= 1e-12, {"values": [_fl(v) for v in vals]}


# -- 4, 5: weights --------------------------------------------------------------

def check_halfspace_weight(level="full", **_):
    rng = np.random.default_rng(4)
    worst = 0.0
    for n in (2, 3):
        normal = np.zeros(n)
        normal[-1] = 1.0
        dom = HalfSpace(normal, 0.0)
        X = rng.uniform(-2.0, 2.0, size=(20, n))
        X[:, -1] = rng.uniform(0.05, 3.0, size=20)
        w = geometry.m_weight(dom, X, 1.5, geometry.default_quadrature(n))
        worst = max(worst, float(np.max(np.abs(w * X[:, -1] ** 1.5 - 1.0))))
    return worst <= 1e-4, {"max_rel_error": _fl(worst)}


def _points_in(domain, count, rng, lo, hi):
    pts = []
    while len(pts) < count:
        X = rng.uniform(lo, hi, size=(4 * count, domain.n))
        pts.extend(X[domain.contains(X)].tolist())
    return np.array(pts[:count])


def check_weight_bound(level="full", **_):
    rng = np.random.default_rng(5)
    count = 200 if level == "full" else 200
    cases = {
        "square": (Box([0, 0], [1, 1]), 0.0, 1.0),
        "disk": (Ball([0, 0], 1.0), -1.0, 1.0),
        "cube": (Box([0, 0, 0], [1, 1, 1]), 0.0, 1.0),
        "slab": (slab(2, 1, 0.0, 1.0), 0.0, 1.0),
    }
    margins = {}
    for name, (dom, lo, hi) in cases.items():
        X = _points_in(dom, count, rng, lo, hi)
        quad = geometry.default_quadrature(dom.n)
        margins[name] = _fl(min(weight_bound_margin(dom, X, a, quad) for a in ALPHAS))
    return min(margins.values()) >= -1e-6, {"min_margin": margins, "points": count}


# -- 6: line reduction ----------------------------------------------------------

def _reduction_cases(level):
    quick = level == "quick"
    return [
        ("interval", Interval(0, 1), BumpSpec([0.5], 0.45), 1 / 64, 2, 0.02),
        ("square", Box([0, 0], [1, 1]), BumpSpec([0.5, 0.5], 0.45), 1 / 24 if quick else 1 / 32, 128, 0.02),
        ("disk", Ball([0, 0], 1.0), BumpSpec([0.2, 0.1], 0.7), 1 / 16 if quick else 1 / 24, 128, 0.02),
        ("cube", Box([0, 0, 0], [1, 1, 1]), BumpSpec([0.5, 0.5, 0.5], 0.45), 1 / 12, 16 if quick else 24, 0.05),
    ]


def check_reduction(level="full", workers=1, **_):
    details = {}
    ok = True
    alphas = ALPHAS if level == "full" else (1.5,)
    for name, dom, spec, h, res, limit in _reduction_cases(level):
        for a in alphas:
            gaps = []
            for step in (1, 2):
                f = sample_bump(spec, dom, h / step)
                direct = gagliardo_direct(f, dom, 2.0, a, workers=workers)
                quad = build_sphere_quadrature(dom.n, res * step)
                red = gagliardo_reduced(f, dom, 2.0, a, quad=quad, workers=workers)
                gaps.append(abs(red.value - direct.value) / direct.value)
            # one-dimensional lines reproduce the direct sum to rounding
            shrinks = gaps[1] < gaps[0] or gaps[1] <= 1e-10
            ok &= gaps[0] <= limit and gaps[1] <= limit and shrinks
            details[f"{name}/alpha={a}"] = [_fl(g) for g in gaps]
    return ok, {"relative_gaps": details}


# -- 7: inversion -------------------------------------------------------------

INVERSION_BUMPS = (BumpSpec([1.5], 0.45), BumpSpec([1.4], 0.3, 2.0), BumpSpec([1.6], 0.35, 0.5))


def check_inversion(level="full", **_):
    h = 1 / 400 if level == "full" else 1 / 200
    dom = Interval(1, 2)
    worst = 0.0
    for spec in INVERSION_BUMPS:
        f = sample_bump(spec, dom, h)
        for a in ALPHAS:
            g = inversion_1d(f, a)
            ef = fullline_energy(f, 1.0, 2.0, a)
            eg = fullline_energy(g, 0.5, 1.0, a)
            worst = max(worst, abs(ef - eg) / ef)
    return worst <= 1e-3, {"max_rel_defect": _fl(worst)}


# -- 8: inequality matrix -------------------------------------------------------

def _bumps_for(name):
    if name == "interval":
        return [BumpSpec([0.5], 0.45), BumpSpec([0.3], 0.2, 2.0), BumpSpec([0.8], 0.15, 0.5)]
    if name == "union":
        return [[BumpSpec([0.5], 0.4)], [BumpSpec([2.4], 0.3, 2.0)],
                [BumpSpec([0.5], 0.4), BumpSpec([2.6], 0.3, -1.0)]]
    if name == "halfline":
        return [BumpSpec([1.0], 0.9), BumpSpec([0.4], 0.3, 2.0), BumpSpec([3.0], 2.5, 0.5)]
    if name == "square":
        return [BumpSpec([0.5, 0.5], 0.45), BumpSpec([0.3, 0.6], 0.25, 2.0), BumpSpec([0.7, 0.25], 0.2, 0.5)]
    if name == "disk":
        return [BumpSpec([0.0, 0.0], 0.9), BumpSpec([0.4, 0.3], 0.45, 2.0), BumpSpec([-0.5, 0.1], 0.4, 0.5)]
    if name == "box_slab":
        return [BumpSpec([0.5, 0.3], 0.25), BumpSpec([0.5, 0.45], 0.4, 2.0), BumpSpec([0.3, 0.2], 0.15, 0.5)]
    raise KeyError(name)


def _domains():
    return {
        "interval": Interval(0, 1),
        "union": IntervalUnion([(0, 1), (2, 3)]),
        "halfline": HalfSpace(np.array([1.0]), 0.0),
        "square": Box([0, 0], [1, 1]),
        "disk": Ball([0, 0], 1.0),
        "box_slab": Box([0, 0], [1, 10]),
    }


def inequality_cells():
    """``(label, domain name, kind, p, alphas)`` rows of the inequality matrix."""
    cells = [("interval two-sided", "interval", WeightKind.ONE_D_TWO_SIDED, 2.0, ALPHAS),
             ("union two-sided", "union", WeightKind.ONE_D_UNION, 2.0, ALPHAS),
             ("half-line", "halfline", WeightKind.HALF_LINE, 2.0, ALPHAS),
             ("interval min-distance", "interval", WeightKind.MIN_DIST, 3.0, P3_ALPHAS)]
    for dom in ("square", "disk", "box_slab"):
        cells.append((f"{dom} averaged", dom, WeightKind.M_ALPHA, 2.0, ALPHAS))
        cells.append((f"{dom} convex two-sided", dom, WeightKind.CONVEX_TWO_SIDED, 2.0, ALPHAS))
    for p, alphas in ((2.0, ALPHAS), (3.0, P3_ALPHAS)):
        cells.append((f"square distance p={p:g}", "square", WeightKind.DIST, p, alphas))
        cells.append((f"square one-sided p={p:g}", "square", WeightKind.M_SMALL, p, alphas))
    return cells


def _lattice_step(name, level):
    if name in ("interval", "union"):
        return 1 / 128 if level == "full" else 1 / 64
    if name == "halfline":
        return 1 / 64 if level == "full" else 1 / 32
    return 1 / 40 if level == "full" else 1 / 28


def run_inequality_matrix(level="full", workers=1, constant_scale=1.0, tol=DEFAULT_TOL):
    domains = _domains()
    trials = {}
    for name, dom in domains.items():
        h = _lattice_step(name, level)
        trials[name] = [sample_bump(spec, dom, h) for spec in _bumps_for(name)]
    energies = {}
    reports = []
    for label, name, kind, p, alphas in inequality_cells():
        dom = domains[name]
        quad = geometry.default_quadrature(dom.n)
        for a in alphas:
            const = kind.constant(dom.n, a, p) * constant_scale
            for j, f in enumerate(trials[name]):
                key = (name, j, a, p)
                if key not in energies:
                    energies[key] = trial_energy(f, dom, p, a, workers=workers)
                q = quotient_detail(f, dom, a, p, kind, quad, energy=energies[key])
                margin = (q.value - const) / const
                reports.append({"cell": label, "kind": kind.value, "alpha": a, "p": p,
                                "trial": f.label, "quotient": _fl(q.value), "constant": _fl(const),
                                "margin": _fl(margin), "energy_rel_error": _fl(q.rel_error),
                                "passed": bool(margin >= -tol)})
    return reports


def check_inequalities(level="full", workers=1, constant_scale=1.0, **_):
    reports = run_inequality_matrix(level, workers, constant_scale)
    worst = min(reports, key=lambda r: r["margin"])
    return all(r["passed"] for r in reports), {
        "cells": len(reports), "min_margin": worst["margin"], "worst_cell": worst["cell"],
        "reports": reports}


# -- 9: sharpness ---------------------------------------------------------------

def check_sharpness(level="full", constant_scale=1.0, **_):
    k_max = 6
    details = {}
    ok = True
    for a in ALPHAS:
        probe = sharpness_probe(a, k_max)
        gap = (probe.quotients[-1] - probe.kappa * constant_scale) / (probe.kappa * constant_scale)
        ok &= probe.nonincreasing and -DEFAULT_TOL <= gap <= 0.05
        details[f"alpha={a}"] = {"quotients": [_fl(q) for q in probe.quotients], "gap": _fl(gap),
                                 "nonincreasing": probe.nonincreasing}
    # negative control: an inflated constant must be caught by some family member
    family = [halfline_sharpness_family(1.5, k) for k in range(1, k_max + 1)]
    control = verify(HalfSpace(np.array([1.0]), 0.0), 1.5, 2.0, WeightKind.HALF_LINE, family,
                     constant_scale=1.1 * constant_scale)
    caught = not all(r.passed for r in control)
    details["negative_control_caught"] = caught
    return ok and caught, details


# -- 10, 11: scalar inequalities -------------------------------------------------

def check_remainder(level="full", **_):
    worst = None
    xs = [Fraction(i, 1000) for i in range(1001)]
    for j in range(50):
        a = Fraction(101 + 2 * j, 100)
        for x in xs:
            r = remainder_exact(x, a)
            if worst is None or r < worst:
                worst = r
    return worst >= 0, {"min_value": _fl(worst)}


FS_CASES = ((2.0, 1.5), (3.0, 2.0), (2.5, 1.25))


def check_fs_potential(level="full", **_):
    xs = np.round(np.arange(1, 20) * 0.05, 2)
    details = {}
    ok = True
    for p, a in FS_CASES:
        rep = fs_inequality_check(p, a, xs)
        defect, bound = fs_halfline_check(p, a, [0.05, 0.5, 0.95], upper=1e3)
        within = bool(np.all((defect >= -1e-9) & (defect <= bound)))
        ok &= rep.passed and within
        details[f"p={p:g},alpha={a:g}"] = {"min_margin": _fl(rep.margin),
                                           "halfline_defect": [_fl(d) for d in defect],
                                           "tail_bound": [_fl(b) for b in bound]}
    return ok, details


# -- 12: determinism --------------------------------------------------------------

def check_determinism(level="full", workers=1, **_):
    """Repeat the parallel-sensitive computations with two worker counts and compare bytes."""
    other = 2 if workers == 1 else 1
    runs = []
    for w in (workers, other):
        dom = Box([0, 0], [1, 1])
        f = sample_bump(BumpSpec([0.5, 0.5], 0.45), dom, 1 / 24)
        red = gagliardo_reduced(f, dom, 3.0, 1.5, quad=build_sphere_quadrature(2, 64), workers=w)
        mat = run_inequality_matrix("quick", w) if level == "full" else []
        runs.append(json.dumps({"reduced": red.to_dict(), "matrix": mat}, sort_keys=True))
    return runs[0] == runs[1], {"bytes": len(runs[0])}


CRITERIA = [
    (1, "constant identity fs_constant(n,2,a) = 2 kappa(n,a)", check_constant_identity),
    (2, "sphere integral of |w_n|^alpha", check_sphere_integral),
    (3, "kappa vanishes at alpha = 1", check_kappa_vanishing),
    (4, "half-space averaged weight equals x_n^-alpha", check_halfspace_weight),
    (5, "averaged weight dominates the convex two-sided weight", check_weight_bound),
    (6, "direct and line-reduced energies agree", check_reduction),
    (7, "inversion invariance of the full-line energy", check_inversion),
    (8, "Hardy inequality matrix", check_inequalities),
    (9, "sharpness of the half-line constant", check_sharpness),
    (10, "remainder positivity", check_remainder),
    (11, "ground-state potential bound", check_fs_potential),
    (12, "worker count does not change results", check_determinism),
]


def run_criterion(number, level="full", workers=1, constant_scale=1.0):
    _, name, fn = CRITERIA[number - 1]
    start = time.perf_counter()
    passed, details = fn(level=level, workers=workers, constant_scale=constant_scale)
    return CriterionResult(number, name, bool(passed), details, time.perf_counter() - start)


def run_all(level="quick", workers=1, constant_scale=1.0, numbers=None, echo=None):
    results = []
    for number, _, _ in CRITERIA:
        if numbers is not None and number not in numbers:
            continue
        res = run_criterion(number, level, workers, constant_scale)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results


def results_json(results):
    return json.dumps([r.to_dict() for r in results], sort_keys=True, indent=1)
