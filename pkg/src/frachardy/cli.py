"""Command-line front end.

Exit codes: 0 pass, 1 inequality violation, 2 usage or parameter error,
3 numerical non-convergence.
"""
import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from . import acceptance
from .constants import ConvergenceError, ParameterError, fs_constant, kappa, sphere_alpha_integral
from .domains import ConvexityError, DomainError, HalfSpace, OutsideDomainError, load_domain
from .functions import (BumpSpec, GridFunction, ResolutionError, SupportError, default_bumps,
                        halfline_sharpness_family, sample_bump)
from .hardy import (DEFAULT_TOL, SCHEMA_VERSION, KindError, WeightKind, parse_kind,
                    reports_to_csv, reports_to_jsonl, verify)
from .sphere import QuadratureError, build_sphere_quadrature

EXIT_PASS, EXIT_VIOLATION, EXIT_USAGE, EXIT_CONVERGENCE = 0, 1, 2, 3
USAGE_ERRORS = (ParameterError, KindError, DomainError, OutsideDomainError, ConvexityError,
                SupportError, QuadratureError, ValueError, OSError)
CONVERGENCE_ERRORS = (ConvergenceError, ResolutionError)
MAX_WEIGHT_POINTS = 20000
WEIGHT_HEADER = f"# frachardy-weight schema_version={SCHEMA_VERSION}"


@dataclass
class RunConfig:
    """Everything a run depends on; ``to_json`` is canonical so configs round-trip byte for byte."""

    command: str
    domain: dict = None
    n: int = None
    alpha: float = None
    p: float = None
    h: float = None
    sphere_res: int = None
    kind: str = None
    family: str = None
    k_max: int = 6
    window: list = None
    tol: float = DEFAULT_TOL
    out: str = None
    workers: int = 1
    constant_scale: float = 1.0
    level: str = "quick"
    criteria: list = None
    schema_version: int = SCHEMA_VERSION

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown RunConfig fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_args(cls, args):
        data = {f.name: getattr(args, f.name) for f in fields(cls)
                if f.name not in ("schema_version",) and hasattr(args, f.name)}
        if data.get("domain") is not None:
            data["domain"] = load_domain(data["domain"]).to_dict()
        if data.get("kind") is not None:
            data["kind"] = parse_kind(data["kind"]).value
        for key in ("alpha", "p", "h", "tol", "constant_scale"):
            if data.get(key) is not None:
                data[key] = float(data[key])
        return cls(**data)

    def load_domain(self):
        if self.domain is None:
            return None
        return load_domain(json.dumps(self.domain))


# -- commands -----------------------------------------------------------------

def cmd_constants(config, stdout):
    n, alpha, p = config.n, config.alpha, config.p
    if n is None or alpha is None:
        raise ParameterError("constants needs --n and --alpha")
    table = {"n": n, "alpha": alpha, "kappa": kappa(n, alpha),
             "sphere_integral": sphere_alpha_integral(n, alpha)}
    if p is not None:
        table["p"] = p
        table["fs_constant"] = fs_constant(n, p, alpha)
        table["two_kappa"] = 2.0 * table["kappa"]
    table["schema_version"] = SCHEMA_VERSION
    stdout.write(json.dumps(table, sort_keys=True) + "\n")
    width = max(len(k) for k in table)
    for key, value in table.items():
        stdout.write(f"{key:<{width}}  {value!r}\n")
    return EXIT_PASS


def _weight_points(domain, h, window):
    lo, hi = domain.bounding_box()
    lo, hi = np.array(lo, dtype=float), np.array(hi, dtype=float)
    if window is not None:
        w = np.asarray(window, dtype=float).reshape(2, domain.n)
        lo, hi = np.maximum(lo, w[0]), np.minimum(hi, w[1])
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise ParameterError("unbounded domain: give --window lo... hi...")
    if h is None:
        h = float(np.max(hi - lo)) / 20
    counts = np.floor((hi - lo) / h).astype(int) + 1
    total = int(np.prod(counts))
    if total > MAX_WEIGHT_POINTS * 4:
        raise ParameterError(f"weight grid of {total} nodes exceeds the memory cap")
    axes = [lo[i] + h * (np.arange(counts[i]) + 0.5 * ((hi[i] - lo[i]) / h - (counts[i] - 1)))
            for i in range(domain.n)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, domain.n)
    X = X[domain.contains(X)]
    if X.shape[0] > MAX_WEIGHT_POINTS:
        raise ParameterError(f"{X.shape[0]} points exceed the cap of {MAX_WEIGHT_POINTS}; raise --h")
    if X.shape[0] == 0:
        raise ParameterError("no sample point falls inside the domain")
    return X


def cmd_weight(config, stdout):
    from .estimators import FEATURES, BoundaryWeightTransformer

    domain = config.load_domain()
    if domain is None or config.alpha is None:
        raise ParameterError("weight needs --domain and --alpha")
    X = _weight_points(domain, config.h, config.window)
    est = BoundaryWeightTransformer(domain, config.alpha, config.sphere_res)
    values = est.fit_transform(X)
    cols = [f"x{i}" for i in range(domain.n)] + list(FEATURES)
    lines = [WEIGHT_HEADER, ",".join(cols)]
    for x, row in zip(X, values):
        lines.append(",".join(repr(float(v)) for v in (*x, *row)))
    text = "\n".join(lines) + "\n"
    if config.out:
        Path(config.out).write_text(text)
    else:
        stdout.write(text)
    return EXIT_PASS


def _default_h(domain, specs):
    radii = [s.radius for group in specs for s in (group if isinstance(group, list) else [group])]
    return min(radii) / (12.0 if domain.n < 3 else 5.0)


def _parse_bump(obj):
    if isinstance(obj, list):
        return [_parse_bump(o) for o in obj]
    return BumpSpec(obj["center"], obj["radius"], obj.get("amplitude", 1.0))


def build_family(config, domain):
    """Trial functions named by ``--family``."""
    family = config.family or "bumps"
    if family == "sharpness":
        if not isinstance(domain, HalfSpace) or domain.n != 1:
            raise KindError("the sharpness family lives on the 1-d half-line")
        return [halfline_sharpness_family(config.alpha, k) for k in range(1, config.k_max + 1)]
    if family == "bumps":
        specs = default_bumps(domain)
    elif family.lstrip().startswith("[") or family.endswith(".json"):
        text = family if family.lstrip().startswith("[") else Path(family).read_text()
        specs = [_parse_bump(o) for o in json.loads(text)]
    else:
        path = Path(family)
        data = path.read_bytes()
        f = GridFunction.from_bytes(data) if data[:4] == b"FHGF" else GridFunction.from_csv(path)
        if f.n != domain.n:
            raise ParameterError("grid function dimension does not match the domain")
        return [f]
    h = config.h or _default_h(domain, specs)
    return [sample_bump(s, domain, h) for s in specs]


def cmd_verify(config, stdout):
    if config.alpha is None or config.kind is None:
        raise ParameterError("verify needs --alpha and --kind")
    if config.alpha == 1.0:
        raise ParameterError("alpha = 1 makes the constant vanish; the check would be vacuous")
    domain = config.load_domain()
    if domain is None:
        if config.family == "sharpness":
            domain = HalfSpace(np.array([1.0]), 0.0)
        else:
            raise ParameterError("verify needs --domain")
    kind = parse_kind(config.kind)
    p = 2.0 if config.p is None else config.p
    kind.check_exponents(config.alpha, p)
    kind.check_domain(domain)
    family = build_family(config, domain)
    quad = build_sphere_quadrature(domain.n, config.sphere_res) if config.sphere_res else None
    reports = verify(domain, config.alpha, p, kind, family, tol=config.tol, quad=quad,
                     constant_scale=config.constant_scale, workers=config.workers)
    out = config.out or "verify"
    Path(f"{out}.jsonl").write_text(reports_to_jsonl(reports))
    Path(f"{out}.csv").write_text(reports_to_csv(reports))
    Path(f"{out}.config.json").write_text(config.to_json() + "\n")
    for r in reports:
        status = "pass" if r.passed else "FAIL"
        stdout.write(f"{status}  {r.trial:<40} quotient={r.quotient:.6g} "
                     f"constant={r.constant:.6g} margin={r.margin:+.4f}\n")
    return EXIT_PASS if all(r.passed for r in reports) else EXIT_VIOLATION


def cmd_selftest(config, stdout):
    results = acceptance.run_all(config.level, config.workers, config.constant_scale,
                                 numbers=config.criteria, echo=lambda line: stdout.write(line + "\n"))
    if config.out:
        Path(config.out).write_text(acceptance.results_json(results) + "\n")
    ok = all(r.passed for r in results)
    stdout.write(f"{sum(r.passed for r in results)}/{len(results)} criteria passed\n")
    return EXIT_PASS if ok else EXIT_VIOLATION


COMMANDS = {"constants": cmd_constants, "weight": cmd_weight, "verify": cmd_verify,
            "selftest": cmd_selftest}


# -- parsing ------------------------------------------------------------------

def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _finite(text):
    value = float(text)
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("must be finite")
    return value


def build_parser():
    parser = argparse.ArgumentParser(prog="frachardy",
                                     description="Numerical checks of sharp fractional Hardy inequalities.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    c = sub.add_parser("constants", help="print sharp constants")
    c.add_argument("--n", type=_positive_int, required=True)
    c.add_argument("--alpha", type=_finite, required=True)
    c.add_argument("--p", type=_finite)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--domain", help="DomainSpec JSON, inline or a file path")
    common.add_argument("--alpha", type=_finite)
    common.add_argument("--h", type=_finite, help="lattice or sampling step")
    common.add_argument("--sphere-res", dest="sphere_res", type=_positive_int)
    common.add_argument("--out")
    common.add_argument("--workers", type=_positive_int, default=1)

    w = sub.add_parser("weight", parents=[common], help="dump boundary functionals as CSV")
    w.add_argument("--window", type=_finite, nargs="+",
                   help="lo_1..lo_n hi_1..hi_n clipping box, needed for unbounded domains")

    v = sub.add_parser("verify", parents=[common], help="check an inequality on a trial family")
    v.add_argument("--p", type=_finite)
    v.add_argument("--kind", required=True, help=", ".join(k.value for k in WeightKind))
    v.add_argument("--family", default="bumps",
                   help="bumps | sharpness | JSON bump list | grid function file")
    v.add_argument("--k-max", dest="k_max", type=_positive_int, default=6)
    v.add_argument("--tol", type=_finite, default=DEFAULT_TOL)
    v.add_argument("--constant-scale", dest="constant_scale", type=_finite, default=1.0,
                   help=argparse.SUPPRESS)

    s = sub.add_parser("selftest", help="run the acceptance matrix")
    s.add_argument("--level", choices=acceptance.LEVELS, default="quick")
    s.add_argument("--workers", type=_positive_int, default=1)
    s.add_argument("--out", help="write the per-criterion JSON here")
    s.add_argument("--criteria", type=_positive_int, nargs="+", help="run only these criteria")
    s.add_argument("--constant-scale", dest="constant_scale", type=_finite, default=1.0,
                   help=argparse.SUPPRESS)
    return parser


def main(argv=None, stdout=None, stderr=None):
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    if not argv:
        stderr.write(parser.format_help())
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_PASS
    try:
        config = RunConfig.from_args(args)
        return COMMANDS[config.command](config, stdout)
    except CONVERGENCE_ERRORS as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_CONVERGENCE
    except USAGE_ERRORS as exc:
        stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
