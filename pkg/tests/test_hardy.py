import csv
import io
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frachardy import (Ball, Box, BumpSpec, HalfSpace, Interval, IntervalUnion, KindError,
                       ParameterError, VerificationReport, WeightKind, fs_inequality_check, kappa,
                       quotient, remainder, sample_bump, sharpness_probe, verify)
from frachardy.constants import fs_constant
from frachardy.functions import halfline_sharpness_family
from frachardy.hardy import (CSV_COLUMNS, fs_halfline_check, parse_kind, remainder_exact,
                             reports_to_csv, reports_to_jsonl, weight_field)

HALF_LINE = HalfSpace([1.0])


def test_weight_field_examples():
    a = 1.5
    assert weight_field(Interval(0, 1), a, 2.0, "one_d_two_sided", [[0.5]])[0] == pytest.approx(4 ** a)
    w = weight_field(Interval(0, 2), 2.0, 3.0, WeightKind.MIN_DIST, [[0.5], [1.6]])
    assert w == pytest.approx([0.5 ** -2.0, 0.4 ** -2.0])
    X = np.array([[0.1, 0.2], [-0.5, 0.6], [0.0, 0.0]])
    m = weight_field(Ball([0, 0], 1.0), a, 2.0, "m_alpha", X)
    c = weight_field(Ball([0, 0], 1.0), a, 2.0, "convex_two_sided", X)
    assert np.all(m >= c * (1 - 1e-9))


def test_kind_parsing_and_windows():
    assert parse_kind("M_ALPHA") is WeightKind.M_ALPHA
    assert parse_kind("half_line") is WeightKind.HALF_LINE
    with pytest.raises(KindError):
        parse_kind("nonsense")
    with pytest.raises(KindError):
        WeightKind.DIST.check_domain(IntervalUnion([(0, 1), (2, 3)]))
    with pytest.raises(KindError):
        WeightKind.ONE_D_TWO_SIDED.check_domain(Box([0, 0], [1, 1]))
    with pytest.raises(ParameterError):
        WeightKind.M_ALPHA.check_exponents(1.5, 3.0)
    with pytest.raises(ParameterError):
        WeightKind.DIST.check_exponents(3.5, 3.0)
    assert WeightKind.M_ALPHA.factor == 0.5 and WeightKind.DIST.factor == 1.0
    assert WeightKind.MIN_DIST.constant(1, 2.0, 3.0) == fs_constant(1, 3.0, 2.0)


def test_interval_quotient_above_constant():
    dom = Interval(0, 1)
    f = sample_bump(BumpSpec([0.5], 0.45), dom, 1 / 128)
    assert quotient(f, dom, 1.5, 2.0, WeightKind.ONE_D_TWO_SIDED) >= kappa(1, 1.5)


def test_disk_convex_quotient_above_constant():
    dom = Ball([0, 0], 1.0)
    f = sample_bump(BumpSpec([0.3, 0.1], 0.6), dom, 1 / 32)
    q = quotient(f, dom, 1.5, 2.0, WeightKind.CONVEX_TWO_SIDED)
    assert q >= kappa(2, 1.5) * (1 - 0.02)


@settings(max_examples=15)
@given(st.floats(-4, 4).filter(lambda t: abs(t) > 1e-2))
def test_quotient_is_scale_free(lam):
    dom = Interval(0, 1)
    f = sample_bump(BumpSpec([0.4], 0.3), dom, 1 / 64)
    for kind, p in ((WeightKind.ONE_D_TWO_SIDED, 2.0), (WeightKind.MIN_DIST, 3.0)):
        q1 = quotient(f, dom, 1.5, p, kind)
        q2 = quotient(f.scaled(lam), dom, 1.5, p, kind)
        assert q2 == pytest.approx(q1, rel=1e-10)


def test_union_verify_passes():
    dom = IntervalUnion([(0, 1), (2, 3)])
    family = [sample_bump([BumpSpec([0.5], 0.4), BumpSpec([2.5], 0.3, -1.0)], dom, 1 / 64),
              sample_bump(BumpSpec([2.4], 0.3), dom, 1 / 64)]
    reports = verify(dom, 1.5, 2.0, "one_d_union", family)
    assert all(r.passed for r in reports)


def test_verify_refuses_vacuous_constant():
    dom = Interval(0, 1)
    f = sample_bump(BumpSpec([0.5], 0.4), dom, 1 / 64)
    with pytest.raises(ParameterError):
        verify(dom, 1.5, 2.0, "one_d_two_sided", [f], constant_scale=0.0)
    with pytest.raises(ParameterError):
        verify(dom, 1.0, 2.0, "one_d_two_sided", [f])
    with pytest.raises(ParameterError):
        verify(dom, 1.5, 2.0, "one_d_two_sided", [])


# gaps of the k = 6 member above the half-line constant, frozen from the probe
PROBE_GAPS = {1.25: 0.0276, 1.5: 0.00686, 1.75: 0.00305}


@pytest.mark.parametrize("alpha", sorted(PROBE_GAPS))
def test_sharpness_probe(alpha):
    probe = sharpness_probe(alpha, 6)
    assert probe.nonincreasing
    assert 0.0 < probe.gap <= 0.05
    assert probe.gap == pytest.approx(PROBE_GAPS[alpha], rel=0.02)


def test_negative_control_detected():
    family = [halfline_sharpness_family(1.5, k) for k in range(1, 7)]
    honest = verify(HALF_LINE, 1.5, 2.0, "half_line", family)
    assert all(r.passed for r in honest)
    tampered = verify(HALF_LINE, 1.5, 2.0, "half_line", family, constant_scale=1.1)
    assert not all(r.passed for r in tampered)


def test_remainder_values():
    assert remainder(0.5, 1.5) == pytest.approx(1 - 1 / math.sqrt(2), rel=1e-15)
    assert remainder(0.0, 1.3) == 0.0
    r = remainder(0.3, 1.01)
    assert 0.0 <= r < 0.01
    assert remainder_exact(Fraction(1, 2), Fraction(3, 2)) == pytest.approx(1 - 1 / math.sqrt(2))
    with pytest.raises(ParameterError):
        remainder(0.5, 2.5)


@given(st.floats(0.0, 1.0), st.floats(1.0001, 1.9999))
def test_remainder_nonnegative(x, alpha):
    assert remainder(x, alpha) >= -1e-15


@given(st.fractions(0, 1, max_denominator=10 ** 4), st.fractions(Fraction(101, 100), Fraction(199, 100),
                                                               max_denominator=100))
def test_remainder_exact_nonnegative(x, alpha):
    assert remainder_exact(x, alpha) >= 0


@pytest.mark.parametrize("p,alpha", [(2.0, 1.5), (3.0, 2.0), (2.5, 1.25)])
def test_fs_potential_bound(p, alpha):
    xs = np.round(np.arange(1, 20) * 0.05, 2)
    rep = fs_inequality_check(p, alpha, xs)
    assert rep.passed and rep.margin >= -1e-4
    margins = np.array(rep.meta["margins"])
    # the dropped piece beyond 1 is nonpositive, so the margin grows toward x = 1
    assert margins[-1] > margins[len(margins) // 2]


def test_fs_halfline_identity_within_tail_bound():
    defect, bound = fs_halfline_check(2.0, 1.5, [0.1, 0.5, 0.9], upper=1e3)
    assert np.all(defect >= -1e-9) and np.all(defect <= bound)


def test_report_serialization():
    dom = Interval(0, 1)
    f = sample_bump(BumpSpec([0.5], 0.4), dom, 1 / 64)
    reports = verify(dom, 1.5, 2.0, "one_d_two_sided", [f, f.scaled(2.0)])
    text = reports_to_jsonl(reports)
    lines = text.splitlines()
    assert len(lines) == 2
    again = VerificationReport.from_json(lines[0])
    assert again == reports[0]
    assert json.loads(lines[0])["schema_version"] == 1
    rows = list(csv.reader(io.StringIO(reports_to_csv(reports))))
    assert rows[0] == CSV_COLUMNS
    assert float(rows[1][CSV_COLUMNS.index("quotient")]) == reports[0].quotient
    assert reports_to_jsonl(verify(dom, 1.5, 2.0, "one_d_two_sided", [f, f.scaled(2.0)])) == text
