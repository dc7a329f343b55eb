import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from frachardy import (Ball, Box, BumpSpec, GridFunction, HalfSpace, Interval, SupportError,
                       halfline_sharpness_family, inversion_1d, sample_bump)
from frachardy.functions import default_bumps, restrict_to_line, sharpness_schedule, smoothstep


def test_bump_center_value():
    f = sample_bump(BumpSpec([0.5], 0.4), Interval(0, 1), 0.01)
    assert f(np.array([[0.5]]))[0] == pytest.approx(math.exp(-1), rel=1e-12)
    assert f.values.max() == pytest.approx(math.exp(-1), rel=1e-12)
    assert np.all(f.values >= 0)


def test_bump_vanishes_on_support_boundary():
    spec = BumpSpec([0.5, 0.5], 0.3, 2.0)
    assert spec.evaluate(np.array([[0.8, 0.5], [0.5, 0.2], [0.9, 0.9]])).tolist() == [0, 0, 0]


def test_bump_norm_refinement():
    spec = BumpSpec([0.5, 0.5], 0.4)
    dom = Box([0, 0], [1, 1])
    coarse = sample_bump(spec, dom, 1 / 32).norm_p(2)
    fine = sample_bump(spec, dom, 1 / 64).norm_p(2)
    assert abs(coarse - fine) / fine < (1 / 32) ** 2


def test_support_checks():
    dom = Interval(0, 1)
    with pytest.raises(SupportError):
        sample_bump(BumpSpec([0.5], 0.02), dom, 0.01).check_support(dom)
    with pytest.raises(SupportError):
        sample_bump(BumpSpec([0.95], 0.2), Interval(0, 2), 0.01).check_support(dom)


def test_inversion_support_and_involution():
    f = sample_bump(BumpSpec([1.5], 0.45), Interval(1, 2), 1 / 400)
    g = inversion_1d(f, 1.5)
    X, _ = g.support_points()
    assert X.min() > 0.5 and X.max() < 1.0
    back = inversion_1d(g, 1.5, h_out=f.h)
    x = np.linspace(1.1, 1.9, 41)[:, None]
    assert np.max(np.abs(back(x) - f(x))) < 1e-4 * f.values.max()


def test_inversion_alpha_one_is_composition():
    f = sample_bump(BumpSpec([1.5], 0.45), Interval(1, 2), 1 / 400)
    g = inversion_1d(f, 1.0)
    y = np.linspace(0.55, 0.95, 21)
    assert g(y[:, None]) == pytest.approx(f((1 / y)[:, None]), abs=1e-6)


def test_restrict_to_axis_gives_lattice_column():
    f = sample_bump(BumpSpec([0.5, 0.5], 0.4), Box([0, 0], [1, 1]), 1 / 32)
    j = 7
    x = f.origin + f.h * np.array([0, j])
    s, vals = restrict_to_line(f, x, [1.0, 0.0], f.h)
    idx = np.rint(s / f.h).astype(int)
    keep = (idx >= 0) & (idx < f.shape[0])
    assert vals[keep] == pytest.approx(f.values[idx[keep], j], abs=1e-14)
    assert np.all(vals[~keep] == 0)


def test_restrict_radial_profile_is_direction_free():
    spec = BumpSpec([0.5, 0.5], 0.4)
    f = sample_bump(spec, Box([0, 0], [1, 1]), 1 / 64)
    c = np.array(spec.center)
    profiles = []
    for th in (0.0, 0.4, 1.1):
        w = np.array([math.cos(th), math.sin(th)])
        s, vals = restrict_to_line(f, c, w, 0.01)
        profiles.append(np.interp(np.linspace(-0.35, 0.35, 15), s, vals))
    assert np.max(np.abs(profiles[1] - profiles[0])) < 1e-4
    assert np.max(np.abs(profiles[2] - profiles[0])) < 1e-4


def test_interpolation_error_is_second_order_or_better():
    spec = BumpSpec([0.5, 0.5], 0.4)
    dom = Box([0, 0], [1, 1])
    X = np.random.default_rng(0).uniform(0.2, 0.8, size=(200, 2))
    errs = [np.max(np.abs(sample_bump(spec, dom, h)(X) - spec.evaluate(X))) for h in (1 / 32, 1 / 64)]
    assert errs[1] < errs[0] / 4


def test_default_bumps_fit_domains():
    for dom in (Interval(0, 1), Box([0, 0], [1, 1]), Ball([0, 0], 1.0), HalfSpace([1.0])):
        for spec in default_bumps(dom):
            f = sample_bump(spec, dom, 0.2 * spec.radius / 2)
            f.check_support(dom)


def test_smoothstep():
    assert smoothstep([-1.0, 0.0, 0.5, 1.0, 2.0]).tolist() == pytest.approx([0, 0, 0.5, 1, 1])


def test_halfline_trial_vanishes_near_origin():
    trial = halfline_sharpness_family(1.5, 2)
    eps, plateau, edge = sharpness_schedule(2)
    assert trial.eps == eps
    tiny = math.exp(-plateau - edge - 1.0)
    assert trial(np.array([tiny, 0.0, 10 * trial.upper])).tolist() == [0.0, 0.0, 0.0]
    x = np.array([0.5 * trial.delta, 0.5])
    assert np.all(trial(x[1:]) > 0)


# -- serialization --------------------------------------------------------------

values_2d = hnp.arrays(np.float64, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=6),
                       elements=st.floats(-1e6, 1e6, allow_nan=False))


@given(values_2d, st.floats(1e-4, 10.0), st.floats(-50, 50), st.floats(-50, 50))
def test_gridfunction_round_trips(values, h, o0, o1):
    f = GridFunction([o0, o1], h, values, "trial")
    for g in (GridFunction.from_csv(f.to_csv()), GridFunction.from_bytes(f.to_bytes())):
        assert g.h == f.h
        assert np.array_equal(g.origin, f.origin)
        assert np.array_equal(g.values, f.values)


def test_gridfunction_csv_file(tmp_path):
    f = sample_bump(BumpSpec([0.5], 0.4), Interval(0, 1), 0.05)
    path = tmp_path / "f.csv"
    f.to_csv(path)
    assert path.read_text().startswith("# frachardy-gridfunction version=1 n=1")
    assert np.array_equal(GridFunction.from_csv(path).values, f.values)


def test_gridfunction_rejects_bad_blob():
    with pytest.raises(ValueError):
        GridFunction.from_bytes(b"NOPE" + bytes(20))
    with pytest.raises(ValueError):
        GridFunction.from_csv("x,y\n1,2\n")


def test_gridfunction_is_read_only():
    f = GridFunction([0.0], 0.1, np.ones(5))
    with pytest.raises(ValueError):
        f.values[0] = 2.0
