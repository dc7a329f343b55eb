import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frachardy import (ParameterError, fs_constant, gamma_fn, kappa, sphere_alpha_integral)
from frachardy.constants import FracParams, kappa_ground_state, sphere_area

# 40-digit mpmath evaluations of the closed forms, frozen
KAPPA_1_15 = 0.20735251809737327015
FS_2_3_2 = 0.32860992579312217130


def test_gamma_values():
    assert gamma_fn(1.0) == 1.0
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-15)
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)


@pytest.mark.parametrize("x", [0.0, -1.0, 50.5])
def test_gamma_window(x):
    with pytest.raises(ParameterError):
        gamma_fn(x)


def test_sphere_integral_closed_forms():
    assert sphere_alpha_integral(1, 1.3) == 2.0
    assert sphere_alpha_integral(2, 2.0) == pytest.approx(math.pi, rel=1e-14)
    assert sphere_alpha_integral(3, 2.0) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    assert sphere_alpha_integral(3, 2.0) == pytest.approx(sphere_area(3) / 3, rel=1e-14)


def test_kappa_vanishes_at_one():
    for n in (1, 2, 3, 4):
        assert kappa(n, 1.0) == 0.0


def test_kappa_high_precision_value():
    assert kappa(1, 1.5) == pytest.approx(KAPPA_1_15, rel=1e-13)


def test_kappa_window():
    with pytest.raises(ParameterError):
        kappa(1, 2.5)
    with pytest.raises(ParameterError):
        kappa(0, 1.5)


@pytest.mark.parametrize("alpha", [0.3, 0.7, 1.25, 1.5, 1.75, 1.95])
def test_kappa_matches_ground_state_route(alpha):
    assert kappa_ground_state(alpha) == pytest.approx(kappa(1, alpha), rel=1e-9)


def test_fs_constant_cross_scheme():
    assert fs_constant(2, 3.0, 2.0) == pytest.approx(FS_2_3_2, rel=1e-8)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("alpha", [1.25, 1.5, 1.75])
def test_fs_constant_p2_is_twice_kappa(n, alpha):
    assert fs_constant(n, 2.0, alpha) == pytest.approx(2 * kappa(n, alpha), rel=1e-9)


def test_fs_constant_vanishes_near_alpha_one():
    assert fs_constant(1, 2.0, 1.0 + 1e-6) < 1e-5


def test_fs_constant_window():
    with pytest.raises(ParameterError):
        fs_constant(1, 2.0, 2.0)
    with pytest.raises(ParameterError):
        fs_constant(1, 1.0, 1.5)


def test_params_windows():
    FracParams(2, 1.5, 3.0).require_fs()
    with pytest.raises(ParameterError):
        FracParams(2, 0.5).require_two_sided()
    with pytest.raises(ParameterError):
        FracParams(0, 1.5)


@given(st.integers(1, 5), st.floats(0.05, 1.95))
def test_kappa_sign(n, alpha):
    k = kappa(n, alpha)
    if alpha == 1.0:
        assert k == 0.0
    else:
        assert k > 0.0


@given(st.integers(1, 4), st.floats(0.05, 2.0))
def test_sphere_integral_bounded_by_area(n, alpha):
    # |w_n| <= 1 on the sphere
    assert 0.0 < sphere_alpha_integral(n, alpha) <= sphere_area(n) * (1 + 1e-12)


@given(st.floats(1.1, 4.0), st.floats(0.05, 0.95))
def test_fs_constant_positive(p, frac):
    alpha = 1.0 + frac * (min(p, 2.0) - 1.0)
    assert fs_constant(1, p, alpha) > 0.0
    assert np.isfinite(fs_constant(3, p, alpha))
