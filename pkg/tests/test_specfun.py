import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from src.PerceptronLab.engines import specfun

# ln H(x) at the stability grid; H(40) from the asymptotic series of erfc.
LOG_TAIL_ORACLE = {
    -40.0: 0.0,
    -10.0: -7.6198530241604696e-24,
    0.0: -0.6931471805599453,
    40.0: -804.60844201377,
}


@pytest.mark.parametrize("x,expected", sorted(LOG_TAIL_ORACLE.items()))
def test_log_gauss_tail_oracle(x, expected):
    value = specfun.log_gauss_tail(x)
    assert math.isfinite(value)
    if expected == 0.0:
        assert abs(value) < 1e-300
    else:
        assert value == pytest.approx(expected, rel=1e-9)


def test_log_gauss_tail_at_ten_matches_log_ndtr():
    assert specfun.log_gauss_tail(10.0) == pytest.approx(float(special.log_ndtr(-10.0)), rel=1e-9)


def test_log_gauss_tail_agrees_with_log_ndtr_on_a_wide_grid():
    for x in np.linspace(-30.0, 38.0, 137):
        expected = float(special.log_ndtr(-x))
        assert specfun.log_gauss_tail(float(x)) == pytest.approx(expected, rel=1e-9, abs=1e-300)


def test_branches_meet_at_the_switch():
    x = specfun.LOG_TAIL_SWITCH
    direct = specfun._log_tail_direct(x)
    mills = specfun._log_tail_mills(x)
    assert direct == pytest.approx(mills, rel=1e-12)


def test_no_nan_far_out():
    for x in (-1e3, -50.0, 50.0, 1e3, 1e5):
        assert not math.isnan(specfun.log_gauss_tail(x))
    assert specfun.log_gauss_tail(1e5) < -4e9


def test_derivative_matches_finite_differences():
    h = 1e-5
    for x in np.linspace(-6.0, 6.0, 49):
        x = float(x)
        numeric = (specfun.log_gauss_tail(x + h) - specfun.log_gauss_tail(x - h)) / (2 * h)
        assert specfun.d_log_gauss_tail(x) == pytest.approx(numeric, abs=1e-6)


@given(st.floats(min_value=-8.0, max_value=8.0))
def test_tail_symmetry(x):
    assert specfun.gauss_tail(x) + specfun.gauss_tail(-x) == pytest.approx(1.0, abs=1e-15)


@given(st.floats(min_value=0.1, max_value=50.0))
def test_mills_ratio_bounds(x):
    inverse = 1.0 / specfun.mills_ratio(x)
    assert x < inverse < x + 1.0 / x


@settings(max_examples=200)
@given(st.floats(min_value=-8.0, max_value=60.0), st.floats(min_value=1e-6, max_value=10.0))
def test_log_gauss_tail_is_decreasing(x, dx):
    assert specfun.log_gauss_tail(x) >= specfun.log_gauss_tail(x + dx)


@pytest.mark.parametrize(
    "fn,x,expected",
    [
        (specfun.gauss_pdf, 0.0, 0.3989422804014327),
        (specfun.gauss_pdf, 2.0, 0.05399096651318806),
        (specfun.gauss_tail, 0.0, 0.5),
        (specfun.gauss_tail, 1.0, 0.15865525393145705),
        (specfun.mills_ratio, 0.0, 1.2533141373155003),
        (specfun.mills_ratio, 2.0, 0.42137078547722143),
    ],
)
def test_reference_values(fn, x, expected):
    assert fn(x) == pytest.approx(expected, rel=1e-14)


def test_density_is_even():
    for x in (0.5, 1.0, 3.7, 12.0):
        assert specfun.gauss_pdf(x) == specfun.gauss_pdf(-x)


def test_mills_ratio_at_ten():
    assert 0.09901 < specfun.mills_ratio(10.0) < 0.1


def test_exp_of_log_tail_recovers_the_tail():
    for x in np.linspace(-8.0, 8.0, 801):
        x = float(x)
        assert math.exp(specfun.log_gauss_tail(x)) == pytest.approx(specfun.gauss_tail(x), rel=1e-12)


def test_branches_agree_around_the_switch():
    for x in np.linspace(5.0, 7.0, 81):
        x = float(x)
        assert specfun._log_tail_direct(x) == pytest.approx(specfun._log_tail_mills(x), rel=1e-12)
