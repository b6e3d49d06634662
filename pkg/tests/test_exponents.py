import math

import pytest
from hypothesis import given, strategies as st

from wavecrit.exponents import (
    STRAUSS_INFINITE,
    InfiniteExponent,
    exponent_identities_report,
    exponent_set,
    holder_conjugate,
    kernel_exponent,
    strauss_exponent,
    strauss_residual,
    weight_exponent,
)


def bisect_root(n, lo=1.0, hi=10.0, iters=200):
    # independent oracle: bisection on the defining quadratic
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if strauss_residual(n, mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def test_three_dimensional_root():
    assert abs(strauss_exponent(3) - (1.0 + math.sqrt(2.0))) < 1e-12


def test_two_dimensional_root_closed_form_and_bisection():
    p = strauss_exponent(2)
    assert abs(p - (3.0 + math.sqrt(17.0)) / 2.0) < 1e-12
    assert abs(p - 3.561552812809) < 1e-10
    assert abs(p - bisect_root(2)) < 1e-12


def test_one_dimensional_marker():
    marker = strauss_exponent(1)
    assert marker is STRAUSS_INFINITE
    assert isinstance(marker, InfiniteExponent)
    with pytest.raises(TypeError):
        1.0 / marker  # the marker must not behave like a number


@pytest.mark.parametrize("n", [0, -1])
def test_nonpositive_dimension_rejected(n):
    with pytest.raises(ValueError):
        strauss_exponent(n)


def test_residual_examples():
    assert abs(strauss_residual(3, 1.0 + math.sqrt(2.0))) < 1e-12
    assert strauss_residual(7, 0.0) == -2.0
    assert abs(strauss_residual(2, 3.5615528128)) < 1e-8


@given(st.integers(min_value=2, max_value=64))
def test_root_solves_quadratic(n):
    assert abs(strauss_residual(n, strauss_exponent(n))) <= 1e-9 * n * n


def test_root_strictly_decreasing():
    values = [strauss_exponent(n) for n in range(2, 65)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_conjugate_pairing():
    for n in range(2, 65):
        p = strauss_exponent(n)
        assert abs(1.0 / p + 1.0 / holder_conjugate(p) - 1.0) < 1e-12


def test_kernel_exponent_values():
    assert abs(kernel_exponent(3) - (2.0 - math.sqrt(2.0))) < 1e-12
    assert abs(kernel_exponent(2) - (0.5 - 2.0 / (3.0 + math.sqrt(17.0)))) < 1e-12
    for n in range(2, 65):
        q = kernel_exponent(n)
        assert q >= 0.0
        # q - (n-3)/2 equals 1 - 1/p > 0
        assert q - (n - 3) / 2.0 > 0.0
        assert q > -1.0


def test_weight_exponent_is_sqrt_two_at_three():
    assert abs(weight_exponent(3) - math.sqrt(2.0)) < 1e-12
    assert weight_exponent(3) > 1.0


def test_exponent_set_fields():
    es = exponent_set(3)
    assert es.n == 3
    assert abs(es.p_conjugate - es.p_strauss / (es.p_strauss - 1.0)) < 1e-14
    assert abs(es.q - kernel_exponent(3)) == 0.0
    with pytest.raises(ValueError):
        exponent_set(1)


@pytest.mark.parametrize("n", [2, 3, 10])
def test_identities_tight(n):
    report = exponent_identities_report(n)
    assert report.passed
    assert report.fitted_constant < 1e-10


def test_identities_moderate_dimensions():
    for n in range(2, 11):
        assert exponent_identities_report(n).fitted_constant < 1e-10
    assert exponent_identities_report(10).fitted_constant < 1e-9
