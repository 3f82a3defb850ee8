import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fbheat.errors import QuadratureError
from fbheat.quadrature import gauss_legendre, integrate
from fbheat.summation import Accumulator, compensated_sum, two_sum


@given(st.floats(-1e300, 1e300), st.floats(-1e300, 1e300))
def test_two_sum_is_exact(a, b):
    s, e = two_sum(a, b)
    if math.isfinite(s):
        assert s == a + b
        # s + e equals a + b exactly: check with fractions
        from fractions import Fraction
        assert Fraction(s) + Fraction(e) == Fraction(a) + Fraction(b)


def test_compensated_sum_beats_naive():
    terms = np.array([1.0, 1e100, 1.0, -1e100] * 1000)
    assert compensated_sum(terms) == 2000.0


def test_accumulator_vector():
    acc = Accumulator((3,))
    for v in (np.array([1e16, 1.0, 0.1]), np.array([1.0, 1.0, 0.2]), np.array([-1e16, -2.0, 0.3])):
        acc.add(v)
    assert np.allclose(acc.value, [1.0, 0.0, 0.6], atol=1e-15)


def test_integrate_smooth_and_singular():
    v, _ = integrate(np.exp, 0.0, 1.0, tol=1e-13)
    assert v == pytest.approx(math.e - 1, abs=1e-13)
    v, _ = integrate(lambda x: x ** -0.8, 0.0, 1.0, tol=1e-10)
    assert v == pytest.approx(5.0, abs=1e-9)


def test_integrate_vector_valued():
    v, _ = integrate(lambda x: np.vstack((x, x ** 2)), 0.0, 2.0, tol=1e-12)
    assert np.allclose(v, [2.0, 8.0 / 3.0], atol=1e-12)


def test_integrate_raises_with_estimate():
    with pytest.raises(QuadratureError) as info:
        integrate(lambda x: np.sin(1.0 / np.maximum(x, 1e-300)), 0.0, 1.0, tol=1e-15, max_panels=200)
    assert info.value.estimate is not None


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(5, 0.0, 2.0)
    assert np.sum(w * x ** 9) == pytest.approx(2.0 ** 10 / 10, rel=1e-13)
