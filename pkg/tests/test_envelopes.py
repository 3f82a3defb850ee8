import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st

from fbheat.envelopes import (EnvelopeConstants, check_c_pair, envelope_bessel, envelope_jacobi,
                              envelope_longtime, h_bracket, h_endpoints, h_perturbation,
                              sandwich_bounds, sandwich_factors)
from fbheat.errors import DomainError
from fbheat.kernels import EvalPoint, heat_jacobi, heat_k
from fbheat.specfun import zero_table

GRID = np.linspace(0.0, 1.0, 10001)


def test_envelope_bessel_examples():
    assert envelope_bessel(-0.5, EvalPoint(0.1, 0.5, 0.5), 0.3) == pytest.approx(5 / 7 * math.sqrt(10), rel=1e-14)
    assert envelope_bessel(1.0, EvalPoint(0.1, 1.0, 0.5), 0.3) == 0.0


def test_envelope_bessel_dual_path():
    t, x, y, c = 0.01, 0.2, 0.8, 0.25
    f1 = (t + x * y) ** -0.5
    f2 = (1 - x) * (1 - y) / (t + (1 - x) * (1 - y))
    f3 = 1 / math.sqrt(t)
    f4 = math.exp(-c * (x - y) ** 2 / t)
    assert envelope_bessel(0.0, EvalPoint(t, x, y), c) == pytest.approx(f1 * f2 * f3 * f4, rel=1e-14)


@given(st.floats(-0.95, 3), st.floats(1e-3, 1), st.floats(0, 0.99), st.floats(0, 0.99), st.floats(0.01, 1))
def test_envelope_bessel_positive_and_decreasing_in_c(nu, t, x, y, c):
    e1 = envelope_bessel(nu, EvalPoint(t, x, y), c)
    assert e1 > 0 or e1 == 0.0 and (x - y) ** 2 / t > 500
    # the Gaussian factor only moves once c (x-y)^2 / t is above roundoff
    if (x - y) ** 2 / t > 1e-12 and e1 > 1e-300:
        assert envelope_bessel(nu, EvalPoint(t, x, y), c * 1.5) < e1


def test_envelope_jacobi_examples():
    for x in (0.0, 0.3, 1.0):
        assert envelope_jacobi((-0.5, -0.5), EvalPoint(0.2, x, x), 1.0) == pytest.approx(0.2 ** -0.5, rel=1e-14)
    assert envelope_jacobi((0.0, 0.5), EvalPoint(0.2, 0.0, 0.4), 0.3) == 0.0
    assert envelope_jacobi((-0.9, 0.5), EvalPoint(0.1, 0.0, 0.5), 0.3) == math.inf
    with pytest.raises(DomainError):
        envelope_jacobi((0.0, 0.5), EvalPoint(0.2, 0.1, 0.4), 0.0)


def test_envelope_longtime_examples():
    assert envelope_longtime(0.5, EvalPoint(1.0, 0.0, 0.0)) == pytest.approx(math.exp(-math.pi ** 2), rel=1e-13)
    assert envelope_longtime(-0.5, EvalPoint(2.0, 0.5, 0.5)) == pytest.approx(0.25 * math.exp(-math.pi ** 2 / 2), rel=1e-13)
    lam = float(mp.besseljzero(0, 1))
    assert envelope_longtime(0.0, EvalPoint(1.0, 0.0, 0.0)) == pytest.approx(math.exp(-lam ** 2), rel=1e-13)
    assert zero_table(0.0, 1)[1] ** 2 == pytest.approx(5.7831859629467, rel=1e-12)


def test_h_examples():
    assert np.all(h_perturbation(0.5, GRID) == 0.0)
    assert h_perturbation(0.0, 1.0) == pytest.approx(0.25 * (math.pi ** 2 / 4 - 1), rel=1e-14)
    assert h_perturbation(0.0, 1.0) == pytest.approx(0.366850275, abs=1e-9)
    assert h_perturbation(0.0, 0.0) == pytest.approx(math.pi ** 2 / 48, rel=1e-15)


def test_h_limit_by_richardson():
    # numeric limit along x = 10^-k, k = 2..5, Richardson in x^2
    with mp.workdps(40):
        vals = [0.25 * (mp.pi ** 2 / (4 * mp.sin(mp.pi * mp.mpf(10) ** -k / 2) ** 2) - mp.mpf(10) ** (2 * k)) for k in (2, 3, 4, 5)]
        r1 = [(100 * vals[i + 1] - vals[i]) / 99 for i in range(3)]
        limit = float(r1[-1])
    assert h_perturbation(0.0, 0.0) == pytest.approx(limit, rel=1e-12)


def test_h_bracket_against_mpmath():
    xs = np.concatenate((np.geomspace(1e-9, 1, 400), [0.2499999, 0.25, 0.2500001]))
    with mp.workdps(40):
        ref = np.array([float(mp.pi ** 2 / (4 * mp.sin(mp.pi * mp.mpf(x) / 2) ** 2) - 1 / mp.mpf(x) ** 2) for x in xs])
    assert np.max(np.abs(h_bracket(xs) - ref)) < 1e-14


@pytest.mark.parametrize("nu", [-0.9, 0.0, 1.0, 2.5])
def test_h_extremal_bound_and_monotone_bracket(nu):
    h = h_perturbation(nu, GRID)
    assert np.all(np.abs(h) <= abs(h_perturbation(nu, 1.0)) * (1 + 1e-15))
    b = h_bracket(GRID)
    assert np.all(np.diff(b) >= 0)


def test_scalar_inequality():
    u = np.linspace(0, math.pi / 2, 1002)[1:-1]
    assert np.all(np.sin(u) ** 3 > u ** 3 * np.cos(u))


def test_h_endpoints_closed_form():
    for nu in (-0.9, 0.0, 2.5):
        h0, h1 = h_endpoints(nu)
        assert h0 == pytest.approx(h_perturbation(nu, 0.0), rel=1e-14)
        assert h1 == pytest.approx(h_perturbation(nu, 1.0), rel=1e-14)


def test_sandwich_factor_examples():
    lo, hi = sandwich_factors(0.0, 0.5).refined
    assert hi == pytest.approx(0.9023, abs=1e-4)
    assert lo == pytest.approx(math.exp(-0.5 * 0.25 * (math.pi ** 2 / 4 - 1)), rel=1e-14)
    assert lo == pytest.approx(0.8324, abs=1e-4)
    assert sandwich_factors(0.5, 0.7).refined == (1.0, 1.0)
    lo, hi = sandwich_factors(2.5, 0.3).refined
    assert lo > 1.0
    assert hi == pytest.approx(math.exp(0.3 * 6 * (math.pi ** 2 / 4 - 1)), rel=1e-13)


def test_sandwich_bounds_half_is_equality():
    pt = EvalPoint(0.2, 0.3, 0.6)
    lo, hi = sandwich_bounds(0.5, pt)
    assert lo == hi == heat_jacobi((0.5, 0.5), pt).value


@pytest.mark.parametrize("nu", [-0.9, 0.0, 2.5])
def test_sandwich_contains_k(nu):
    for t, x, y in ((0.5, 0.5, 0.5), (0.05, 0.2, 0.3), (0.01, 0.9, 0.95)):
        pt = EvalPoint(t, x, y)
        lo, hi = sandwich_bounds(nu, pt)
        k = heat_k(nu, pt).value
        assert lo <= hi
        assert lo * (1 - 1e-10) <= k <= hi * (1 + 1e-10)


def test_refined_inside_coarse():
    for nu in (-0.9, -0.5, 0.0, 0.5, 1.0, 2.5):
        f = sandwich_factors(nu, 0.4)
        assert f.coarse[0] <= f.refined[0] <= f.refined[1] <= f.coarse[1] * (1 + 1e-15)


def test_constants_validation():
    EnvelopeConstants(2.0, 0.35, 0.2, 1.0).check_pair()
    with pytest.raises(DomainError):
        EnvelopeConstants(2.0, 0.2, 0.35, 1.0).check_pair()
    with pytest.raises(DomainError):
        EnvelopeConstants(-1.0, 0.35, 0.2, 1.0)
    with pytest.raises(DomainError):
        check_c_pair(0.3, 0.26)
