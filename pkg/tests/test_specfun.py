import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from fbheat.errors import ComputationError, DomainError
from fbheat.specfun import (JacobiParams, OrderParam, ZeroTable, asymptotic_threshold, bessel_j,
                            bessel_j_next, bessel_j_scaled, bessel_zeros, jacobi_norm_const,
                            jacobi_poly, jacobi_poly_deriv, log_gamma, mcmahon_guess, zero_table)

ORDERS = [-0.99, -0.9, -0.5, -0.25, 0.0, 0.3, 0.5, 1.0, 2.5, 7.0, 12.0]


def test_order_param_validation():
    assert OrderParam(0.0).nu == 0.0
    for bad in (-1.0, -1.5, float("nan"), float("inf")):
        with pytest.raises(DomainError):
            OrderParam(bad)


def test_jacobi_params_validation():
    JacobiParams(-0.9, 0.5)
    with pytest.raises(DomainError):
        JacobiParams(-1.0, 0.5)


@pytest.mark.parametrize("z", [0.1, 0.5, 1.0, 1.7, 2.4, 3.3, 10.5, 123.25, 1e4])
def test_log_gamma_matches_mpmath(z):
    assert log_gamma(z) == pytest.approx(float(mp.loggamma(z)), rel=1e-14, abs=1e-14)


def test_log_gamma_small_arguments():
    z = np.geomspace(1e-6, 0.5, 50)
    ref = special.gammaln(z)
    assert np.allclose(log_gamma(z), ref, rtol=1e-13, atol=1e-14)


@pytest.mark.parametrize("nu", ORDERS)
def test_bessel_j_matches_mpmath_scaled_by_amplitude(nu):
    z = np.concatenate((np.linspace(0.01, 6, 40), np.linspace(6, 60, 40), [150.0, 777.7]))
    ours = bessel_j(nu, z)
    ref = np.array([float(mp.besselj(nu, mp.mpf(v))) for v in z])
    amp = np.maximum(np.abs(ref), np.sqrt(2.0 / (math.pi * np.maximum(z, 1.0))) * 1e-3)
    assert np.max(np.abs(ours - ref) / np.maximum(amp, np.abs(ref))) < 1e-12


def test_bessel_j_each_regime_near_switches():
    for nu in (0.0, 2.5):
        thr = asymptotic_threshold(nu)
        for z in (4.999, 5.001, thr - 1e-3, thr + 1e-3):
            assert bessel_j(nu, z) == pytest.approx(special.jv(nu, z), abs=1e-14)


def test_bessel_j_at_zero():
    assert bessel_j(0.0, 0.0) == 1.0
    assert bessel_j(1.5, 0.0) == 0.0
    assert bessel_j_scaled(0.5, 0.0) == pytest.approx(math.sqrt(2 / math.pi) / 1.0 * 1.0, rel=1e-14)
    with pytest.raises(DomainError):
        bessel_j(-0.5, 0.0)
    with pytest.raises(DomainError):
        bessel_j(0.0, -1.0)


def test_bessel_j_next_is_order_plus_one():
    z = np.linspace(0.5, 40, 30)
    assert np.allclose(bessel_j_next(0.3, z), special.jv(1.3, z), atol=1e-14)


@given(st.floats(-0.95, 6.0), st.floats(0.05, 80.0))
def test_three_term_recurrence(nu, z):
    # J_{nu-1} + J_{nu+1} = (2 nu / z) J_nu, using orders > -1 only
    nu = nu + 1.0
    lhs = bessel_j(nu - 1.0, z) + bessel_j(nu + 1.0, z)
    rhs = 2.0 * nu / z * bessel_j(nu, z)
    scale = max(1.0, abs(2 * nu / z))
    assert abs(lhs - rhs) <= 1e-12 * scale


@pytest.mark.parametrize("nu", [-0.9, 0.0, 0.5, 1.0, 2.5, 10.0])
def test_zeros_match_mpmath(nu):
    from scipy.optimize import brentq
    table = bessel_zeros(nu, 25)
    if nu >= 0:
        ref = np.array([float(mp.besseljzero(nu, n)) for n in range(1, 26)])
    else:
        # independent brackets from a fine sign scan of scipy's J
        z = np.linspace(1e-3, table.zeros[-1] + 1.0, 20000)
        f = special.jv(nu, z)
        idx = np.flatnonzero(np.sign(f[:-1]) != np.sign(f[1:]))[:25]
        ref = np.array([brentq(lambda v: special.jv(nu, v), z[i], z[i + 1], xtol=1e-15) for i in idx])
    assert np.max(np.abs(table.zeros - ref)) < 1e-12


def test_zero_0_first_value():
    assert zero_table(0.0, 1)[1] == pytest.approx(2.404825557695773, abs=1e-14)


def test_zero_table_access_and_immutability():
    t = zero_table(1.0, 5)
    assert isinstance(t, ZeroTable)
    assert t[1] == t.zeros[0]
    with pytest.raises(IndexError):
        t[0]
    with pytest.raises(ValueError):
        t.zeros[0] = 1.0
    assert len(zero_table(1.0, 3)) >= 3


def test_zero_residuals_small_relative_to_slope():
    t = bessel_zeros(0.7, 200)
    assert np.all(np.abs(t.residuals) <= 1e-12 * np.abs(t.slopes) * t.zeros)
    assert np.all(np.diff(t.zeros) > 0)


def test_mcmahon_guess_close_for_large_n():
    nu = 1.5
    t = bessel_zeros(nu, 60)
    assert abs(mcmahon_guess(nu, 60) - t[60]) < 1e-6


def test_zero_table_csv():
    import io
    buf = io.StringIO()
    zero_table(0.5, 3).to_csv(buf, count=3)
    rows = buf.getvalue().splitlines()
    assert rows[0] == "n,lambda,residual"
    assert len(rows) == 4
    assert float(rows[2].split(",")[1]) == pytest.approx(2 * math.pi, abs=1e-13)


@pytest.mark.parametrize("a,b", [(-0.5, -0.5), (0.5, 0.5), (0.0, 0.5), (-0.9, 0.5), (2.5, 0.5), (1.3, -0.7)])
def test_jacobi_poly_matches_scipy(a, b):
    u = np.linspace(-1, 1, 41)
    for k in range(0, 12):
        assert np.allclose(jacobi_poly(k, (a, b), u), special.eval_jacobi(k, a, b, u), rtol=1e-12, atol=1e-12)


def test_jacobi_deriv_by_finite_difference():
    u = np.linspace(-0.9, 0.9, 11)
    h = 1e-6
    for k in range(1, 7):
        fd = (jacobi_poly(k, (0.3, 0.5), u + h) - jacobi_poly(k, (0.3, 0.5), u - h)) / (2 * h)
        assert np.allclose(jacobi_poly_deriv(k, (0.3, 0.5), u), fd, atol=1e-6)


def test_jacobi_norm_constants():
    assert jacobi_norm_const(0, (-0.5, -0.5)) == pytest.approx(1.0, rel=1e-14)
    assert jacobi_norm_const(0, (0.5, 0.5)) == pytest.approx(2 * math.sqrt(2), rel=1e-14)
    # c_k^2 = pi (2k+a+b+1) Gamma(k+a+b+1) Gamma(k+1) / (Gamma(k+a+1) Gamma(k+b+1))
    a, b = 0.3, 0.5
    for k in range(1, 6):
        ref = math.sqrt(math.pi * (2 * k + a + b + 1) * math.gamma(k + a + b + 1) * math.gamma(k + 1)
                        / (math.gamma(k + a + 1) * math.gamma(k + b + 1)))
        assert jacobi_norm_const(k, (a, b)) == pytest.approx(ref, rel=1e-13)


@pytest.mark.parametrize("nu", [0.712504133155926, -0.987, 3.0000001])
def test_zero_search_converges_when_newton_lands_on_root(nu):
    t = bessel_zeros(nu, 40)
    assert np.allclose(special.jv(nu, t.zeros), 0.0, atol=1e-13)


@given(st.floats(-0.99, 20.0))
def test_zeros_interlace(nu):
    a = bessel_zeros(nu, 30).zeros
    b = bessel_zeros(nu + 1.0, 30).zeros
    assert np.all(a < b) and np.all(b[:-1] < a[1:])
