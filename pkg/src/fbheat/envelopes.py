"""Closed-form envelopes, the zero-order perturbation H^nu and the kernel sandwich factors."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .specfun import as_jacobi, as_order, zero_table

GAUSS_RATE = 0.25
SERIES_SWITCH = 0.25

_BERNOULLI = [Fraction(1), Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
              Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
              Fraction(43867, 798), Fraction(-174611, 330), Fraction(854513, 138)]


def _csc2_laurent():
    """Coefficients a_n of 1/sin^2(u) - 1/u^2 = sum_{n>=1} a_n u^{2n-2}."""
    out = []
    for n in range(1, len(_BERNOULLI)):
        c = (2 * n - 1) * (-1) ** (n + 1) * 4 ** n * _BERNOULLI[n] / math.factorial(2 * n)
        out.append(float(c))
    return np.array(out)


_CSC2 = _csc2_laurent()


@dataclass(frozen=True)
class EnvelopeConstants:
    """Constants (C, c1, c2) of a two-sided Gaussian envelope on (0, T]."""

    C: float
    c1: float
    c2: float
    T: float

    def __post_init__(self):
        if not all(v > 0 and math.isfinite(v) for v in (self.C, self.c1, self.c2, self.T)):
            raise DomainError("C, c1, c2 and T must be positive and finite")

    def check_pair(self):
        check_c_pair(self.c1, self.c2)
        return self


def check_c_pair(c1, c2):
    """A verification pair must straddle the Gaussian rate: c1 > 1/4 > c2 > 0."""
    if not (c1 > GAUSS_RATE > c2 > 0):
        raise DomainError(f"need c1 > 1/4 > c2 > 0, got c1={c1!r}, c2={c2!r}")


def _gauss(t, x, y, c):
    return np.exp(-c * (x - y) ** 2 / t) / np.sqrt(t)


def envelope_bessel_values(nu, t, x, y, c):
    """Vectorised envelope_bessel over broadcast (t, x, y)."""
    nu = as_order(nu)
    t, x, y = (np.asarray(a, dtype=float) for a in (t, x, y))
    far = (1.0 - x) * (1.0 - y)
    return (t + x * y) ** (-nu - 0.5) * far / (t + far) * _gauss(t, x, y, c)


def envelope_bessel(nu, pt, c) -> float:
    """[t+xy]^{-nu-1/2} (1-x)(1-y)/(t+(1-x)(1-y)) t^{-1/2} exp(-c (x-y)^2 / t)."""
    if not c > 0:
        raise DomainError("c must be positive")
    return float(envelope_bessel_values(nu, pt.t, pt.x, pt.y, c))


def _ratio_power(num, t, e):
    """(num/(t+num))^e with 0^e read as 0, 1 or +inf according to the sign of e."""
    base = num / (t + num)
    if e == 0:
        return np.ones_like(base)
    with np.errstate(divide="ignore"):
        return np.power(base, e)


def envelope_jacobi_values(p, t, x, y, c):
    p = as_jacobi(p)
    t, x, y = (np.asarray(a, dtype=float) for a in (t, x, y))
    near = _ratio_power(x * y, t, p.alpha + 0.5)
    far = _ratio_power((1.0 - x) * (1.0 - y), t, p.beta + 0.5)
    with np.errstate(invalid="ignore"):
        return near * far * _gauss(t, x, y, c)


def envelope_jacobi(p, pt, c) -> float:
    """[xy/(t+xy)]^{a+1/2} [(1-x)(1-y)/(t+(1-x)(1-y))]^{b+1/2} t^{-1/2} exp(-c (x-y)^2/t).

    Endpoint factors with a negative exponent return +inf; a corner where
    one bracket is +inf and the other 0 has no limit and returns nan.
    """
    if not c > 0:
        raise DomainError("c must be positive")
    return float(envelope_jacobi_values(p, pt.t, pt.x, pt.y, c))


def envelope_longtime_values(nu, t, x, y):
    lam1 = zero_table(as_order(nu), 1)[1]
    t, x, y = (np.asarray(a, dtype=float) for a in (t, x, y))
    return np.exp(-t * lam1 * lam1) * (1.0 - x) * (1.0 - y)


def envelope_longtime(nu, pt) -> float:
    """exp(-t lambda_1^2) (1-x)(1-y)."""
    return float(envelope_longtime_values(nu, pt.t, pt.x, pt.y))


def h_bracket(x):
    """B(x) = pi^2 / (4 sin^2(pi x/2)) - 1/x^2, increasing on (0, 1], B(0) = pi^2/12."""
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)):
        raise DomainError("x must lie in [0, 1]")
    u = 0.5 * math.pi * xa
    small = xa < SERIES_SWITCH
    u2 = np.where(small, u * u, 0.0)
    series = np.polynomial.polynomial.polyval(u2, _CSC2) * (math.pi ** 2 / 4.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = math.pi ** 2 / (4.0 * np.sin(u) ** 2) - 1.0 / (xa * xa)
    out = np.where(small, series, direct)
    return float(out) if np.ndim(x) == 0 else out


def h_perturbation(nu, x):
    """H^nu(x) = (1/4 - nu^2) B(x)."""
    nu = as_order(nu)
    return (0.25 - nu * nu) * h_bracket(x)


def h_endpoints(nu):
    """(H^nu(0), H^nu(1)) in closed form."""
    nu = as_order(nu)
    k = 0.25 - nu * nu
    return k * math.pi ** 2 / 12.0, k * (math.pi ** 2 / 4.0 - 1.0)


@dataclass(frozen=True)
class SandwichFactors:
    """Multipliers of the Jacobi kernel bracketing K_t^nu at one time."""

    refined: tuple
    coarse: tuple


def sandwich_factors(nu, t) -> SandwichFactors:
    """Refined: [e^{-tH(1)}, e^{-tH(0)}] for |nu| <= 1/2, else [e^{-tH(0)}, e^{-tH(1)}].
    Coarse: [e^{-t|H(1)|}, e^{t|H(1)|}].
    """
    nu = as_order(nu)
    h0, h1 = h_endpoints(nu)
    if -0.5 <= nu <= 0.5:
        refined = (math.exp(-t * h1), math.exp(-t * h0))
    else:
        refined = (math.exp(-t * h0), math.exp(-t * h1))
    a = abs(h1)
    return SandwichFactors(refined, (math.exp(-t * a), math.exp(t * a)))


def sandwich_bounds(nu, pt, pol=None):
    """Refined bracket (lower, upper) for K_t^nu(x, y) built from the Jacobi kernel with (nu, 1/2)."""
    from .kernels import heat_jacobi

    nu = as_order(nu)
    g = heat_jacobi((nu, 0.5), pt, pol).value
    lo, hi = sandwich_factors(nu, pt.t).refined
    if math.isinf(g):
        return g, g
    return lo * g, hi * g
