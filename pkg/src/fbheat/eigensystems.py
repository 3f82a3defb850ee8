"""The Fourier-Bessel systems phi_n, psi_n and the Jacobi functions Phi_k on [0, 1].

phi_n(x)  = sqrt(2) x^-nu J_nu(lambda_n x) / |J_{nu+1}(lambda_n)|   (orthonormal in x^{2nu+1} dx)
psi_n(x)  = x^{nu+1/2} phi_n(x)                                     (orthonormal in dx)
Phi_k(x)  = c_k sin(pi x/2)^{a+1/2} cos(pi x/2)^{b+1/2} P_k^{a,b}(cos pi x)   (orthonormal in dx)

Limiting endpoint values that diverge are returned as +/-inf rather than
raised, since they are genuine limits of the functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .quadrature import integrate
from .specfun import (
    as_jacobi,
    as_order,
    bessel_pair_scaled,
    jacobi_norm_consts,
    jacobi_poly_all,
    zero_table,
)

SQRT2 = math.sqrt(2.0)


def _check_n(n):
    if int(n) != n or n < 1:
        raise DomainError(f"Fourier-Bessel index must be an integer >= 1, got {n!r}")
    return int(n)


def _check_k(k):
    if int(k) != k or k < 0:
        raise DomainError(f"Jacobi index must be an integer >= 0, got {k!r}")
    return int(k)


def _check_x(x):
    xa = np.asarray(x, dtype=float)
    if np.any((xa < 0.0) | (xa > 1.0)) or np.any(~np.isfinite(xa)):
        raise DomainError("x must lie in [0, 1]")
    return xa


def _out(x, arr):
    return float(arr) if np.ndim(x) == 0 else arr


# ---------------------------------------------------------------------------
# Fourier-Bessel system

def bessel_basis(nu: float, nmax: int, x, with_envelope: bool = False):
    """Rows phi_1..phi_nmax evaluated at the points x; shape (nmax, len(x)).

    With ``with_envelope`` also returns the local oscillation amplitude
    sqrt(2) lambda^nu |(z^-nu J_nu, z^-nu J_{nu+1})| / |J_{nu+1}(lambda)|, an
    upper bound for |phi_n| near x that does not vanish at its zeros; it is
    used to size roundoff in the kernel series.
    """
    nu = as_order(nu)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    table = zero_table(nu, nmax)
    lam = table.zeros[:nmax]
    scale = SQRT2 * lam ** nu / np.abs(table.slopes[:nmax])
    z = lam[:, None] * x[None, :]
    a, b = bessel_pair_scaled(nu, z.ravel())
    a = a.reshape(z.shape)
    phi = scale[:, None] * a
    phi[:, x == 1.0] = 0.0
    if not with_envelope:
        return phi
    b = b.reshape(z.shape)
    env = scale[:, None] * np.hypot(a, b)
    return phi, env


def phi(n, nu, x):
    """Fourier-Bessel function phi_n^nu(x), with phi_n(0) taken as the limit."""
    n = _check_n(n)
    xa = _check_x(x)
    row = bessel_basis(nu, n, xa.ravel())[n - 1]
    return _out(x, row.reshape(xa.shape))


def _x_power(x, e):
    with np.errstate(divide="ignore"):
        return np.power(x, e)


def psi(n, nu, x):
    """psi_n^nu(x) = x^{nu+1/2} phi_n^nu(x); +inf at x = 0 when nu < -1/2."""
    nu = as_order(nu)
    n = _check_n(n)
    xa = _check_x(x)
    flat = xa.ravel()
    row = bessel_basis(nu, n, flat)[n - 1] * _x_power(flat, nu + 0.5)
    return _out(x, row.reshape(xa.shape))


def eigenvalue_bessel(n, nu) -> float:
    """lambda_{n,nu}^2."""
    n = _check_n(n)
    lam = zero_table(nu, n)[n]
    return lam * lam


# ---------------------------------------------------------------------------
# Jacobi system

def _half_angles(x):
    s = np.sin(0.5 * math.pi * x)
    c = np.sin(0.5 * math.pi * (1.0 - x))
    return s, c


def jacobi_basis(p, kmax: int, x, reduced: bool = False):
    """Rows Phi_0..Phi_kmax at the points x; shape (kmax+1, len(x)).

    ``reduced`` divides out x^{alpha+1/2}, giving c_k (sin(pi x/2)/x)^{alpha+1/2}
    cos(pi x/2)^{beta+1/2} P_k(cos pi x), which is finite and positive-weighted at x = 0.
    """
    p = as_jacobi(p)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s, c = _half_angles(x)
    u = (c - s) * (c + s)
    poly = jacobi_poly_all(kmax, p.alpha, p.beta, u)
    ck = jacobi_norm_consts(kmax, p.alpha, p.beta)
    return ck[:, None] * poly * jacobi_weight(p, x, reduced)[None, :]


def jacobi_weight(p, x, reduced: bool = False):
    """sin(pi x/2)^{alpha+1/2} cos(pi x/2)^{beta+1/2}, optionally divided by x^{alpha+1/2}."""
    p = as_jacobi(p)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    s, c = _half_angles(x)
    if reduced:
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(x == 0.0, 0.5 * math.pi, s / x)
    return _x_power(s, p.alpha + 0.5) * _x_power(c, p.beta + 0.5)


def jacobi_fun(k, p, x):
    """Jacobi function Phi_k^{alpha,beta}(x); endpoint values are limits (0, finite or inf)."""
    k = _check_k(k)
    xa = _check_x(x)
    with np.errstate(invalid="ignore"):
        row = jacobi_basis(p, k, xa.ravel())[k]
    return _out(x, row.reshape(xa.shape))


def eigenvalue_jacobi(k, p) -> float:
    """Lambda_k = pi^2 (k + (alpha+beta+1)/2)^2."""
    k = _check_k(k)
    p = as_jacobi(p)
    return math.pi ** 2 * (k + 0.5 * (p.alpha + p.beta + 1.0)) ** 2


# ---------------------------------------------------------------------------
# inner products

@dataclass(frozen=True)
class WeightSpec:
    """Integration weight on [0, 1]: Lebesgue, or x^exponent dx (exponent > -1)."""

    kind: str = "lebesgue"
    exponent: float = 0.0

    def __post_init__(self):
        if self.kind not in ("lebesgue", "power"):
            raise DomainError(f"unknown weight kind {self.kind!r}")
        if self.kind == "power" and not self.exponent > -1.0:
            raise DomainError("power weight exponent must exceed -1")

    @classmethod
    def lebesgue(cls):
        return cls("lebesgue", 0.0)

    @classmethod
    def power(cls, nu):
        """d mu_nu(x) = x^{2 nu + 1} dx."""
        return cls("power", 2.0 * as_order(nu) + 1.0)


def weighted_integral(fun, weight: WeightSpec, tol: float):
    """Integrate fun(x) against ``weight`` on [0, 1]; fun may be vector-valued.

    For x^e dx with e < 1 the substitution x = s^{1/(e+1)} turns the weight
    into a constant and removes the endpoint singularity.
    """
    if weight.kind == "power":
        e = weight.exponent
        if e < 1.0:
            q = 1.0 / (e + 1.0)
            return integrate(lambda s: fun(np.power(s, q)) * q, 0.0, 1.0, tol=tol)
        return integrate(lambda x: fun(x) * np.power(x, e), 0.0, 1.0, tol=tol)
    return integrate(fun, 0.0, 1.0, tol=tol)


def inner_product(f, g, w: WeightSpec | None = None, tol: float = 1e-10) -> float:
    """<f, g>_w = int_0^1 f g dw by adaptive Gauss-Kronrod.

    Raises QuadratureError (carrying the achieved estimate) when the
    subdivision budget runs out before ``tol`` is met.
    """
    w = WeightSpec.lebesgue() if w is None else w
    value, _ = weighted_integral(lambda x: f(x) * g(x), w, tol)
    return value


def gram_matrix(basis, w: WeightSpec, tol: float = 1e-11) -> np.ndarray:
    """Gram matrix of the functions returned row-wise by basis(x)."""
    def products(x):
        b = basis(x)
        return b[:, None, :] * b[None, :, :]
    value, _ = weighted_integral(products, w, tol)
    return value


def gram_phi(nu, nmax: int = 20, tol: float = 1e-11):
    return gram_matrix(lambda x: bessel_basis(nu, nmax, x), WeightSpec.power(nu), tol)


def gram_psi(nu, nmax: int = 20, tol: float = 1e-11):
    nu = as_order(nu)
    return gram_matrix(lambda x: bessel_basis(nu, nmax, x) * np.power(x, nu + 0.5),
                       WeightSpec.lebesgue(), tol)


def gram_jacobi(p, kmax: int = 19, tol: float = 1e-11):
    return gram_matrix(lambda x: jacobi_basis(p, kmax, x), WeightSpec.lebesgue(), tol)


def lemma_symmetry_defect(n, k, nu, tol: float = 1e-13) -> float:
    """|lambda_n^2 <psi_n, Phi_k> - <psi_n, (Lambda_k + H) Phi_k>| with Phi_k = Phi_k^{nu,1/2}.

    The right side uses L Phi_k = (Lambda_k + H) Phi_k, so no numerical
    derivative is taken. Both pairings are evaluated as
    int phi_n * (Phi_k / x^{nu+1/2}) x^{2nu+1} dx, which is smooth after the
    power-weight substitution even when psi_n and Phi_k blow up at 0.
    """
    from .envelopes import h_perturbation

    nu = as_order(nu)
    n = _check_n(n)
    k = _check_k(k)
    p = (nu, 0.5)
    lam2 = eigenvalue_bessel(n, nu)
    big_lam = eigenvalue_jacobi(k, p)

    def pair(x):
        ph = bessel_basis(nu, n, x)[n - 1]
        red = jacobi_basis(p, k, x, reduced=True)[k]
        return np.vstack((lam2 * ph * red, ph * (big_lam + h_perturbation(nu, x)) * red))

    # both pairings scale with the eigenvalues, so the tolerance is relative to them
    scale = max(1.0, lam2, abs(big_lam) + abs(h_perturbation(nu, 1.0)))
    (lhs, rhs), _ = weighted_integral(pair, WeightSpec.power(nu), tol * scale)
    return abs(lhs - rhs)
