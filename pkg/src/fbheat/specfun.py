"""Double-precision special functions: log-gamma, Bessel J, Bessel zeros, Jacobi polynomials.

Everything here is written from scratch on top of numpy so that the heat
kernel series do not depend on an external special-function library.
Functions accept scalars or numpy arrays unless stated otherwise.
"""

from __future__ import annotations

import csv
import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .errors import ComputationError, DomainError
from .summation import Accumulator

EPS = np.finfo(float).eps
EULER_GAMMA = 0.57721566490153286061


@dataclass(frozen=True)
class OrderParam:
    """Bessel order nu > -1."""

    nu: float

    def __post_init__(self):
        if not (np.isfinite(self.nu) and self.nu > -1.0):
            raise DomainError(f"Bessel order must satisfy nu > -1, got {self.nu!r}")

    def __float__(self):
        return float(self.nu)


@dataclass(frozen=True)
class JacobiParams:
    """Jacobi type parameters alpha, beta > -1."""

    alpha: float
    beta: float

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > -1.0):
                raise DomainError(f"Jacobi parameter {name} must be > -1, got {v!r}")


def as_order(nu) -> float:
    if isinstance(nu, OrderParam):
        return nu.nu
    return OrderParam(float(nu)).nu


def as_jacobi(p) -> JacobiParams:
    if isinstance(p, JacobiParams):
        return p
    alpha, beta = p
    return JacobiParams(float(alpha), float(beta))


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


# ---------------------------------------------------------------------------
# log-gamma

_LANCZOS_G = 7.0
_LANCZOS_COEF = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])


def _zeta_minus_one(kmax=40, jmax=2000):
    # zeta(k) - 1 = sum_{j>=2} j^-k, with an Euler-Maclaurin tail beyond jmax
    j = np.arange(2.0, jmax + 1.0)
    out = np.zeros(kmax + 1)
    for k in range(2, kmax + 1):
        head = math.fsum(j ** -k)
        J = float(jmax)
        tail = J ** (1 - k) / (k - 1) - 0.5 * J ** -k + k * J ** (-k - 1) / 12.0
        out[k] = head + tail
    return out


_ZETA_M1 = _zeta_minus_one()


def _lgamma_near_two(eps):
    # ln Gamma(2 + eps) for |eps| <= 1/2 via the zeta-function Taylor series
    acc = Accumulator(np.shape(eps))
    acc.add((1.0 - EULER_GAMMA) * eps)
    p = -eps
    for k in range(2, _ZETA_M1.size):
        p = -p * eps
        acc.add(_ZETA_M1[k] * p / k)
    return acc.value


def _lgamma_lanczos(z):
    x = z - 1.0
    a = np.full_like(x, _LANCZOS_COEF[0])
    for i in range(1, _LANCZOS_COEF.size):
        a = a + _LANCZOS_COEF[i] / (x + i)
    t = x + _LANCZOS_G + 0.5
    return 0.5 * math.log(2.0 * math.pi) + (x + 0.5) * np.log(t) - t + np.log(a)


def _lgamma_positive(z):
    out = np.empty_like(z)
    big = z >= 2.5
    mid = (z >= 1.5) & ~big
    low = (z >= 0.5) & (z < 1.5)
    tiny = z < 0.5
    out[big] = _lgamma_lanczos(z[big])
    out[mid] = _lgamma_near_two(z[mid] - 2.0)
    e = z[low] - 1.0
    out[low] = _lgamma_near_two(e) - np.log1p(e)
    if np.any(tiny):
        zt = z[tiny]
        out[tiny] = np.log(math.pi / np.sin(math.pi * zt)) - _lgamma_positive(1.0 - zt)
    return out


def log_gamma(z):
    """ln Gamma(z) for z > 0.

    Lanczos (g=7) for z >= 2.5, a zeta-series around z=2 on [0.5, 2.5) so that
    the zeros at 1 and 2 keep full relative accuracy, reflection below 0.5.
    """
    za = np.asarray(z, dtype=float)
    if np.any(~(za > 0.0)):
        raise DomainError("log_gamma requires z > 0")
    out = _lgamma_positive(np.atleast_1d(za).astype(float))
    return _scalar_or_array(z, out.reshape(za.shape))


# ---------------------------------------------------------------------------
# Bessel J

SERIES_MAX_Z = 5.0


def asymptotic_threshold(nu: float) -> float:
    """Smallest argument at which the Hankel expansion is used for order nu."""
    return 25.0 + 0.5 * nu * nu


def _series_scaled(nu, z):
    """z^-nu J_nu(z) by the ascending power series (small z only)."""
    q = -0.25 * z * z
    term = np.ones_like(z)
    acc = Accumulator(z.shape)
    acc.add(term)
    m = 0
    while True:
        m += 1
        term = term * q / (m * (nu + m))
        acc.add(term)
        if m > 4 and np.all(np.abs(term) <= 1e-18 * np.abs(acc.value)):
            break
        if m > 200:
            break
    return acc.value * math.exp(-nu * math.log(2.0) - log_gamma(nu + 1.0))


def _miller_pair(nu, z):
    """(J_nu, J_nu+1) by Miller's backward recurrence with Neumann normalisation.

    Uses (z/2)^nu = sum_k (nu+2k) Gamma(nu+k)/k! J_{nu+2k}(z).
    """
    zmax = float(np.max(z))
    n = int(math.ceil(zmax + 10.0 * zmax ** (1.0 / 3.0) + 30.0 - nu))
    n = max(n, 30)
    n += n % 2
    kk = np.arange(1, n // 2 + 1)
    r = np.concatenate(([1.0], np.cumprod((nu + kk[1:] - 1.0) / kk[1:])))
    h = np.concatenate(([1.0], (nu + 2.0 * kk) * r))
    f_up = np.zeros_like(z)
    f = np.full_like(z, 1e-30)
    norm = np.zeros_like(z)
    for m in range(n, 0, -1):
        if m % 2 == 0:
            norm = norm + h[m // 2] * f
        f_down = (2.0 * (nu + m) / z) * f - f_up
        f_up, f = f, f_down
        big = np.abs(f) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            f, f_up, norm = f * scale, f_up * scale, norm * scale
    norm = norm + h[0] * f
    # now f = f_0 (order nu), f_up = f_1 (order nu+1)
    factor = np.exp(nu * np.log(0.5 * z) - log_gamma(nu + 1.0)) / norm
    return f * factor, f_up * factor


def _hankel(nu, z):
    """J_nu(z) from the Hankel asymptotic expansion, summed to convergence."""
    mu = 4.0 * nu * nu
    p = Accumulator(z.shape)
    q = Accumulator(z.shape)
    term = np.ones_like(z)
    p.add(term)
    active = np.ones(z.shape, dtype=bool)
    prev = np.abs(term)
    for k in range(1, 80):
        term = term * (mu - (2.0 * k - 1.0) ** 2) / (8.0 * k * z)
        mag = np.abs(term)
        active &= ~((mag > prev) & ((2.0 * k - 1.0) ** 2 > mu))
        contrib = np.where(active, term, 0.0)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p.add(sign * contrib)
        else:
            q.add(sign * contrib)
        active &= mag > 1e-18
        prev = mag
        if not np.any(active):
            break
    theta = (0.5 * nu + 0.25) * math.pi
    cz, sz = np.cos(z), np.sin(z)
    ct, st = math.cos(theta), math.sin(theta)
    cos_w = cz * ct + sz * st
    sin_w = sz * ct - cz * st
    return np.sqrt(2.0 / (math.pi * z)) * (p.value * cos_w - q.value * sin_w)


def bessel_pair_scaled(nu: float, z):
    """Return (z^-nu J_nu(z), z^-nu J_{nu+1}(z)) for z >= 0, both finite at z = 0."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    a = np.empty_like(z)
    b = np.empty_like(z)
    small = z <= SERIES_MAX_Z
    large = z >= asymptotic_threshold(nu)
    mid = ~small & ~large
    if np.any(small):
        zs = z[small]
        a[small] = _series_scaled(nu, zs)
        b[small] = zs * _series_scaled(nu + 1.0, zs)
    if np.any(mid):
        zm = z[mid]
        j0, j1 = _miller_pair(nu, zm)
        s = zm ** -nu
        a[mid], b[mid] = j0 * s, j1 * s
    if np.any(large):
        zl = z[large]
        s = zl ** -nu
        a[large] = _hankel(nu, zl) * s
        b[large] = _hankel(nu + 1.0, zl) * s
    return a, b


def bessel_pair(nu: float, z):
    """(J_nu(z), J_{nu+1}(z)) for z > 0 as arrays."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    a, b = bessel_pair_scaled(nu, z)
    s = z ** nu
    return a * s, b * s


def bessel_j(nu, z):
    """Bessel function of the first kind J_nu(z), real z >= 0, nu > -1.

    At z = 0 the limiting value is returned for nu >= 0; for nu < 0 the
    function is unbounded there and z = 0 is rejected.
    """
    nu = as_order(nu)
    za = np.asarray(z, dtype=float)
    if np.any(~(za >= 0.0)):
        raise DomainError("bessel_j requires z >= 0")
    if nu < 0.0 and np.any(za == 0.0):
        raise DomainError("J_nu(0) is unbounded for nu < 0")
    flat = np.atleast_1d(za).ravel()
    scaled, _ = bessel_pair_scaled(nu, flat)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(flat == 0.0, 1.0 if nu == 0.0 else 0.0, scaled * flat ** nu)
    return _scalar_or_array(z, out.reshape(za.shape))


def bessel_j_next(nu, z):
    """J_{nu+1}(z); the companion order used in the derivative identity
    d/dz[z^-nu J_nu(z)] = -z^-nu J_{nu+1}(z)."""
    return bessel_j(as_order(nu) + 1.0, z)


def bessel_j_scaled(nu, z):
    """z^-nu J_nu(z), continuous at z = 0 with value 2^-nu / Gamma(nu+1)."""
    nu = as_order(nu)
    za = np.asarray(z, dtype=float)
    if np.any(~(za >= 0.0)):
        raise DomainError("bessel_j_scaled requires z >= 0")
    out, _ = bessel_pair_scaled(nu, np.atleast_1d(za).ravel())
    return _scalar_or_array(z, out.reshape(za.shape))


# ---------------------------------------------------------------------------
# zeros of J_nu

def mcmahon_guess(nu: float, n):
    """McMahon's large-n expansion for the n-th positive zero of J_nu."""
    n = np.asarray(n, dtype=float)
    mu = 4.0 * nu * nu
    b = (n + 0.5 * nu - 0.25) * math.pi
    e = 8.0 * b
    return (b - (mu - 1.0) / e
            - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e ** 3)
            - 32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e ** 5))


@dataclass(frozen=True)
class ZeroTable:
    """Ascending positive zeros lambda_{n,nu}, n = 1..len, with diagnostics.

    ``slopes`` holds J_{nu+1}(lambda_n), which equals -J_nu'(lambda_n) and
    enters every Fourier-Bessel normalisation constant.
    """

    nu: float
    zeros: np.ndarray
    certified_abs_error: float
    slopes: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)

    def __post_init__(self):
        for arr in (self.zeros, self.slopes, self.residuals):
            arr.setflags(write=False)

    def __len__(self):
        return self.zeros.size

    def __getitem__(self, n):
        """1-based access: table[n] is lambda_{n,nu}."""
        if n < 1 or n > self.zeros.size:
            raise IndexError(f"zero index {n} outside 1..{self.zeros.size}")
        return float(self.zeros[n - 1])

    def to_csv(self, fh, count=None):
        """Write rows (n, lambda, residual); ``count`` limits the rows."""
        count = len(self.zeros) if count is None else count
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "lambda", "residual"])
        for i, (lam, res) in enumerate(zip(self.zeros[:count], self.residuals[:count]), start=1):
            w.writerow([i, repr(float(lam)), repr(float(res))])


_SCAN_STEP = 0.25 * math.pi


def _brackets(nu, count):
    z0 = max(nu, 1e-6)
    z_end = math.pi * (count + 0.5 * max(nu, 0.0) + 1.0) + 2.0
    while True:
        grid = np.arange(z0, z_end + _SCAN_STEP, _SCAN_STEP)
        f, _ = bessel_pair(nu, grid)
        pos = f >= 0.0
        idx = np.nonzero(pos[:-1] != pos[1:])[0]
        if idx.size >= count:
            idx = idx[:count]
            return grid[idx], grid[idx + 1], pos[idx]
        z_end *= 1.5


def bessel_zeros(nu, count: int, max_iter: int = 50) -> ZeroTable:
    """First ``count`` positive zeros of J_nu.

    Zeros are bracketed by sign changes on a pi/4 grid (zero spacing always
    exceeds pi/4 for nu > -1), then polished by Newton iteration seeded with
    McMahon's expansion, falling back to bisection whenever a step leaves
    the bracket.
    """
    nu = as_order(nu)
    if int(count) != count or count < 1:
        raise DomainError("count must be a positive integer")
    count = int(count)
    lo, hi, lo_pos = _brackets(nu, count)
    n = np.arange(1, count + 1)
    x = mcmahon_guess(nu, n)
    x = np.where((x > lo) & (x < hi), x, 0.5 * (lo + hi))
    done = np.zeros(count, dtype=bool)
    for _ in range(max_iter):
        f, j1 = bessel_pair(nu, x)
        fp = (nu / x) * f - j1
        same = (f >= 0.0) == lo_pos
        lo = np.where(same, x, lo)
        hi = np.where(same, hi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - f / fp
        # converged Newton steps may land on a bracket end that x itself just moved
        small_step = np.isfinite(xn) & (np.abs(xn - x) <= 4.0 * EPS * x)
        bad = ~np.isfinite(xn) | (xn < lo) | (xn > hi)
        xn = np.where(bad, 0.5 * (lo + hi), xn)
        done |= small_step | (f == 0.0) | (hi - lo <= 4.0 * EPS * x)
        x = np.where(done, x, xn)
        if np.all(done):
            break
    if not np.all(done):
        bad_n = int(n[~done][0])
        raise ComputationError(
            f"zero search did not converge for n={bad_n}, nu={nu} after {max_iter} iterations")
    f, j1 = bessel_pair(nu, x)
    ok = np.abs(f) <= 1e-12 * np.abs(j1) * x
    if not np.all(ok):
        bad_n = int(n[~ok][0])
        raise ComputationError(f"zero n={bad_n} for nu={nu} fails the residual check")
    err = float(np.max((np.abs(f) + 4.0 * EPS * np.abs(j1)) / np.abs(j1) + EPS * x))
    return ZeroTable(nu=nu, zeros=x, certified_abs_error=err, slopes=j1, residuals=f)


class _ZeroCache:
    """Per-order zero tables, grown by doubling; readers never see a partial table."""

    def __init__(self):
        self._tables: dict[float, ZeroTable] = {}
        self._lock = threading.Lock()

    def get(self, nu: float, count: int) -> ZeroTable:
        table = self._tables.get(nu)
        if table is not None and len(table) >= count:
            return table
        with self._lock:
            table = self._tables.get(nu)
            if table is None or len(table) < count:
                size = max(count, 64, 2 * len(table) if table is not None else 0)
                table = bessel_zeros(nu, size)
                self._tables[nu] = table
            return table


_ZERO_CACHE = _ZeroCache()


def zero_table(nu, count: int) -> ZeroTable:
    """Cached zero table for order nu holding at least ``count`` zeros."""
    return _ZERO_CACHE.get(as_order(nu), int(count))


# ---------------------------------------------------------------------------
# Jacobi polynomials

def jacobi_poly_all(kmax: int, alpha: float, beta: float, u):
    """Rows P_0..P_kmax of the Jacobi polynomials at the points u (three-term recurrence)."""
    u = np.atleast_1d(np.asarray(u, dtype=float))
    out = np.empty((kmax + 1,) + u.shape)
    out[0] = 1.0
    if kmax == 0:
        return out
    ab = alpha + beta
    out[1] = (alpha + 1.0) + 0.5 * (ab + 2.0) * (u - 1.0)
    a2b2 = alpha * alpha - beta * beta
    for k in range(2, kmax + 1):
        c = 2.0 * k + ab
        a1 = 2.0 * k * (k + ab) * (c - 2.0)
        a2 = (c - 1.0) * a2b2
        a3 = (c - 1.0) * c * (c - 2.0)
        a4 = 2.0 * (k + alpha - 1.0) * (k + beta - 1.0) * c
        out[k] = ((a2 + a3 * u) * out[k - 1] - a4 * out[k - 2]) / a1
    return out


def jacobi_poly(k: int, p, u):
    """P_k^{alpha,beta}(u) in Szego's normalisation."""
    p = as_jacobi(p)
    if int(k) != k or k < 0:
        raise DomainError("degree k must be a nonnegative integer")
    ua = np.asarray(u, dtype=float)
    out = jacobi_poly_all(int(k), p.alpha, p.beta, ua.ravel())[int(k)]
    return _scalar_or_array(u, out.reshape(ua.shape))


def jacobi_poly_deriv(k: int, p, u):
    """d/du P_k^{alpha,beta}(u) = (k+alpha+beta+1)/2 * P_{k-1}^{alpha+1,beta+1}(u)."""
    p = as_jacobi(p)
    if int(k) != k or k < 0:
        raise DomainError("degree k must be a nonnegative integer")
    ua = np.asarray(u, dtype=float)
    if k == 0:
        return _scalar_or_array(u, np.zeros(ua.shape))
    low = jacobi_poly(int(k) - 1, (p.alpha + 1.0, p.beta + 1.0), ua)
    return 0.5 * (k + p.alpha + p.beta + 1.0) * low


def jacobi_norm_consts(kmax: int, alpha: float, beta: float) -> np.ndarray:
    """c_k^{alpha,beta}, k = 0..kmax, making the Jacobi functions orthonormal on [0, 1]."""
    k = np.arange(kmax + 1, dtype=float)
    ab = alpha + beta
    out = np.empty(kmax + 1)
    # k = 0: (alpha+beta+1) Gamma(alpha+beta+1) is Gamma(alpha+beta+2) for every alpha+beta > -2
    out[0] = 0.5 * (math.log(math.pi) + log_gamma(ab + 2.0)
                    - log_gamma(alpha + 1.0) - log_gamma(beta + 1.0))
    if kmax > 0:
        kk = k[1:]
        out[1:] = 0.5 * (math.log(math.pi) + np.log(2.0 * kk + ab + 1.0)
                         + log_gamma(kk + ab + 1.0) + log_gamma(kk + 1.0)
                         - log_gamma(kk + alpha + 1.0) - log_gamma(kk + beta + 1.0))
    return np.exp(out)


def jacobi_norm_const(k: int, p) -> float:
    p = as_jacobi(p)
    if int(k) != k or k < 0:
        raise DomainError("degree k must be a nonnegative integer")
    return float(jacobi_norm_consts(int(k), p.alpha, p.beta)[int(k)])
