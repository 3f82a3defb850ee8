"""Heat kernels as truncated eigenfunction series with explicit tail bounds.

G_t(x, y)  = sum_n exp(-t lambda_n^2) phi_n(x) phi_n(y)        Fourier-Bessel, w.r.t. x^{2nu+1} dx
K_t(x, y)  = (xy)^{nu+1/2} G_t(x, y)                          same semigroup in Lebesgue measure
GJ_t(x, y) = sum_k exp(-t Lambda_k) Phi_k(x) Phi_k(y)         Jacobi, w.r.t. dx

Truncation: each term is bounded by a majorant M(n)^2 exp(-t lambda_n^2) with
M(n) = A (1 + lambda_n)^e, A calibrated once per order by dense sampling of the
first 50 eigenfunctions and doubled. The tail beyond N is bounded by an
integral of that majorant, which is valid once the majorant is decreasing.
"""

from __future__ import annotations

import csv
import math
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError, RefusalError
from .specfun import EPS, as_jacobi, as_order, jacobi_norm_consts, jacobi_poly_all, zero_table
from .eigensystems import WeightSpec, bessel_basis, jacobi_basis, jacobi_weight, weighted_integral
from .summation import Accumulator

CALIBRATION_TERMS = 50
MAJORANT_INFLATION = 2.0


@dataclass(frozen=True)
class EvalPoint:
    t: float
    x: float
    y: float

    def __post_init__(self):
        if not (0.0 <= self.x <= 1.0 and 0.0 <= self.y <= 1.0):
            raise DomainError(f"x and y must lie in [0, 1], got x={self.x!r}, y={self.y!r}")
        if not (self.t > 0.0 and math.isfinite(self.t)):
            raise DomainError(f"t must be positive, got {self.t!r}")


@dataclass(frozen=True)
class TruncationPolicy:
    """Absolute tail target, term cap and the smallest time the series will attempt."""

    tol: float = 1e-12
    max_terms: int = 20000
    t_floor: float = 1e-6

    def __post_init__(self):
        if not self.tol > 0 or not self.t_floor > 0 or self.max_terms < 2:
            raise DomainError("TruncationPolicy needs tol > 0, t_floor > 0, max_terms >= 2")

    def check_time(self, t):
        if np.any(np.asarray(t) < self.t_floor):
            raise RefusalError(
                f"t={np.min(t):.3g} is below t_floor={self.t_floor:.3g}; the eigen-series would "
                f"need more than ~{self.max_terms} terms to converge there")


DEFAULT_POLICY = TruncationPolicy()


@dataclass
class SeriesResult:
    """One kernel value with its truncation diagnostics.

    ``roundoff`` estimates the floating-point error of the partial sum (local
    eigenfunction amplitude times machine epsilon); ``limit`` marks an
    endpoint where the kernel is +inf in the limiting sense.
    """

    value: float
    terms_used: int
    tail_bound: float
    converged: bool
    roundoff: float = 0.0
    clamped: bool = False
    limit: bool = False

    @property
    def error_bound(self) -> float:
        return self.tail_bound + self.roundoff


@dataclass
class KernelValues:
    """Array-valued counterpart of SeriesResult (one entry per evaluation point)."""

    value: np.ndarray
    tail_bound: np.ndarray
    roundoff: np.ndarray
    terms_used: int
    converged: bool
    clamped: np.ndarray = field(repr=False)

    @property
    def error_bound(self):
        return self.tail_bound + self.roundoff

    def item(self, i=0) -> SeriesResult:
        v = float(self.value.flat[i])
        return SeriesResult(v, self.terms_used, float(self.tail_bound.flat[i]), self.converged,
                            float(self.roundoff.flat[i]), bool(self.clamped.flat[i]),
                            limit=math.isinf(v))


# ---------------------------------------------------------------------------
# tail bounds

def _log_majorant_tail(log_f_start, kappa, spacing):
    """log of f(start)/(spacing*kappa): integral bound for a log-concave decreasing tail."""
    if kappa <= 0.0:
        return math.inf
    return log_f_start - math.log(spacing * kappa)


def bessel_tail_bound(t, table, n_terms, log_amp, e):
    """Bound on sum_{n > N} A^2 (1 + lambda_n)^{2e} exp(-t lambda_n^2).

    Uses lambda_n >= lambda_N + (n - N) s with s = min(pi, lambda_N - lambda_{N-1});
    zero spacing is >= pi for |nu| >= 1/2 and increasing for |nu| < 1/2.
    """
    lam_n = table.zeros[n_terms - 1]
    s = min(math.pi, lam_n - table.zeros[n_terms - 2])
    kappa = 2.0 * t * lam_n - 2.0 * e / (1.0 + lam_n)
    log_f = 2.0 * log_amp + 2.0 * e * math.log1p(lam_n) - t * lam_n * lam_n
    lg = _log_majorant_tail(log_f, kappa, s)
    return math.exp(lg) if lg < 700 else math.inf


def jacobi_tail_bound(t, k_last, shift, log_amp, e):
    """Bound on sum_{k > K} A^2 (1 + k)^{2e} exp(-t pi^2 (k + shift)^2)."""
    a = math.pi ** 2 * t
    kappa = 2.0 * a * (k_last + shift) - 2.0 * e / (1.0 + k_last)
    log_f = 2.0 * log_amp + 2.0 * e * math.log1p(k_last) - a * (k_last + shift) ** 2
    lg = _log_majorant_tail(log_f, kappa, 1.0)
    return math.exp(lg) if lg < 700 else math.inf


def _smallest_passing(pred, lo, cap):
    """Smallest integer n in [lo, cap] with pred(n) true (pred monotone); None if none."""
    n = lo
    while not pred(n):
        if n >= cap:
            return None
        n = min(2 * n, cap)
    good, bad = n, max(lo - 1, n // 2)
    if bad < lo or pred(bad):
        bad = lo - 1
    while good - bad > 1:
        mid = (good + bad) // 2
        if pred(mid):
            good = mid
        else:
            bad = mid
    return good


# ---------------------------------------------------------------------------
# Fourier-Bessel kernels

class BesselKernel:
    """Evaluator for G_t^nu and K_t^nu sharing one zero table and majorant.

    Basis evaluations are cached per point set, so sweeping many times over
    one spatial grid costs a single Bessel evaluation pass.
    """

    def __init__(self, nu, policy: TruncationPolicy = DEFAULT_POLICY):
        self.nu = as_order(nu)
        self.policy = policy
        self.exponent = max(self.nu, 0.0) + 0.5
        self.log_amp = math.log(self._calibrate())
        self.clamp_count = 0
        self._cache: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def _calibrate(self):
        x = np.unique(np.concatenate((np.linspace(0.0, 1.0, 2001), np.geomspace(1e-6, 0.05, 200))))
        ph = bessel_basis(self.nu, CALIBRATION_TERMS, x)
        lam = zero_table(self.nu, CALIBRATION_TERMS).zeros[:CALIBRATION_TERMS]
        ratio = np.max(np.abs(ph), axis=1) / (1.0 + lam) ** self.exponent
        return MAJORANT_INFLATION * float(np.max(ratio))

    def majorant(self, n):
        """Sup-norm majorant A (1 + lambda_n)^e of |phi_n|."""
        lam = zero_table(self.nu, int(np.max(n))).zeros[np.asarray(n) - 1]
        return np.exp(self.log_amp) * (1.0 + lam) ** self.exponent

    def tail_bound(self, t, n_terms):
        table = zero_table(self.nu, n_terms + 1)
        return bessel_tail_bound(t, table, n_terms, self.log_amp, self.exponent)

    def terms_for(self, t, tol=None):
        """Smallest N whose tail bound is <= tol, or None beyond max_terms."""
        tol = self.policy.tol if tol is None else tol
        return _smallest_passing(lambda n: self.tail_bound(t, n) <= tol, 2, self.policy.max_terms)

    def _basis(self, n_terms, pts):
        bucket = 32 * ((n_terms + 31) // 32)
        key = (bucket, pts.tobytes())
        with self._lock:
            hit = self._cache.get(key)
            if hit is not None:
                self._cache.move_to_end(key)
                return hit
        ph, env = bessel_basis(self.nu, bucket, pts, with_envelope=True)
        lam = zero_table(self.nu, bucket).zeros[:bucket]
        entry = (lam, ph, env)
        with self._lock:
            self._cache[key] = entry
            while len(self._cache) > 8:
                self._cache.popitem(last=False)
        return entry

    def _series(self, t, x, y, tol):
        self.policy.check_time(t)
        n_terms = self.terms_for(t, tol)
        converged = n_terms is not None
        if not converged:
            n_terms = self.policy.max_terms
        pts, inv = np.unique(np.concatenate((x, y)), return_inverse=True)
        lam, ph, env = self._basis(n_terms, pts)
        ix, iy = inv[: x.size], inv[x.size:]
        w = np.exp(-t * lam[:n_terms] ** 2)
        acc = Accumulator(x.shape)
        for n in range(n_terms):
            acc.add(w[n] * (ph[n, ix] * ph[n, iy]))
        rw = w * (8.0 + lam[:n_terms]) * EPS
        roundoff = rw @ (env[:n_terms, ix] * env[:n_terms, iy])
        tail = self.tail_bound(t, n_terms)
        return acc.value, roundoff, tail, n_terms, converged

    def _finish(self, value, roundoff, tail, n_terms, converged, tol):
        tail = np.broadcast_to(np.asarray(tail, dtype=float), value.shape).copy()
        with np.errstate(invalid="ignore"):
            clamped = (value < 0.0) & (value >= -(tol + roundoff))
        value = np.where(clamped, 0.0, value)
        self.clamp_count += int(np.count_nonzero(clamped))
        return KernelValues(value, tail, roundoff, n_terms, converged, clamped)

    def g(self, t, x, y) -> KernelValues:
        """G_t^nu at the broadcast pairs (x, y)."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        shape = x.shape
        value, roundoff, tail, n, conv = self._series(t, x.ravel(), y.ravel(), self.policy.tol)
        out = self._finish(value, roundoff, tail, n, conv, self.policy.tol)
        return _reshape(out, shape)

    def k(self, t, x, y) -> KernelValues:
        """K_t^nu = (xy)^{nu+1/2} G_t^nu; +inf where x or y is 0 and nu < -1/2."""
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        shape = x.shape
        xf, yf = x.ravel(), y.ravel()
        e = self.nu + 0.5
        with np.errstate(divide="ignore"):
            fac = np.power(xf, e) * np.power(yf, e)
        finite = np.isfinite(fac)
        peak = float(np.max(fac[finite])) if np.any(finite) else 1.0
        tol_g = self.policy.tol / max(peak, 1e-300)
        value, roundoff, tail, n, conv = self._series(t, xf, yf, min(tol_g, self.policy.tol * 1e6))
        with np.errstate(invalid="ignore"):
            value = np.where(finite, value * fac, np.inf)
            roundoff = np.where(finite, roundoff * fac, np.inf)
            tail = np.where(finite, tail * fac, np.inf)
        out = self._finish(value, roundoff, tail, n, conv, self.policy.tol)
        return _reshape(out, shape)


def _reshape(kv: KernelValues, shape):
    return KernelValues(kv.value.reshape(shape), kv.tail_bound.reshape(shape),
                        kv.roundoff.reshape(shape), kv.terms_used, kv.converged,
                        kv.clamped.reshape(shape))


# ---------------------------------------------------------------------------
# Jacobi kernel

class JacobiKernel:
    """Evaluator for the Jacobi heat kernel GJ_t^{alpha,beta}.

    ``reduced=True`` returns GJ_t(x, y) / (xy)^{alpha+1/2}, finite at x = 0 or
    y = 0 for every alpha; the Fourier-Bessel comparison uses it to compare
    with G_t at the endpoints.
    """

    def __init__(self, p, policy: TruncationPolicy = DEFAULT_POLICY):
        self.p = as_jacobi(p)
        self.policy = policy
        self.shift = 0.5 * (self.p.alpha + self.p.beta + 1.0)
        self.exponent = max(self.p.alpha, self.p.beta, 0.0) + 0.5
        self.log_amp = math.log(self._calibrate())
        self.clamp_count = 0

    def _calibrate(self):
        theta = np.linspace(0.0, math.pi, 4001)
        u = np.cos(theta)
        poly = jacobi_poly_all(CALIBRATION_TERMS, self.p.alpha, self.p.beta, u)
        ck = jacobi_norm_consts(CALIBRATION_TERMS, self.p.alpha, self.p.beta)
        k = np.arange(CALIBRATION_TERMS + 1)
        ratio = ck * np.max(np.abs(poly), axis=1) / (1.0 + k) ** self.exponent
        return MAJORANT_INFLATION * float(np.max(ratio))

    def eigenvalues(self, kmax):
        k = np.arange(kmax + 1)
        return math.pi ** 2 * (k + self.shift) ** 2

    def tail_bound(self, t, k_last):
        return jacobi_tail_bound(t, k_last, self.shift, self.log_amp, self.exponent)

    def terms_for(self, t, tol=None):
        tol = self.policy.tol if tol is None else tol
        k = _smallest_passing(lambda n: self.tail_bound(t, n - 1) <= tol, 2, self.policy.max_terms)
        return k

    def evaluate(self, t, x, y, reduced: bool = False) -> KernelValues:
        self.policy.check_time(t)
        x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
        shape = x.shape
        xf, yf = x.ravel(), y.ravel()
        wx = jacobi_weight(self.p, xf, reduced)
        wy = jacobi_weight(self.p, yf, reduced)
        with np.errstate(invalid="ignore"):
            fac = wx * wy
        finite = np.isfinite(fac)
        peak = float(np.max(fac[finite])) if np.any(finite) else 1.0
        tol = self.policy.tol / max(peak, 1e-300) if peak > 1.0 else self.policy.tol
        n_terms = self.terms_for(t, tol)
        converged = n_terms is not None
        if not converged:
            n_terms = self.policy.max_terms
        kmax = n_terms - 1
        pts, inv = np.unique(np.concatenate((xf, yf)), return_inverse=True)
        with np.errstate(invalid="ignore"):
            basis = jacobi_basis(self.p, kmax, pts, reduced)
        bx, by = basis[:, inv[: xf.size]], basis[:, inv[xf.size:]]
        lam = self.eigenvalues(kmax)
        w = np.exp(-t * lam)
        acc = Accumulator(xf.shape)
        with np.errstate(invalid="ignore"):
            for k in range(n_terms):
                acc.add(w[k] * (bx[k] * by[k]))
        k = np.arange(n_terms)
        amp2 = np.exp(2.0 * self.log_amp) * (1.0 + k) ** (2.0 * self.exponent)
        with np.errstate(invalid="ignore"):
            roundoff = float(np.sum(w * amp2 * (8.0 + k * k))) * EPS * fac
            tail = self.tail_bound(t, kmax) * fac
            value = np.where(finite, acc.value, np.inf)
            roundoff = np.where(finite, roundoff, np.inf)
            tail = np.where(finite, tail, np.inf)
            clamped = (value < 0.0) & (value >= -(self.policy.tol + roundoff))
        value = np.where(clamped, 0.0, value)
        self.clamp_count += int(np.count_nonzero(clamped))
        return KernelValues(value.reshape(shape), tail.reshape(shape), roundoff.reshape(shape),
                            n_terms, converged, clamped.reshape(shape))


# ---------------------------------------------------------------------------
# module-level API

@lru_cache(maxsize=64)
def bessel_kernel(nu: float, policy: TruncationPolicy = DEFAULT_POLICY) -> BesselKernel:
    return BesselKernel(nu, policy)


@lru_cache(maxsize=64)
def jacobi_kernel(alpha: float, beta: float, policy: TruncationPolicy = DEFAULT_POLICY) -> JacobiKernel:
    return JacobiKernel((alpha, beta), policy)


def heat_g(nu, pt: EvalPoint, pol: TruncationPolicy | None = None) -> SeriesResult:
    """Fourier-Bessel heat kernel G_t^nu(x, y)."""
    pol = pol or DEFAULT_POLICY
    return bessel_kernel(as_order(nu), pol).g(pt.t, pt.x, pt.y).item()


def heat_k(nu, pt: EvalPoint, pol: TruncationPolicy | None = None) -> SeriesResult:
    """K_t^nu(x, y) = (xy)^{nu+1/2} G_t^nu(x, y), taken as a limit at the endpoints."""
    pol = pol or DEFAULT_POLICY
    return bessel_kernel(as_order(nu), pol).k(pt.t, pt.x, pt.y).item()


def heat_jacobi(p, pt: EvalPoint, pol: TruncationPolicy | None = None) -> SeriesResult:
    """Jacobi heat kernel GJ_t^{alpha,beta}(x, y)."""
    pol = pol or DEFAULT_POLICY
    p = as_jacobi(p)
    return jacobi_kernel(p.alpha, p.beta, pol).evaluate(pt.t, pt.x, pt.y).item()


def image_series(sign: float, t, x, y):
    """Method-of-images form of K_t^{+-1/2} built from g_t(u) = exp(-u^2/4t)/sqrt(4 pi t).

    sign=+1/2: sum_m g(x-y+2m) - g(x+y+2m)            (Dirichlet at 0 and 1)
    sign=-1/2: sum_m (-1)^m [g(x-y+2m) + g(x+y+2m)]   (Neumann at 0, Dirichlet at 1)
    Images are added until their Gaussian factor drops below 1e-16.
    """
    x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
    reach = math.sqrt(4.0 * t * math.log(1e16)) + 2.0
    m_max = int(math.ceil(reach / 2.0)) + 1
    norm = 1.0 / math.sqrt(4.0 * math.pi * t)
    acc = Accumulator(x.shape)
    for m in range(-m_max, m_max + 1):
        a = np.exp(-(x - y + 2 * m) ** 2 / (4.0 * t))
        b = np.exp(-(x + y + 2 * m) ** 2 / (4.0 * t))
        if sign > 0:
            acc.add(a - b)
        else:
            acc.add((-1.0) ** (m % 2) * (a + b))
    return acc.value * norm


def closed_form_k_half(sign, pt: EvalPoint) -> float:
    """K_t^{nu}(x, y) for nu = +1/2 or -1/2 by the non-oscillating image sum."""
    if sign not in (0.5, -0.5):
        raise DomainError("closed form exists only for nu = +1/2 and nu = -1/2")
    return float(image_series(sign, pt.t, pt.x, pt.y))


def semigroup_defect(nu, s, t, x, y, pol: TruncationPolicy | None = None, tol=1e-11) -> float:
    """|int_0^1 G_s(x,z) G_t(z,y) dmu_nu(z) - G_{s+t}(x,y)|."""
    pol = pol or TruncationPolicy(tol=1e-14)
    ker = bessel_kernel(as_order(nu), pol)
    pol.check_time(min(s, t))
    lhs, _ = weighted_integral(lambda z: ker.g(s, x, z).value * ker.g(t, z, y).value,
                               WeightSpec.power(nu), tol)
    rhs = float(ker.g(s + t, x, y).value)
    return abs(lhs - rhs)


def kernel_mass(nu, t, x, pol: TruncationPolicy | None = None, tol=1e-11) -> float:
    """int_0^1 G_t(x, y) dmu_nu(y): survival probability of the killed process from x."""
    pol = pol or TruncationPolicy(tol=1e-14)
    ker = bessel_kernel(as_order(nu), pol)
    value, _ = weighted_integral(lambda y: ker.g(t, x, y).value, WeightSpec.power(nu), tol)
    return value


def survival_series(nu, t, x, pol: TruncationPolicy | None = None) -> float:
    """Same mass as kernel_mass but from int phi_n dmu = sqrt(2) sgn(J_{nu+1}(lambda_n)) / lambda_n."""
    pol = pol or DEFAULT_POLICY
    nu = as_order(nu)
    ker = bessel_kernel(nu, pol)
    n = ker.terms_for(t) or pol.max_terms
    table = zero_table(nu, n)
    lam = table.zeros[:n]
    ph = bessel_basis(nu, n, np.atleast_1d(np.asarray(x, float)))
    coef = np.exp(-t * lam ** 2) * math.sqrt(2.0) * np.sign(table.slopes[:n]) / lam
    acc = Accumulator(ph.shape[1:])
    for i in range(n):
        acc.add(coef[i] * ph[i])
    out = acc.value
    return float(out[0]) if np.ndim(x) == 0 else out


def write_kernel_csv(fh, rows):
    """rows: iterable of (nu, t, x, y, SeriesResult)."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["nu", "t", "x", "y", "value", "terms", "tail_bound"])
    for nu, t, x, y, r in rows:
        w.writerow([repr(float(nu)), repr(float(t)), repr(float(x)), repr(float(y)),
                    repr(float(r.value)), r.terms_used, repr(float(r.tail_bound))])
