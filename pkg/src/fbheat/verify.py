"""Grid scans testing kernel envelopes, the sandwich inequality and structural identities.

Every scan returns a VerificationReport. Parallel work is split over time
points and merged in grid order, and reductions use max/min only, so reports
are identical for any thread count.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .eigensystems import (WeightSpec, bessel_basis, gram_jacobi, gram_phi, gram_psi,
                           lemma_symmetry_defect, weighted_integral)
from .envelopes import (check_c_pair, envelope_bessel_values, envelope_longtime_values,
                        sandwich_factors)
from .errors import DomainError
from .kernels import (TruncationPolicy, bessel_kernel, jacobi_kernel, kernel_mass,
                      semigroup_defect, survival_series)
from .specfun import as_order, zero_table

SCHEMA_VERSION = 1
DEFAULT_NUS = (-0.9, -0.5, 0.0, 0.5, 1.0, 2.5)
DEFAULT_SPACE = (0.0, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9,
                 0.95, 0.99, 0.999, 1.0)
EPS_INFLATION = 10.0
RESOLVE_FACTOR = 1000.0
STRUCT_TOL = 1e-8
STRUCT_TOL_LOW_ORDER = 1e-6
SEMIGROUP_TOL = 1e-7
REPRODUCTION_TOL = 1e-7
MASS_SLACK = 1e-7


def log_times(t_min, t_max, per_decade):
    decades = math.log10(t_max / t_min)
    count = max(2, int(round(decades * per_decade)) + 1)
    return tuple(float(v) for v in np.geomspace(t_min, t_max, count))


@dataclass(frozen=True)
class GridSpec:
    nu_list: tuple
    T: float
    time_points: tuple
    space_points: tuple
    tol: float = 1e-12

    def __post_init__(self):
        object.__setattr__(self, "nu_list", tuple(as_order(v) for v in self.nu_list))
        object.__setattr__(self, "time_points", tuple(sorted(float(v) for v in self.time_points)))
        object.__setattr__(self, "space_points", tuple(sorted(float(v) for v in self.space_points)))
        if len(self.time_points) < 2 or len(self.space_points) < 2:
            raise DomainError("a grid needs at least 2 points per axis")
        if self.time_points[0] <= 0:
            raise DomainError("time points must be positive")
        if self.space_points[0] < 0 or self.space_points[-1] > 1:
            raise DomainError("space points must lie in [0, 1]")
        if not self.tol > 0:
            raise DomainError("tol must be positive")

    @classmethod
    def default(cls, T=1.0, nu_list=DEFAULT_NUS, tol=1e-12, t_min=1e-3, per_decade=12):
        return cls(tuple(nu_list), T, log_times(t_min, T, per_decade), DEFAULT_SPACE, tol)

    @classmethod
    def longtime(cls, T=1.0, nu_list=DEFAULT_NUS, tol=1e-12, count=9):
        times = tuple(float(v) for v in np.linspace(T, 5.0 * T, count))
        return cls(tuple(nu_list), T, times, DEFAULT_SPACE, tol)

    def refine(self):
        """Insert midpoints on both axes (geometric in time, arithmetic in space)."""
        t = np.array(self.time_points)
        s = np.array(self.space_points)
        t2 = np.sort(np.concatenate((t, np.sqrt(t[:-1] * t[1:]))))
        s2 = np.sort(np.concatenate((s, 0.5 * (s[:-1] + s[1:]))))
        return GridSpec(self.nu_list, self.T, tuple(t2), tuple(s2), self.tol)

    def with_nus(self, nu_list):
        return GridSpec(tuple(nu_list), self.T, self.time_points, self.space_points, self.tol)

    def summary(self):
        return {
            "nu_list": list(self.nu_list),
            "T": self.T,
            "time_range": [self.time_points[0], self.time_points[-1]],
            "time_count": len(self.time_points),
            "space_count": len(self.space_points),
            "space_points": list(self.space_points),
            "tol": self.tol,
        }

    def policy(self):
        return TruncationPolicy(tol=self.tol, t_floor=min(1e-6, self.time_points[0]))


@dataclass
class CheckRecord:
    check_name: str
    nu: float
    grid: dict
    sup_ratio: float
    inf_ratio: float
    worst_point: dict
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    records: list = field(default_factory=list)
    constants: dict = field(default_factory=dict)
    coverage: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def extend(self, other: "VerificationReport"):
        self.records.extend(other.records)
        for key, val in other.constants.items():
            self.constants.setdefault(key, {}).update(val)
        self.coverage.extend(c for c in other.coverage if c not in self.coverage)
        return self

    def failed(self):
        return [r for r in self.records if not r.passed]

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "passed": self.passed,
            "constants": self.constants,
            "coverage": self.coverage,
            "records": [_jsonable(asdict(r)) for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check_name", "nu", "passed", "sup_ratio", "inf_ratio",
                    "worst_t", "worst_x", "worst_y", "time_count", "space_count"])
        for r in self.records:
            wp = r.worst_point
            w.writerow([r.check_name, repr(r.nu), int(r.passed), _fmt(r.sup_ratio),
                        _fmt(r.inf_ratio), _fmt(wp.get("t")), _fmt(wp.get("x")),
                        _fmt(wp.get("y")), r.grid.get("time_count", ""),
                        r.grid.get("space_count", "")])
        return buf.getvalue()


def _fmt(v):
    if v is None:
        return ""
    return repr(float(v))


def _jsonable(obj):
    """Replace non-finite floats with strings so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if math.isnan(f):
            return "nan"
        if math.isinf(f):
            return "inf" if f > 0 else "-inf"
        return f
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _map(fn, items, threads):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(i) for i in items]


def _mesh(grid):
    s = np.array(grid.space_points)
    return np.meshgrid(s, s, indexing="ij")


def _coverage_note(grid, what):
    return (f"{what}: sampled {len(grid.time_points)} times in "
            f"[{grid.time_points[0]:.3g}, {grid.time_points[-1]:.3g}] x "
            f"{len(grid.space_points)}^2 space points; uniform bounds are only sampled, not proven")


def _argbest(values, better):
    flat = np.where(np.isfinite(values), values, np.nan)
    if np.all(np.isnan(flat)):
        return None
    return int(np.nanargmax(flat) if better == "max" else np.nanargmin(flat))


# ---------------------------------------------------------------------------
# short-time envelope

def _envelope_slice(args):
    ker, nu, t, X, Y, c1, c2 = args
    kv = ker.g(t, X, Y)
    interior = (X < 1.0) & (Y < 1.0)
    boundary_ok = bool(np.all(kv.value[~interior] == 0.0))
    err = kv.error_bound
    resolved = interior & (kv.value > RESOLVE_FACTOR * err)
    e1 = envelope_bessel_values(nu, t, X, Y, c1)
    e2 = envelope_bessel_values(nu, t, X, Y, c2)
    with np.errstate(divide="ignore", invalid="ignore"):
        r_low = np.where(resolved, kv.value / e1, np.inf)
        r_up = np.where(resolved, kv.value / e2, -np.inf)
        # unresolved points: largest value the series allows; upper ratios there are
        # inconclusive (the envelope itself underflows the error) and only reported
        r_up_unres = np.where(interior & ~resolved, (kv.value + err) / e2, -np.inf)
        r_low_unres_hi = np.where(interior & ~resolved, (kv.value + err) / e1, np.inf)
    return dict(value=kv.value, r_low=r_low, r_up=r_up, r_up_unres=r_up_unres,
                r_low_unres_hi=r_low_unres_hi, resolved=int(np.count_nonzero(resolved)),
                interior=int(np.count_nonzero(interior)), boundary_ok=boundary_ok,
                converged=kv.converged, terms=kv.terms_used)


def scan_envelope_shorttime(grid: GridSpec, nu, c_pair=(0.35, 0.20), threads=1) -> VerificationReport:
    """Ratios of G_t to the two-sided Gaussian envelope on (0, T].

    Points where G is smaller than RESOLVE_FACTOR times its certified error
    cannot give a meaningful ratio; they are counted as unresolved and only
    checked for consistency with the constant found on resolved points.
    """
    c1, c2 = c_pair
    check_c_pair(c1, c2)
    nu = as_order(nu)
    ker = bessel_kernel(nu, grid.policy())
    X, Y = _mesh(grid)
    times = [t for t in grid.time_points if t <= grid.T]
    slices = _map(_envelope_slice, [(ker, nu, t, X, Y, c1, c2) for t in times], threads)

    r_low = np.stack([s["r_low"] for s in slices])
    r_up = np.stack([s["r_up"] for s in slices])
    inf_low = float(np.min(r_low))
    sup_up = float(np.max(r_up))
    finite = math.isfinite(inf_low) and math.isfinite(sup_up) and inf_low > 0
    c_hat = max(sup_up, 1.0 / inf_low) if finite else math.inf

    unres_up = float(np.max(np.stack([s["r_up_unres"] for s in slices])))
    unres_low_hi = float(np.min(np.stack([s["r_low_unres_hi"] for s in slices])))
    # an unresolved point contradicts C_hat only if even its largest value sits below the lower envelope
    contradictions = int(sum(np.count_nonzero(s["r_low_unres_hi"] < 1.0 / c_hat) for s in slices)) \
        if finite else 0
    resolved = sum(s["resolved"] for s in slices)
    interior = sum(s["interior"] for s in slices)
    boundary_ok = all(s["boundary_ok"] for s in slices)
    converged = all(s["converged"] for s in slices)

    i_low = _argbest(r_low.ravel(), "min")
    i_up = _argbest(r_up.ravel(), "max")
    limiting = i_up if (finite and sup_up >= 1.0 / inf_low) else i_low
    worst = _point(limiting, times, X, Y)
    passed = finite and boundary_ok and converged and contradictions == 0

    rec = CheckRecord(
        "envelope_shorttime", nu, grid.summary(), sup_up, inf_low, worst, passed,
        {"C_hat": c_hat, "c1": c1, "c2": c2, "resolved_points": resolved,
         "interior_points": interior, "resolved_fraction": resolved / max(interior, 1),
         "unresolved_sup_ratio_bound": unres_up, "unresolved_inf_ratio_bound": unres_low_hi,
         "unresolved_contradictions": contradictions, "boundary_zero": boundary_ok,
         "converged": converged, "max_terms": max(s["terms"] for s in slices),
         "inf_point": _point(i_low, times, X, Y), "sup_point": _point(i_up, times, X, Y)})
    report = VerificationReport([rec], {repr(nu): {"C_hat": c_hat, "c1_used": c1, "c2_used": c2}},
                                [_coverage_note(grid, "envelope_shorttime")])
    return report


def _point(index, times, X, Y):
    if index is None:
        return {}
    ti, rest = divmod(index, X.size)
    return {"t": float(times[ti]), "x": float(X.flat[rest]), "y": float(Y.flat[rest])}


def c_hat_stability(grid: GridSpec, nu, c_pair=(0.35, 0.20), threads=1):
    """(C_hat on grid, C_hat on refined grid, relative change)."""
    a = scan_envelope_shorttime(grid, nu, c_pair, threads).records[0].detail["C_hat"]
    b = scan_envelope_shorttime(grid.refine(), nu, c_pair, threads).records[0].detail["C_hat"]
    return a, b, abs(b - a) / a


# ---------------------------------------------------------------------------
# long time

def _longtime_slice(args):
    ker, nu, t, X, Y, lam, ph, margin = args
    kv = ker.g(t, X, Y)
    interior = (X < 1.0) & (Y < 1.0)
    env = envelope_longtime_values(nu, t, X, Y)
    first = math.exp(-t * lam[0] ** 2) * ph[0][0] * ph[0][1]
    with np.errstate(divide="ignore", invalid="ignore"):
        second = ph[1][0] * ph[1][1] / (ph[0][0] * ph[0][1])
        ratio = np.where(interior, kv.value / env, np.nan)
        resid = np.where(interior, np.abs(kv.value - first) / np.abs(first), np.nan)
        # the n=2 term relative to the first, times the margin, plus the certified series error
        allowed = (margin * math.exp(-t * (lam[1] ** 2 - lam[0] ** 2)) * np.maximum(1.0, np.abs(second))
                   + kv.error_bound / np.abs(first))
    return dict(ratio=ratio, resid=resid, excess=np.where(interior, resid / allowed, np.nan),
                converged=kv.converged, boundary_ok=bool(np.all(kv.value[~interior] == 0.0)))


def scan_longtime(grid: GridSpec, nu, C=None, threads=1, residual_margin=10.0) -> VerificationReport:
    """Ratio G_t / (e^{-t lambda_1^2}(1-x)(1-y)) for t >= T and first-term dominance.

    ``C`` sets the admissible band [1/C, C]; without it the band constant is
    measured and reported. The first-term residual |G - e^{-t lambda_1^2}
    phi_1(x) phi_1(y)| relative to that term must stay below
    margin * e^{-t(lambda_2^2 - lambda_1^2)} * max(1, |phi_2 phi_2 / phi_1 phi_1|)
    plus the certified series error.
    """
    nu = as_order(nu)
    ker = bessel_kernel(nu, grid.policy())
    X, Y = _mesh(grid)
    lam = zero_table(nu, 2).zeros[:2]
    basis = bessel_basis(nu, 2, np.array(grid.space_points))
    idx = np.arange(len(grid.space_points))
    I, J = np.meshgrid(idx, idx, indexing="ij")
    ph = [(basis[n][I], basis[n][J]) for n in range(2)]
    times = [t for t in grid.time_points if t >= grid.T]
    if not times:
        raise DomainError("long-time scan needs time points >= T")
    slices = _map(_longtime_slice, [(ker, nu, t, X, Y, lam, ph, residual_margin) for t in times],
                  threads)
    ratio = np.stack([s["ratio"] for s in slices])
    resid = np.stack([s["resid"] for s in slices])
    excess = np.stack([s["excess"] for s in slices])
    sup_r = float(np.nanmax(ratio))
    inf_r = float(np.nanmin(ratio))
    c_meas = max(sup_r, 1.0 / inf_r) if inf_r > 0 else math.inf
    band = c_meas if C is None else C
    in_band = inf_r >= 1.0 / band and sup_r <= band
    resid_ok = bool(np.nanmax(excess) <= 1.0)
    boundary_ok = all(s["boundary_ok"] for s in slices)
    converged = all(s["converged"] for s in slices)
    worst_i = _argbest(np.abs(np.log(ratio.ravel())), "max")
    rec = CheckRecord(
        "longtime", nu, grid.summary(), sup_r, inf_r, _point(worst_i, times, X, Y),
        bool(in_band and resid_ok and boundary_ok and converged and math.isfinite(c_meas)),
        {"C_band": band, "C_measured": c_meas, "spectral_gap": float(lam[1] ** 2 - lam[0] ** 2),
         "max_first_term_residual": float(np.nanmax(resid)),
         "max_residual_over_allowed": float(np.nanmax(excess)),
         "first_term_residual_ok": resid_ok, "boundary_zero": boundary_ok,
         "converged": converged})
    cover = GridSpec(grid.nu_list, grid.T, times if len(times) > 1 else times * 2,
                     grid.space_points, grid.tol)
    return VerificationReport([rec], {repr(nu): {"C_longtime": c_meas}},
                              [_coverage_note(cover, "longtime")])


# ---------------------------------------------------------------------------
# sandwich

def _sandwich_slice(args):
    bk, jk, nu, t, X, Y = args
    g = bk.g(t, X, Y)
    j = jk.evaluate(t, X, Y, reduced=True)
    eps = EPS_INFLATION * (g.error_bound + j.error_bound)
    f = sandwich_factors(nu, t)
    out = {"converged": g.converged and j.converged, "eps_max": float(np.max(eps)),
           "max_abs_gap": float(np.max(np.abs(g.value - j.value)))}
    for name, (lo, hi) in (("refined", f.refined), ("coarse", f.coarse)):
        lower, upper = lo * j.value, hi * j.value
        viol_lo = np.maximum(lower - eps - g.value, 0.0)
        viol_hi = np.maximum(g.value - upper - eps, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            above = np.where(upper > RESOLVE_FACTOR * eps, g.value / upper, np.nan)
            below = np.where(lower > RESOLVE_FACTOR * eps, g.value / lower, np.nan)
        out[name] = dict(violations=int(np.count_nonzero(viol_lo > 0) + np.count_nonzero(viol_hi > 0)),
                         max_violation=float(max(np.max(viol_lo), np.max(viol_hi))),
                         above=above, below=below)
    out["nested"] = (f.coarse[0] <= f.refined[0] * (1 + 1e-15)
                     and f.refined[1] <= f.coarse[1] * (1 + 1e-15))
    return out


def scan_sandwich(grid: GridSpec, nu, threads=1) -> VerificationReport:
    """Check refined and coarse brackets of K_t^nu by the Jacobi kernel with (nu, 1/2).

    Both sides are divided by (xy)^{nu+1/2}, which leaves G_t on the left and
    the reduced Jacobi kernel on the right; this is exact in the interior and
    gives the limiting comparison at x = 0 or y = 0.
    """
    nu = as_order(nu)
    pol = grid.policy()
    bk = bessel_kernel(nu, pol)
    jk = jacobi_kernel(nu, 0.5, pol)
    X, Y = _mesh(grid)
    times = list(grid.time_points)
    slices = _map(_sandwich_slice, [(bk, jk, nu, t, X, Y) for t in times], threads)
    converged = all(s["converged"] for s in slices)
    nested = all(s["nested"] for s in slices)
    records = []
    for name in ("refined", "coarse"):
        above = np.stack([s[name]["above"] for s in slices])
        below = np.stack([s[name]["below"] for s in slices])
        viol = sum(s[name]["violations"] for s in slices)
        sup_above = float(np.nanmax(above)) if np.any(np.isfinite(above)) else math.nan
        inf_below = float(np.nanmin(below)) if np.any(np.isfinite(below)) else math.nan
        worst = _point(_argbest(above.ravel(), "max"), times, X, Y)
        records.append(CheckRecord(
            f"sandwich_{name}", nu, grid.summary(), sup_above, inf_below, worst,
            bool(viol == 0 and converged and nested),
            {"violations": viol, "max_violation": max(s[name]["max_violation"] for s in slices),
             "eps_max": max(s["eps_max"] for s in slices),
             "max_abs_difference": max(s["max_abs_gap"] for s in slices),
             "refined_within_coarse": nested, "converged": converged}))
    return VerificationReport(records, {}, [_coverage_note(grid, "sandwich")])


# ---------------------------------------------------------------------------
# structural identities

def _record(name, nu, grid, value, limit, worst=None, **detail):
    detail.update(max_defect=value, threshold=limit)
    return CheckRecord(name, nu, grid.summary(), value, value, worst or {}, bool(value <= limit), detail)


def structural_checks(grid: GridSpec, nu, seed=0, threads=1) -> VerificationReport:
    """Orthonormality, the Bessel/Jacobi pairing identity, semigroup law,
    symmetry, positivity, mass and eigenfunction reproduction for one order."""
    nu = as_order(nu)
    recs = []
    eye = np.eye(20)
    recs.append(_record("gram_phi", nu, grid, float(np.max(np.abs(gram_phi(nu, 20) - eye))), STRUCT_TOL))
    recs.append(_record("gram_psi", nu, grid, float(np.max(np.abs(gram_psi(nu, 20) - eye))), STRUCT_TOL))
    recs.append(_record("gram_jacobi", nu, grid,
                        float(np.max(np.abs(gram_jacobi((nu, 0.5), 19) - eye))), STRUCT_TOL))

    lemma_tol = STRUCT_TOL_LOW_ORDER if nu < -0.5 else STRUCT_TOL
    pairs = [(n, k) for n in range(1, 6) for k in range(0, 6)]
    defects = _map(lambda nk: lemma_symmetry_defect(nk[0], nk[1], nu), pairs, threads)
    i = int(np.argmax(defects))
    recs.append(_record("lemma_symmetry", nu, grid, float(defects[i]), lemma_tol,
                        worst={"n": pairs[i][0], "k": pairs[i][1]}))

    rng = np.random.default_rng(seed)
    samples = [(float(s), float(t), float(x), float(y)) for s, t, x, y in zip(
        np.exp(rng.uniform(math.log(0.05), math.log(0.5), 10)),
        np.exp(rng.uniform(math.log(0.05), math.log(0.5), 10)),
        rng.uniform(0.0, 1.0, 10), rng.uniform(0.0, 1.0, 10))]
    sg = _map(lambda a: semigroup_defect(nu, *a), samples, threads)
    i = int(np.argmax(sg))
    recs.append(_record("semigroup", nu, grid, float(sg[i]), SEMIGROUP_TOL,
                        worst=dict(zip(("s", "t", "x", "y"), samples[i])), seed=seed))

    ker = bessel_kernel(nu, grid.policy())
    X, Y = _mesh(grid)
    asym, neg, clamps = 0, 0, 0
    for t in grid.time_points:
        a = ker.g(t, X, Y)
        b = ker.g(t, Y, X)
        asym += int(np.count_nonzero(a.value != b.value))
        neg += int(np.count_nonzero(a.value < 0))
        clamps += int(np.count_nonzero(a.clamped))
    recs.append(CheckRecord("symmetry", nu, grid.summary(), float(asym), float(asym), {}, asym == 0,
                            {"asymmetric_points": asym}))
    recs.append(CheckRecord("positivity", nu, grid.summary(), float(neg), float(neg), {}, neg == 0,
                            {"negative_points": neg, "clamped_points": clamps}))

    mass_pts = [(t, x) for t in (0.01, 0.1, 1.0) for x in (0.0, 0.5, 0.9)]
    masses = _map(lambda tx: kernel_mass(nu, tx[0], tx[1]), mass_pts, threads)
    series = [survival_series(nu, t, x) for t, x in mass_pts]
    lo, hi = min(masses), max(masses)
    cross = max(abs(a - b) for a, b in zip(masses, series))
    recs.append(CheckRecord("mass", nu, grid.summary(), hi, lo, {}, bool(lo > 0 and hi <= 1 + MASS_SLACK),
                            {"max_mass": hi, "min_mass": lo, "series_cross_check": cross}))

    rep_pts = [(t, x) for t in (0.01, 0.1) for x in (0.0, 0.3, 0.8)]
    worst, wpt = 0.0, {}
    pol = TruncationPolicy(tol=1e-14)
    kk = bessel_kernel(nu, pol)
    lam = zero_table(nu, 5).zeros[:5]
    for t, x in rep_pts:
        integ, _ = weighted_integral(lambda y: kk.g(t, x, y).value * bessel_basis(nu, 5, y),
                                     WeightSpec.power(nu), 1e-11)
        exact = np.exp(-t * lam ** 2) * bessel_basis(nu, 5, np.array([x]))[:, 0]
        d = float(np.max(np.abs(integ - exact)))
        if d > worst:
            worst, wpt = d, {"t": t, "x": x}
    recs.append(_record("reproduction", nu, grid, worst, REPRODUCTION_TOL, worst=wpt))
    return VerificationReport(recs, {}, [_coverage_note(grid, "structural sweeps")])


SUITES = ("envelope", "longtime", "sandwich", "structural")


def run_suite(suite, grid: GridSpec, c_pair=(0.35, 0.20), threads=1, long_grid=None, seed=0):
    """Run one suite (or 'all') for every order in grid.nu_list."""
    chosen = SUITES if suite == "all" else (suite,)
    if any(s not in SUITES for s in chosen):
        raise DomainError(f"unknown suite {suite!r}")
    report = VerificationReport()
    for nu in grid.nu_list:
        c_hat = None
        if "envelope" in chosen:
            env = scan_envelope_shorttime(grid, nu, c_pair, threads)
            c_hat = env.records[0].detail["C_hat"]
            report.extend(env)
        if "longtime" in chosen:
            lg = long_grid or GridSpec.longtime(max(grid.T, 1.0), (nu,), grid.tol)
            long = scan_longtime(lg, nu, None, threads)
            report.extend(long)
            if c_hat is not None:
                joint = max(c_hat, long.records[0].detail["C_measured"])
                report.constants[repr(nu)].update(C_hat_shorttime=c_hat, C_hat=joint)
        if "sandwich" in chosen:
            report.extend(scan_sandwich(grid, nu, threads))
        if "structural" in chosen:
            report.extend(structural_checks(grid, nu, seed, threads))
    return report
