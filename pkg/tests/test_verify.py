import json
import math

import numpy as np
import pytest

from fbheat.errors import DomainError
from fbheat.verify import (DEFAULT_SPACE, GridSpec, VerificationReport, c_hat_stability, run_suite,
                           scan_envelope_shorttime, scan_longtime, scan_sandwich, structural_checks)

SMALL = GridSpec((0.5,), 1.0, tuple(np.geomspace(1e-3, 1.0, 7)), (0.0, 0.01, 0.2, 0.5, 0.8, 0.99, 1.0))


def test_grid_defaults():
    g = GridSpec.default()
    assert len(g.space_points) == 17
    assert {0.0, 1e-3, 0.999, 1.0} <= set(g.space_points)
    assert g.time_points[0] == pytest.approx(1e-3) and g.time_points[-1] == pytest.approx(1.0)
    assert len(g.time_points) == 37
    r = g.refine()
    assert len(r.space_points) == 33 and len(r.time_points) == 73
    assert set(g.space_points) <= set(r.space_points)


def test_grid_validation():
    with pytest.raises(DomainError):
        GridSpec((0.0,), 1.0, (0.1,), DEFAULT_SPACE)
    with pytest.raises(DomainError):
        GridSpec((0.0,), 1.0, (0.1, 0.2), (0.0, 1.5))
    with pytest.raises(DomainError):
        GridSpec((-1.0,), 1.0, (0.1, 0.2), (0.0, 1.0))


def test_envelope_scan_half_passes():
    rep = scan_envelope_shorttime(SMALL, 0.5)
    rec = rep.records[0]
    assert rec.passed
    assert math.isfinite(rec.detail["C_hat"]) and rec.inf_ratio > 0
    assert rep.constants["0.5"]["c1_used"] == 0.35


def test_envelope_scan_rejects_bad_pair():
    with pytest.raises(DomainError):
        scan_envelope_shorttime(SMALL, 0.5, (0.2, 0.35))


def test_envelope_scan_boundary_only():
    g = GridSpec((0.0,), 1.0, (0.01, 0.1), (0.999999, 1.0))
    rec = scan_envelope_shorttime(g, 0.0).records[0]
    assert rec.detail["boundary_zero"]


def test_longtime_first_term_residual():
    g = GridSpec.longtime(1.0, (0.0,))
    rec = scan_longtime(g, 0.0).records[0]
    assert rec.passed
    assert rec.detail["max_first_term_residual"] <= 1e-8
    assert 0 < rec.inf_ratio <= rec.sup_ratio < math.inf


def test_longtime_band_enforced():
    g = GridSpec.longtime(1.0, (0.5,))
    rec = scan_longtime(g, 0.5, C=1.0001).records[0]
    assert not rec.passed


def test_sandwich_half_equality():
    rep = scan_sandwich(SMALL, 0.5)
    assert rep.passed
    for rec in rep.records:
        assert rec.detail["max_abs_difference"] <= rec.detail["eps_max"]


def test_sandwich_nu_25_lower_is_jacobi():
    g = GridSpec((2.5,), 1.0, (0.01, 0.1, 0.5), (0.0, 0.3, 0.6, 0.9, 1.0))
    rep = scan_sandwich(g, 2.5)
    assert rep.passed
    assert rep.records[0].inf_ratio >= 1.0 - 1e-9


def test_structural_half():
    rep = structural_checks(SMALL, 0.5)
    assert rep.passed
    by = {r.check_name: r for r in rep.records}
    for name in ("gram_phi", "gram_psi", "gram_jacobi", "lemma_symmetry", "semigroup", "reproduction"):
        assert by[name].detail["max_defect"] <= 1e-10


def test_report_serialisation_and_determinism():
    a = run_suite("envelope", SMALL, threads=1)
    b = run_suite("envelope", SMALL, threads=3)
    assert a.to_json() == b.to_json()
    doc = json.loads(a.to_json())
    assert doc["schema_version"] == 1 and doc["passed"] is True
    assert doc["coverage"] and "sampled" in doc["coverage"][0]
    csv_text = a.to_csv().splitlines()
    assert csv_text[0].startswith("check_name,nu,passed")


def test_report_joint_constant():
    rep = run_suite("all", GridSpec.default(1.0, (-0.5,)))
    c = rep.constants["-0.5"]
    assert c["C_hat"] == max(c["C_hat_shorttime"], c["C_longtime"])
    assert rep.passed


def test_c_hat_stability_half():
    a, b, rel = c_hat_stability(GridSpec.default(1.0, (0.5,)), 0.5)
    assert rel <= 0.05


def test_unknown_suite():
    with pytest.raises(DomainError):
        run_suite("nope", SMALL)


def test_empty_report_passes():
    assert VerificationReport().passed
