import math

import pytest

from macroscopicity.config import CapacityError
from macroscopicity.scaling import (MeasureConfig, ScalingReport, ScalingThresholds, ScanFailure,
                                    classify_scaling, compute_measure, fit_exponent,
                                    hierarchy_sizes, hierarchy_violations, verdict_for)


def test_fit_exponent_recovers_power_law():
    ns = [4, 6, 8, 10]
    b, a = fit_exponent(ns, [0.3 * n ** 1.5 for n in ns])
    assert b == pytest.approx(1.5) and a == pytest.approx(0.3)


def test_verdict_thresholds():
    assert verdict_for(0.95) == "macroscopic"
    assert verdict_for(0.8) == "macroscopic"
    assert verdict_for(0.5) == "indeterminate"
    assert verdict_for(0.1) == "microscopic"
    assert verdict_for(None) == "indeterminate"


def test_ghz_scan_slope():
    rep = classify_scaling("neff_f", "ghz", [4, 6, 8, 10])
    assert rep.exponent == pytest.approx(1.0, abs=0.02)
    assert rep.verdict == "macroscopic"


def test_singlet_pairs_flat():
    rep = classify_scaling("neff_f", "singlet_pairs", [4, 6, 8, 10])
    assert abs(rep.exponent) < 0.05
    assert rep.verdict == "microscopic"


def test_gen_ghz_values_follow_closed_form():
    # the constant offset dominates at small N, so only the increments are linear
    eps = 0.3
    rep = classify_scaling("neff_f", f"gen_ghz:eps={eps}", [6, 8, 10, 12])
    for p in rep.points:
        n = p["N"]
        want = 1 + (n - 1) * math.sin(eps) ** 2 / (1 + math.cos(eps) ** n)
        assert p["neff"] == pytest.approx(want, rel=1e-6)
    assert 0 < rep.exponent < 0.8


def test_too_few_points_is_indeterminate():
    rep = classify_scaling("neff_f", "ghz", [4, 6])
    assert rep.verdict == "indeterminate" and rep.exponent is None
    assert any("usable points" in n for n in rep.notes)


def test_capacity_points_are_skipped(monkeypatch):
    monkeypatch.setenv("MACRO_MAX_QUBITS", "6")
    rep = classify_scaling("neff_f", "ghz", [3, 4, 5, 6, 7, 8])
    assert [p["N"] for p in rep.points] == [3, 4, 5, 6]
    assert sum("skipped" in n for n in rep.notes) == 2


def test_undefined_points_give_undefined_verdict():
    rep = classify_scaling("marquardt", "ps_domain_wall", [5, 6, 7, 8])
    assert rep.verdict == "undefined"


def test_scan_failure_keeps_partial_report():
    with pytest.raises(ScanFailure) as info:
        classify_scaling("index_p", "ghz_mixture", [3, 4])
    assert isinstance(info.value.report, ScalingReport)


def test_memo_returns_same_object():
    cfg = MeasureConfig()
    assert compute_measure("neff_f", "ghz:5", cfg) is compute_measure("neff_f", "ghz:5", cfg)
    with pytest.raises(KeyError):
        compute_measure("nope", "ghz:5", cfg)


def test_csv_matches_json():
    rep = classify_scaling("neff_f", "gen_ghz:eps=0.3", [4, 5, 6, 7])
    lines = rep.to_csv().splitlines()
    assert lines[0] == "N,neff,measure_id,family,params"
    for line, p in zip(lines[1:], rep.points):
        n, v, m, fam, params = line.split(",")
        assert int(n) == p["N"]
        assert float(v) == pytest.approx(p["neff"], rel=1e-11)
        assert (m, fam, params) == ("neff_f", "gen_ghz", "eps=0.3")


def test_hierarchy_sizes():
    assert hierarchy_sizes("cluster_ghz") == [6, 9, 12]
    assert hierarchy_sizes("ghz") == [5, 7, 10, 12]


def test_hierarchy_violation_rules():
    ok = dict(rel_fisher="macroscopic", bjork_mana="macroscopic", korsbakken="macroscopic",
              marquardt="macroscopic", neff_f="macroscopic")
    assert hierarchy_violations("ghz", ok) == []
    assert hierarchy_violations("ghz", {**ok, "neff_f": "microscopic"}) == ["K=>F"]
    assert hierarchy_violations("ghz", {**ok, "marquardt": "microscopic"}) == ["K<=>M"]
    # K<=>M only applies to local-unitary-related branches
    assert hierarchy_violations("cloned", {**ok, "marquardt": "microscopic"}) == []
    assert hierarchy_violations("ghz", {**ok, "korsbakken": "undefined"}) == []
    assert "rF<=>B" in hierarchy_violations("ghz", {**ok, "bjork_mana": "microscopic"})
