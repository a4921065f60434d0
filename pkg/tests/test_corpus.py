import pytest

from homl.corpus import (
    LIBRARIES, VariantId, builtin_theories, builtin_theory, check_claim, run_suite, theory_source,
)
from homl.syntax import parse_theory


def test_every_variant_loads():
    names = [t.name for _, t in builtin_theories()]
    assert names == [v.name for v in VariantId]


def test_sources_round_trip_through_parser():
    for v in VariantId:
        assert parse_theory(theory_source(v), LIBRARIES).name == v.name


def test_claim_kinds_are_known():
    for _, t in builtin_theories():
        for c in t.claims:
            assert c.kind in ("valid", "countersat", "consistent")
            assert (c.formula is None) == (c.kind == "consistent")


def test_suite_subset_matches():
    report = run_suite(variant_filter="SimpleVariantSE.*")
    assert report.claims and report.ok
    assert "mismatches" in report.text()
    rec = report.records()[0]
    assert {"variant", "claim", "expected", "actual", "match"} <= set(rec)


def test_claim_report_detects_mismatch():
    # T3 holds on reflexive frames; checking it in K must come out as a countermodel
    se = builtin_theory("SimpleVariantSE")
    claim = se.claim("T3_refl")
    from dataclasses import replace
    wrong = replace(claim, frame="k", bounds=((1, 1),))
    rep = check_claim(se, wrong)
    assert rep.actual == "Countermodel" and not rep.match
    assert rep.witness is not None and rep.witness_bounds == (1, 1)


def test_unknown_variant():
    with pytest.raises(KeyError):
        builtin_theory("Nope")
