import itertools

import pytest

from homl.corpus import builtin_theory
from homl.modelfind import (
    AtWorld, Refuted, SearchConfig, SearchError, Status, Verdict, access_values,
    check_bounded_validity, config_for, constraint_holds, enumerate_models, find_model,
    find_theory_model, raw_candidate_count, theory_constraints, verify_model, verify_proof_net,
)
from homl.semantics import Bounds, KripkeModel, holds_globally
from homl.syntax import Valid, parse_formula

from oracle import Oracle

MC = parse_formula("[forall phi:Prop. phi -> box phi]")
B_SCHEMA = parse_formula("forall p:Prop. p -> box dia p")
T_SCHEMA = parse_formula("forall p:Prop. box p -> p")


def test_raw_candidate_count_without_pruning():
    assert raw_candidate_count(Bounds(2, 1)) == 16384
    cfg = SearchConfig(Bounds(2, 1), pruning=False)
    res = find_model([Valid(parse_formula("F"))], cfg)
    assert res.verdict is Verdict.EXHAUSTED
    assert res.stats.candidates == 16384
    assert sum(1 for _ in enumerate_models(Bounds(2, 1))) == 16384


def test_pruning_accounts_for_every_candidate():
    cfg = SearchConfig(Bounds(2, 1))
    res = find_model([Refuted(MC), Valid(parse_formula("F"))], cfg)
    assert res.verdict is Verdict.EXHAUSTED
    assert res.stats.candidates + res.stats.pruned == 16384


@pytest.mark.parametrize("frame,schema", [("reflexive", T_SCHEMA), ("symmetric", B_SCHEMA)])
def test_frame_constraints(frame, schema):
    assert all(holds_globally(m, schema) for m in enumerate_models(Bounds(2, 1), frame))
    n = len(access_values(2, frame))
    assert n == (4 if frame == "reflexive" else 8)


def test_canonical_order_is_lexicographic():
    keys = [(m.access, m.exists_at, m.P) for m in itertools.islice(enumerate_models(Bounds(2, 1)), 600)]
    assert keys == sorted(keys)


def test_first_model_in_order():
    cfg = SearchConfig(Bounds(2, 1))
    res = find_model([Valid(parse_formula("T"))], cfg)
    assert res.found
    assert (res.model.access, res.model.exists_at, res.model.P) == (0, 0, (0, 0))


def test_world_tagged_constraint():
    cfg = SearchConfig(Bounds(2, 1))
    f = parse_formula("box F")
    res = find_model([AtWorld(f, 1, False), AtWorld(f, 0, True)], cfg)
    assert res.found
    assert res.model.successors(0) == 0 and res.model.successors(1) != 0


def test_scott_consistency_model_has_godlike_entity():
    scott = builtin_theory("ScottVariant")
    res = find_theory_model(scott, config_for(scott, (1, 1)))
    assert res.found
    g = scott.expand(parse_formula("forall x:E. G x", scott))
    assert holds_globally(res.model, g)


def test_se_t3_countermodel_is_unconnected_world():
    se = builtin_theory("SimpleVariantSE")
    v = check_bounded_validity(se, se.claim("T3").formula, config_for(se, (1, 1)))
    assert v.status is Status.COUNTERMODEL
    assert v.model.n_worlds == 1 and v.model.access == 0


def test_simple_a1_countermodel_at_1_2():
    simple = builtin_theory("SimpleVariant")
    v = check_bounded_validity(simple, simple.claim("A1").formula, config_for(simple, (1, 2)))
    assert v.status is Status.COUNTERMODEL
    checks = verify_model(v.model, {"A1": simple.claim("A1").formula}, simple)
    assert not checks["A1"].globally


def test_valid_verdict_carries_caveat():
    simple = builtin_theory("SimpleVariant")
    v = check_bounded_validity(simple, simple.claim("T6").formula, config_for(simple, (2, 1)))
    assert v.status is Status.VALID_AT_BOUNDS
    assert "valid up to (2,1)" in str(v)


@pytest.mark.parametrize("variant,claim", [
    ("UFilterVariant", "MC"), ("SimpleVariant", "MT"), ("SimpleVariant", "A5"),
    ("SimpleVariantHF", "MC"), ("SimpleVariant", "T6"), ("ScottVariant", "T5"),
])
def test_symmetry_breaking_keeps_verdicts(variant, claim):
    theory = builtin_theory(variant)
    c = theory.claim(claim)
    for b in c.bounds:
        plain = check_bounded_validity(theory, c.formula, config_for(theory, b))
        sym = check_bounded_validity(theory, c.formula, config_for(theory, b, symmetry_breaking=True))
        raw = check_bounded_validity(theory, c.formula, config_for(theory, b, pruning=False,
                                                                   reduction="never"))
        assert plain.status == sym.status == raw.status
        assert sym.stats.candidates <= plain.stats.candidates


def test_parallel_search_keeps_first_model():
    theory = builtin_theory("UFilterVariant")
    seq = check_bounded_validity(theory, MC, config_for(theory, (2, 1)))
    par = check_bounded_validity(theory, MC, config_for(theory, (2, 1), deterministic=False, jobs=2))
    assert par.status is seq.status is Status.COUNTERMODEL
    assert par.model == seq.model


def test_every_witness_reverifies():
    # find -> verify round trip against an independent evaluator
    for variant in ("UFilterVariant", "SimpleVariant", "SimpleVariantHF", "HOMLBase"):
        theory = builtin_theory(variant)
        for c in theory.claims:
            if c.kind != "countersat":
                continue
            for b in c.bounds:
                v = check_bounded_validity(theory, c.formula, config_for(theory, b, frame=c.frame))
                if v.model is None:
                    continue
                o = Oracle(v.model)
                for f in theory_constraints(theory):
                    assert o.truth_set(f) == (1 << v.model.n_worlds) - 1
                assert o.truth_set(theory.expand(c.formula)) != (1 << v.model.n_worlds) - 1
                break


def test_candidate_limit_and_timeout():
    cfg = SearchConfig(Bounds(2, 1), candidate_limit=10, pruning=False)
    res = find_model([Valid(parse_formula("F"))], cfg)
    assert res.verdict is Verdict.BOUND_EXCEEDED
    cfg = SearchConfig(Bounds(2, 1), time_limit=0.0, pruning=False)
    res = find_model([Valid(parse_formula("F"))], cfg)
    assert res.verdict is Verdict.TIMED_OUT


def test_unreducible_large_propset_bound_exceeded():
    cfg = SearchConfig(Bounds(2, 2))
    res = find_model([Valid(parse_formula("forall Z:PropSet. Z = Z"))], cfg)
    assert res.verdict is Verdict.BOUND_EXCEEDED


def test_verify_model_empty_and_per_world():
    model = KripkeModel(2, 1, 0b1101, 0b11, (0b1010, 0b1100))
    assert verify_model(model, {}) == {}
    out = verify_model(model, {"MC": MC})
    assert out["MC"].worlds == (True, False)


def test_verify_model_hf_example():
    hf = builtin_theory("SimpleVariantHF")
    model = KripkeModel(1, 1, 1, 1, (0b10,))
    out = verify_model(model, {"F1": hf.axioms["F1"], "T7": hf.claim("T7").formula}, hf)
    assert out["F1"].globally and out["T7"].globally


def test_proof_net_trivial_and_unknown():
    theory = builtin_theory("SimpleVariant")
    cfg = config_for(theory, (2, 1))
    t6 = theory.claim("T6").formula
    res = verify_proof_net(theory, {"T6x": (["T6x"], t6)}, cfg)
    assert res["T6x"].status is Status.VALID_AT_BOUNDS
    with pytest.raises(SearchError):
        verify_proof_net(theory, {"bad": (["Nope"], t6)}, cfg)


def test_proof_net_with_and_without_axioms():
    scott = builtin_theory("ScottVariant")
    cfg = config_for(scott, (2, 1))
    edges = {"T1": (["A1", "A2"], scott.claim("T1").formula),
             "T4": (["A1", "A4"], scott.claim("T4").formula)}
    for flag in (False, True):
        res = verify_proof_net(scott, edges, cfg, with_axioms=flag)
        assert all(v.status is Status.VALID_AT_BOUNDS for v in res.values())
    # T6 does not follow from A1 alone
    res = verify_proof_net(scott, {"T6": (["A1"], scott.claim("T6").formula)}, cfg, with_axioms=False)
    assert res["T6"].status is Status.COUNTERMODEL


def test_constraint_holds_matches_search():
    model = KripkeModel(2, 1, 0b1101, 0b11, (0b1010, 0b1100))
    assert constraint_holds(model, Refuted(MC))
    assert not constraint_holds(model, MC)
