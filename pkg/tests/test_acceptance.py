"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary and when this file is run as a script.
"""

import functools
import random
import sys
import time

import pytest

from homl.corpus import builtin_theory, builtin_theories
from homl.filters import count_partial_ultrafilters
from homl.modelfind import (
    Status, check_bounded_validity, config_for, find_theory_model, verify_model, verify_proof_net,
)
from homl.semantics import Bounds, KripkeModel, Program, holds_globally, reduce_conj_of_set
from homl.syntax import parse_formula
from homl.thf_export import export_corpus, read_thf

from oracle import Oracle
from strategies import random_model

TIME_LIMIT = 10.0
RESULTS: dict[int, tuple[bool, str, float]] = {}


def criterion(number, title):
    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            t0 = time.monotonic()
            try:
                fn(*args, **kwargs)
            except BaseException:
                RESULTS[number] = (False, title, time.monotonic() - t0)
                raise
            elapsed = time.monotonic() - t0
            RESULTS[number] = (elapsed < TIME_LIMIT, title, elapsed)
            assert elapsed < TIME_LIMIT, f"took {elapsed:.1f}s"
        return run
    return wrap


def report_lines():
    lines = []
    for n in sorted(RESULTS):
        ok, title, elapsed = RESULTS[n]
        lines.append(f"criterion {n:>2}: {'PASS' if ok else 'FAIL'}  {title} ({elapsed:.2f}s)")
    return lines


def exhaustive(theory, bounds, frame=None):
    return config_for(theory, bounds, frame, pruning=False)


def valid_everywhere(theory, formula, bounds=((2, 1), (1, 2)), frame=None, cfg=exhaustive):
    for b in bounds:
        v = check_bounded_validity(theory, formula, cfg(theory, b, frame))
        assert v.status is Status.VALID_AT_BOUNDS, (theory.name, str(formula), b, str(v))


def countermodel(theory, formula, bounds=((2, 1), (1, 2)), frame=None):
    for b in bounds:
        v = check_bounded_validity(theory, formula, config_for(theory, b, frame))
        if v.status is Status.COUNTERMODEL:
            return v.model
    raise AssertionError(f"no countermodel for {formula} in {theory.name}")


def reference_mc_model():
    # the known countermodel for modal collapse in the ultrafilter variant
    u = [("e1", "i1"), ("e1", "i2")]
    return KripkeModel.from_pairs(
        ["i1", "i2"], ["e1"], [("i1", "i1"), ("i2", "i1"), ("i2", "i2")], u,
        {"i1": [u, [("e1", "i1")]], "i2": [u, [("e1", "i2")]]})


@criterion(1, "Scott variant consistency: one world, one Godlike entity")
def test_c01_scott_consistency():
    scott = builtin_theory("ScottVariant")
    res = find_theory_model(scott, config_for(scott, (1, 1), "kb"))
    assert res.found
    m = res.model
    assert (m.n_worlds, m.n_entities) == (1, 1)
    g = scott.expand(parse_formula("forall x:E. G x", scott))
    assert holds_globally(m, g)
    assert Oracle(m).truth_set(g) == 1


@criterion(2, "Scott variant: T1-T6, MC, U1, F1, U2, T6-from-F1 valid at (2,1),(1,2)")
def test_c02_scott_bounded_validity():
    scott = builtin_theory("ScottVariant")
    for name in ("T1", "T2", "T3", "T4", "T5", "T6", "MC", "U1", "F1", "U2"):
        valid_everywhere(scott, scott.claim(name).formula)
    again = scott.claim("T6Again")
    assert again.premises == ("F1",)
    for b in ((2, 1), (1, 2)):
        v = verify_proof_net(scott, {"T6Again": (again.premises, again.formula)},
                             exhaustive(scott, b), with_axioms=False)["T6Again"]
        assert v.status is Status.VALID_AT_BOUNDS


@criterion(3, "Ultrafilter variant: MC countermodel isomorphic to the reference model")
def test_c03_ufilter_mc_countermodel():
    uf = builtin_theory("UFilterVariant")
    found = countermodel(uf, uf.claim("MC").formula, bounds=((2, 1),))
    ref = reference_mc_model()
    assert found.isomorphic(ref) is not None
    named = {"U1": uf.axioms["U1"], "A2": uf.axioms["A2"], "A3": uf.axioms["A3"],
             "MC": uf.claim("MC").formula, "A4": uf.claim("A4").formula}
    checks = verify_model(ref, named, uf)
    for name in ("U1", "A2", "A3"):
        assert checks[name].globally
    assert checks["MC"].worlds == (True, False)
    assert checks["A4"].worlds == (True, False)


@criterion(4, "Census on the MC countermodel: candidates=512 valid=32")
def test_c04_census():
    uf = builtin_theory("UFilterVariant")
    found = countermodel(uf, uf.claim("MC").formula, bounds=((2, 1),))
    for model in (found, reference_mc_model()):
        res = count_partial_ultrafilters(model)
        assert (res.candidates, res.valid) == (512, 32)
        assert res.text() == "candidates=512 valid=32"


@criterion(5, "Simplified variant: T6 valid; MC, MT, A1, A4, A5, U1 refuted; F1, self-identity valid")
def test_c05_simple_variant():
    s = builtin_theory("SimpleVariant")
    valid_everywhere(s, s.claim("T6").formula)
    for name in ("MC", "MT", "A1", "A4", "A5", "U1"):
        countermodel(s, s.claim(name).formula)
    valid_everywhere(s, s.claim("F1").formula)
    valid_everywhere(s, s.claim("SelfIdentity").formula)
    assert "ultrafilter P" in str(s.claim("U1").formula)
    assert "filter P" in str(s.claim("F1").formula)


@criterion(6, "SE variants: T6, T7 valid in K; T3 refuted by one unconnected world; valid in T; chain")
def test_c06_se_variants():
    se = builtin_theory("SimpleVariantSE")
    valid_everywhere(se, se.claim("T6").formula)
    valid_everywhere(se, se.claim("T7").formula)
    m = countermodel(se, se.claim("T3").formula, bounds=((1, 1), (2, 1)))
    assert m.n_worlds == 1 and m.access == 0
    valid_everywhere(se, se.claim("T3").formula, frame="t")
    set_ = builtin_theory("SimpleVariantSEinT")
    assert set_.frame == "t"
    chain = ["L1", "L2", "T1'", "T3'", "L3", "T6_net"]
    for name in chain:
        c = set_.claim(name)
        assert c.is_edge
        for b in ((2, 1), (1, 2)):
            v = verify_proof_net(set_, {name: (c.premises, c.formula)}, exhaustive(set_, b),
                                 with_axioms=False)[name]
            assert v.status is Status.VALID_AT_BOUNDS, (name, b)
    valid_everywhere(set_, set_.claim("T6").formula)


@criterion(7, "Hauptfilter variant: T6, T7 from F1 alone; T3 refuted in K, valid in T; consistent")
def test_c07_hf_variant():
    hf = builtin_theory("SimpleVariantHF")
    assert list(hf.axioms) == ["F1"]
    for name in ("T6_net", "T7_net"):
        c = hf.claim(name)
        assert c.premises == ("F1",)
        for b in ((2, 1), (1, 2)):
            v = verify_proof_net(hf, {name: (c.premises, c.formula)}, exhaustive(hf, b),
                                 with_axioms=False)[name]
            assert v.status is Status.VALID_AT_BOUNDS
    countermodel(hf, hf.claim("T3").formula, bounds=((1, 1), (2, 1)))
    valid_everywhere(hf, hf.claim("T3").formula, frame="t")
    assert find_theory_model(hf, config_for(hf, (1, 1))).found
    countermodel(hf, hf.claim("MC").formula)
    countermodel(hf, hf.claim("MT").formula)


@criterion(8, "Barcan formulas: possibilist valid at (2,2); actualist converse refuted with varying domains")
def test_c08_barcan():
    base = builtin_theory("HOMLBase")
    for name in ("BF_poss", "CBF_poss"):
        valid_everywhere(base, base.claim(name).formula, bounds=((2, 2),), cfg=config_for)
        valid_everywhere(base, base.claim(name).formula)
    m = countermodel(base, base.claim("CBF_act").formula, bounds=((2, 2),))
    domains = [sum(1 << e for e in m.domain(w)) for w in m.worlds]
    assert len(set(domains)) > 1


@criterion(9, "Set-conjunction reduction agrees with naive enumeration on 3x1000 random models")
def test_c09_reduction_oracle():
    a3 = builtin_theory("SimpleVariant")
    a3 = a3.expand(a3.axioms["A3"]).body
    disagreements = 0
    outcomes = set()
    for n, m in ((1, 1), (2, 1), (1, 2)):
        rng = random.Random(1000 + 10 * n + m)
        naive = Program(a3, Bounds(n, m), reduction="never")
        for _ in range(1000):
            model = random_model(rng, n, m, rng.choice(["none", "reflexive", "symmetric"]))
            expect = naive.truth_set(naive.new_state_for(model))
            got = sum(1 << w for w in range(n) if reduce_conj_of_set(model, w, a3))
            disagreements += expect != got
            outcomes.add(expect == (1 << n) - 1)
    assert disagreements == 0
    assert outcomes == {True, False}


@criterion(10, "Property suites: K, B, T schemas; double complement; find/verify round trip")
def test_c10_property_suites():
    K = parse_formula("forall p q:Prop. box (p -> q) -> box p -> box q")
    B = parse_formula("forall p:Prop. p -> box dia p")
    T = parse_formula("forall p:Prop. box p -> p")
    DC = parse_formula("forall X:Property. compl (compl X) = X")
    rng = random.Random(10)
    sizes = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1)]
    for schema, frame in ((K, "none"), (B, "symmetric"), (T, "reflexive"), (DC, "none")):
        for _ in range(1000):
            model = random_model(rng, *rng.choice(sizes), frame)
            assert holds_globally(model, schema)
    for _, theory in builtin_theories():
        axioms = {n: theory.expand(f) for n, f in theory.axioms.items()}
        for c in theory.claims:
            if c.kind == "valid":
                continue
            for b in c.bounds:
                cfg = config_for(theory, b, c.frame)
                if c.kind == "consistent":
                    model = find_theory_model(theory, cfg).model
                else:
                    model = check_bounded_validity(theory, c.formula, cfg).model
                if model is None:
                    continue
                checks = verify_model(model, axioms)
                assert all(chk.globally for chk in checks.values()), (theory.name, c.name)
                if c.formula is not None:
                    assert not verify_model(model, {"goal": c.formula}, theory)["goal"].globally
                break


@criterion(11, "THF export: every claim exports, re-parses and is byte-identical across runs")
def test_c11_thf_export():
    first = export_corpus()
    second = export_corpus()
    n_claims = sum(len(t.claims) for _, t in builtin_theories())
    assert len(first) == n_claims
    assert first == second
    for text in first.values():
        f = read_thf(text)
        assert len(f.conjectures) == 1


if __name__ == "__main__":
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    print("\n".join(report_lines()))
    sys.exit(code)
