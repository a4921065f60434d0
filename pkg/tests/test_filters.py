import random

import pytest

from homl.filters import (
    conditions_at, count_partial_ultrafilters, hauptfilter, instantiate_filter,
    instantiate_ultrafilter, is_ultrafilter_at,
)
from homl.semantics import BoundExceeded, KripkeModel, propset_from_worlds, truth_set
from homl.syntax import PROPERTY, PROPSET, App, Const, TypeCheckError, Var, constants, parse_formula

from strategies import random_model

S = Var("S", PROPSET)


def _formula_truth(model, builder, per_world):
    f = builder(S)
    return truth_set(model, f, {"S": propset_from_worlds(per_world, model.n_worlds)})


def test_filter_formula_mentions_only_primitives():
    f = instantiate_ultrafilter(Const("P", PROPSET))
    assert constants(f) == {"P"}


def test_builders_check_argument_type():
    with pytest.raises(TypeCheckError):
        instantiate_filter(Var("X", PROPERTY))
    with pytest.raises(TypeCheckError):
        hauptfilter(S)


@pytest.mark.parametrize("n,m", [(1, 1), (2, 1), (1, 2)])
def test_direct_conditions_match_formulas(n, m):
    rng = random.Random(n * 10 + m)
    k = 1 << (n * m)
    for _ in range(150):
        model = random_model(rng, n, m)
        fam = tuple(rng.getrandbits(k) for _ in range(n))
        uf = _formula_truth(model, instantiate_ultrafilter, fam)
        fl = _formula_truth(model, instantiate_filter, fam)
        for w in range(n):
            cond = conditions_at(fam[w], w, model)
            direct_filter = all(cond[c] for c in ("large", "proper", "superset_closed", "meet_closed"))
            assert bool(fl >> w & 1) == direct_filter
            assert bool(uf >> w & 1) == is_ultrafilter_at(fam[w], w, model)


def test_hauptfilter_of_godlike_contains_its_supersets():
    # one world, one existing entity, P = {U}: G is U, so HF G holds of exactly U
    model = KripkeModel(1, 1, 1, 1, (0b10,))
    hf = hauptfilter(parse_formula("\\x:E. forall Y:Property. P Y -> Y x"))
    assert truth_set(model, instantiate_filter(hf)) == 1
    assert truth_set(model, App(hf, parse_formula("\\x:E. T"))) == 1
    assert truth_set(model, App(hf, parse_formula("\\x:E. F"))) == 0


def test_census_small_models():
    one = KripkeModel(1, 1, 1, 1, (0b10,))
    assert count_partial_ultrafilters(one).text() == "candidates=4 valid=1"
    two = KripkeModel(1, 2, 1, 0b11, (0,))
    assert count_partial_ultrafilters(two).text() == "candidates=16 valid=2"


def test_census_witnesses_are_ultrafilters():
    rng = random.Random(2)
    for _ in range(10):
        model = random_model(rng, 2, 1)
        res = count_partial_ultrafilters(model)
        assert res.candidates == 512
        assert len(res.witnesses) == res.valid
        for fam, i in res.witnesses:
            assert is_ultrafilter_at(fam[i], i, model)
        total = sum(is_ultrafilter_at(s, w, model) * 16 for w in range(2) for s in range(16))
        assert res.valid == total


def test_census_parallel_matches_sequential():
    model = random_model(random.Random(11), 2, 1)
    a = count_partial_ultrafilters(model)
    b = count_partial_ultrafilters(model, jobs=2)
    assert (a.candidates, a.valid) == (b.candidates, b.valid)
    assert sorted(a.witnesses) == sorted(b.witnesses)


def test_census_limit():
    model = KripkeModel(2, 2, 0, 0, (0, 0))
    with pytest.raises(BoundExceeded):
        count_partial_ultrafilters(model)


def test_census_record_shape():
    model = KripkeModel(1, 1, 1, 1, (0b10,))
    rec = count_partial_ultrafilters(model).record(model)
    assert rec["valid"] == 1
    assert rec["witnesses"][0]["world"] == "i1"


def _mc_model():
    u = [("e1", "i1"), ("e1", "i2")]
    return KripkeModel.from_pairs(
        ["i1", "i2"], ["e1"], [("i1", "i1"), ("i2", "i1"), ("i2", "i2")], u,
        {"i1": [u, [("e1", "i1")]], "i2": [u, [("e1", "i2")]]})


def test_example_partial_structure():
    from homl.semantics import intension
    model = _mc_model()
    empty, only_i1 = intension([], 2), intension([(0, 0)], 2)
    full, only_i2 = intension([(0, 0), (0, 1)], 2), intension([(0, 1)], 2)
    fam = ((1 << empty) | (1 << only_i1), (1 << full) | (1 << only_i2))
    assert is_ultrafilter_at(fam[1], 1, model)
    assert not is_ultrafilter_at(fam[0], 0, model)
    res = count_partial_ultrafilters(model)
    assert (fam, 1) in res.witnesses and (fam, 0) not in res.witnesses
    ts = _formula_truth(model, instantiate_ultrafilter, fam)
    assert ts == 0b10


def test_world_constant_filters_hold_globally():
    rng = random.Random(21)
    for _ in range(100):
        model = random_model(rng, 2, 1)
        for s in range(16):
            fam = (s, s)
            conds = [conditions_at(s, w, model) for w in range(2)]
            if all(all(c[k] for k in ("large", "proper", "superset_closed", "meet_closed"))
                   for c in conds):
                assert _formula_truth(model, instantiate_filter, fam) == 0b11
