"""Dropping the necessity of positiveness: a countermodel for modal collapse.

With P only required to be an ultrafilter, modal collapse fails on a model
with two worlds and one entity. The search returns the first such model in
enumeration order; it is isomorphic to the hand-built one below.
"""

from homl import KripkeModel, builtin_theory
from homl.filters import count_partial_ultrafilters
from homl.modelfind import check_bounded_validity, config_for, verify_model

uf = builtin_theory("UFilterVariant")
mc = uf.claim("MC").formula

v = check_bounded_validity(uf, mc, config_for(uf, (2, 1)))
print(v)
print(v.model.describe())

# %% The same countermodel written out by hand
u = [("e1", "i1"), ("e1", "i2")]
hand = KripkeModel.from_pairs(
    ["i1", "i2"], ["e1"], [("i1", "i1"), ("i2", "i1"), ("i2", "i2")], u,
    {"i1": [u, [("e1", "i1")]], "i2": [u, [("e1", "i2")]]})
print("\nisomorphic to the found one:", hand.isomorphic(v.model) is not None)

checks = verify_model(hand, {**uf.axioms, "MC": mc, "A4": uf.claim("A4").formula}, uf)
for name, chk in checks.items():
    print(f"  {name:<3} i1={chk.worlds[0]!s:<5} i2={chk.worlds[1]}")

# %% How many world-indexed property sets are ultrafilters at a given world?
census = count_partial_ultrafilters(hand)
print("\n" + census.text())
fam, world = census.witnesses[0]
print("first witness is an ultrafilter at", ["i1", "i2"][world])
