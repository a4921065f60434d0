"""Scott's axioms on small Kripke models.

Run with ``python demos/01_scott_variant.py``.
"""

from homl import builtin_theory, parse_formula, to_text
from homl.modelfind import check_bounded_validity, config_for, find_theory_model

scott = builtin_theory("ScottVariant")

print("Axioms (frame kb, i.e. symmetric accessibility):")
for name, f in scott.axioms.items():
    print(f"  {name}: {to_text(f)}")

# %% A model of all five axioms
res = find_theory_model(scott, config_for(scott, (1, 1)))
print("\nSmallest model:")
print(res.model.describe())

godlike = scott.expand(parse_formula("[forall x:E. G x]", scott))
print("every entity is Godlike there:", check_bounded_validity(
    scott, godlike, config_for(scott, (1, 1))).status.value)

# %% Theorems and modal collapse, checked on every model with 2 worlds/1 entity
# and with 1 world/2 entities
for name in ("T1", "T3", "T6", "MC"):
    claim = scott.claim(name)
    for b in ((2, 1), (1, 2)):
        v = check_bounded_validity(scott, claim.formula, config_for(scott, b, pruning=False))
        print(f"{name:<3} {v}")

# Bounded validity is not a proof: it only says that no countermodel of the
# given size exists.
