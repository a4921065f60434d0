"""Simplified axiom sets, the Barcan formulas, and THF export."""

import tempfile
from pathlib import Path

from homl import builtin_theory, run_suite
from homl.modelfind import check_bounded_validity, config_for
from homl.thf_export import export_claim, export_theory, read_thf

# %% Regression table for the simplified variants
report = run_suite(variant_filter="SimpleVariant.*")
print(report.text())

# %% T3 needs reflexive frames once positiveness is only ensured for essences
se = builtin_theory("SimpleVariantSE")
t3 = se.claim("T3").formula
for frame in ("k", "t"):
    v = check_bounded_validity(se, t3, config_for(se, (1, 1), frame))
    print(f"\nT3 in frame {frame}: {v}")
    if v.model is not None:
        print(v.model.describe())

# %% Actualist quantifiers break the converse Barcan formula
base = builtin_theory("HOMLBase")
v = check_bounded_validity(base, base.claim("CBF_act").formula, config_for(base, (2, 2)))
print("\nconverse Barcan, actualist:", v)
print(v.model.describe())

# %% Every claim can be handed to a higher-order prover as a THF problem
simple = builtin_theory("SimpleVariant")
name, text = export_claim(simple, simple.claim("T6"))
print(f"\n{name}:\n{text}")
with tempfile.TemporaryDirectory() as out:
    files = export_theory(simple, out)
    for fname in sorted(files):
        read_thf(Path(out, fname).read_text())
    print(f"wrote and re-read {len(files)} problems")
