"""Built-in theory variants and their expected-verdict tables."""

from __future__ import annotations

import enum
import re
import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .semantics import KripkeModel
from .syntax import Claim, Theory, parse_theory


def _read(name: str) -> str:
    return resources.files("homl").joinpath("theories", name).read_text(encoding="utf-8")


LIBRARIES = {
    "mfilter": _read("mfilter.thy"),
    "basedefs": _read("basedefs.thy"),
}


class VariantId(enum.Enum):
    ScottVariant = "scott.thy"
    UFilterVariant = "ufilter.thy"
    SimpleVariant = "simple.thy"
    SimpleVariantPG = "simple_pg.thy"
    SimpleVariantSE = "simple_se.thy"
    SimpleVariantSEinT = "simple_se_t.thy"
    SimpleVariantHF = "simple_hf.thy"
    HOMLBase = "homl_base.thy"


def theory_source(variant: VariantId | str) -> str:
    if isinstance(variant, str):
        variant = VariantId[variant]
    return _read(variant.value)


@lru_cache(maxsize=None)
def builtin_theory(name: str) -> Theory:
    variant = VariantId[name]
    theory = parse_theory(_read(variant.value), LIBRARIES)
    if theory.name != variant.name:
        raise AssertionError(f"{variant.value} declares theory {theory.name}")
    return theory


def builtin_theories() -> list[tuple[VariantId, Theory]]:
    return [(v, builtin_theory(v.name)) for v in VariantId]


def basedefs_theory() -> Theory:
    """An axiom-free theory holding only the shared definitions."""
    return parse_theory("theory Defs frame k\ninclude mfilter\ninclude basedefs\n", LIBRARIES)


# ---------------------------------------------------------------------------
# Regression suite

EXPECTED_STATUS = {"valid": "ValidAtBounds", "countersat": "Countermodel", "consistent": "ModelFound"}


@dataclass
class ClaimReport:
    variant: str
    claim: str
    kind: str
    expected: str
    actual: str
    bounds: tuple[tuple[int, int], ...]
    frame: str
    witness: KripkeModel | None = None
    witness_bounds: tuple[int, int] | None = None
    elapsed: float = 0.0
    candidates: int = 0
    message: str = ""

    @property
    def match(self) -> bool:
        return self.expected == self.actual

    def line(self) -> str:
        mark = "ok      " if self.match else "MISMATCH"
        where = f" at {self.witness_bounds[0]},{self.witness_bounds[1]}" if self.witness_bounds else ""
        bounds = " ".join(f"({w},{e})" for w, e in self.bounds)
        extra = f" [{self.message}]" if self.message else ""
        return (f"{mark} {self.variant}.{self.claim:<13} {self.kind:<10} expected={self.expected:<13} "
                f"actual={self.actual}{where} bounds={bounds} frame={self.frame} "
                f"({self.elapsed:.2f}s){extra}")

    def record(self) -> dict:
        return {
            "variant": self.variant, "claim": self.claim, "kind": self.kind,
            "expected": self.expected, "actual": self.actual, "match": self.match,
            "bounds": [list(b) for b in self.bounds], "frame": self.frame,
            "witness": self.witness.to_dict() if self.witness else None,
            "witness_bounds": list(self.witness_bounds) if self.witness_bounds else None,
            "elapsed": round(self.elapsed, 4), "candidates": self.candidates,
            "message": self.message,
        }


@dataclass
class SuiteReport:
    claims: list[ClaimReport] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(c.match for c in self.claims)

    @property
    def inconclusive(self) -> bool:
        return any(c.actual in ("BoundExceeded", "TimedOut") for c in self.claims)

    def text(self) -> str:
        lines = [c.line() for c in self.claims]
        bad = sum(not c.match for c in self.claims)
        lines.append(f"{len(self.claims)} claims, {bad} mismatches")
        return "\n".join(lines)

    def records(self) -> list[dict]:
        return [c.record() for c in self.claims]


def check_claim(theory: Theory, claim: Claim, bounds=None, **options) -> ClaimReport:
    """Run one claim at each of its bounds (or ``bounds``) and compare to its kind.

    ``valid`` must hold at every bound; ``countersat`` and ``consistent`` need a
    model at some bound. Edges assume only their premises.
    """
    from .modelfind import (
        Status, check_bounded_validity, config_for, find_theory_model, verify_proof_net,
    )

    bounds = tuple(bounds or claim.bounds)
    frame = claim.frame or theory.frame
    expected = EXPECTED_STATUS[claim.kind]
    actual = None
    witness = where = None
    message = ""
    candidates = 0
    t0 = time.monotonic()
    for b in bounds:
        cfg = config_for(theory, b, frame, **options)
        if claim.kind == "consistent":
            res = find_theory_model(theory, cfg)
            status = "ModelFound" if res.found else (
                "NoModel" if res.verdict.name == "EXHAUSTED" else res.verdict.value)
            model, stats, msg = res.model, res.stats, res.message
        else:
            if claim.is_edge:
                edge = {claim.name: (claim.premises, claim.formula)}
                v = verify_proof_net(theory, edge, cfg, with_axioms=False)[claim.name]
            else:
                v = check_bounded_validity(theory, claim.formula, cfg)
            status, model, stats, msg = v.status.value, v.model, v.stats, v.message
        candidates += stats.candidates
        if status in ("BoundExceeded", "TimedOut"):
            actual, message = status, msg
            break
        if status in ("ModelFound", "Countermodel"):
            actual, witness, where = status, model, b
            break
        actual = status
    return ClaimReport(theory.name, claim.name, claim.kind, expected, actual, bounds, frame,
                       witness, where, time.monotonic() - t0, candidates, message)


def run_suite(bounds=None, variant_filter: str | None = None, claim_filter: str | None = None,
              **options) -> SuiteReport:
    """Check every built-in claim against its expected verdict."""
    report = SuiteReport()
    for variant, theory in builtin_theories():
        if variant_filter and not re.fullmatch(variant_filter, variant.name):
            continue
        for claim in theory.claims:
            if claim_filter and not re.fullmatch(claim_filter, claim.name):
                continue
            report.claims.append(check_claim(theory, claim, bounds, **options))
    return report
