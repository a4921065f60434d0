"""Modal filters and ultrafilters: formula builders and a partial-ultrafilter census."""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

from .semantics import (
    BoundExceeded, KripkeModel, extension, intension_pairs, propset_from_worlds, world_label,
)
from .syntax import PROPERTY, PROPSET, App, Const, Formula, Theory, TypeCheckError, typecheck

FILTER_CONDITIONS = ("large", "proper", "superset_closed", "meet_closed")
ULTRAFILTER_CONDITIONS = FILTER_CONDITIONS + ("maximal",)


@lru_cache(maxsize=1)
def _defs() -> Theory:
    from .corpus import basedefs_theory

    return basedefs_theory()


def _apply(defname: str, target: Formula, want) -> Formula:
    target, t = typecheck(target)
    if t != want:
        raise TypeCheckError(f"{defname} expects {want}, got {t}")
    theory = _defs()
    d = theory.definitions[defname]
    return theory.expand(App(Const(defname, d.type), target))


def instantiate_filter(target: Formula) -> Formula:
    """Prop-typed conjunction of the four filter conditions for a PropSet term."""
    return _apply("filter", target, PROPSET)


def instantiate_ultrafilter(target: Formula) -> Formula:
    return _apply("ultrafilter", target, PROPSET)


def hauptfilter(g: Formula) -> Formula:
    """The PropSet of all properties entailed by ``g`` at the evaluation world."""
    return _apply("HF", g, PROPERTY)


# ---------------------------------------------------------------------------
# Direct (set-level) checks


def conditions_at(members: int, w: int, model: KripkeModel) -> dict[str, bool]:
    """Evaluate the five ultrafilter conditions for the intension set ``members`` at ``w``.

    Inclusion is taken over the individuals existing at ``w``; membership is
    intensional, so properness asks whether the empty intension itself is a member.
    """
    n, m = model.n_worlds, model.n_entities
    k = model.n_intensions
    full = k - 1
    dom = sum(1 << e for e in model.domain(w))
    ext = [extension(x, w, n, m) & dom for x in range(k)]
    inside = [x for x in range(k) if members >> x & 1]
    superset = all(members >> y & 1
                   for x in inside for y in range(k) if ext[x] & ~ext[y] == 0)
    meet = all(members >> (x & y) & 1 for x in inside for y in inside)
    maximal = all(members >> x & 1 or members >> (full ^ x) & 1 for x in range(k))
    return {
        "large": bool(members >> full & 1),
        "proper": not members & 1,
        "superset_closed": superset,
        "meet_closed": meet,
        "maximal": maximal,
    }


def is_ultrafilter_at(members: int, w: int, model: KripkeModel) -> bool:
    return all(conditions_at(members, w, model).values())


@dataclass
class CensusResult:
    candidates: int
    valid: int
    witnesses: list[tuple[tuple[int, ...], int]] = field(default_factory=list)

    def text(self) -> str:
        return f"candidates={self.candidates} valid={self.valid}"

    def record(self, model: KripkeModel) -> dict:
        n = model.n_worlds
        return {
            "candidates": self.candidates,
            "valid": self.valid,
            "witnesses": [
                {"world": world_label(i),
                 "F": {world_label(w): [intension_pairs(x, n, labels=True)
                                        for x in range(model.n_intensions) if fam[w] >> x & 1]
                       for w in range(n)}}
                for fam, i in self.witnesses
            ],
        }

    def propsets(self, model: KripkeModel) -> list[tuple[int, int]]:
        """Witnesses as (PropSet denotation, world) pairs for formula-level checks."""
        return [(propset_from_worlds(fam, model.n_worlds), i) for fam, i in self.witnesses]


DEFAULT_CENSUS_LIMIT = 1 << 22


def _census_slice(model: KripkeModel, start: int, stop: int) -> tuple[int, list]:
    n = model.n_worlds
    sets = 1 << model.n_intensions
    good = [[is_ultrafilter_at(s, w, model) for s in range(sets)] for w in range(n)]
    valid = 0
    witnesses = []
    for idx in range(start, stop):
        fam_idx, i = divmod(idx, n)
        fam = []
        rest = fam_idx
        for _ in range(n):
            rest, s = divmod(rest, sets)
            fam.append(s)
        fam = tuple(reversed(fam))
        if good[i][fam[i]]:
            valid += 1
            witnesses.append((fam, i))
    return valid, witnesses


def count_partial_ultrafilters(model: KripkeModel, limit: int = DEFAULT_CENSUS_LIMIT,
                               jobs: int = 1) -> CensusResult:
    """Count pairs (F, i) where the world-indexed intension set F is an ultrafilter at i.

    Every family F (one intension set per world) is paired with every world, so
    there are ``(2**K)**N * N`` candidates for ``K`` intensions and ``N`` worlds.
    """
    n = model.n_worlds
    candidates = (1 << model.n_intensions) ** n * n
    if candidates > limit:
        raise BoundExceeded(f"{candidates} census candidates exceed limit {limit}")
    if jobs <= 1:
        valid, witnesses = _census_slice(model, 0, candidates)
        return CensusResult(candidates, valid, witnesses)
    step = -(-candidates // jobs)
    ranges = [(a, min(a + step, candidates)) for a in range(0, candidates, step)]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(pool.map(_census_slice, itertools.repeat(model), *zip(*ranges)))
    witnesses = [w for _, ws in parts for w in ws]
    return CensusResult(candidates, sum(v for v, _ in parts), witnesses)
