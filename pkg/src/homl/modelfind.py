"""Bounded model and countermodel search over finite Kripke models.

Models are enumerated in a fixed canonical order: accessibility matrix, then the
existence table, then ``P`` world by world, each as an increasing bit pattern.
Constraints that do not mention ``P`` (or existence) are checked as soon as the
components they depend on are fixed, which prunes whole subtrees.

A "valid" verdict here only means that no countermodel exists within the
searched bounds; it is not a proof.
"""

from __future__ import annotations

import enum
import itertools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .semantics import (
    Bounds, BoundExceeded, KripkeModel, Program, State, intension_permutation, truth_set,
)
from .syntax import (
    Claim, ExistsE, ForallE, Formula, HomlError, Theory, Valid, constants, subterms,
)

FRAME_OF_THEORY = {"k": "none", "t": "reflexive", "kb": "symmetric"}


class Verdict(enum.Enum):
    MODEL_FOUND = "ModelFound"
    EXHAUSTED = "ExhaustedAtBounds"
    BOUND_EXCEEDED = "BoundExceeded"
    TIMED_OUT = "TimedOut"


@dataclass(frozen=True)
class Refuted:
    """Constraint: the (globally valid) formula fails at some world."""

    formula: Formula


@dataclass(frozen=True)
class AtWorld:
    """Constraint: the formula has truth value ``value`` at ``world``."""

    formula: Formula
    world: int
    value: bool = True


Constraint = Formula | Refuted | AtWorld


@dataclass(frozen=True)
class SearchConfig:
    bounds: Bounds
    frame: str = "none"
    deterministic: bool = True
    symmetry_breaking: bool = False
    pruning: bool = True
    candidate_limit: int | None = None
    time_limit: float | None = None
    jobs: int = 1
    reduction: str = "always"

    def __post_init__(self):
        if self.frame not in ("none", "reflexive", "symmetric"):
            raise ValueError(f"unknown frame constraint {self.frame!r}")

    def with_bounds(self, worlds: int, entities: int) -> "SearchConfig":
        b = Bounds(worlds, entities, self.bounds.third_order_limit)
        return _replace(self, bounds=b)


def _replace(cfg, **kw):
    from dataclasses import replace
    return replace(cfg, **kw)


@dataclass
class SearchStats:
    candidates: int = 0
    pruned: int = 0
    elapsed: float = 0.0

    def record(self) -> dict:
        return {"candidates": self.candidates, "pruned": self.pruned,
                "elapsed": round(self.elapsed, 4)}


@dataclass
class SearchResult:
    verdict: Verdict
    model: KripkeModel | None = None
    stats: SearchStats = field(default_factory=SearchStats)
    bounds: Bounds | None = None
    message: str = ""
    index: tuple | None = None

    @property
    def found(self) -> bool:
        return self.verdict is Verdict.MODEL_FOUND


class SearchError(HomlError):
    pass


# ---------------------------------------------------------------------------
# Constraint compilation


@dataclass
class _Compiled:
    constraint: Constraint
    program: Program
    level: int  # 0: access only, 1: + existence, 2: + P
    cost: int

    def holds(self, st: State) -> bool:
        ts = self.program.truth_set(st)
        full = (1 << st.n) - 1
        c = self.constraint
        if isinstance(c, Refuted):
            return ts != full
        if isinstance(c, AtWorld):
            return bool(ts >> c.world & 1) == c.value
        return ts == full


def _body(c: Constraint) -> Formula:
    f = c.formula if isinstance(c, (Refuted, AtWorld)) else c
    return f.body if isinstance(f, Valid) else f


def _static_cost(f: Formula, bounds: Bounds) -> int:
    from .semantics import cardinality
    from .syntax import BINDERS, children

    def walk(g, mult):
        total = mult
        if isinstance(g, BINDERS):
            try:
                size = bounds.entities if isinstance(g, (ForallE, ExistsE)) else \
                    cardinality(g.var_type, bounds.worlds, bounds.entities)
            except HomlError:
                size = 1
            mult = mult * max(size, 1)
        for k in children(g):
            total += walk(k, mult)
        return total

    return walk(f, 1)


def _compile_constraints(constraints: Sequence[Constraint], cfg: SearchConfig) -> list[_Compiled]:
    out = []
    base = 0
    for c in constraints:
        body = _body(c)
        prog = Program(body, cfg.bounds, reduction=cfg.reduction, memo_base=base)
        base += prog.n_memo
        uses_p = bool(constants(body))
        uses_ex = any(isinstance(g, (ForallE, ExistsE)) for g in subterms(body))
        level = 2 if uses_p else (1 if uses_ex else 0)
        out.append(_Compiled(c, prog, level, _static_cost(body, cfg.bounds)))
    return out


# ---------------------------------------------------------------------------
# Enumeration


def access_values(n: int, frame: str) -> list[int]:
    out = []
    for r in range(1 << (n * n)):
        if frame == "reflexive" and any(not r >> (w * n + w) & 1 for w in range(n)):
            continue
        if frame == "symmetric" and any(
                (r >> (w * n + v) & 1) != (r >> (v * n + w) & 1) for w in range(n) for v in range(n)):
            continue
        out.append(r)
    return out


def _permute_access(r: int, n: int, wp: Sequence[int]) -> int:
    out = 0
    for w in range(n):
        for v in range(n):
            if r >> (w * n + v) & 1:
                out |= 1 << (wp[w] * n + wp[v])
    return out


def _permute_exists(ex: int, n: int, m: int, wp, ep) -> int:
    out = 0
    for e in range(m):
        for w in range(n):
            if ex >> (e * n + w) & 1:
                out |= 1 << (ep[e] * n + wp[w])
    return out


def _permute_P(Pw: tuple[int, ...], n: int, table: Sequence[int], wp) -> tuple[int, ...]:
    out = [0] * n
    for w in range(n):
        s = Pw[w]
        x = 0
        while s >> x:
            if s >> x & 1:
                out[wp[w]] |= 1 << table[x]
            x += 1
    return tuple(out)


class _Symmetry:
    def __init__(self, n: int, m: int):
        self.n, self.m = n, m
        self.perms = [(wp, ep) for wp in itertools.permutations(range(n))
                      for ep in itertools.permutations(range(m))][1:]

    def stabilizer(self, r: int, ex: int) -> list | None:
        """None if (r, ex) is not orbit-minimal, else the permutations fixing it."""
        fix = []
        for wp, ep in self.perms:
            key = (_permute_access(r, self.n, wp), _permute_exists(ex, self.n, self.m, wp, ep))
            if key < (r, ex):
                return None
            if key == (r, ex):
                fix.append((wp, intension_permutation(self.n, self.m, wp, ep)))
        return fix

    def p_minimal(self, Pw: tuple[int, ...], fix) -> bool:
        for wp, table in fix:
            if _permute_P(Pw, self.n, table, wp) < Pw:
                return False
        return True


def enumerate_models(bounds: Bounds, frame: str = "none") -> Iterator[KripkeModel]:
    """Every model at the bounds in canonical order (no pruning)."""
    n, m = bounds.worlds, bounds.entities
    psets = range(1 << (1 << (n * m)))
    for r in access_values(n, frame):
        for ex in range(1 << (n * m)):
            for Pw in itertools.product(psets, repeat=n):
                yield KripkeModel(n, m, r, ex, Pw)


def raw_candidate_count(bounds: Bounds, frame: str = "none") -> int:
    n, m = bounds.worlds, bounds.entities
    return len(access_values(n, frame)) * (1 << (n * m)) * (1 << (1 << (n * m))) ** n


class _Timeout(Exception):
    pass


class _Limit(Exception):
    pass


def _search(constraints: Sequence[Constraint], cfg: SearchConfig,
            access_subset: Sequence[int] | None = None) -> SearchResult:
    n, m = cfg.bounds.worlds, cfg.bounds.entities
    stats = SearchStats()
    t0 = time.monotonic()
    try:
        compiled = _compile_constraints(constraints, cfg)
    except BoundExceeded as exc:
        return SearchResult(Verdict.BOUND_EXCEEDED, stats=stats, bounds=cfg.bounds, message=str(exc))
    compiled.sort(key=lambda c: c.cost)
    n_memo = sum(c.program.n_memo for c in compiled)
    st = State(n, m, n_memo)
    if cfg.pruning:
        by_level = [[c for c in compiled if c.level == k] for k in range(3)]
    else:
        by_level = [[], [], compiled]
    collapse_P = cfg.pruning and not by_level[2]
    n_ex = n_int = 1 << (n * m)  # existence tables; intensions
    psets = range(1 << n_int)
    p_space = (1 << n_int) ** n
    p_values: Iterable[tuple[int, ...]]
    sym = _Symmetry(n, m) if cfg.symmetry_breaking and (n > 1 or m > 1) else None
    access = access_values(n, cfg.frame) if access_subset is None else access_subset
    deadline = None if cfg.time_limit is None else t0 + cfg.time_limit

    def check(level: int) -> bool:
        st.reset_memo()
        for c in by_level[level]:
            if not c.holds(st):
                return False
        return True

    for r in access:
        st.set_access(r)
        if by_level[0] and not check(0):
            stats.pruned += n_ex * p_space
            continue
        for ex in range(n_ex):
            fix = None
            if sym is not None:
                fix = sym.stabilizer(r, ex)
                if fix is None:
                    stats.pruned += p_space
                    continue
            st.set_exists(ex)
            if by_level[1] and not check(1):
                stats.pruned += p_space
                continue
            if collapse_P:
                p_values = (tuple([0] * n),)
                stats.pruned += p_space - 1
            else:
                p_values = itertools.product(psets, repeat=n)
            for Pw in p_values:
                if fix and not sym.p_minimal(Pw, fix):
                    stats.pruned += 1
                    continue
                stats.candidates += 1
                if cfg.candidate_limit is not None and stats.candidates > cfg.candidate_limit:
                    stats.elapsed = time.monotonic() - t0
                    return SearchResult(Verdict.BOUND_EXCEEDED, stats=stats, bounds=cfg.bounds,
                                        message=f"candidate limit {cfg.candidate_limit} reached")
                if deadline is not None and stats.candidates & 255 == 0 and time.monotonic() > deadline:
                    stats.elapsed = time.monotonic() - t0
                    return SearchResult(Verdict.TIMED_OUT, stats=stats, bounds=cfg.bounds,
                                        message=f"time limit {cfg.time_limit}s reached")
                st.set_P(Pw)
                if check(2):
                    model = KripkeModel(n, m, r, ex, Pw)
                    stats.elapsed = time.monotonic() - t0
                    _reverify(model, constraints, cfg.bounds)
                    return SearchResult(Verdict.MODEL_FOUND, model, stats, cfg.bounds,
                                        index=(access.index(r) if access_subset is None else r, ex, Pw))
    stats.elapsed = time.monotonic() - t0
    return SearchResult(Verdict.EXHAUSTED, stats=stats, bounds=cfg.bounds)


def constraint_holds(model: KripkeModel, c: Constraint, third_order_limit: int | None = None) -> bool:
    """Independent check of one constraint (naive evaluation, no memo)."""
    limit = third_order_limit or Bounds(1, 1).third_order_limit
    ts = truth_set(model, _body(c), third_order_limit=limit, reduction="auto")
    full = (1 << model.n_worlds) - 1
    if isinstance(c, Refuted):
        return ts != full
    if isinstance(c, AtWorld):
        return bool(ts >> c.world & 1) == c.value
    return ts == full


def _reverify(model: KripkeModel, constraints: Sequence[Constraint], bounds: Bounds) -> None:
    for c in constraints:
        if not constraint_holds(model, c, bounds.third_order_limit):
            raise SearchError(f"internal error: witness fails constraint {c}")


def find_model(constraints: Sequence[Constraint], cfg: SearchConfig) -> SearchResult:
    """First model (in canonical order) satisfying all constraints, if one exists."""
    if cfg.deterministic or cfg.jobs <= 1:
        return _search(constraints, cfg)
    access = access_values(cfg.bounds.worlds, cfg.frame)
    slices = [access[k::cfg.jobs] for k in range(cfg.jobs)]
    slices = [s for s in slices if s]
    with ProcessPoolExecutor(max_workers=len(slices)) as pool:
        parts = list(pool.map(_search, itertools.repeat(constraints), itertools.repeat(cfg), slices))
    stats = SearchStats(sum(p.stats.candidates for p in parts), sum(p.stats.pruned for p in parts),
                        max(p.stats.elapsed for p in parts))
    found = [p for p in parts if p.found]
    if found:
        best = min(found, key=lambda p: (access.index(p.index[0]),) + p.index[1:])
        return SearchResult(Verdict.MODEL_FOUND, best.model, stats, cfg.bounds,
                            index=(access.index(best.index[0]),) + best.index[1:])
    for v in (Verdict.BOUND_EXCEEDED, Verdict.TIMED_OUT):
        bad = [p for p in parts if p.verdict is v]
        if bad:
            return SearchResult(v, stats=stats, bounds=cfg.bounds, message=bad[0].message)
    return SearchResult(Verdict.EXHAUSTED, stats=stats, bounds=cfg.bounds)


# ---------------------------------------------------------------------------
# Theory-level checks


class Status(enum.Enum):
    VALID_AT_BOUNDS = "ValidAtBounds"
    COUNTERMODEL = "Countermodel"
    BOUND_EXCEEDED = "BoundExceeded"
    TIMED_OUT = "TimedOut"


@dataclass
class BoundedVerdict:
    status: Status
    bounds: Bounds
    model: KripkeModel | None = None
    stats: SearchStats = field(default_factory=SearchStats)
    message: str = ""

    @property
    def caveat(self) -> str:
        return f"valid up to {self.bounds}"

    def __str__(self) -> str:
        if self.status is Status.VALID_AT_BOUNDS:
            return f"{self.status.value} ({self.caveat}; bounded check, not a proof)"
        if self.status is Status.COUNTERMODEL:
            return f"{self.status.value} at {self.bounds}"
        return f"{self.status.value} at {self.bounds}: {self.message}"


def theory_constraints(theory: Theory, axioms: Iterable[str] | None = None) -> list[Formula]:
    names = theory.axioms if axioms is None else axioms
    return [theory.expand(theory.named_formula(a)) for a in names]


def config_for(theory: Theory, bounds: Bounds | tuple[int, int], frame: str | None = None,
               **kw) -> SearchConfig:
    if isinstance(bounds, tuple):
        bounds = Bounds(*bounds)
    return SearchConfig(bounds, FRAME_OF_THEORY[frame or theory.frame], **kw)


def _judgment(theory: Theory, f: Formula) -> Formula:
    from .syntax import as_judgment
    return theory.expand(as_judgment(f))


def check_bounded_validity(theory: Theory, conjecture: Formula, cfg: SearchConfig,
                           premises: Iterable[str] | None = None) -> BoundedVerdict:
    """Search for a model of the axioms (or ``premises``) refuting ``conjecture``."""
    constraints: list[Constraint] = theory_constraints(theory, premises)
    constraints.append(Refuted(_judgment(theory, conjecture)))
    res = find_model(constraints, cfg)
    return _to_verdict(res, cfg)


def _to_verdict(res: SearchResult, cfg: SearchConfig) -> BoundedVerdict:
    status = {
        Verdict.MODEL_FOUND: Status.COUNTERMODEL,
        Verdict.EXHAUSTED: Status.VALID_AT_BOUNDS,
        Verdict.BOUND_EXCEEDED: Status.BOUND_EXCEEDED,
        Verdict.TIMED_OUT: Status.TIMED_OUT,
    }[res.verdict]
    return BoundedVerdict(status, cfg.bounds, res.model, res.stats, res.message)


def find_theory_model(theory: Theory, cfg: SearchConfig, extra: Sequence[Constraint] = (),
                      axioms: Iterable[str] | None = None) -> SearchResult:
    return find_model(theory_constraints(theory, axioms) + list(extra), cfg)


@dataclass(frozen=True)
class ModelCheck:
    globally: bool
    worlds: tuple[bool, ...]


def verify_model(model: KripkeModel, formulas: Mapping[str, Formula],
                 theory: Theory | None = None) -> dict[str, ModelCheck]:
    """Evaluate each formula globally and world by world."""
    out = {}
    for name, f in formulas.items():
        if theory is not None:
            f = theory.expand(f)
        body = f.body if isinstance(f, Valid) else f
        ts = truth_set(model, body)
        worlds = tuple(bool(ts >> w & 1) for w in model.worlds)
        out[name] = ModelCheck(all(worlds), worlds)
    return out


Edge = tuple[Sequence[str], Formula]


def verify_proof_net(theory: Theory, edges: Mapping[str, Edge] | Sequence[Claim],
                     cfg: SearchConfig, with_axioms: bool = True) -> dict[str, BoundedVerdict]:
    """Check each edge ``premises => conclusion`` as a bounded entailment.

    The theory's axioms and the listed premises (axioms or earlier conclusions)
    are assumed, plus the frame condition in ``cfg``. With ``with_axioms=False``
    only the premises are assumed, which checks "follows from these alone".
    """
    if not isinstance(edges, Mapping):
        edges = {c.name: (c.premises or (), c.formula) for c in edges}
    known = set(theory.axioms) | {c.name for c in theory.claims if c.formula is not None}
    results = {}
    for name, (premises, conclusion) in edges.items():
        unknown = [p for p in premises if p not in known and p not in edges]
        if unknown:
            raise SearchError(f"edge {name}: unknown premise(s) {unknown}")
        constraints: list[Constraint] = []
        if with_axioms:
            constraints += theory_constraints(theory)
        for p in premises:
            f = theory.named_formula(p) if p in known else edges[p][1]
            constraints.append(_judgment(theory, f))
        constraints.append(Refuted(_judgment(theory, conclusion)))
        results[name] = _to_verdict(find_model(constraints, cfg), cfg)
    return results
