"""Finite Kripke semantics for the world-lifted logic.

Every denotation of a quantifiable type is a small non-negative integer:

* an individual ``e`` is its index ``0 <= e < M``;
* a proposition is the bit set of worlds where it holds (``N`` bits);
* a function ``A => Prop`` is a bit table with bit ``a*N + w`` set iff it holds
  of ``a`` at world ``w``.  Property intensions (``E => Prop``) therefore use the
  lexicographic (entity, world) order ``e1i1, e1i2, ..., e2i1, ...``, and a
  property set such as ``P`` uses bit ``X*N + w`` for intension ``X``.

Formulas are compiled once per (formula, bounds) into closures computing whole
truth sets, so one call evaluates a formula at every world simultaneously.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .syntax import (
    ENT, PROP, PROPERTY, PROPSET, And, App, Bot, Box, Compl, Const, Dia, Eq, Exists,
    ExistsE, Forall, ForallE, Formula, Fun, HomlError, Iff, Implies, Lam, Neq, Not, Or,
    SimpleType, Top, Valid, Var, alpha_canonical, free_vars, parse_formula, subterms,
)


class BoundExceeded(HomlError):
    """A quantifier domain is too large to enumerate at the requested bounds."""


class PatternMismatch(HomlError):
    """A formula does not have the shape a specialised evaluator expects."""


class EvaluationError(HomlError):
    pass


DEFAULT_THIRD_ORDER_LIMIT = 2 ** 20


@dataclass(frozen=True)
class Bounds:
    worlds: int
    entities: int
    third_order_limit: int = DEFAULT_THIRD_ORDER_LIMIT

    def __post_init__(self):
        if self.worlds < 1 or self.entities < 1 or self.third_order_limit < 1:
            raise ValueError("bounds must be positive")

    def __str__(self) -> str:
        return f"({self.worlds},{self.entities})"


# ---------------------------------------------------------------------------
# Models


def world_label(w: int) -> str:
    return f"i{w + 1}"


def entity_label(e: int) -> str:
    return f"e{e + 1}"


@dataclass(frozen=True)
class KripkeModel:
    """A finite model.

    ``access`` has bit ``w*N + v`` set iff world ``v`` is accessible from ``w``;
    ``exists_at`` has bit ``e*N + w`` set iff entity ``e`` exists at ``w``;
    ``P[w]`` has bit ``X`` set iff intension ``X`` is a positive property at ``w``.
    """

    n_worlds: int
    n_entities: int
    access: int
    exists_at: int
    P: tuple[int, ...]
    interp: Mapping[str, int] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        n, m = self.n_worlds, self.n_entities
        if n < 1 or m < 1:
            raise ValueError("a model needs at least one world and one entity")
        if self.access >> (n * n) or self.exists_at >> (n * m):
            raise ValueError("relation bits outside the model")
        if len(self.P) != n:
            raise ValueError("P needs one intension set per world")
        if any(p >> (1 << (n * m)) for p in self.P):
            raise ValueError("P mentions intensions outside the model")

    # -- accessors
    @property
    def worlds(self) -> range:
        return range(self.n_worlds)

    @property
    def entities(self) -> range:
        return range(self.n_entities)

    @property
    def n_intensions(self) -> int:
        return 1 << (self.n_worlds * self.n_entities)

    def accessible(self, w: int, v: int) -> bool:
        return bool(self.access >> (w * self.n_worlds + v) & 1)

    def successors(self, w: int) -> int:
        n = self.n_worlds
        return (self.access >> (w * n)) & ((1 << n) - 1)

    def exists(self, e: int, w: int) -> bool:
        return bool(self.exists_at >> (e * self.n_worlds + w) & 1)

    def existence_set(self, e: int) -> int:
        n = self.n_worlds
        return (self.exists_at >> (e * n)) & ((1 << n) - 1)

    def domain(self, w: int) -> list[int]:
        return [e for e in self.entities if self.exists(e, w)]

    def positive(self, w: int) -> list[int]:
        return [x for x in range(self.n_intensions) if self.P[w] >> x & 1]

    @property
    def P_denotation(self) -> int:
        return propset_from_worlds(self.P, self.n_worlds)

    def constants(self) -> dict[str, int]:
        out = dict(self.interp)
        out.setdefault("P", self.P_denotation)
        return out

    def r_pairs(self) -> list[tuple[int, int]]:
        return [(w, v) for w in self.worlds for v in self.worlds if self.accessible(w, v)]

    def relabel(self, world_perm: Sequence[int], entity_perm: Sequence[int]) -> "KripkeModel":
        """Image of the model under ``w -> world_perm[w]`` and ``e -> entity_perm[e]``."""
        n, m = self.n_worlds, self.n_entities
        access = 0
        for w, v in self.r_pairs():
            access |= 1 << (world_perm[w] * n + world_perm[v])
        ex = 0
        for e in self.entities:
            for w in self.worlds:
                if self.exists(e, w):
                    ex |= 1 << (entity_perm[e] * n + world_perm[w])
        table = intension_permutation(n, m, tuple(world_perm), tuple(entity_perm))
        P = [0] * n
        for w in self.worlds:
            for x in self.positive(w):
                P[world_perm[w]] |= 1 << table[x]
        return KripkeModel(n, m, access, ex, tuple(P), dict(self.interp))

    def isomorphic(self, other: "KripkeModel") -> tuple[tuple[int, ...], tuple[int, ...]] | None:
        """Return ``(world_perm, entity_perm)`` mapping self onto ``other``, if any."""
        if (self.n_worlds, self.n_entities) != (other.n_worlds, other.n_entities):
            return None
        for wp in itertools.permutations(self.worlds):
            for ep in itertools.permutations(self.entities):
                if self.relabel(wp, ep) == other:
                    return wp, ep
        return None

    # -- construction from labelled data
    @classmethod
    def from_pairs(cls, worlds: Sequence[str], entities: Sequence[str],
                   r: Iterable[tuple[str, str]], exists_at: Iterable[tuple[str, str]],
                   P: Mapping[str, Iterable[Iterable[tuple[str, str]]]]) -> "KripkeModel":
        widx = {w: k for k, w in enumerate(worlds)}
        eidx = {e: k for k, e in enumerate(entities)}
        n, m = len(worlds), len(entities)
        access = 0
        for a, b in r:
            access |= 1 << (widx[a] * n + widx[b])
        ex = 0
        for e, w in exists_at:
            ex |= 1 << (eidx[e] * n + widx[w])
        Pw = [0] * n
        for w, intensions in P.items():
            for pairs in intensions:
                Pw[widx[w]] |= 1 << intension(((eidx[e], widx[v]) for e, v in pairs), n)
        return cls(n, m, access, ex, tuple(Pw))

    def to_dict(self) -> dict:
        n = self.n_worlds
        worlds = [world_label(w) for w in self.worlds]
        return {
            "worlds": worlds,
            "entities": [entity_label(e) for e in self.entities],
            "r": [[world_label(w), world_label(v)] for w, v in self.r_pairs()],
            "exists_at": [[entity_label(e), world_label(w)]
                          for e in self.entities for w in self.worlds if self.exists(e, w)],
            "P": {world_label(w): [intension_pairs(x, n, labels=True) for x in self.positive(w)]
                  for w in self.worlds},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "KripkeModel":
        return cls.from_pairs(data["worlds"], data["entities"],
                              [tuple(p) for p in data.get("r", [])],
                              [tuple(p) for p in data.get("exists_at", [])],
                              {w: [[tuple(p) for p in x] for x in xs]
                               for w, xs in data.get("P", {}).items()})

    def dumps(self) -> str:
        """JSON text with one top-level key per line."""
        d = self.to_dict()
        body = ",\n".join(f" {json.dumps(k)}: {json.dumps(v)}" for k, v in d.items())
        return "{\n" + body + "\n}\n"

    def describe(self) -> str:
        d = self.to_dict()
        fmt = lambda pairs: "{" + ", ".join(f"<{a},{b}>" for a, b in pairs) + "}"  # noqa: E731
        lines = [f"worlds={{{', '.join(d['worlds'])}}} entities={{{', '.join(d['entities'])}}}",
                 f"r={fmt(d['r'])}", f"existsAt={fmt(d['exists_at'])}"]
        for w, xs in d["P"].items():
            lines.append(f"P@{w}={{{', '.join(fmt(x) for x in xs)}}}")
        return "\n".join(lines)


def load_model(path: str | Path) -> KripkeModel:
    return KripkeModel.from_dict(json.loads(Path(path).read_text()))


def save_model(model: KripkeModel, path: str | Path) -> None:
    Path(path).write_text(model.dumps())


# ---------------------------------------------------------------------------
# Denotation helpers


def intension(pairs: Iterable[tuple[int, int]], n_worlds: int) -> int:
    """Bit table of a property holding exactly at the given (entity, world) pairs."""
    out = 0
    for e, w in pairs:
        out |= 1 << (e * n_worlds + w)
    return out


def intension_pairs(x: int, n_worlds: int, labels: bool = False) -> list:
    out = []
    k = 0
    while x >> k:
        if x >> k & 1:
            e, w = divmod(k, n_worlds)
            out.append([entity_label(e), world_label(w)] if labels else (e, w))
        k += 1
    return out


def extension(x: int, w: int, n_worlds: int, n_entities: int) -> int:
    """Entity bit set of intension ``x`` at world ``w``."""
    out = 0
    for e in range(n_entities):
        if x >> (e * n_worlds + w) & 1:
            out |= 1 << e
    return out


def propset_from_worlds(per_world: Sequence[int], n_worlds: int) -> int:
    """Encode a world-indexed family of intension sets as a ``PropSet`` denotation."""
    out = 0
    for w, members in enumerate(per_world):
        x = 0
        while members >> x:
            if members >> x & 1:
                out |= 1 << (x * n_worlds + w)
            x += 1
    return out


def propset_to_worlds(den: int, n_worlds: int, n_intensions: int) -> tuple[int, ...]:
    out = [0] * n_worlds
    for x in range(n_intensions):
        for w in range(n_worlds):
            if den >> (x * n_worlds + w) & 1:
                out[w] |= 1 << x
    return tuple(out)


@lru_cache(maxsize=None)
def intension_permutation(n: int, m: int, world_perm: tuple[int, ...],
                          entity_perm: tuple[int, ...]) -> tuple[int, ...]:
    table = []
    for x in range(1 << (n * m)):
        y = 0
        for e in range(m):
            for w in range(n):
                if x >> (e * n + w) & 1:
                    y |= 1 << (entity_perm[e] * n + world_perm[w])
        table.append(y)
    return tuple(table)


def cardinality(t: SimpleType, n_worlds: int, n_entities: int) -> int:
    if t == ENT:
        return n_entities
    if t == PROP:
        return 1 << n_worlds
    if isinstance(t, Fun) and t.res == PROP:
        return 1 << (cardinality(t.arg, n_worlds, n_entities) * n_worlds)
    raise EvaluationError(f"type {t} has no finite denotation table")


def enumerate_domain(m: KripkeModel, t: SimpleType, w: int | None = None,
                     actualist: bool = False,
                     third_order_limit: int = DEFAULT_THIRD_ORDER_LIMIT) -> Iterator[int]:
    """Deterministic stream of denotations of type ``t`` over ``m``.

    The actualist stream (individuals only) is restricted to those existing at ``w``.
    """
    if actualist:
        if t != ENT:
            raise EvaluationError("actualist domains contain individuals only")
        if w is None:
            raise EvaluationError("actualist domains need a world")
        return iter(m.domain(w))
    size = cardinality(t, m.n_worlds, m.n_entities)
    if t == PROPSET and size > third_order_limit:
        raise BoundExceeded(f"PropSet space of size {size} exceeds limit {third_order_limit}")
    return iter(range(size))


# ---------------------------------------------------------------------------
# The conjunction-of-a-set reduction


def a3_template() -> Formula:
    """Core form of "every conjunction of a set of positive properties is positive"."""
    text = ("forall Z:PropSet. (forall X:Property. Z X -> P X) -> "
            "(forall X:Property. box (forall u:E_act. X u <-> (forall Y:Property. Z Y -> Y u)) -> P X)")
    return parse_formula(text)


@lru_cache(maxsize=1)
def _a3_canonical() -> Formula:
    return alpha_canonical(a3_template())


def is_a3_shape(f: Formula) -> bool:
    if isinstance(f, Valid):
        f = f.body
    return isinstance(f, Forall) and f.var_type == PROPSET and alpha_canonical(f) == _a3_canonical()


def _a3_truth_set(n: int, m: int, succ: Sequence[int], ex_by_world: Sequence[int],
                  Pw: Sequence[int]) -> int:
    k = 1 << (n * m)
    full_m = (1 << m) - 1
    out = 0
    for w in range(n):
        if succ[w] >> w & 1:
            dom = ex_by_world[w]
            meets = {full_m}
            members = Pw[w]
            x = 0
            while members >> x:
                if members >> x & 1:
                    ext = extension(x, w, n, m)
                    meets |= {c & ext for c in meets}
                x += 1
            allowed = {c & dom for c in meets}
            required = 0
            for x in range(k):
                if extension(x, w, n, m) & dom in allowed:
                    required |= 1 << x
        else:
            required = (1 << k) - 1
        if required & ~Pw[w] == 0:
            out |= 1 << w
    return out


def reduce_conj_of_set(m: KripkeModel, w: int, a3_instance: Formula) -> bool:
    """Truth of the set-conjunction axiom at ``w`` without enumerating property sets.

    Only two facts about a property set ``Z`` matter: whether its members at ``w``
    are all positive, and, for each accessible world ``v``, the intersection of the
    ``v``-extensions of its members there.  Away from ``w`` that intersection can be
    any entity set; at ``w`` (when ``w`` sees itself) it ranges over the meets of
    positive extensions.  Raises :class:`PatternMismatch` for other formulas.
    """
    if not is_a3_shape(a3_instance):
        raise PatternMismatch("formula is not the conjunction-of-set axiom")
    succ = [m.successors(v) for v in m.worlds]
    ex_by_world = [sum(1 << e for e in m.domain(v)) for v in m.worlds]
    return bool(_a3_truth_set(m.n_worlds, m.n_entities, succ, ex_by_world, m.P) >> w & 1)


# ---------------------------------------------------------------------------
# Compilation


class State:
    """Per-model data read by compiled formulas."""

    __slots__ = ("n", "m", "succ", "ex", "ex_world", "box", "dia", "consts", "Pw", "memo")

    def __init__(self, n: int, m: int, n_memo: int = 0):
        self.n = n
        self.m = m
        self.memo = [dict() for _ in range(n_memo)]
        self.consts: dict[str, int] = {}
        self.Pw: tuple[int, ...] = ()

    def set_access(self, access: int) -> None:
        n = self.n
        full = (1 << n) - 1
        self.succ = succ = tuple((access >> (w * n)) & full for w in range(n))
        box = []
        dia = []
        for t in range(1 << n):
            b = d = 0
            for w in range(n):
                if succ[w] & ~t == 0:
                    b |= 1 << w
                if succ[w] & t:
                    d |= 1 << w
            box.append(b)
            dia.append(d)
        self.box = tuple(box)
        self.dia = tuple(dia)

    def set_exists(self, exists_at: int) -> None:
        n = self.n
        full = (1 << n) - 1
        self.ex = tuple((exists_at >> (e * n)) & full for e in range(self.m))
        self.ex_world = tuple(sum(1 << e for e in range(self.m) if self.ex[e] >> w & 1)
                              for w in range(n))

    def set_P(self, Pw: tuple[int, ...], consts: Mapping[str, int] | None = None) -> None:
        self.Pw = Pw
        self.consts = dict(consts or {})
        self.consts["P"] = propset_from_worlds(Pw, self.n)

    def reset_memo(self) -> None:
        for d in self.memo:
            if d:
                d.clear()

    @classmethod
    def for_model(cls, model: KripkeModel, n_memo: int = 0) -> "State":
        st = cls(model.n_worlds, model.n_entities, n_memo)
        st.set_access(model.access)
        st.set_exists(model.exists_at)
        st.set_P(model.P, model.interp)
        return st


_EXPENSIVE = (Forall, Exists, ForallE, ExistsE, Lam)


def _has_binder(f: Formula) -> bool:
    return any(isinstance(g, _EXPENSIVE) for g in subterms(f))


class Program:
    """A formula compiled for fixed bounds.

    ``reduction`` selects when the set-conjunction axiom is evaluated by the
    intersection reduction: ``"auto"`` only when its property-set domain exceeds
    the enumeration limit, ``"always"`` whenever the shape matches, ``"never"``.
    """

    def __init__(self, f: Formula, bounds: Bounds, free: Sequence[tuple[str, SimpleType]] = (),
                 reduction: str = "auto", memoize: bool = True, memo_base: int = 0):
        if reduction not in ("auto", "always", "never"):
            raise ValueError(reduction)
        self.formula = f
        self.bounds = bounds
        self.n = bounds.worlds
        self.m = bounds.entities
        self.reduction = reduction
        self.memoize = memoize
        self.free = tuple(free)
        # memo slots are numbered from memo_base so several programs can share a State
        self.memo_base = memo_base
        self.n_memo = memo_base
        self.cost = 1
        self.uses_P = False
        self.uses_exists = False
        self.max_depth = len(self.free)
        self._fn = self._compile(f, [name for name, _ in self.free])
        self.n_memo -= memo_base

    def new_state(self) -> State:
        return State(self.n, self.m, self.n_memo)

    def new_state_for(self, model: KripkeModel) -> State:
        if (model.n_worlds, model.n_entities) != (self.n, self.m):
            raise EvaluationError(f"model size differs from compiled bounds {self.bounds}")
        return State.for_model(model, self.memo_base + self.n_memo)

    def truth_set(self, st: State, env: list | None = None) -> int:
        if env is None:
            env = [0] * (self.max_depth + 1)
        else:
            env = list(env) + [0] * (self.max_depth + 1 - len(env))
        return self._fn(st, env)

    # -- compiler
    def _compile(self, f: Formula, scope: list[str]):
        fn = self._compile_node(f, scope)
        if self.memoize and scope and _has_binder(f):
            fv = free_vars(f)
            slots = tuple(i for i, name in enumerate(scope)
                          if name in fv and name not in scope[i + 1:])
            if not slots or slots[-1] < len(scope) - 1:
                return self._memo_wrap(fn, slots)
        return fn

    def _memo_wrap(self, fn, slots: tuple[int, ...]):
        idx = self.n_memo
        self.n_memo += 1
        if not slots:
            def memo(st, env):
                d = st.memo[idx]
                v = d.get(())
                if v is None:
                    v = d[()] = fn(st, env)
                return v
        elif len(slots) == 1:
            s0 = slots[0]

            def memo(st, env):
                d = st.memo[idx]
                key = env[s0]
                v = d.get(key)
                if v is None:
                    v = d[key] = fn(st, env)
                return v
        else:
            def memo(st, env):
                d = st.memo[idx]
                key = tuple(env[s] for s in slots)
                v = d.get(key)
                if v is None:
                    v = d[key] = fn(st, env)
                return v
        return memo

    def _slot(self, name: str, scope: list[str]) -> int:
        for i in range(len(scope) - 1, -1, -1):
            if scope[i] == name:
                return i
        raise EvaluationError(f"unbound variable {name!r}")

    def _compile_node(self, f: Formula, scope: list[str]):
        n, m = self.n, self.m
        full = (1 << n) - 1
        c = self._compile

        if isinstance(f, Var):
            s = self._slot(f.name, scope)
            return lambda st, env: env[s]
        if isinstance(f, Const):
            name = f.name
            if name == "P":
                self.uses_P = True

            def const(st, env):
                try:
                    return st.consts[name]
                except KeyError:
                    raise EvaluationError(f"constant {name!r} is not interpreted") from None
            return const
        if isinstance(f, Top):
            return lambda st, env: full
        if isinstance(f, Bot):
            return lambda st, env: 0
        if isinstance(f, Valid):
            body = c(f.body, scope)
            return lambda st, env: full if body(st, env) == full else 0
        if isinstance(f, Not):
            body = c(f.body, scope)
            return lambda st, env: full ^ body(st, env)
        if isinstance(f, And):
            a, b = c(f.left, scope), c(f.right, scope)

            def and_(st, env):
                x = a(st, env)
                return x & b(st, env) if x else 0
            return and_
        if isinstance(f, Or):
            a, b = c(f.left, scope), c(f.right, scope)

            def or_(st, env):
                x = a(st, env)
                return x if x == full else x | b(st, env)
            return or_
        if isinstance(f, Implies):
            a, b = c(f.left, scope), c(f.right, scope)

            def imp(st, env):
                x = a(st, env)
                return full if x == 0 else (full ^ x) | b(st, env)
            return imp
        if isinstance(f, Iff):
            a, b = c(f.left, scope), c(f.right, scope)
            return lambda st, env: full ^ (a(st, env) ^ b(st, env))
        if isinstance(f, Box):
            body = c(f.body, scope)
            return lambda st, env: st.box[body(st, env)]
        if isinstance(f, Dia):
            body = c(f.body, scope)
            return lambda st, env: st.dia[body(st, env)]
        if isinstance(f, Compl):
            pmask = (1 << (n * m)) - 1
            body = c(f.body, scope)
            return lambda st, env: pmask ^ body(st, env)
        if isinstance(f, (Eq, Neq)):
            a, b = c(f.left, scope), c(f.right, scope)
            if isinstance(f, Eq):
                return lambda st, env: full if a(st, env) == b(st, env) else 0
            return lambda st, env: 0 if a(st, env) == b(st, env) else full
        if isinstance(f, App):
            fun, arg = c(f.fun, scope), c(f.arg, scope)
            return lambda st, env: (fun(st, env) >> (arg(st, env) * n)) & full
        if isinstance(f, Lam):
            size = cardinality(f.var_type, n, m)
            d = len(scope)
            self.max_depth = max(self.max_depth, d + 1)
            body = c(f.body, scope + [f.var])
            shifts = [(k, k * n) for k in range(size)]

            def lam(st, env):
                out = 0
                for k, sh in shifts:
                    env[d] = k
                    out |= body(st, env) << sh
                return out
            return lam
        if isinstance(f, (ForallE, ExistsE)):
            self.uses_exists = True
            self.cost *= m
            d = len(scope)
            self.max_depth = max(self.max_depth, d + 1)
            body = c(f.body, scope + [f.var])
            ents = range(m)
            if isinstance(f, ForallE):
                def forall_e(st, env):
                    out = full
                    ex = st.ex
                    for e in ents:
                        env[d] = e
                        out &= body(st, env) | (full ^ ex[e])
                        if not out:
                            return 0
                    return out
                return forall_e

            def exists_e(st, env):
                out = 0
                ex = st.ex
                for e in ents:
                    env[d] = e
                    out |= body(st, env) & ex[e]
                    if out == full:
                        return full
                return out
            return exists_e
        if isinstance(f, (Forall, Exists)):
            size = cardinality(f.var_type, n, m)
            if f.var_type == PROPSET:
                reducible = isinstance(f, Forall) and not free_vars(f) and is_a3_shape(f)
                if reducible and (self.reduction == "always" or
                                  (self.reduction == "auto" and size > self.bounds.third_order_limit)):
                    self.uses_P = True
                    self.cost *= 1 << (n * m)

                    def a3(st, env):
                        return _a3_truth_set(n, m, st.succ, st.ex_world, st.Pw)
                    return a3
                if size > self.bounds.third_order_limit:
                    raise BoundExceeded(
                        f"PropSet quantifier over {size} values exceeds limit "
                        f"{self.bounds.third_order_limit} and is not reducible")
            self.cost *= size
            d = len(scope)
            self.max_depth = max(self.max_depth, d + 1)
            body = c(f.body, scope + [f.var])
            dom = range(size)
            if isinstance(f, Forall):
                def forall(st, env):
                    out = full
                    for k in dom:
                        env[d] = k
                        out &= body(st, env)
                        if not out:
                            return 0
                    return out
                return forall

            def exists(st, env):
                out = 0
                for k in dom:
                    env[d] = k
                    out |= body(st, env)
                    if out == full:
                        return full
                return out
            return exists
        raise EvaluationError(f"cannot evaluate {f!r}")


@lru_cache(maxsize=4096)
def compile_formula(f: Formula, bounds: Bounds, free: tuple[tuple[str, SimpleType], ...] = (),
                    reduction: str = "auto", memoize: bool = True) -> Program:
    return Program(f, bounds, free, reduction, memoize)


def _program_for(m: KripkeModel, f: Formula, assignment: Mapping[str, int] | None,
                 third_order_limit: int, reduction: str):
    fv = sorted(free_vars(f))
    assignment = assignment or {}
    missing = [v for v in fv if v not in assignment]
    if missing:
        raise EvaluationError(f"no value for free variables {missing}")
    types = {}
    for g in subterms(f):
        if isinstance(g, Var):
            types[g.name] = g.type
    free = tuple((v, types[v]) for v in fv)
    prog = compile_formula(f, Bounds(m.n_worlds, m.n_entities, third_order_limit), free, reduction)
    env = [assignment[v] for v in fv]
    return prog, env


def truth_set(m: KripkeModel, f: Formula, assignment: Mapping[str, int] | None = None, *,
              third_order_limit: int = DEFAULT_THIRD_ORDER_LIMIT, reduction: str = "auto") -> int:
    """Bit set of worlds where the Prop-typed core formula ``f`` holds."""
    prog, env = _program_for(m, f, assignment, third_order_limit, reduction)
    st = State.for_model(m, prog.n_memo)
    return prog.truth_set(st, env)


def evaluate(m: KripkeModel, w: int, f: Formula, assignment: Mapping[str, int] | None = None,
             **kw) -> bool:
    """Truth of the core formula ``f`` at world ``w`` (``f`` fully expanded)."""
    if not 0 <= w < m.n_worlds:
        raise EvaluationError(f"world {w} not in model")
    return bool(truth_set(m, f, assignment, **kw) >> w & 1)


def holds_globally(m: KripkeModel, f: Formula, assignment: Mapping[str, int] | None = None,
                   **kw) -> bool:
    if isinstance(f, Valid):
        f = f.body
    return truth_set(m, f, assignment, **kw) == (1 << m.n_worlds) - 1


def worlds_of(ts: int, n: int) -> list[int]:
    return [w for w in range(n) if ts >> w & 1]
