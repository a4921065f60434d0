"""Hypothesis strategies: well-typed formulas and random finite models."""

from hypothesis import strategies as st

from homl.semantics import KripkeModel
from homl.syntax import (
    ENT, PROP, PROPERTY, PROPSET, And, App, Bot, Box, Compl, Const, Dia, Eq, Exists, ExistsE,
    Forall, ForallE, Iff, Implies, Lam, Neq, Not, Or, Top, Var,
)

NAMES = {ENT: ("x", "y", "z"), PROP: ("p", "q"), PROPERTY: ("X", "Y")}


def _vars(ctx, t):
    return [Var(name, ty) for name, ty in ctx if ty == t and _visible(ctx, name, ty)]


def _visible(ctx, name, ty):
    for n, t in reversed(ctx):
        if n == name:
            return t == ty
    return False


@st.composite
def property_term(draw, ctx, depth):
    options = _vars(ctx, PROPERTY)
    choice = draw(st.integers(0, 2 if depth > 0 else 0))
    if choice == 1:
        return Compl(draw(property_term(ctx, depth - 1)))
    if choice == 2 or not options:
        if depth <= 0:
            name = draw(st.sampled_from(NAMES[ENT]))
            return Lam(name, ENT, draw(st.sampled_from([Top(), Bot()])))
        name = draw(st.sampled_from(NAMES[ENT]))
        return Lam(name, ENT, draw(prop_formula(ctx + [(name, ENT)], depth - 1)))
    return draw(st.sampled_from(options))


@st.composite
def prop_formula(draw, ctx=(), depth=3):
    ctx = list(ctx)
    atoms = [Top(), Bot()] + _vars(ctx, PROP)
    ents = _vars(ctx, ENT)
    kinds = ["atom", "P"]
    if ents:
        kinds += ["app", "eq"]
    if depth > 0:
        kinds += ["not", "bin", "box", "q"]
    kind = draw(st.sampled_from(kinds))
    sub = depth - 1
    if kind == "atom":
        return draw(st.sampled_from(atoms))
    if kind == "P":
        return App(Const("P", PROPSET), draw(property_term(ctx, max(sub, 0))))
    if kind == "app":
        return App(draw(property_term(ctx, max(sub, 0))), draw(st.sampled_from(ents)))
    if kind == "eq":
        cls = draw(st.sampled_from([Eq, Neq]))
        return cls(draw(st.sampled_from(ents)), draw(st.sampled_from(ents)), ENT)
    if kind == "not":
        return Not(draw(prop_formula(ctx, sub)))
    if kind == "bin":
        cls = draw(st.sampled_from([And, Or, Implies, Iff]))
        return cls(draw(prop_formula(ctx, sub)), draw(prop_formula(ctx, sub)))
    if kind == "box":
        cls = draw(st.sampled_from([Box, Dia]))
        return cls(draw(prop_formula(ctx, sub)))
    t = draw(st.sampled_from([ENT, ENT, PROP, PROPERTY]))
    name = draw(st.sampled_from(NAMES[t]))
    body = draw(prop_formula(ctx + [(name, t)], sub))
    if t == ENT and draw(st.booleans()):
        return draw(st.sampled_from([ForallE, ExistsE]))(name, body)
    return draw(st.sampled_from([Forall, Exists]))(name, t, body)


@st.composite
def models(draw, worlds=None, entities=None, frame="none"):
    n = draw(st.integers(1, 2)) if worlds is None else worlds
    m = draw(st.integers(1, 2)) if entities is None else entities
    access = draw(st.integers(0, (1 << (n * n)) - 1))
    if frame == "reflexive":
        for w in range(n):
            access |= 1 << (w * n + w)
    elif frame == "symmetric":
        for w in range(n):
            for v in range(n):
                if access >> (w * n + v) & 1:
                    access |= 1 << (v * n + w)
    exists_at = draw(st.integers(0, (1 << (n * m)) - 1))
    k = 1 << (n * m)
    P = tuple(draw(st.integers(0, (1 << k) - 1)) for _ in range(n))
    return KripkeModel(n, m, access, exists_at, P)


def random_model(rng, n, m, frame="none"):
    """Same distribution as ``models`` from a ``random.Random``."""
    access = rng.getrandbits(n * n)
    if frame == "reflexive":
        for w in range(n):
            access |= 1 << (w * n + w)
    elif frame == "symmetric":
        for w in range(n):
            for v in range(n):
                if access >> (w * n + v) & 1:
                    access |= 1 << (v * n + w)
    exists_at = rng.getrandbits(n * m)
    P = tuple(rng.getrandbits(1 << (n * m)) for _ in range(n))
    return KripkeModel(n, m, access, exists_at, P)
