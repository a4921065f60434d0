"""Terms, types, parsing and printing for a higher-order modal logic fragment.

The fragment is the one needed for the ontological-argument theories: world-lifted
connectives, ``box``/``dia``, possibilist quantifiers over individuals,
propositions, properties and property sets, actualist quantifiers over
individuals, typed lambda abstraction, application, denotational equality and
global validity ``[ ... ]``.

Surface syntax is ASCII::

    ~  &  |  ->  <->  box  dia  compl  =  !=  T  F
    forall x:E. ...    exists X:Property. ...    forallE x. ...   \\x:E. ...
    [ ... ]            (global validity)

with ``forall x:E_act.`` as an alternative spelling of ``forallE x.``. A few
Unicode aliases are accepted on input but never printed.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Iterator, Mapping, Optional, Union


class HomlError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(HomlError):
    def __init__(self, message: str, pos: int | None = None, line: int | None = None):
        self.pos = pos
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if pos is not None:
            where.append(f"col {pos + 1}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)


class TypeCheckError(HomlError):
    def __init__(self, message: str, path: tuple = ()):
        self.path = path
        loc = "/".join(str(p) for p in path) or "<root>"
        super().__init__(f"{message} at {loc}")


# ---------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Fun:
    arg: "SimpleType"
    res: "SimpleType"

    def __str__(self) -> str:
        return type_str(self)


SimpleType = Union[Base, Fun]

ENT = Base("E")
PROP = Base("Prop")
PROPERTY = Fun(ENT, PROP)
PROPSET = Fun(PROPERTY, PROP)

#: Domains a possibilist quantifier (or lambda binder) may range over.
QUANTIFIABLE = (ENT, PROP, PROPERTY, PROPSET)

_TYPE_NAMES = {ENT: "E", PROP: "Prop", PROPERTY: "Property", PROPSET: "PropSet"}
_TYPE_ALIASES = {
    "E": ENT, "e": ENT, "Ent": ENT,
    "Prop": PROP, "o": PROP, "σ": PROP,
    "Property": PROPERTY, "γ": PROPERTY,
    "PropSet": PROPSET,
}


def type_str(t: SimpleType) -> str:
    if t in _TYPE_NAMES:
        return _TYPE_NAMES[t]
    assert isinstance(t, Fun)
    arg = type_str(t.arg)
    if isinstance(t.arg, Fun) and t.arg not in _TYPE_NAMES:
        arg = f"({arg})"
    return f"{arg} => {type_str(t.res)}"


class Judgment:
    """Type marker for closed ``[ ... ]`` judgments (not a simple type)."""

    def __repr__(self) -> str:
        return "Judgment"


JUDGMENT = Judgment()


# ---------------------------------------------------------------------------
# Formula nodes


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Const(Formula):
    name: str
    type: SimpleType


@dataclass(frozen=True)
class Var(Formula):
    name: str
    type: SimpleType


@dataclass(frozen=True)
class Lam(Formula):
    var: str
    var_type: SimpleType
    body: Formula


@dataclass(frozen=True)
class App(Formula):
    fun: Formula
    arg: Formula


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Bot(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Iff(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Box(Formula):
    body: Formula


@dataclass(frozen=True)
class Dia(Formula):
    body: Formula


@dataclass(frozen=True)
class Compl(Formula):
    """Property complement: ``compl X`` holds of x at w iff X does not."""

    body: Formula


@dataclass(frozen=True)
class Eq(Formula):
    left: Formula
    right: Formula
    type: Optional[SimpleType] = None


@dataclass(frozen=True)
class Neq(Formula):
    left: Formula
    right: Formula
    type: Optional[SimpleType] = None


@dataclass(frozen=True)
class Forall(Formula):
    """Possibilist universal quantifier over the full domain of ``var_type``."""

    var: str
    var_type: SimpleType
    body: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    var_type: SimpleType
    body: Formula


@dataclass(frozen=True)
class ForallE(Formula):
    """Actualist universal quantifier: only individuals existing at the world."""

    var: str
    body: Formula
    var_type: SimpleType = field(default=ENT, init=False, repr=False)


@dataclass(frozen=True)
class ExistsE(Formula):
    var: str
    body: Formula
    var_type: SimpleType = field(default=ENT, init=False, repr=False)


@dataclass(frozen=True)
class Valid(Formula):
    """Global validity: the body holds at every world."""

    body: Formula


BINDERS = (Lam, Forall, Exists, ForallE, ExistsE)
BINARY = (And, Or, Implies, Iff, Eq, Neq)
UNARY = (Not, Box, Dia, Compl, Valid)


def children(f: Formula) -> tuple[Formula, ...]:
    if isinstance(f, BINDERS):
        return (f.body,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, UNARY):
        return (f.body,)
    if isinstance(f, App):
        return (f.fun, f.arg)
    return ()


def rebuild(f: Formula, kids: tuple[Formula, ...]) -> Formula:
    if isinstance(f, BINDERS):
        return replace(f, body=kids[0])
    if isinstance(f, BINARY):
        return replace(f, left=kids[0], right=kids[1])
    if isinstance(f, UNARY):
        return replace(f, body=kids[0])
    if isinstance(f, App):
        return App(kids[0], kids[1])
    return f


def make_binder(kind: type, var: str, var_type: SimpleType, body: Formula) -> Formula:
    if kind in (ForallE, ExistsE):
        return kind(var, body)
    return kind(var, var_type, body)


def subterms(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(children(g))


@lru_cache(maxsize=None)
def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Var):
        return frozenset((f.name,))
    if isinstance(f, BINDERS):
        return free_vars(f.body) - {f.var}
    out: frozenset[str] = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def constants(f: Formula) -> frozenset[str]:
    return frozenset(g.name for g in subterms(f) if isinstance(g, Const))


def size(f: Formula) -> int:
    return sum(1 for _ in subterms(f))


# ---------------------------------------------------------------------------
# Lexer

_UNICODE = [
    ("∀ᴱ", " forallE "), ("∃ᴱ", " existsE "), ("∀", " forall "), ("∃", " exists "),
    ("¬", "~"), ("∧", "&"), ("∨", "|"), ("↔", "<->"), ("→", "->"),
    ("□", " box "), ("◇", " dia "), ("λ", "\\"), ("≠", "!="),
    ("⌊", "["), ("⌋", "]"), ("⇁", " compl "), ("⊤", " T "), ("⊥", " F "),
]

KEYWORDS = {"forall", "exists", "forallE", "existsE", "box", "dia", "compl", "T", "F", "from"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<op><->|->|=>|!=|[~&|=\\:.,()\[\]])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str  # "op", "ident", "kw", "eof"
    text: str
    pos: int


def normalize_unicode(text: str) -> str:
    for src, dst in _UNICODE:
        text = text.replace(src, dst)
    return text


def tokenize(text: str, line: int | None = None) -> list[Token]:
    text = normalize_unicode(text)
    out: list[Token] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, line)
        kind = m.lastgroup
        if kind == "op":
            out.append(Token("op", m.group(), pos))
        elif kind == "ident":
            word = m.group()
            out.append(Token("kw" if word in KEYWORDS else "ident", word, pos))
        pos = m.end()
    out.append(Token("eof", "", len(text)))
    return out


# ---------------------------------------------------------------------------
# Environment used by the parser and typechecker


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple[tuple[str, SimpleType], ...]
    body: Formula
    type: SimpleType

    def as_lambda(self) -> Formula:
        out = self.body
        for name, t in reversed(self.params):
            out = Lam(name, t, out)
        return out


class Env:
    """Signatures visible to the parser: constants and definitions."""

    def __init__(self, constants: Mapping[str, SimpleType] | None = None,
                 definitions: Mapping[str, Definition] | None = None):
        self.constants = dict(constants or {"P": PROPSET})
        self.definitions = dict(definitions or {})

    def lookup(self, name: str) -> SimpleType | None:
        if name in self.definitions:
            return self.definitions[name].type
        return self.constants.get(name)


# ---------------------------------------------------------------------------
# Parser

_ATOM_START = {"(", "["}


class _Parser:
    def __init__(self, tokens: list[Token], env: Env, line: int | None = None):
        self.toks = tokens
        self.i = 0
        self.env = env
        self.line = line
        self.scope: list[tuple[str, SimpleType]] = []

    # helpers
    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        t = self.peek()
        return t.kind in ("op", "kw") and t.text == text

    def expect(self, text: str) -> Token:
        t = self.next()
        if t.text != text or t.kind not in ("op", "kw"):
            raise ParseError(f"expected {text!r}, got {t.text or 'end of input'!r}", t.pos, self.line)
        return t

    def error(self, msg: str) -> ParseError:
        return ParseError(msg, self.peek().pos, self.line)

    # types
    def parse_type(self, allow_act: bool = False) -> tuple[SimpleType, bool]:
        t = self.next()
        if t.kind == "ident" and t.text == "E_act":
            if not allow_act:
                raise ParseError("E_act is only allowed as a quantifier domain", t.pos, self.line)
            return ENT, True
        if t.kind == "ident" and t.text in _TYPE_ALIASES:
            left: SimpleType = _TYPE_ALIASES[t.text]
        elif t.text == "(":
            left, _ = self.parse_type()
            self.expect(")")
        else:
            raise ParseError(f"expected a type, got {t.text!r}", t.pos, self.line)
        if self.at("=>"):
            self.next()
            right, _ = self.parse_type()
            return Fun(left, right), False
        return left, False

    # expressions
    def parse_expr(self) -> Formula:
        left = self.parse_imp()
        while self.at("<->"):
            self.next()
            left = Iff(left, self.parse_imp())
        return left

    def parse_imp(self) -> Formula:
        left = self.parse_or()
        if self.at("->"):
            self.next()
            return Implies(left, self.parse_imp())
        return left

    def parse_or(self) -> Formula:
        left = self.parse_and()
        while self.at("|"):
            self.next()
            left = Or(left, self.parse_and())
        return left

    def parse_and(self) -> Formula:
        left = self.parse_eq()
        while self.at("&"):
            self.next()
            left = And(left, self.parse_eq())
        return left

    def parse_eq(self) -> Formula:
        left = self.parse_unary()
        if self.at("="):
            self.next()
            return Eq(left, self.parse_unary())
        if self.at("!="):
            self.next()
            return Neq(left, self.parse_unary())
        return left

    def parse_unary(self) -> Formula:
        t = self.peek()
        if t.kind == "op" and t.text == "~":
            self.next()
            return Not(self.parse_unary())
        if t.kind == "kw":
            if t.text == "box":
                self.next()
                return Box(self.parse_unary())
            if t.text == "dia":
                self.next()
                return Dia(self.parse_unary())
            if t.text == "compl":
                self.next()
                return Compl(self.parse_unary())
            if t.text in ("forall", "exists", "forallE", "existsE"):
                return self.parse_binder()
        if t.kind == "op" and t.text == "\\":
            return self.parse_binder()
        return self.parse_app()

    def parse_binder(self) -> Formula:
        t = self.next()
        names: list[Token] = []
        while self.peek().kind == "ident":
            names.append(self.next())
        if not names:
            raise self.error("expected a bound variable")
        actualist = t.text in ("forallE", "existsE")
        if self.at(":"):
            self.next()
            vtype, act = self.parse_type(allow_act=t.text in ("forall", "exists"))
            if actualist and vtype != ENT:
                raise ParseError("actualist quantifiers range over E only", t.pos, self.line)
            actualist = actualist or act
        elif actualist:
            vtype = ENT
        else:
            raise self.error("binder needs a type annotation")
        self.expect(".")
        for n in names:
            self.scope.append((n.text, vtype))
        body = self.parse_expr()
        del self.scope[-len(names):]
        if t.text == "\\":
            kind: type = Lam
        elif t.text in ("forall", "forallE"):
            kind = ForallE if actualist else Forall
        else:
            kind = ExistsE if actualist else Exists
        for n in reversed(names):
            body = make_binder(kind, n.text, vtype, body)
        return body

    def starts_atom(self) -> bool:
        t = self.peek()
        if t.kind == "ident":
            return True
        if t.kind == "kw" and t.text in ("T", "F"):
            return True
        return t.kind == "op" and t.text in _ATOM_START

    def parse_app(self) -> Formula:
        f = self.parse_atom()
        while self.starts_atom():
            f = App(f, self.parse_atom())
        return f

    def parse_atom(self) -> Formula:
        t = self.next()
        if t.kind == "kw" and t.text == "T":
            return Top()
        if t.kind == "kw" and t.text == "F":
            return Bot()
        if t.kind == "op" and t.text == "(":
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "op" and t.text == "[":
            e = self.parse_expr()
            self.expect("]")
            return Valid(e)
        if t.kind == "ident":
            for name, vt in reversed(self.scope):
                if name == t.text:
                    return Var(name, vt)
            ty = self.env.lookup(t.text)
            if ty is None:
                raise ParseError(f"unknown identifier {t.text!r}", t.pos, self.line)
            return Const(t.text, ty)
        raise ParseError(f"unexpected {t.text or 'end of input'!r}", t.pos, self.line)


def parse_formula(text: str, env: "Env | Theory | None" = None, *, line: int | None = None,
                  check: bool = True) -> Formula:
    """Parse ``text`` into a typechecked formula.

    ``env`` supplies constant and definition signatures; a :class:`Theory` may be
    passed directly. Raises :class:`ParseError` or :class:`TypeCheckError`.
    """
    if env is None:
        env = Env()
    elif isinstance(env, Theory):
        env = env.env
    toks = tokenize(text, line)
    p = _Parser(toks, env, line)
    f = p.parse_expr()
    if p.peek().kind != "eof":
        raise p.error(f"unexpected {p.peek().text!r}")
    if check:
        f, _ = typecheck(f)
    return f


def parse_type(text: str) -> SimpleType:
    p = _Parser(tokenize(text), Env())
    t, _ = p.parse_type()
    if p.peek().kind != "eof":
        raise p.error("trailing input after type")
    return t


# ---------------------------------------------------------------------------
# Typechecking


def typecheck(f: Formula, path: tuple = ()) -> tuple[Formula, SimpleType | Judgment]:
    """Return ``(f', type)`` where ``f'`` has every equality node annotated.

    Raises :class:`TypeCheckError` carrying the path of the offending node.
    """
    if isinstance(f, Valid):
        if path:
            raise TypeCheckError("global validity is only allowed at top level", path)
        body, t = typecheck(f.body, path + ("valid",))
        if t != PROP:
            raise TypeCheckError(f"[ ] expects Prop, got {_tstr(t)}", path)
        return Valid(body), JUDGMENT
    f2, t = _tc(f, path)
    return f2, t


def _tstr(t) -> str:
    return type_str(t) if isinstance(t, (Base, Fun)) else repr(t)


def _expect(t, want, path, what):
    if t != want:
        raise TypeCheckError(f"{what} expects {_tstr(want)}, got {_tstr(t)}", path)


def _tc(f: Formula, path: tuple) -> tuple[Formula, SimpleType]:
    if isinstance(f, (Const, Var)):
        return f, f.type
    if isinstance(f, (Top, Bot)):
        return f, PROP
    if isinstance(f, Valid):
        raise TypeCheckError("global validity is only allowed at top level", path)
    if isinstance(f, (Not, Box, Dia)):
        body, t = _tc(f.body, path + (type(f).__name__,))
        _expect(t, PROP, path, type(f).__name__)
        return replace(f, body=body), PROP
    if isinstance(f, Compl):
        body, t = _tc(f.body, path + ("Compl",))
        _expect(t, PROPERTY, path, "compl")
        return Compl(body), PROPERTY
    if isinstance(f, (And, Or, Implies, Iff)):
        name = type(f).__name__
        left, lt = _tc(f.left, path + (name, 0))
        right, rt = _tc(f.right, path + (name, 1))
        _expect(lt, PROP, path + (name, 0), name)
        _expect(rt, PROP, path + (name, 1), name)
        return replace(f, left=left, right=right), PROP
    if isinstance(f, (Eq, Neq)):
        name = type(f).__name__
        left, lt = _tc(f.left, path + (name, 0))
        right, rt = _tc(f.right, path + (name, 1))
        if lt != rt:
            raise TypeCheckError(f"equality between {_tstr(lt)} and {_tstr(rt)}", path)
        return type(f)(left, right, lt), PROP
    if isinstance(f, (Forall, Exists)):
        if f.var_type not in QUANTIFIABLE:
            raise TypeCheckError(f"cannot quantify over {_tstr(f.var_type)}", path)
        body, t = _tc(f.body, path + (type(f).__name__,))
        _expect(t, PROP, path, type(f).__name__)
        return replace(f, body=body), PROP
    if isinstance(f, (ForallE, ExistsE)):
        body, t = _tc(f.body, path + (type(f).__name__,))
        _expect(t, PROP, path, type(f).__name__)
        return replace(f, body=body), PROP
    if isinstance(f, Lam):
        if f.var_type not in QUANTIFIABLE:
            raise TypeCheckError(f"cannot abstract over {_tstr(f.var_type)}", path)
        body, t = _tc(f.body, path + ("Lam",))
        return Lam(f.var, f.var_type, body), Fun(f.var_type, t)
    if isinstance(f, App):
        fun, ft = _tc(f.fun, path + ("App", 0))
        arg, at = _tc(f.arg, path + ("App", 1))
        if not isinstance(ft, Fun):
            raise TypeCheckError(f"applying a non-function of type {_tstr(ft)}", path)
        if ft.arg != at:
            raise TypeCheckError(f"argument of type {_tstr(at)} where {_tstr(ft.arg)} expected", path)
        return App(fun, arg), ft.res
    raise TypeCheckError(f"unknown node {f!r}", path)


def type_of(f: Formula) -> SimpleType | Judgment:
    return typecheck(f)[1]


# ---------------------------------------------------------------------------
# Printer

_PREC = {Iff: 1, Implies: 2, Or: 3, And: 4, Eq: 5, Neq: 5}
_OPS = {Iff: "<->", Implies: "->", Or: "|", And: "&", Eq: "=", Neq: "!="}
_UNOPS = {Not: "~", Box: "box ", Dia: "dia ", Compl: "compl "}
_BINDER_KW = {Forall: "forall", Exists: "exists", ForallE: "forall", ExistsE: "exists", Lam: "\\"}


def to_text(f: Formula) -> str:
    """Canonical ASCII rendering; ``parse_formula(to_text(f)) == f``."""
    return _pp(f, 0, True)


def _pp(f: Formula, ctx: int, tail: bool) -> str:
    if isinstance(f, BINDERS):
        kw = _BINDER_KW[type(f)]
        if isinstance(f, (ForallE, ExistsE)):
            head = f"{kw} {f.var}:E_act."
        elif isinstance(f, Lam):
            head = f"\\{f.var}:{_type_annot(f.var_type)}."
        else:
            head = f"{kw} {f.var}:{_type_annot(f.var_type)}."
        if ctx <= 5 and tail:
            return f"{head} {_pp(f.body, 0, True)}"
        return f"({head} {_pp(f.body, 0, True)})"
    if isinstance(f, App):
        s = f"{_pp(f.fun, 7, False)} {_pp(f.arg, 8, tail)}"
        return s if ctx <= 7 else f"({s})"
    if isinstance(f, (Not, Box, Dia, Compl)):
        s = _UNOPS[type(f)] + _pp(f.body, 6, tail)
        return s if ctx <= 6 else f"({s})"
    if isinstance(f, BINARY):
        p = _PREC[type(f)]
        if p < ctx:
            return f"({_pp(f, 0, True)})"
        op = _OPS[type(f)]
        if isinstance(f, Implies):
            left, right = _pp(f.left, p + 1, False), _pp(f.right, p, tail)
        elif isinstance(f, (Eq, Neq)):
            left, right = _pp(f.left, 6, False), _pp(f.right, 6, tail)
        else:
            left, right = _pp(f.left, p, False), _pp(f.right, p + 1, tail)
        return f"{left} {op} {right}"
    if isinstance(f, Valid):
        return f"[{_pp(f.body, 0, True)}]"
    if isinstance(f, Top):
        return "T"
    if isinstance(f, Bot):
        return "F"
    if isinstance(f, (Var, Const)):
        return f.name
    raise TypeError(f"cannot print {f!r}")


def _type_annot(t: SimpleType) -> str:
    s = type_str(t)
    return f"({s})" if "=>" in s else s


# ---------------------------------------------------------------------------
# Substitution, beta reduction and definition expansion


def _fresh(base: str, avoid: set[str]) -> str:
    stem = base.rstrip("0123456789'") or "v"
    for k in itertools.count(1):
        cand = f"{stem}{k}"
        if cand not in avoid and cand not in KEYWORDS:
            return cand
    raise AssertionError


def substitute(f: Formula, name: str, value: Formula) -> Formula:
    """Capture-avoiding substitution of ``value`` for free ``name`` in ``f``."""
    if name not in free_vars(f):
        return f
    fv_value = free_vars(value)
    return _subst(f, name, value, fv_value)


def _subst(f: Formula, name: str, value: Formula, fv_value: frozenset[str]) -> Formula:
    if isinstance(f, Var):
        return value if f.name == name else f
    if name not in free_vars(f):
        return f
    if isinstance(f, BINDERS):
        if f.var == name:
            return f
        if f.var in fv_value:
            new = _fresh(f.var, set(fv_value) | set(free_vars(f.body)) | {name})
            body = _subst(f.body, f.var, Var(new, f.var_type), frozenset((new,)))
            f = replace(f, var=new, body=body)
        return replace(f, body=_subst(f.body, name, value, fv_value))
    return rebuild(f, tuple(_subst(c, name, value, fv_value) for c in children(f)))


def beta_normalize(f: Formula) -> Formula:
    if isinstance(f, App):
        fun = beta_normalize(f.fun)
        arg = beta_normalize(f.arg)
        if isinstance(fun, Lam):
            return beta_normalize(substitute(fun.body, fun.var, arg))
        return App(fun, arg)
    kids = children(f)
    if not kids:
        return f
    new = tuple(beta_normalize(c) for c in kids)
    return f if new == kids else rebuild(f, new)


def unfold(f: Formula, definitions: Mapping[str, Definition]) -> Formula:
    if isinstance(f, Const):
        d = definitions.get(f.name)
        return unfold(d.as_lambda(), definitions) if d is not None else f
    kids = children(f)
    if not kids:
        return f
    return rebuild(f, tuple(unfold(c, definitions) for c in kids))


def expand_definitions(theory: "Theory | Mapping[str, Definition]", f: Formula) -> Formula:
    """Replace every defined symbol by its body and beta-normalize.

    The result mentions only primitive node kinds and undefined constants.
    """
    defs = theory.definitions if isinstance(theory, Theory) else theory
    return beta_normalize(unfold(f, defs))


def alpha_canonical(f: Formula) -> Formula:
    """Rename bound variables by binding depth so alpha-variants compare equal."""
    return _canon(f, {}, 0)


def _canon(f: Formula, ren: dict[str, str], depth: int) -> Formula:
    if isinstance(f, Var):
        return Var(ren.get(f.name, f.name), f.type)
    if isinstance(f, BINDERS):
        new = f"_{depth}"
        inner = dict(ren)
        inner[f.var] = new
        return replace(f, var=new, body=_canon(f.body, inner, depth + 1))
    kids = children(f)
    if not kids:
        return f
    return rebuild(f, tuple(_canon(c, ren, depth) for c in kids))


def alpha_equal(a: Formula, b: Formula) -> bool:
    return alpha_canonical(a) == alpha_canonical(b)


# ---------------------------------------------------------------------------
# Theories and the theory-file DSL

FRAMES = ("k", "t", "kb")
CLAIM_KINDS = ("valid", "countersat", "consistent")


@dataclass(frozen=True)
class Claim:
    name: str
    kind: str
    formula: Optional[Formula]
    bounds: tuple[tuple[int, int], ...] = ((2, 1), (1, 2))
    premises: Optional[tuple[str, ...]] = None
    frame: Optional[str] = None

    @property
    def is_edge(self) -> bool:
        return self.premises is not None


@dataclass
class Theory:
    name: str
    frame: str = "k"
    constants: dict[str, SimpleType] = field(default_factory=lambda: {"P": PROPSET})
    definitions: dict[str, Definition] = field(default_factory=dict)
    axioms: dict[str, Formula] = field(default_factory=dict)
    claims: list[Claim] = field(default_factory=list)

    @property
    def env(self) -> Env:
        return Env(self.constants, self.definitions)

    def names(self) -> set[str]:
        return set(self.constants) | set(self.definitions) | set(self.axioms) | {c.name for c in self.claims}

    def claim(self, name: str) -> Claim:
        for c in self.claims:
            if c.name == name:
                return c
        raise KeyError(name)

    def named_formula(self, name: str) -> Formula:
        """Axiom or claim conjecture by name."""
        if name in self.axioms:
            return self.axioms[name]
        for c in self.claims:
            if c.name == name and c.formula is not None:
                return c.formula
        raise KeyError(name)

    def expand(self, f: Formula) -> Formula:
        return expand_definitions(self, f)

    def add_definition(self, name: str, params: list[tuple[str, SimpleType]], body_text: str,
                       line: int | None = None) -> Definition:
        if name in self.names() or name in KEYWORDS:
            raise ParseError(f"duplicate name {name!r}", None, line)
        toks = tokenize(body_text, line)
        p = _Parser(toks, self.env, line)
        p.scope = list(params)
        body = p.parse_expr()
        if p.peek().kind != "eof":
            raise p.error(f"unexpected {p.peek().text!r}")
        body, t = typecheck(body)
        if isinstance(t, Judgment):
            raise TypeCheckError(f"definition {name} has a judgment body")
        full: SimpleType = t
        for _, pt in reversed(params):
            full = Fun(pt, full)
        d = Definition(name, tuple(params), body, full)
        self.definitions[name] = d
        return d

    def add_axiom(self, name: str, f: Formula, line: int | None = None) -> None:
        if name in self.names():
            raise ParseError(f"duplicate name {name!r}", None, line)
        self.axioms[name] = as_judgment(f)

    def add_claim(self, claim: Claim, line: int | None = None) -> None:
        if claim.name in {c.name for c in self.claims} or claim.name in self.constants \
                or claim.name in self.definitions:
            raise ParseError(f"duplicate name {claim.name!r}", None, line)
        if claim.premises is not None:
            known = set(self.axioms) | {c.name for c in self.claims}
            for p in claim.premises:
                if p not in known:
                    raise ParseError(f"unknown premise {p!r} in claim {claim.name}", None, line)
        self.claims.append(claim)


def as_judgment(f: Formula) -> Formula:
    """Wrap a Prop-typed formula in global validity (judgments pass through)."""
    f2, t = typecheck(f)
    if isinstance(t, Judgment):
        return f2
    if t != PROP:
        raise TypeCheckError(f"expected a Prop-typed formula, got {_tstr(t)}")
    return Valid(f2)


_LINE_THEORY = re.compile(r"theory\s+(\S+)(?:\s+frame\s+(\S+))?\s*$")
_LINE_DEF = re.compile(r"def\s+([A-Za-z_][A-Za-z0-9_']*)\s*(?:\((.*?)\))?\s*:=\s*(.+)$")
_LINE_CONST = re.compile(r"const\s+([A-Za-z_][A-Za-z0-9_']*)\s*:\s*(.+)$")
_LINE_AXIOM = re.compile(r"axiom\s+([A-Za-z_][A-Za-z0-9_']*)\s*:\s*(.+)$")
_LINE_CLAIM = re.compile(
    r"claim\s+([A-Za-z_][A-Za-z0-9_']*)\s+(\S+)"
    r"((?:\s+bounds(?:\s*\(\s*\d+\s*,\s*\d+\s*\))+)?)"
    r"(?:\s+frame\s+(\S+))?"
    r"\s*(?::\s*(.*))?$")
_BOUND = re.compile(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)")


def _parse_params(text: str, line: int) -> list[tuple[str, SimpleType]]:
    params: list[tuple[str, SimpleType]] = []
    if not text or not text.strip():
        return params
    depth, start, pieces = 0, 0, []
    for k, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 0:
            pieces.append(text[start:k])
            start = k + 1
    pieces.append(text[start:])
    for piece in pieces:
        if ":" not in piece:
            raise ParseError(f"parameter {piece.strip()!r} needs a type", None, line)
        names, tname = piece.split(":", 1)
        t = parse_type(tname.strip())
        for n in names.split():
            params.append((n, t))
    return params


def parse_theory(text: str, includes: Mapping[str, str] | None = None) -> Theory:
    """Parse a theory file.

    Line forms: ``theory NAME frame {k|t|kb}``, ``include NAME``, ``const NAME : TYPE``,
    ``def NAME(params) := EXPR``, ``axiom NAME: EXPR`` and
    ``claim NAME {valid|countersat|consistent} [bounds (W,E)...] [frame F] [: EXPR [from A B ...]]``.
    ``#`` starts a comment line.
    """
    if includes is None:
        from .corpus import LIBRARIES as includes  # noqa: N811
    theory: Theory | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("theory"):
            m = _LINE_THEORY.match(line)
            if not m or theory is not None:
                raise ParseError("malformed or repeated theory header", None, lineno)
            frame = (m.group(2) or "k").lower()
            if frame not in FRAMES:
                raise ParseError(f"unknown frame tag {m.group(2)!r}", None, lineno)
            theory = Theory(m.group(1), frame)
            continue
        if theory is None:
            raise ParseError("theory header must come first", None, lineno)
        if line.startswith("include"):
            lib = line.split(None, 1)[1].strip() if len(line.split()) > 1 else ""
            if lib not in includes:
                raise ParseError(f"unknown library {lib!r}", None, lineno)
            _parse_body(theory, includes[lib], includes)
            continue
        _parse_line(theory, line, lineno)
    if theory is None:
        raise ParseError("missing theory header")
    _check_acyclic(theory)
    return theory


def _parse_body(theory: Theory, text: str, includes) -> None:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("include"):
            _parse_body(theory, includes[line.split(None, 1)[1].strip()], includes)
            continue
        _parse_line(theory, line, lineno)


def _parse_line(theory: Theory, line: str, lineno: int) -> None:
    if line.startswith("const"):
        m = _LINE_CONST.match(line)
        if not m:
            raise ParseError("malformed const line", None, lineno)
        if m.group(1) in theory.names():
            raise ParseError(f"duplicate name {m.group(1)!r}", None, lineno)
        theory.constants[m.group(1)] = parse_type(m.group(2).strip())
    elif line.startswith("def"):
        m = _LINE_DEF.match(line)
        if not m:
            raise ParseError("malformed def line", None, lineno)
        theory.add_definition(m.group(1), _parse_params(m.group(2), lineno), m.group(3), lineno)
    elif line.startswith("axiom"):
        m = _LINE_AXIOM.match(line)
        if not m:
            raise ParseError("malformed axiom line", None, lineno)
        theory.add_axiom(m.group(1), parse_formula(m.group(2), theory.env, line=lineno), lineno)
    elif line.startswith("claim"):
        theory.add_claim(_parse_claim(theory, line, lineno), lineno)
    else:
        raise ParseError(f"unrecognised line {line.split()[0]!r}", None, lineno)


def _parse_claim(theory: Theory, line: str, lineno: int) -> Claim:
    m = _LINE_CLAIM.match(line)
    if not m:
        raise ParseError("malformed claim line", None, lineno)
    name, kind, bounds_txt, frame, body = m.groups()
    if kind not in CLAIM_KINDS:
        raise ParseError(f"unknown claim kind {kind!r}", None, lineno)
    bounds = tuple((int(a), int(b)) for a, b in _BOUND.findall(bounds_txt or ""))
    if frame is not None and frame.lower() not in FRAMES:
        raise ParseError(f"unknown frame tag {frame!r}", None, lineno)
    premises = None
    formula = None
    if body is not None and body.strip():
        body = normalize_unicode(body)
        toks = tokenize(body, lineno)
        cut = next((k for k, t in enumerate(toks) if t.kind == "kw" and t.text == "from"), None)
        expr = body if cut is None else body[:toks[cut].pos]
        if cut is not None:
            premises = tuple(t.text for t in toks[cut + 1:] if t.kind != "eof")
            if not premises:
                premises = ()
        formula = as_judgment(parse_formula(expr, theory.env, line=lineno))
    if kind == "consistent" and formula is not None:
        raise ParseError("consistent claims carry no conjecture", None, lineno)
    if kind != "consistent" and formula is None:
        raise ParseError(f"claim {name} needs a conjecture", None, lineno)
    return Claim(name, kind, formula, bounds or ((2, 1), (1, 2)), premises,
                 frame.lower() if frame else None)


def _check_acyclic(theory: Theory) -> None:
    # The parser only resolves earlier definitions, so cycles cannot arise from
    # files; theories assembled by hand are checked here.
    state: dict[str, int] = {}

    def visit(n: str, stack: tuple[str, ...]) -> None:
        if state.get(n) == 2:
            return
        if state.get(n) == 1:
            raise ParseError(f"cyclic definition {' -> '.join(stack + (n,))}")
        state[n] = 1
        for c in constants(theory.definitions[n].body):
            if c in theory.definitions:
                visit(c, stack + (n,))
        state[n] = 2

    for n in theory.definitions:
        visit(n, ())
