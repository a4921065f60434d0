"""TPTP THF export through the shallow embedding, plus a small THF reader.

Every lifted type ``Prop`` becomes ``mworld > $o``; entities are ``mu``; the
accessibility relation, existence predicate and ``P`` are declared constants.
By default the problem is fully expanded, so it mentions no user definitions.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .syntax import (
    ENT, PROP, And, App, Bot, Box, Claim, Compl, Const, Dia, Eq, Exists, ExistsE, Forall,
    ForallE, Formula, Fun, HomlError, Iff, Implies, Lam, Neq, Not, Or, SimpleType, Theory, Top,
    Valid, Var, as_judgment, constants, expand_definitions, typecheck,
)

FRAME_AXIOMS = {
    "k": (),
    "t": (("frame_reflexive", "![W:mworld]: (mrel @ W @ W)"),),
    "kb": (("frame_symmetric", "![W:mworld,V:mworld]: ((mrel @ W @ V) => (mrel @ V @ W))"),),
}

STATUS_OF_KIND = {"valid": "Theorem", "countersat": "CounterSatisfiable",
                  "consistent": "CounterSatisfiable"}


class ThfError(HomlError):
    pass


@dataclass
class ThfOptions:
    keep_definitions: bool = False
    frame: str | None = None
    premises: Iterable[str] | None = None
    name: str = "conjecture"
    status: str | None = None
    comment: str = ""


@dataclass
class ThfProblem:
    header: list[str]
    types: list[tuple[str, str]]
    axioms: list[tuple[str, str, str]]  # (name, role, formula)
    conjecture: tuple[str, str]

    def render(self) -> str:
        out = [f"% {h}".rstrip() for h in self.header]
        out.append("")
        for name, decl in self.types:
            out.append(f"thf({name}, type, {decl}).")
        out.append("")
        for name, role, body in self.axioms:
            out.append(f"thf({name}, {role}, {body}).")
        if self.axioms:
            out.append("")
        name, body = self.conjecture
        out.append(f"thf({name}, conjecture, {body}).")
        return "\n".join(out) + "\n"


def safe_name(name: str) -> str:
    """Map a theory name onto ``[A-Za-z0-9_]``; primes become ``_prime``."""
    out = name.replace("'", "_prime")
    return re.sub(r"[^A-Za-z0-9_]", "_", out)


def thf_type(t: SimpleType) -> str:
    if t == ENT:
        return "mu"
    if t == PROP:
        return "mworld > $o"
    if isinstance(t, Fun):
        arg = thf_type(t.arg)
        if ">" in arg:
            arg = f"({arg})"
        return f"{arg} > {thf_type(t.res)}"
    raise ThfError(f"no THF rendering of type {t}")


class _Translator:
    def __init__(self, defs: dict[str, str], consts: dict[str, str]):
        self.defs = defs
        self.consts = consts
        self.scope: list[tuple[str, str]] = []
        self.in_use: set[str] = set()
        self.counter = 0

    def fresh(self, base: str) -> str:
        k = 0
        name = base
        while name in self.in_use:
            k += 1
            name = f"{base}{k}"
        return name

    def bind(self, src: str) -> str:
        name = self.fresh("V_" + safe_name(src))
        self.scope.append((src, name))
        self.in_use.add(name)
        return name

    def unbind(self):
        _, name = self.scope.pop()
        self.in_use.discard(name)

    def world(self) -> str:
        name = self.fresh("W")
        self.in_use.add(name)
        return name

    def release(self, name: str):
        self.in_use.discard(name)

    def lookup(self, src: str) -> str:
        for s, name in reversed(self.scope):
            if s == src:
                return name
        raise ThfError(f"unbound variable {src!r}")

    # Prop-typed formula evaluated at world w, giving a $o term
    def fmla(self, f: Formula, w: str) -> str:
        if isinstance(f, Top):
            return "$true"
        if isinstance(f, Bot):
            return "$false"
        if isinstance(f, Not):
            return f"~ ({self.fmla(f.body, w)})"
        for kind, op in ((And, "&"), (Or, "|"), (Implies, "=>"), (Iff, "<=>")):
            if isinstance(f, kind):
                return f"({self.fmla(f.left, w)} {op} {self.fmla(f.right, w)})"
        if isinstance(f, (Box, Dia)):
            v = self.world()
            body = self.fmla(f.body, v)
            self.release(v)
            if isinstance(f, Box):
                return f"(![{v}:mworld]: ((mrel @ {w} @ {v}) => {body}))"
            return f"(?[{v}:mworld]: ((mrel @ {w} @ {v}) & {body}))"
        if isinstance(f, (Eq, Neq)):
            op = "=" if isinstance(f, Eq) else "!="
            return f"({self.term(f.left)} {op} {self.term(f.right)})"
        if isinstance(f, (Forall, Exists, ForallE, ExistsE)):
            q = "!" if isinstance(f, (Forall, ForallE)) else "?"
            vtype = ENT if isinstance(f, (ForallE, ExistsE)) else f.var_type
            x = self.bind(f.var)
            body = self.fmla(f.body, w)
            self.unbind()
            if isinstance(f, ForallE):
                body = f"((existsAt @ {x} @ {w}) => {body})"
            elif isinstance(f, ExistsE):
                body = f"((existsAt @ {x} @ {w}) & {body})"
            return f"({q}[{x}:{thf_type(vtype)}]: {body})"
        if isinstance(f, (Var, Const, App)):
            return f"({self.term(f)} @ {w})"
        raise ThfError(f"cannot export {f!r} as a formula")

    # term of the lifted type
    def term(self, f: Formula) -> str:
        if isinstance(f, Var):
            return self.lookup(f.name)
        if isinstance(f, Const):
            if f.name in self.defs:
                return self.defs[f.name]
            if f.name in self.consts:
                return self.consts[f.name]
            raise ThfError(f"undeclared constant {f.name!r}")
        if isinstance(f, App):
            return f"({self.term(f.fun)} @ {self.term(f.arg)})"
        if isinstance(f, Lam):
            x = self.bind(f.var)
            body = self.term(f.body)
            self.unbind()
            return f"(^[{x}:{thf_type(f.var_type)}]: {body})"
        if isinstance(f, Compl):
            z = self.fresh("Z")
            self.in_use.add(z)
            v = self.world()
            inner = self.term(f.body)
            self.release(v)
            self.release(z)
            return f"(^[{z}:mu,{v}:mworld]: ~ ({inner} @ {z} @ {v}))"
        # any other node is Prop-typed
        v = self.world()
        body = self.fmla(f, v)
        self.release(v)
        return f"(^[{v}:mworld]: {body})"

    def judgment(self, f: Formula) -> str:
        if not isinstance(f, Valid):
            raise ThfError("expected a global-validity judgment")
        w = self.world()
        body = self.fmla(f.body, w)
        self.release(w)
        return f"![{w}:mworld]: {body}"


def _used_definitions(theory: Theory, formulas: Iterable[Formula]) -> list[str]:
    used: set[str] = set()
    todo = [c for f in formulas for c in constants(f)]
    while todo:
        c = todo.pop()
        if c in theory.definitions and c not in used:
            used.add(c)
            todo.extend(constants(theory.definitions[c].body))
    return [d for d in theory.definitions if d in used]


def export_thf(theory: Theory, conjecture: Formula | None, options: ThfOptions | None = None) -> str:
    """Render ``theory`` (or the chosen premises) and one conjecture as a THF problem.

    ``conjecture=None`` asks for consistency: the conjecture becomes ``$false``.
    """
    return build_problem(theory, conjecture, options).render()


def build_problem(theory: Theory, conjecture: Formula | None,
                  options: ThfOptions | None = None) -> ThfProblem:
    opts = options or ThfOptions()
    frame = opts.frame or theory.frame
    if frame not in FRAME_AXIOMS:
        raise ThfError(f"unknown frame {frame!r}")
    names = list(theory.axioms) if opts.premises is None else list(opts.premises)
    premises = []
    for n in names:
        try:
            premises.append((n, as_judgment(theory.named_formula(n))))
        except KeyError:
            raise ThfError(f"unknown premise {n!r}") from None
    goal = None if conjecture is None else as_judgment(conjecture)
    for _, f in premises + ([("conjecture", goal)] if goal is not None else []):
        typecheck(f)
    forms = [f for _, f in premises] + ([goal] if goal is not None else [])

    const_names = {"P": "p"}
    for c in theory.constants:
        if c != "P":
            const_names[c] = "c_" + safe_name(c).lower()
    types = [("mworld_type", "mworld: $tType"), ("mu_type", "mu: $tType"),
             ("mrel_decl", "mrel: mworld > mworld > $o"),
             ("existsAt_decl", "existsAt: mu > mworld > $o")]
    for c, t in theory.constants.items():
        types.append((f"{const_names[c]}_decl", f"{const_names[c]}: {thf_type(t)}"))

    axioms: list[tuple[str, str, str]] = []
    defs: dict[str, str] = {}
    if opts.keep_definitions:
        for d in _used_definitions(theory, forms):
            dn = "d_" + safe_name(d).lower()
            body = theory.definitions[d].as_lambda()
            term = _Translator(defs, const_names).term(body)
            types.append((f"{dn}_decl", f"{dn}: {thf_type(theory.definitions[d].type)}"))
            axioms.append((f"{dn}_def", "definition", f"{dn} = {term}"))
            defs[d] = dn
    else:
        premises = [(n, expand_definitions(theory, f)) for n, f in premises]
        if goal is not None:
            goal = expand_definitions(theory, goal)

    for name, body in FRAME_AXIOMS[frame]:
        axioms.append((name, "axiom", body))
    for n, f in premises:
        axioms.append((f"ax_{safe_name(n)}", "axiom", _Translator(defs, const_names).judgment(f)))
    goal_text = "$false" if goal is None else _Translator(defs, const_names).judgment(goal)

    header = [f"Problem  : {theory.name}__{safe_name(opts.name)}",
              f"Variant  : {theory.name}",
              f"Frame    : {frame}",
              f"Premises : {' '.join(names) if names else '(none)'}"]
    if opts.status:
        header.append(f"Status   : {opts.status}")
    if opts.comment:
        header.append(f"Comment  : {opts.comment}")
    header.append("Generated by homl (shallow embedding, "
                  + ("definitions kept" if opts.keep_definitions else "fully expanded") + ")")
    return ThfProblem(header, types, axioms, (f"conj_{safe_name(opts.name)}", goal_text))


def claim_filename(theory: Theory, claim: Claim) -> str:
    return f"{theory.name}__{safe_name(claim.name)}.p"


def export_claim(theory: Theory, claim: Claim, keep_definitions: bool = False) -> tuple[str, str]:
    """(file name, THF text) for one corpus claim."""
    if claim.kind == "consistent":
        conj = None
        comment = "consistency: $false must not follow"
    else:
        conj = claim.formula
        comment = f"expected {claim.kind} (bounded check)"
    opts = ThfOptions(keep_definitions=keep_definitions, frame=claim.frame,
                      premises=claim.premises, name=claim.name,
                      status=STATUS_OF_KIND[claim.kind], comment=comment)
    return claim_filename(theory, claim), export_thf(theory, conj, opts)


def export_theory(theory: Theory, outdir: str | Path | None = None,
                  keep_definitions: bool = False) -> dict[str, str]:
    out = {}
    for claim in theory.claims:
        name, text = export_claim(theory, claim, keep_definitions)
        out[name] = text
    if outdir is not None:
        write_files(out, outdir)
    return out


def export_corpus(outdir: str | Path | None = None, keep_definitions: bool = False) -> dict[str, str]:
    from .corpus import builtin_theories

    out = {}
    for _, theory in builtin_theories():
        out.update(export_theory(theory, None, keep_definitions))
    if outdir is not None:
        write_files(out, outdir)
    return out


def write_files(files: dict[str, str], outdir: str | Path) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in sorted(files):
        (outdir / name).write_bytes(files[name].encode("utf-8"))


# ---------------------------------------------------------------------------
# Minimal THF reader
#
# Accepts the fragment the exporter writes: type declarations, axioms,
# definitions and one conjecture. Checks that every symbol is declared, every
# variable bound, and every application is well typed.

_THF_TOKEN = re.compile(r"""
    (?P<ws>\s+|%[^\n]*)
  | (?P<dollar>\$[A-Za-z]+)
  | (?P<upper>[A-Z][A-Za-z0-9_]*)
  | (?P<lower>[a-z][A-Za-z0-9_]*)
  | (?P<op><=>|=>|!=|[!?^]\[|[~&|@=:,.()\[\]>])
""", re.X)


class ThfSyntaxError(ThfError):
    pass


@dataclass(frozen=True)
class TType:
    """A THF type: a base name or an arrow."""

    name: str | None = None
    arg: "TType | None" = None
    res: "TType | None" = None

    def __str__(self) -> str:
        if self.name is not None:
            return self.name
        a = str(self.arg)
        return f"({a}) > {self.res}" if self.arg.name is None else f"{a} > {self.res}"


O = TType("$o")
TTYPE = TType("$tType")


@dataclass
class ThfFile:
    types: dict[str, TType] = field(default_factory=dict)
    constants: dict[str, TType] = field(default_factory=dict)
    formulas: list[tuple[str, str]] = field(default_factory=list)

    @property
    def conjectures(self) -> list[str]:
        return [n for n, r in self.formulas if r == "conjecture"]


def _tokenize_thf(text: str) -> list[tuple[str, str]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _THF_TOKEN.match(text, pos)
        if not m:
            raise ThfSyntaxError(f"bad character {text[pos]!r} at offset {pos}")
        pos = m.end()
        if m.lastgroup != "ws":
            out.append((m.lastgroup, m.group()))
    out.append(("eof", ""))
    return out


class _ThfReader:
    def __init__(self, text: str):
        self.toks = _tokenize_thf(text)
        self.i = 0
        self.file = ThfFile()
        self.vars: list[tuple[str, TType]] = []

    def peek(self, k: int = 0):
        return self.toks[self.i + k]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str):
        t = self.next()
        if t[1] != text:
            raise ThfSyntaxError(f"expected {text!r}, got {t[1]!r}")

    def read(self) -> ThfFile:
        while self.peek()[0] != "eof":
            self.statement()
        if len(self.file.conjectures) != 1:
            raise ThfError(f"expected exactly one conjecture, found {len(self.file.conjectures)}")
        return self.file

    def statement(self):
        t = self.next()
        if t[1] != "thf":
            raise ThfSyntaxError(f"expected 'thf', got {t[1]!r}")
        self.expect("(")
        kind, name = self.next()
        if kind not in ("lower", "upper"):
            raise ThfSyntaxError(f"bad formula name {name!r}")
        self.expect(",")
        role = self.next()[1]
        self.expect(",")
        if role == "type":
            self.type_decl()
        elif role in ("axiom", "conjecture", "definition", "hypothesis", "lemma"):
            if role == "definition":
                self.definition()
            else:
                t = self.formula()
                if t != O:
                    raise ThfError(f"{name}: formula has type {t}, not $o")
        else:
            raise ThfSyntaxError(f"unsupported role {role!r}")
        self.expect(")")
        self.expect(".")
        if any(n == name for n, _ in self.file.formulas):
            raise ThfError(f"duplicate formula name {name!r}")
        self.file.formulas.append((name, role))

    def type_decl(self):
        kind, name = self.next()
        if kind != "lower":
            raise ThfSyntaxError(f"bad symbol {name!r}")
        self.expect(":")
        t = self.type_expr()
        if name in self.file.types or name in self.file.constants:
            raise ThfError(f"symbol {name!r} declared twice")
        if t == TTYPE:
            self.file.types[name] = TType(name)
        else:
            self.file.constants[name] = t

    def definition(self):
        kind, name = self.next()
        if name not in self.file.constants:
            raise ThfError(f"definition of undeclared symbol {name!r}")
        self.expect("=")
        t = self.unitary()
        if t != self.file.constants[name]:
            raise ThfError(f"definition of {name} has type {t}, declared {self.file.constants[name]}")

    def type_expr(self) -> TType:
        left = self.type_atom()
        if self.peek()[1] == ">":
            self.next()
            return TType(None, left, self.type_expr())
        return left

    def type_atom(self) -> TType:
        kind, text = self.next()
        if text == "(":
            t = self.type_expr()
            self.expect(")")
            return t
        if kind == "dollar":
            if text not in ("$o", "$tType", "$i"):
                raise ThfError(f"unknown type {text}")
            return TType(text)
        if kind == "lower":
            if text not in self.file.types:
                raise ThfError(f"undeclared type {text!r}")
            return TType(text)
        raise ThfSyntaxError(f"bad type token {text!r}")

    # formulas -----------------------------------------------------------
    def formula(self) -> TType:
        left = self.application()
        op = self.peek()[1]
        if op in ("&", "|"):
            self._need(left, O, op)
            while self.peek()[1] == op:
                self.next()
                self._need(self.application(), O, op)
            if self.peek()[1] in ("&", "|", "=>", "<=>", "=", "!="):
                raise ThfSyntaxError("mixed binary connectives need parentheses")
            return O
        if op in ("=>", "<=>"):
            self.next()
            self._need(left, O, op)
            self._need(self.application(), O, op)
            return O
        if op in ("=", "!="):
            self.next()
            right = self.application()
            if left != right:
                raise ThfError(f"equation between {left} and {right}")
            return O
        return left

    def _need(self, got: TType, want: TType, where: str):
        if got != want:
            raise ThfError(f"operand of {where!r} has type {got}, expected {want}")

    def application(self) -> TType:
        t = self.unitary()
        while self.peek()[1] == "@":
            self.next()
            a = self.unitary()
            if t.name is not None:
                raise ThfError(f"applying a non-function of type {t}")
            if t.arg != a:
                raise ThfError(f"argument of type {a} where {t.arg} expected")
            t = t.res
        return t

    def unitary(self) -> TType:
        kind, text = self.peek()
        if text == "(":
            self.next()
            t = self.formula()
            self.expect(")")
            return t
        if text == "~":
            self.next()
            self._need(self.unitary(), O, "~")
            return O
        if text in ("![", "?[", "^["):
            self.next()
            bound = self.var_list()
            self.expect(":")
            self.vars.extend(bound)
            body = self.unitary()
            del self.vars[len(self.vars) - len(bound):]
            if text == "^[":
                for _, vt in reversed(bound):
                    body = TType(None, vt, body)
                return body
            self._need(body, O, text[0])
            return O
        self.next()
        if kind == "dollar":
            if text in ("$true", "$false"):
                return O
            raise ThfError(f"unknown constant {text}")
        if kind == "upper":
            for name, vt in reversed(self.vars):
                if name == text:
                    return vt
            raise ThfError(f"unbound variable {text}")
        if kind == "lower":
            if text not in self.file.constants:
                raise ThfError(f"undeclared constant {text!r}")
            return self.file.constants[text]
        raise ThfSyntaxError(f"unexpected token {text!r}")

    def var_list(self) -> list[tuple[str, TType]]:
        out = []
        while True:
            kind, name = self.next()
            if kind != "upper":
                raise ThfSyntaxError(f"bad variable {name!r}")
            self.expect(":")
            out.append((name, self.type_expr()))
            t = self.next()[1]
            if t == "]":
                return out
            if t != ",":
                raise ThfSyntaxError(f"expected ',' or ']', got {t!r}")


def read_thf(text: str) -> ThfFile:
    """Parse and type-check a THF problem; raises ThfError on any problem."""
    return _ThfReader(text).read()
