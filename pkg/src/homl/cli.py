"""Command-line interface: ``homl COMMAND ...``.

Exit status: 0 success or expected verdicts, 1 verdict mismatch or a
countermodel where validity was asked, 2 bound exceeded or time limit,
3 parse, type or usage errors.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from importlib import resources
from pathlib import Path

from . import corpus, filters, modelfind, thf_export
from .semantics import BoundExceeded, Bounds, KripkeModel, load_model, truth_set, world_label
from .syntax import HomlError, Theory, Valid, as_judgment, parse_formula, parse_theory, to_text

EXIT_OK, EXIT_FAIL, EXIT_BOUND, EXIT_USAGE = 0, 1, 2, 3
FRAMES = {"k": "none", "t": "reflexive", "kb": "symmetric"}
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_']*")


class UsageError(HomlError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def load_theory(uri: str) -> Theory:
    """``builtin:NAME`` or a path to a theory file."""
    if uri.startswith("builtin:"):
        name = uri[len("builtin:"):]
        if name not in corpus.VariantId.__members__:
            known = ", ".join(corpus.VariantId.__members__)
            raise UsageError(f"unknown builtin theory {name!r} (known: {known})")
        return corpus.builtin_theory(name)
    path = Path(uri)
    if not path.is_file():
        raise UsageError(f"no such theory file: {uri}")
    return parse_theory(path.read_text(encoding="utf-8"), corpus.LIBRARIES)


def resolve_model(path: str) -> KripkeModel:
    """A model file path; bare names also resolve against the packaged models."""
    p = Path(path)
    if p.is_file():
        return load_model(p)
    data = resources.files("homl").joinpath("data", p.name)
    if data.is_file():
        return KripkeModel.from_dict(json.loads(data.read_text(encoding="utf-8")))
    raise UsageError(f"no such model file: {path}")


def resolve_formula(theory: Theory, text: str):
    """(name, formula) for an axiom/claim name or a formula in the theory's language."""
    if _IDENT.fullmatch(text) and text not in theory.definitions and text not in theory.constants:
        try:
            return text, theory.named_formula(text)
        except KeyError:
            raise UsageError(f"{theory.name} has no axiom or claim named {text!r}") from None
    return text, parse_formula(text, theory)


def _bounds_list(args, claim=None) -> list[tuple[int, int]]:
    if args.worlds is not None or args.entities is not None:
        return [(args.worlds or 1, args.entities or 1)]
    if claim is not None:
        return list(claim.bounds)
    return [(2, 1), (1, 2)]


def _frames(args, theory: Theory, claim=None) -> list[str]:
    if args.frames:
        out = [f.strip() for f in args.frames.split(",") if f.strip()]
        bad = [f for f in out if f not in FRAMES]
        if bad:
            raise UsageError(f"unknown frame(s) {bad}; use k, t or kb")
        return out
    return [(claim.frame if claim and claim.frame else theory.frame)]


def _config(args, bounds: tuple[int, int], frame: str) -> modelfind.SearchConfig:
    jobs = args.jobs if not args.deterministic else 1
    return modelfind.SearchConfig(
        Bounds(*bounds), FRAMES[frame],
        deterministic=args.deterministic or jobs <= 1,
        pruning=not args.exhaustive,
        candidate_limit=args.limit, time_limit=args.timeout, jobs=jobs)


def _stats(args, stats: modelfind.SearchStats) -> dict:
    rec = stats.record()
    if args.deterministic:
        rec.pop("elapsed")
    return rec


def _emit(args, record: dict, text: str) -> None:
    if args.format == "records":
        print(json.dumps(record, sort_keys=True))
    else:
        print(text)


def _find_claim(theory: Theory, name: str):
    for c in theory.claims:
        if c.name == name:
            return c
    return None


# ---------------------------------------------------------------------------
# Commands


def cmd_check(args) -> int:
    theory = load_theory(args.theory)
    name, conj = resolve_formula(theory, args.conjecture)
    claim = _find_claim(theory, name)
    premises = args.premises.split(",") if args.premises else None
    if premises is None and claim is not None and claim.is_edge:
        premises = list(claim.premises)
    status = EXIT_OK
    for frame in _frames(args, theory, claim):
        for b in _bounds_list(args, claim):
            cfg = _config(args, b, frame)
            v = modelfind.check_bounded_validity(theory, conj, cfg, premises)
            rec = {"command": "check", "theory": theory.name, "conjecture": name,
                   "frame": frame, "bounds": list(b), "verdict": v.status.value,
                   "stats": _stats(args, v.stats)}
            text = f"{theory.name} {name} frame={frame}: {v}"
            if v.model is not None:
                rec["model"] = v.model.to_dict()
                text += "\n" + _indent(v.model.describe())
            if args.model and v.model is not None:
                Path(args.model).write_text(v.model.dumps())
            _emit(args, rec, text)
            if v.status is modelfind.Status.COUNTERMODEL:
                status = max(status, EXIT_FAIL)
            elif v.status is not modelfind.Status.VALID_AT_BOUNDS:
                status = EXIT_BOUND
    return status


def cmd_find(args) -> int:
    theory = load_theory(args.theory)
    extra: list = []
    for text in args.refute or ():
        extra.append(modelfind.Refuted(theory.expand(as_judgment(resolve_formula(theory, text)[1]))))
    for text in args.assume or ():
        extra.append(theory.expand(as_judgment(resolve_formula(theory, text)[1])))
    axioms = args.axioms.split(",") if args.axioms is not None else None
    if axioms == [""]:
        axioms = []
    status = EXIT_FAIL
    for frame in _frames(args, theory):
        for b in _bounds_list(args):
            cfg = _config(args, b, frame)
            res = modelfind.find_theory_model(theory, cfg, extra, axioms)
            rec = {"command": "find", "theory": theory.name, "frame": frame, "bounds": list(b),
                   "verdict": res.verdict.value, "stats": _stats(args, res.stats)}
            text = f"{theory.name} frame={frame} {Bounds(*b)}: {res.verdict.value}"
            if res.message:
                text += f" ({res.message})"
            if res.found:
                rec["model"] = res.model.to_dict()
                text += "\n" + _indent(res.model.describe())
                if args.model:
                    Path(args.model).write_text(res.model.dumps())
            _emit(args, rec, text)
            if res.found:
                return EXIT_OK
            if res.verdict is not modelfind.Verdict.EXHAUSTED:
                status = EXIT_BOUND
    return status


def cmd_suite(args) -> int:
    bounds = _bounds_list(args) if (args.worlds or args.entities) else None
    options = {"pruning": not args.exhaustive, "candidate_limit": args.limit,
               "time_limit": args.timeout}
    report = corpus.run_suite(bounds, args.variant, args.claim, **options)
    if args.format == "records":
        for rec in report.records():
            if args.deterministic:
                rec.pop("elapsed")
            print(json.dumps(rec, sort_keys=True))
    else:
        for c in report.claims:
            line = c.line()
            if args.deterministic:
                line = re.sub(r" \(\d+\.\d+s\)", "", line)
            print(line)
        bad = sum(not c.match for c in report.claims)
        print(f"{len(report.claims)} claims, {bad} mismatches; "
              "valid verdicts are bounded checks, not proofs")
    if report.ok:
        return EXIT_OK
    return EXIT_BOUND if report.inconclusive else EXIT_FAIL


def cmd_verify_model(args) -> int:
    model = resolve_model(args.model)
    theory = load_theory(args.theory)
    if args.formula:
        named = dict(resolve_formula(theory, t) for t in args.formula)
    else:
        named = dict(theory.axioms)
        named.update({c.name: c.formula for c in theory.claims if c.formula is not None})
    checks = modelfind.verify_model(model, named, theory)
    if args.format == "records":
        for name, chk in checks.items():
            print(json.dumps({"formula": name, "global": chk.globally,
                              "worlds": {world_label(w): v for w, v in enumerate(chk.worlds)}},
                             sort_keys=True))
    else:
        for name, chk in checks.items():
            cells = " ".join(f"{world_label(w)}={'T' if v else 'F'}" for w, v in enumerate(chk.worlds))
            print(f"{name:<14} global={'T' if chk.globally else 'F'}  {cells}")
    return EXIT_OK


def cmd_count(args) -> int:
    model = resolve_model(args.model)
    kw = {"jobs": args.jobs} if args.jobs else {}
    if args.limit:
        kw["limit"] = args.limit
    res = filters.count_partial_ultrafilters(model, **kw)
    if args.format == "records":
        print(json.dumps(res.record(model), sort_keys=True))
    else:
        print(res.text())
    return EXIT_OK


def cmd_export(args) -> int:
    if args.theory == "all":
        files = thf_export.export_corpus(keep_definitions=args.keep_definitions)
    else:
        theory = load_theory(args.theory)
        if args.claim:
            claim = _find_claim(theory, args.claim)
            if claim is None:
                raise UsageError(f"{theory.name} has no claim named {args.claim!r}")
            name, text = thf_export.export_claim(theory, claim, args.keep_definitions)
            files = {name: text}
        elif args.conjecture:
            cname, conj = resolve_formula(theory, args.conjecture)
            opts = thf_export.ThfOptions(keep_definitions=args.keep_definitions,
                                         name=cname if _IDENT.fullmatch(cname) else "conjecture")
            files = {f"{theory.name}__{thf_export.safe_name(opts.name)}.p":
                     thf_export.export_thf(theory, conj, opts)}
        else:
            files = thf_export.export_theory(theory, keep_definitions=args.keep_definitions)
    if args.out:
        thf_export.write_files(files, args.out)
        for name in sorted(files):
            print(str(Path(args.out) / name))
    else:
        for name in sorted(files):
            sys.stdout.write(files[name])
    return EXIT_OK


def cmd_print(args) -> int:
    theory = load_theory(args.theory)
    if args.formula:
        items = [resolve_formula(theory, t) for t in args.formula]
    else:
        items = list(theory.axioms.items())
    for name, f in items:
        shown = theory.expand(f) if args.expand else f
        print(f"{name}: {to_text(shown)}")
    return EXIT_OK


def _indent(text: str) -> str:
    return "\n".join("  " + line for line in text.splitlines())


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="homl", description="Finite-model workbench for higher-order modal logic.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def search_flags(sp):
        sp.add_argument("--worlds", type=int)
        sp.add_argument("--entities", type=int)
        sp.add_argument("--frames", help="comma-separated frame classes: k, t, kb")
        sp.add_argument("--exhaustive", action="store_true", help="disable pruning")
        sp.add_argument("--deterministic", action="store_true",
                        help="single worker, canonical order, no timings in output")
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("--limit", type=int, help="candidate limit")
        sp.add_argument("--timeout", type=float, help="time limit in seconds")
        sp.add_argument("--format", choices=("text", "records"), default="text")

    sp = sub.add_parser("check", help="bounded validity of a conjecture")
    sp.add_argument("theory")
    sp.add_argument("--conjecture", required=True, help="axiom/claim name or formula")
    sp.add_argument("--premises", help="comma-separated premises instead of all axioms")
    sp.add_argument("--model", help="write a countermodel here")
    search_flags(sp)
    sp.set_defaults(fn=cmd_check)

    sp = sub.add_parser("find", help="search for a model of the axioms")
    sp.add_argument("theory")
    sp.add_argument("--refute", action="append", help="formula that must fail somewhere")
    sp.add_argument("--assume", action="append", help="extra formula that must be valid")
    sp.add_argument("--axioms", help="comma-separated axioms to use (default all)")
    sp.add_argument("--model", help="write the model here")
    search_flags(sp)
    sp.set_defaults(fn=cmd_find)

    sp = sub.add_parser("suite", help="run every built-in claim")
    sp.add_argument("--variant", help="regex on variant names")
    sp.add_argument("--claim", help="regex on claim names")
    search_flags(sp)
    sp.set_defaults(fn=cmd_suite)

    sp = sub.add_parser("verify-model", help="evaluate formulas in a model file")
    sp.add_argument("theory")
    sp.add_argument("--model", required=True)
    sp.add_argument("--formula", action="append")
    sp.add_argument("--format", choices=("text", "records"), default="text")
    sp.set_defaults(fn=cmd_verify_model)

    sp = sub.add_parser("count-ultrafilters", help="partial ultrafilter census of a model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--jobs", type=int)
    sp.add_argument("--limit", type=int)
    sp.add_argument("--format", choices=("text", "records"), default="text")
    sp.set_defaults(fn=cmd_count)

    sp = sub.add_parser("export-thf", help="write THF problems")
    sp.add_argument("theory", help="theory URI, or 'all' for the whole corpus")
    sp.add_argument("--claim")
    sp.add_argument("--conjecture")
    sp.add_argument("--out", help="output directory (default stdout)")
    sp.add_argument("--keep-definitions", action="store_true")
    sp.set_defaults(fn=cmd_export)

    sp = sub.add_parser("print", help="pretty-print axioms or formulas")
    sp.add_argument("theory")
    sp.add_argument("--formula", action="append")
    sp.add_argument("--expand", action="store_true", help="unfold all definitions")
    sp.set_defaults(fn=cmd_print)
    return p


def run_cli(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except BoundExceeded as exc:
        print(f"homl: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except HomlError as exc:
        print(f"homl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
