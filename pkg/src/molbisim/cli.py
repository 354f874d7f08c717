"""Command-line front end.

Commands: ``validate``, ``conditions``, ``mc``, ``bisim``, ``translate`` and
``preserve``.  A logic comes either from a description file (``--logic``)
or from a built-in preset (``--preset``).  Exit status is 0 on success, 1 on
domain errors (bad logic file, bad model, ill-typed formula) and 2 on usage
errors.
"""

from __future__ import annotations

import argparse
import sys

from .bisim import BACKWARD, FORWARD, SIDE_NAMES, bisimilar, maximal_bisimulation, preserves, render_clauses, z_key
from .export import ExportError, export
from .fol import FOLError, st_translate
from .generators import random_model
from .presets import PRESET_NAMES, preset, render_swapped_root
from .semantics import ModelError, interpret, load_model, require_relations
from .skeletons import (
    SkeletonError,
    format_bool,
    is_complete_for_conj_disj,
    uniformity_table,
)
from .specfile import SpecError, load_spec
from .syntax import FormulaError, parse, pretty

DOMAIN_ERRORS = (SpecError, SkeletonError, ModelError, FormulaError, FOLError, ExportError)


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--logic", metavar="FILE", help="logic description file")
    src.add_argument("--preset", choices=PRESET_NAMES, help="built-in logic")
    common.add_argument("--letters", default="p", help="comma separated letters for --preset (default p)")
    common.add_argument("--model", metavar="FILE", help="model file")
    common.add_argument("--model2", metavar="FILE", help="second model file")
    common.add_argument("--point", help="comma separated point in --model")
    common.add_argument("--point2", help="comma separated point in --model2")
    common.add_argument("--formula", help="formula text")
    common.add_argument("--depth", type=int, default=2, help="formula depth for preserve (default 2)")
    common.add_argument("--format", choices=("tptp", "smtlib"), default="tptp")
    common.add_argument("--porcelain", action="store_true", help="line-oriented machine output")
    common.add_argument("--seed", type=int, default=0,
                        help="seed for random models used when a model file is omitted")

    p = argparse.ArgumentParser(prog="molbisim", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check skeletons, uniformity and completeness")
    sub.add_parser("conditions", parents=[common], help="print the derived bisimulation clauses")
    sub.add_parser("mc", parents=[common], help="compute the extension of a formula in a model")
    sub.add_parser("bisim", parents=[common], help="maximal bisimulation between two models")
    sub.add_parser("translate", parents=[common], help="standard translation exported as TPTP or SMT-LIB")
    sub.add_parser("preserve", parents=[common], help="check formula preservation along the maximal bisimulation")
    return p


# --------------------------------------------------------------------------
# helpers

def _letters(args) -> tuple[str, ...]:
    return tuple(s.strip() for s in args.letters.split(",") if s.strip())


def load_logic(args):
    """``(ConnectiveSet, Preset or None)`` selected by ``--logic``/``--preset``."""
    if args.logic:
        try:
            return load_spec(args.logic), None
        except OSError as e:
            raise UsageError(f"cannot read {args.logic}: {e.strerror}")
    if args.preset:
        P = preset(args.preset, _letters(args))
        return P.C, P
    raise UsageError("one of --logic or --preset is required")


def _model(args, C, P, which: int):
    path = args.model if which == 1 else args.model2
    if path:
        try:
            M = load_model(path)
        except OSError as e:
            raise UsageError(f"cannot read {path}: {e.strerror}")
    elif P is not None:
        name = "M" if which == 1 else "N"
        M = random_model(P.name, args.seed * 2 + which - 1, P.letters, name=name)
    else:
        raise UsageError("--model is required" if which == 1 else "--model2 is required")
    require_relations(C, M)
    return M


def _point(text, M):
    if text:
        return tuple(s.strip() for s in text.split(","))
    return M.point


def _directed_pairs(fam, k=1):
    """``(side, left names, right names)`` for the type-``k`` pairs, sorted."""
    out = []
    for p in fam.pairs(z_key(k)):
        src, dst = fam.models[p.side], fam.models[1 - p.side]
        out.append((p.side, src.name_of(p.left), dst.name_of(p.right)))
    return sorted(out)


def _fmt_tuple(t) -> str:
    return t[0] if len(t) == 1 else "(" + ",".join(t) + ")"


def _fmt_set(ts) -> str:
    return "{" + ", ".join(_fmt_tuple(t) for t in sorted(ts)) + "}"


def _bool(b: bool) -> str:
    return "true" if b else "false"


# --------------------------------------------------------------------------
# commands

def cmd_validate(args, out) -> int:
    C, _ = load_logic(args)
    problems = C.problems()
    complete, missing = is_complete_for_conj_disj(C)
    rows = uniformity_table(C)
    if args.porcelain:
        out.write(f"valid\t{_bool(not problems)}\n")
        for p in problems:
            out.write(f"problem\t{p}\n")
        out.write(f"complete\t{_bool(complete)}\n")
        for kind, k in missing:
            out.write(f"missing\t{kind}\t{k}\n")
        for nm, ok, why in rows:
            out.write(f"uniform\t{nm}\t{_bool(ok)}\n")
    else:
        out.write(f"logic: {C.name}\n")
        out.write(f"skeletons: {'valid' if not problems else 'invalid'}\n")
        for p in problems:
            out.write(f"  {p}\n")
        out.write(f"complete for conjunction/disjunction: {_bool(complete)}")
        if missing:
            out.write(" (missing " + ", ".join(format_bool(kind, k) for kind, k in missing) + ")")
        out.write("\n")
        out.write("uniformity:\n")
        for nm, ok, why in rows:
            out.write(f"  {nm}: {_bool(ok)}" + (f" ({why})" if why and not ok else "") + "\n")
    return 0 if not problems else 1


def cmd_conditions(args, out) -> int:
    C, P = load_logic(args)
    if not C.letters and not C.order:
        raise SpecError("the logic declares no connectives")
    out.write(render_clauses(C))
    if P is not None and P.name in ("intuitionistic", "modal-intuitionistic"):
        out.write("\n# implication with the ternary relation unfolded\n")
        out.write(P.extras["unfolded_implication"])
    if P is not None and P.name == "modal-intuitionistic":
        out.write("\n# conditions for the connective whose negation is ndia\n")
        out.write(render_swapped_root(C, "ndia", "dia"))
    return 0


def cmd_mc(args, out) -> int:
    C, P = load_logic(args)
    if not args.formula:
        raise UsageError("--formula is required")
    M = _model(args, C, P, 1)
    phi = parse(args.formula, C)
    ext = interpret(phi, M, C)
    if args.porcelain:
        for t in sorted(ext):
            out.write(",".join(t) + "\n")
    else:
        out.write(_fmt_set(ext) + "\n")
    return 0


def cmd_bisim(args, out) -> int:
    C, P = load_logic(args)
    M1 = _model(args, C, P, 1)
    M2 = _model(args, C, P, 2)
    fam = maximal_bisimulation(C, M1, M2)
    w1, w2 = _point(args.point, M1), _point(args.point2, M2)
    if w1 is not None and w2 is not None:
        verdict = bisimilar(C, M1, w1, M2, w2, fam)
    else:
        # global bisimilarity: every world has a partner in both directions
        zf, zb = fam.Z(1, FORWARD), fam.Z(1, BACKWARD)
        verdict = bool(zf.any(axis=1).all() and zb.any(axis=1).all())
    pairs = _directed_pairs(fam)
    if args.porcelain:
        for side, a, b in pairs:
            out.write(f"pair\t{SIDE_NAMES[side]}\t{_fmt_tuple(a)}\t{_fmt_tuple(b)}\n")
        out.write(f"bisimilar\t{_bool(verdict)}\n")
    else:
        names = (M1.name, M2.name)
        for side in (FORWARD, BACKWARD):
            rel = [f"{_fmt_tuple(a)}~{_fmt_tuple(b)}" for s, a, b in pairs if s == side]
            out.write(f"Z {names[side]}->{names[1 - side]}: " + ("{" + ", ".join(rel) + "}") + "\n")
        out.write(f"bisimilar: {_bool(verdict)}\n")
    return 0


def cmd_translate(args, out) -> int:
    C, _ = load_logic(args)
    if not args.formula:
        raise UsageError("--formula is required")
    phi = parse(args.formula, C)
    xs = ("x",) if phi.type == 1 else tuple(f"x{chr(ord('a') + i)}" for i in range(phi.type))
    f = st_translate(phi, xs, C)
    out.write(export(f, args.format, xs, C.name))
    return 0


def cmd_preserve(args, out) -> int:
    C, P = load_logic(args)
    M1 = _model(args, C, P, 1)
    M2 = _model(args, C, P, 2)
    letters = P.letters if P is not None else None
    w1, w2 = _point(args.point, M1), _point(args.point2, M2)
    if w1 is not None and w2 is not None:
        checks = [(FORWARD, tuple(w1), tuple(w2))]
    else:
        fam = maximal_bisimulation(C, M1, M2)
        checks = _directed_pairs(fam)
    models = (M1, M2)
    failures = []
    for side, a, b in checks:
        r = preserves(C, models[side], a, models[1 - side], b, args.depth, letters)
        if not r:
            failures.append((side, a, b, r.formula))
    if args.porcelain:
        for side, a, b, phi in failures:
            out.write(f"counterexample\t{SIDE_NAMES[side]}\t{_fmt_tuple(a)}\t{_fmt_tuple(b)}\t{pretty(phi)}\n")
        out.write(f"checked\t{len(checks)}\n")
        out.write(f"preserved\t{_bool(not failures)}\n")
    else:
        for side, a, b, phi in failures:
            out.write(f"counterexample: {pretty(phi)} holds at {_fmt_tuple(a)} in {models[side].name} "
                      f"but not at {_fmt_tuple(b)} in {models[1 - side].name}\n")
        out.write(f"pairs checked: {len(checks)}\n")
        out.write(f"preserved: {_bool(not failures)}\n")
    return 0 if not failures else 1


COMMANDS = {
    "validate": cmd_validate,
    "conditions": cmd_conditions,
    "mc": cmd_mc,
    "bisim": cmd_bisim,
    "translate": cmd_translate,
    "preserve": cmd_preserve,
}


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except UsageError as e:
        err.write(f"molbisim: usage error: {e}\n")
        return 2
    except DOMAIN_ERRORS as e:
        err.write(f"molbisim: error: {e}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
