"""The ten acceptance criteria, one test each.

Every test prints a PASS/FAIL line (also collected in the terminal summary)
and must finish within SUITE_LIMIT seconds.
"""

import io
import time

import numpy as np
from molbisim.bisim import (
    BACKWARD,
    FORWARD,
    distinct_denotations,
    family_preserves,
    maximal_bisimulation,
    per_vertex_preserves,
    verify_family,
    z_key,
)
from molbisim.cli import main
from molbisim.export import parse_smtlib, parse_tptp, roundtrip_ok
from molbisim.fol import FOEvaluator, Translator, fol_eval, associated_structure, st_tables
from molbisim.generators import random_model, random_pair
from molbisim.presets import PRESET_NAMES, unfolded_condition, preset, step_condition
from molbisim.semantics import Evaluator, PointedModel, complement_check, group_by_size, satisfies
from molbisim.skeletons import ROOT, uniformity_table
from molbisim.syntax import Apply, Letter, enumerate_formulas, negate

from conftest import read_golden

SUITE_LIMIT = 60.0
TWO_LETTERS = ("p", "q")
CACHE: dict = {}


def zset(mat):
    return {(int(a), int(b)) for a, b in zip(*np.nonzero(mat))}


def families(name, count, letters):
    """Seeded model pairs with their maximal families, computed once per run."""
    key = (name, count, letters)
    if key not in CACHE:
        C = preset(name, letters).C
        pairs = [random_pair(name, s, letters) for s in range(count)]
        CACHE[key] = [(A, B, maximal_bisimulation(C, A, B)) for A, B in pairs]
    return CACHE[key]


def finish(report, number, ok, detail, start):
    elapsed = time.perf_counter() - start
    report(number, ok and elapsed < SUITE_LIMIT, detail, elapsed)
    assert ok, detail
    assert elapsed < SUITE_LIMIT, f"took {elapsed:.1f} s"


def test_criterion_01_modal_reference(acceptance_report):
    start = time.perf_counter()
    P = preset("modal", TWO_LETTERS)
    bad = [i for i, (A, B, fam) in enumerate(families("modal", 200, TWO_LETTERS))
           if zset(fam.Z(1, FORWARD)) != P.reference(A, B)]
    finish(acceptance_report, 1, not bad, f"200 Kripke pairs, mismatches: {len(bad)}", start)


def test_criterion_02_directed_reference(acceptance_report):
    start = time.perf_counter()
    P = preset("lambek", TWO_LETTERS)
    bad = [i for i, (A, B, fam) in enumerate(families("lambek", 200, TWO_LETTERS))
           if (zset(fam.Z(1, FORWARD)), zset(fam.Z(1, BACKWARD))) != P.reference(A, B)]
    finish(acceptance_report, 2, not bad, f"200 ternary pairs, mismatches: {len(bad)}", start)


def vertex_keys(C):
    for conn in C.order:
        vs = C.moleculars[conn].vertices() if conn in C.moleculars else [(ROOT, C.tree(conn))]
        for addr, node in vs:
            k = node.type if hasattr(node, "type") else node.skeleton.output_type
            yield conn, addr, (conn, addr), k


def test_criterion_03_preservation(acceptance_report):
    start = time.perf_counter()
    runs = [("modal", 200, TWO_LETTERS), ("lambek", 200, TWO_LETTERS), ("modal-intuitionistic", 100, ("p",))]
    failures, checked, vertex_checks = [], 0, 0
    for name, count, letters in runs:
        C = preset(name, letters).C
        for i, (A, B, fam) in enumerate(families(name, count, letters)):
            fs, (D1, D2) = distinct_denotations(C, [A, B], 3, letters)
            if not family_preserves(fam, D1, D2, fs):
                failures.append((name, i, "Z"))
            checked += len(fam.pairs())
            for conn, addr, key, k in vertex_keys(C):
                if key not in fam.relations:
                    key = z_key(k)
                pairs = [(p.side, p.left, p.right) for p in fam.pairs(key)]
                if not pairs:
                    continue
                language = (D1, D2) if k == 1 and key == z_key(1) and addr != ROOT else None
                vertex_checks += 1
                if not per_vertex_preserves(C, conn, addr, A, B, pairs, 3, letters, language):
                    failures.append((name, i, conn, addr))
    finish(acceptance_report, 3, not failures,
           f"{checked} directed pairs, {vertex_checks} vertex checks, counterexamples: {len(failures)}", start)


def test_criterion_04_complement(acceptance_report):
    start = time.perf_counter()
    bad, total = 0, 0
    for name in PRESET_NAMES:
        C = preset(name).C
        fs = [f for f in enumerate_formulas(C, 3, ("p",)) if isinstance(f, (Letter, Apply))]
        models = [random_model(name, s) for s in range(50)]
        for _, idx in group_by_size(models).items():
            ev = Evaluator(C, [models[i] for i in idx])
            for f in fs:
                total += len(idx)
                if not np.array_equal(ev.denote(negate(f)), ~ev.denote(f)):
                    bad += 1
        # the per-model entry point on the shallow part of the language
        bad += sum(not complement_check(f, models[0], C) for f in fs[:200])
    finish(acceptance_report, 4, bad == 0, f"{total} formula/model checks, failures: {bad}", start)


def st_corpus(name):
    """Depth-3 formulas of a preset with their standard translations (cached)."""
    key = ("st", name)
    if key not in CACHE:
        C = preset(name).C
        fs = list(enumerate_formulas(C, 3, ("p",)))
        tr = Translator(C)
        CACHE[key] = (C, fs, [tr(f, ("x",)) for f in fs])
    return CACHE[key]


def test_criterion_05_standard_translation(acceptance_report):
    start = time.perf_counter()
    bad, total = 0, 0
    for name in PRESET_NAMES:
        C, fs, sts = st_corpus(name)
        models = [random_model(name, s) for s in range(50)]
        for _, idx in group_by_size(models).items():
            group = [models[i] for i in idx]
            ev, fe = Evaluator(C, group), FOEvaluator.for_models(group, C)
            for f, st in zip(fs, sts):
                total += len(idx)
                if not np.array_equal(st_tables(C, group, st, ("x",), fe), ev.denote(f)):
                    bad += 1
        # the pointwise entry points on the shallow part of the language
        M = models[0]
        for f, st in list(zip(fs, sts))[:100]:
            for w in range(M.size):
                pm = PointedModel(M, (w,))
                bad += fol_eval(associated_structure(pm, ("x",), C), st) != satisfies(pm, f, C)
    finish(acceptance_report, 5, bad == 0, f"{total} formula/model tables, disagreements: {bad}", start)


def test_criterion_06_uniformity(acceptance_report):
    start = time.perf_counter()
    C = preset("modal-intuitionistic", with_primed_diamond=True).C
    table = {nm: ok for nm, ok, _ in uniformity_table(C)}
    got = (table.get("box"), table.get("ndia"), table.get("dia"))
    finish(acceptance_report, 6, got == (True, True, False),
           f"box uniform={got[0]}, ndia uniform={got[1]}, dia uniform={got[2]}", start)


def test_criterion_07_step_condition(acceptance_report):
    start = time.perf_counter()
    disagreements, held = 0, 0
    for A, B, fam in families("intuitionistic", 100, ("p",)):
        Z, Zb = zset(fam.Z(1, FORWARD)), zset(fam.Z(1, BACKWARD))
        for X, Y, z, zb in ((A, B, Z, Zb), (B, A, Zb, Z)):
            ds, st = unfolded_condition(X, Y, z, zb), step_condition(X, Y, z, zb)
            disagreements += ds != st
            held += ds
    finish(acceptance_report, 7, disagreements == 0,
           f"200 directed instances, disagreements: {disagreements}, both hold: {held}", start)


def test_criterion_08_condition_goldens(acceptance_report):
    start = time.perf_counter()
    mismatched = []
    for name in ("modal", "lambek", "intuitionistic", "modal-intuitionistic"):
        buf = io.StringIO()
        code = main(["conditions", "--preset", name], out=buf)
        if code != 0 or buf.getvalue() != read_golden(f"conditions_{name}.txt"):
            mismatched.append(name)
    finish(acceptance_report, 8, not mismatched, f"4 presets, mismatched: {mismatched or 'none'}", start)


def test_criterion_09_fixpoint(acceptance_report):
    start = time.perf_counter()
    problems = []
    verified = 0
    for name, count, letters in [("modal", 200, TWO_LETTERS), ("lambek", 200, TWO_LETTERS),
                                 ("modal-intuitionistic", 100, ("p",)), ("intuitionistic", 100, ("p",))]:
        C = preset(name, letters).C
        for i, (A, B, fam) in enumerate(families(name, count, letters)):
            verified += 1
            if verify_family(C, A, B, fam, limit=1):
                problems.append(("not a bisimulation", name, i))
    readded = 0
    cases = ["modal", "lambek", "intuitionistic", "modal-intuitionistic", "modal-atomic"]
    for case in range(50):
        name = cases[case % len(cases)]
        C = preset(name).C
        A, B = random_pair(name, 1000 + case)
        top = maximal_bisimulation(C, A, B)
        for key, mats in top.relations.items():
            for side in (FORWARD, BACKWARD):
                for a, b in np.argwhere(~mats[side]):
                    fam = top.copy()
                    fam.relations[key][side][a, b] = True
                    readded += 1
                    if not verify_family(C, A, B, fam, limit=1):
                        problems.append(("re-added pair survives", name, case, key, side, int(a), int(b)))
        other = maximal_bisimulation(C, A, B, order="reverse")
        if not top.same_as(other):
            problems.append(("scan orders differ", name, case))
    finish(acceptance_report, 9, not problems,
           f"{verified} families verified, {readded} re-added pairs, problems: {len(problems)}", start)


def test_criterion_10_export_roundtrip(acceptance_report):
    start = time.perf_counter()
    errors, total = 0, 0
    for name in PRESET_NAMES:
        _, _, sts = st_corpus(name)
        for st in sts:
            for fmt in ("tptp", "smtlib"):
                total += 1
                try:
                    errors += not roundtrip_ok(st, fmt, ("x",))
                except Exception:
                    errors += 1
    for golden, parse in (("st_dia_p.tptp", parse_tptp), ("st_dia_p.smt2", parse_smtlib)):
        total += 1
        try:
            parse(read_golden(golden))
        except Exception:
            errors += 1
    finish(acceptance_report, 10, errors == 0, f"{total} artifacts re-parsed, errors: {errors}", start)
