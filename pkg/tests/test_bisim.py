import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from molbisim.bisim import (
    BACKWARD,
    FORWARD,
    BisimFamily,
    batch_denotations,
    distinct_denotations,
    bisimilar,
    empty_family,
    family_preserves,
    generate_clauses,
    maximal_bisimulation,
    per_vertex_preserves,
    preserves,
    verify_family,
    z_key,
)
from molbisim.generators import random_model, random_pair
from molbisim.presets import preset
from molbisim.semantics import CModel
from molbisim.specfile import parse_spec
from molbisim.syntax import Letter, enumerate_formulas

MODAL = preset("modal").C
LAMBEK = preset("lambek").C
MI = preset("modal-intuitionistic").C


def kripke(worlds, r, p, name="M"):
    M = CModel(worlds, {}, name)
    M.add_relation("r", r, 2)
    M.add_relation("p", p, 1)
    return M


def pairs_of(fam, side, k=1):
    return {(a, b) for a, b in zip(*np.nonzero(fam.relations[z_key(k)][side]))}


def test_clause_count_rule():
    C = parse_spec("""letter p : sign +, quant E, type 1
letter q : sign +, quant E, type 1
conn f : perm (1,2,3), sign +, quant E, types (1;1;1), tonicity (+,+)
""")
    assert len(generate_clauses(C).clauses) == 1 + 2


def test_clause_count_molecular():
    # one clause per vertex that is not an id leaf
    assert len(generate_clauses(MI).clauses) == 3 + 1 + 2 + 2


def test_self_bisimulation_contains_identity():
    M = random_model("modal", 5)
    fam = maximal_bisimulation(MODAL, M, M)
    for side in (FORWARD, BACKWARD):
        assert all(fam.Z(1, side)[i, i] for i in range(M.size))


def test_reflexive_point_vs_two_cycle():
    A = kripke(["a"], [("a", "a")], ["a"], "A")
    B = kripke(["b", "c"], [("b", "c"), ("c", "b")], ["b", "c"], "B")
    fam = maximal_bisimulation(MODAL, A, B)
    assert fam.Z(1, FORWARD).all() and fam.Z(1, BACKWARD).all()
    assert bisimilar(MODAL, A, "a", B, "c")


def test_successor_vs_isolated():
    A = kripke(["w", "v"], [("w", "v")], ["w", "v"], "A")
    B = kripke(["u"], [], ["u"], "B")
    fam = maximal_bisimulation(MODAL, A, B)
    assert not fam.Z(1, FORWARD)[0, 0]
    assert fam.Z(1, FORWARD)[1, 0]
    assert not bisimilar(MODAL, A, "w", B, "u")


def test_letter_mismatch_not_bisimilar():
    A = kripke(["a"], [], ["a"], "A")
    B = kripke(["b"], [], [], "B")
    assert not bisimilar(MODAL, A, "a", B, "b")
    r = preserves(MODAL, A, "a", B, "b", 1)
    assert not r and r.formula == Letter("p")


def test_lambek_singletons():
    A = CModel(["a"], {"r": [("a", "a", "a")], "p": [("a",)]}, "A")
    B = CModel(["b"], {"r": [("b", "b", "b")], "p": [("b",)]}, "B")
    fam = maximal_bisimulation(LAMBEK, A, B)
    assert pairs_of(fam, FORWARD) == {(0, 0)} and pairs_of(fam, BACKWARD) == {(0, 0)}


def test_lambek_isomorphic_copy():
    A = CModel(["v", "u", "w"], {"r": [("v", "u", "w")], "p": [("v",)]}, "A")
    B = CModel(["w2", "v2", "u2"], {"r": [("v2", "u2", "w2")], "p": [("v2",)]}, "B")
    fam = maximal_bisimulation(LAMBEK, A, B)
    iso = {(0, 1), (1, 2), (2, 0)}
    assert iso <= pairs_of(fam, FORWARD)
    assert {(b, a) for a, b in iso} <= pairs_of(fam, BACKWARD)


def test_lambek_forward_without_backward():
    # a has no p and no r-tuples; b1 has p and does not occur in r
    A = CModel(["a"], {}, "A")
    A.add_relation("r", [], 3)
    A.add_relation("p", [], 1)
    B = CModel(["b0", "b1"], {"r": [("b0", "b0", "b0")], "p": [("b1",)]}, "B")
    fam = maximal_bisimulation(LAMBEK, A, B)
    assert fam.Z(1, FORWARD)[0, 1]
    assert not fam.Z(1, BACKWARD)[1, 0]


def test_empty_family_verifies():
    A, B = random_pair("modal-intuitionistic", 4)
    assert verify_family(MI, A, B, empty_family(MI, A, B)) == []


@pytest.mark.parametrize("name", ["modal", "lambek", "intuitionistic", "modal-intuitionistic", "modal-atomic"])
def test_maximal_family_verifies(name):
    C = preset(name).C
    for seed in range(15):
        A, B = random_pair(name, seed)
        fam = maximal_bisimulation(C, A, B)
        assert verify_family(C, A, B, fam) == []


@pytest.mark.parametrize("order", ["forward", "reverse"])
def test_schedules_reach_same_fixpoint(order):
    for seed in range(15):
        A, B = random_pair("modal-intuitionistic", seed)
        assert maximal_bisimulation(MI, A, B).same_as(maximal_bisimulation(MI, A, B, order=order))


def test_refinement_trace_shrinks():
    A, B = random_pair("modal", 7)
    fam = maximal_bisimulation(MODAL, A, B, record=True)
    assert all(removed > 0 for _, _, _, removed in fam.trace)
    assert fam.iterations <= 2 * (A.size * B.size) + 1


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.2, 0.9))
def test_verified_families_are_below_maximal(seed, keep):
    name = ["modal", "lambek", "modal-intuitionistic"][seed % 3]
    C = preset(name).C
    A, B = random_pair(name, seed)
    if max(A.size, B.size) > 4:
        A, B = random_model(name, seed, max_worlds=4, name="A"), random_model(name, seed + 1, max_worlds=4, name="B")
    top = maximal_bisimulation(C, A, B)
    rng = np.random.default_rng(seed)
    start = top.copy()
    for key, mats in start.relations.items():
        for i, m in enumerate(mats):
            mats[i] = rng.random(m.shape) < keep
    sub = maximal_bisimulation(C, A, B, initial=start)
    assert verify_family(C, A, B, sub) == []
    for key in sub.relations:
        for side in (FORWARD, BACKWARD):
            assert not (sub.relations[key][side] & ~top.relations[key][side]).any()


def test_readding_deleted_pair_violates():
    # a maximal family is a greatest fixpoint: any deleted pair put back
    # must fail its own clauses
    checked = 0
    for seed in range(30):
        A, B = random_pair("modal", seed)
        top = maximal_bisimulation(MODAL, A, B)
        for a, b in np.argwhere(~top.Z(1, FORWARD))[:3]:
            fam = top.copy()
            fam.relations[z_key(1)][FORWARD][a, b] = True
            assert verify_family(MODAL, A, B, fam, only=[(z_key(1), FORWARD, (int(a),), (int(b),))])
            checked += 1
    assert checked > 10


def test_containment_all_is_smaller_and_contained():
    for seed in range(10):
        A, B = random_pair("modal-intuitionistic", seed)
        roots = maximal_bisimulation(MI, A, B)
        full = maximal_bisimulation(MI, A, B, containment="all")
        assert verify_family(MI, A, B, full, containment="all") == []
        for side in (FORWARD, BACKWARD):
            assert not (full.Z(1, side) & ~roots.Z(1, side)).any()
            for key in full.per_vertex():
                assert not (full.Z(1, side) & ~full.relations[key][side]).any()


def test_bisimilar_type_mismatch():
    A = random_model("modal", 1)
    with pytest.raises(ValueError):
        bisimilar(MODAL, A, ("w0", "w0"), A, "w0")


def test_preserves_self():
    M = random_model("lambek", 3)
    assert preserves(LAMBEK, M, "w0", M, "w0", 2)


def test_family_preserves_matches_pointwise():
    A, B = random_pair("modal", 11)
    fam = maximal_bisimulation(MODAL, A, B)
    fs = list(enumerate_formulas(MODAL, 2))
    D = batch_denotations(MODAL, [A, B], fs)
    assert family_preserves(fam, D[0], D[1], fs)
    for p in fam.pairs():
        models = (A, B)
        assert preserves(MODAL, models[p.side], p.left, models[1 - p.side], p.right, 2)


def test_per_vertex_on_hand_built_models():
    # a -r-> b -rd-> c, p at c; mirrored in a second copy with an extra dead end
    A = CModel(["a", "b", "c"], {}, "A")
    A.add_relation("r", [(i, i) for i in range(3)] + [(0, 1)], 2)
    A.add_relation("rd", [(1, 2)], 2)
    A.add_relation("p", [(2,)], 1)
    B = CModel(["a", "b", "c"], {}, "B")
    B.add_relation("r", [(i, i) for i in range(3)] + [(0, 1)], 2)
    B.add_relation("rd", [(1, 2)], 2)
    B.add_relation("p", [(2,)], 1)
    from molbisim.semantics import derive_intuitionistic
    A, B = derive_intuitionistic(A), derive_intuitionistic(B)
    fam = maximal_bisimulation(MI, A, B)
    pairs = [(p.side, p.left, p.right) for p in fam.pairs(("box", "1"))]
    assert pairs
    assert per_vertex_preserves(MI, "box", "1", A, B, pairs, 2)


def test_family_is_a_bisim_family():
    A, B = random_pair("lambek", 2)
    fam = maximal_bisimulation(LAMBEK, A, B)
    assert isinstance(fam, BisimFamily)
    assert fam.size() == sum(int(m.sum()) for v in fam.relations.values() for m in v)


@pytest.mark.parametrize("name", ["modal", "lambek", "intuitionistic", "modal-intuitionistic", "modal-atomic"])
def test_distinct_denotations_cover_full_enumeration(name):
    C = preset(name).C
    pairs = [random_pair(name, s) for s in range(12)]
    models = [m for ab in pairs for m in ab]
    fs = [f for f in enumerate_formulas(C, 2) if f.type == 1]
    D = batch_denotations(C, models, fs)
    reps, S = distinct_denotations(C, models, 2)

    def joint(stacks, j):
        return tuple(np.concatenate([st[j] for st in stacks]))

    full = {joint(D, j) for j in range(len(fs))}
    reduced = [joint(S, j) for j in range(len(reps))]
    assert set(reduced) == full
    assert len(reduced) == len(set(reduced))
    # the representatives are genuine formulas with those denotations
    check = batch_denotations(C, models, reps)
    assert all(np.array_equal(check[i], S[i]) for i in range(len(models)))
