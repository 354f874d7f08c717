import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from molbisim.presets import preset
from molbisim.skeletons import (
    AtomicSkeleton,
    IdLeaf,
    MolecularConnective,
    Permutation,
    SkeletonError,
    Vertex,
    associated_atomics,
    boolean_negation,
    decomposition_tree,
    is_complete_for_conj_disj,
    is_uniform,
    validate_skeleton,
)
from molbisim.specfile import parse_spec

DIA = AtomicSkeleton(Permutation((2, 1)), "+", "E", (1, 1), ("+",))
CIRC = AtomicSkeleton(Permutation((1, 2, 3)), "+", "E", (1, 1, 1), ("+", "+"))


@st.composite
def permutations(draw, max_degree=6):
    n = draw(st.integers(1, max_degree))
    return Permutation(tuple(draw(st.permutations(range(1, n + 1)))))


@given(permutations())
def test_inverse_is_involution(p):
    assert p.inverse().inverse() == p


@given(permutations())
def test_compose_with_inverse_is_identity(p):
    ident = Permutation.identity(p.degree)
    assert p.compose(p.inverse()) == ident
    assert p.inverse().compose(p) == ident


def test_permutation_rejects_non_bijection():
    assert not Permutation((1, 1)).is_bijection()
    s = AtomicSkeleton(Permutation((1, 1)), "+", "E", (1, 1), ("+",))
    assert any("bijection" in p for p in validate_skeleton(s))


def test_validate_diamond_ok():
    assert validate_skeleton(DIA) == []


def test_validate_letter_ok():
    assert validate_skeleton(AtomicSkeleton.letter()) == []


def test_validate_degree_mismatch():
    s = AtomicSkeleton(Permutation((2, 1)), "+", "E", (1, 1, 1), ("+", "+"))
    problems = validate_skeleton(s)
    assert len(problems) == 1 and "degree 2" in problems[0] and "degree 3" in problems[0]


def test_validate_nonpositive_type():
    s = AtomicSkeleton(Permutation((2, 1)), "+", "E", (0, 1), ("+",))
    assert any("positive" in p for p in validate_skeleton(s))


def test_negation_of_diamond():
    neg = boolean_negation(DIA)
    assert neg == AtomicSkeleton(Permutation((2, 1)), "-", "A", (1, 1), ("-",))


def test_negation_of_fusion():
    neg = boolean_negation(CIRC)
    assert (neg.sign, neg.quant, neg.tonicity) == ("-", "A", ("-", "-"))
    assert neg.perm == CIRC.perm and neg.types == CIRC.types


@given(st.sampled_from(["+", "-"]), st.sampled_from(["A", "E"]),
       st.lists(st.sampled_from(["+", "-"]), min_size=0, max_size=3))
def test_negation_is_involution(sign, quant, ton):
    n = len(ton)
    s = AtomicSkeleton(Permutation.identity(n + 1), sign, quant, (1,) * (n + 1), tuple(ton))
    assert boolean_negation(boolean_negation(s)) == s


def test_relation_layout_follows_permutation():
    # block j sits at relation position perm(j)
    s = AtomicSkeleton(Permutation((2, 3, 1)), "-", "A", (1, 1, 1), ("-", "+"))
    assert s.relation_arity == 3
    assert [s.perm(j) for j in (1, 2, 3)] == [2, 3, 1]
    assert s.perm.inverse() == Permutation((3, 1, 2))


@pytest.fixture
def mi():
    return preset("modal-intuitionistic", with_primed_diamond=True).C


def test_decomposition_of_box(mi):
    assert decomposition_tree(mi.moleculars["box"]) == [("ε", "c1"), ("1", "c2"), ("1.1", "id1")]


def test_decomposition_of_primed_diamond(mi):
    tree = decomposition_tree(mi.moleculars["dia"])
    assert [a for a, _ in tree] == ["ε", "1", "1.1"]


def test_decomposition_of_lone_atomic():
    c = MolecularConnective("o", Vertex("o", CIRC, (IdLeaf(1), IdLeaf(1))))
    assert decomposition_tree(c) == [("ε", "o"), ("1", "id1"), ("2", "id1")]


def test_child_count_mismatch_rejected():
    with pytest.raises(SkeletonError):
        MolecularConnective("bad", Vertex("o", CIRC, (IdLeaf(1),)))


def test_uniformity_of_modal_intuitionistic_connectives(mi):
    assert is_uniform(mi.moleculars["box"]) == (True, None)
    assert is_uniform(mi.moleculars["ndia"]) == (True, None)
    ok, why = is_uniform(mi.moleculars["dia"])
    assert not ok and why.startswith("clause 2")


def test_negating_primed_diamond_gives_uniform(mi):
    assert is_uniform(mi.moleculars["dia"].negated())[0]
    assert not is_uniform(mi.moleculars["ndia"].negated())[0]


def test_binary_internal_vertex_without_letter_not_uniform():
    # c1(o(id1, id1)): the child has arity 2
    box1 = AtomicSkeleton(Permutation((2, 1)), "-", "A", (1, 1), ("+",))
    c = MolecularConnective("m", Vertex("c1", box1, (Vertex("o", CIRC, (IdLeaf(1), IdLeaf(1))),)))
    ok, why = is_uniform(c)
    assert not ok and why.startswith("clause 1")


def test_completeness_modal():
    assert is_complete_for_conj_disj(preset("modal").C) == (True, [])


def test_completeness_missing_disjunction():
    text = preset("modal").text.replace("bool 1", "bool 1 and")
    ok, missing = is_complete_for_conj_disj(parse_spec(text))
    assert not ok and missing == [("or", 1)]


def test_completeness_no_booleans():
    ok, missing = is_complete_for_conj_disj(preset("lambek").C)
    assert not ok and sorted(missing) == [("and", 1), ("or", 1)]


def test_associated_atomics(mi):
    names = set(associated_atomics(mi))
    assert {"c1", "c2", "c3", "-c1", "imp"} <= names


def test_associated_atomics_of_pure_atomic_set():
    C = preset("lambek").C
    assert set(associated_atomics(C)) == {"p", "o", "under", "over"}


def test_sharing_group_arity_checked():
    text = """letter p : sign +, quant E, type 1
conn a : perm (2,1), sign +, quant E, types (1;1), tonicity (+)
conn b : perm (1,2,3), sign +, quant E, types (1;1;1), tonicity (+,+)
share a b
"""
    from molbisim.specfile import SpecError
    with pytest.raises(SpecError):
        parse_spec(text)


@pytest.mark.parametrize("perm", list(itertools.permutations((1, 2, 3))))
def test_every_s3_permutation_validates(perm):
    s = AtomicSkeleton(Permutation(perm), "+", "E", (1, 1, 1), ("+", "-"))
    assert validate_skeleton(s) == []
