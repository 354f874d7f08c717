import pytest

from molbisim.presets import PRESET_NAMES, preset
from molbisim.specfile import SpecError, format_spec, load_spec, parse_spec

from conftest import golden_path


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_format_parse_roundtrip(name):
    C = preset(name).C
    again = parse_spec(format_spec(C))
    assert format_spec(again) == format_spec(C)
    assert again.order == C.order
    assert again.letters == C.letters


def test_load_spec_uses_logic_line():
    C = load_spec(golden_path("modal.logic"))
    assert C.name == "modal"
    assert C.group("dia") == C.group("box") == "r"


@pytest.mark.parametrize("text, line", [
    ("letter p : sign +, quant E, type 1\nconn d : perm (2,1), sign +, quant E, types (1;1;1), tonicity (+,+)\n", 2),
    ("letter p : sign *, quant E, type 1\n", 1),
    ("letter p : sign +, quant E, type 1\n\nfrobnicate x\n", 3),
    ("letter p : sign +, quant E, type 1\nmolecular m := nosuch(id1)\n", 2),
])
def test_errors_carry_line_numbers(text, line):
    with pytest.raises(SpecError) as info:
        parse_spec(text)
    assert info.value.line == line


def test_needs_a_letter():
    with pytest.raises(SpecError, match="letter"):
        parse_spec("conn d : perm (2,1), sign +, quant E, types (1;1), tonicity (+)\n")


def test_comments_and_blank_lines_ignored():
    C = parse_spec("# modal fragment\n\nletter p : sign +, quant E, type 1   # the letter\nbool 1\n")
    assert list(C.letters) == ["p"]
    assert ("and", 1) in C.booleans and ("or", 1) in C.booleans


def test_molecular_with_negated_vertex():
    C = preset("modal-intuitionistic").C
    root = C.moleculars["ndia"].root
    assert root.negated and root.conn == "c1"
