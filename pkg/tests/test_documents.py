from fractions import Fraction

import pytest

from conftest import FIXTURES
from ergoforge.documents import (
    KINDS,
    Document,
    DocumentError,
    action_from,
    action_payload,
    emit,
    fmt_rational,
    labeling_from,
    load,
    parse,
    rational,
    window_measure_from,
    window_measure_payload,
)
from ergoforge.measures import FiniteAction

FIXTURE_FILES = sorted(FIXTURES.glob("*.txt"))


@pytest.mark.parametrize("path", FIXTURE_FILES, ids=lambda p: p.name)
def test_fixture_round_trip(path):
    text = path.read_text(encoding="utf-8")
    doc = parse(text)
    assert doc.kind in KINDS
    assert emit(doc) == text


def test_third_round_trip(F1):
    a = FiniteAction(F1, [Fraction(1, 3)] * 3, [(1, 2, 0)])
    text = emit(Document("action", 1, action_payload(a)))
    assert '"1/3"' in text
    b = action_from(parse(text).payload)
    assert b.weights == a.weights and b.perms == a.perms
    assert emit(Document("action", 1, action_payload(b))) == text


def test_measure_round_trip(F2):
    doc = load(FIXTURES / "measure_half.txt", "window-measure")
    omega = window_measure_from(doc.payload)
    again = Document("window-measure", 1, window_measure_payload(F2, omega))
    assert emit(again) == emit(doc)


def test_rational_parsing():
    assert rational("3/6", "w") == Fraction(1, 2)
    assert rational(2, "w") == 2
    assert fmt_rational(Fraction(4, 2)) == "2"
    assert fmt_rational(Fraction(-1, 3)) == "-1/3"


def test_zero_denominator_names_field():
    with pytest.raises(DocumentError) as exc:
        rational("1/0", "weights[2]")
    assert exc.value.field == "weights[2]"
    assert "weights[2]" in str(exc.value)


@pytest.mark.parametrize("bad", [1.5, True, None, "x/2"])
def test_rational_rejects(bad):
    with pytest.raises(DocumentError):
        rational(bad, "w")


def test_zero_denominator_in_action_document():
    text = (FIXTURES / "action_rot4.txt").read_text().replace('"1/4"', '"1/0"', 1)
    with pytest.raises(DocumentError) as exc:
        action_from(parse(text).payload)
    assert exc.value.field is not None


def test_unknown_kind_rejected():
    with pytest.raises(DocumentError) as exc:
        parse("kind: spaceship\nversion: 1\npayload:\n{}\n")
    assert exc.value.line == 1


def test_bad_version_and_header():
    with pytest.raises(DocumentError) as exc:
        parse("kind: group\nversion: 2\npayload:\n{}\n")
    assert exc.value.line == 2
    with pytest.raises(DocumentError) as exc:
        parse("kind: group\npayload:\n{}\n")
    assert exc.value.line == 2


def test_bad_json_reports_line():
    with pytest.raises(DocumentError) as exc:
        parse('kind: labeling\nversion: 1\npayload:\n{\n  "values": [0,\n}\n')
    assert exc.value.line is not None and exc.value.line > 3


def test_payload_must_be_object():
    with pytest.raises(DocumentError):
        parse("kind: labeling\nversion: 1\npayload:\n[1, 2]\n")


def test_load_checks_kind():
    with pytest.raises(DocumentError):
        load(FIXTURES / "labeling_rot4.txt", "action")
    assert labeling_from(load(FIXTURES / "labeling_rot4.txt", "labeling").payload).values == (0, 0, 1, 1)
