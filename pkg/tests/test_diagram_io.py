import json
from fractions import Fraction as F
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfaudit.diagram_io import DiagramSyntaxError, dump_diagram, parse_diagram, serialize_diagram
from cfaudit.fixtures import holmes_diagram, three_urn_diagram
from cfaudit.influence import DiagramNode, add_node, validate

from generators import random_diagram

DATA = resources.files("cfaudit") / "data"


@pytest.mark.parametrize(
    "name, expected",
    [
        ("holmes.idg", holmes_diagram()),
        ("three_urn.idg", three_urn_diagram()),
        ("three_urn_reversed.idg", three_urn_diagram(reversed_arc=True)),
    ],
)
def test_shipped_files_match_fixtures(name, expected):
    text = (DATA / name).read_text()
    d = parse_diagram(text)
    assert d == expected
    assert serialize_diagram(d) == text


def test_fractions_survive():
    d = parse_diagram(serialize_diagram(three_urn_diagram()))
    assert d.cpts["Identity"].rows[()] == (F(1, 3),) * 3


def test_stale_marks_survive():
    e, _ = add_node(holmes_diagram(), DiagramNode("AprilFools"), [("AprilFools", "PhoneCall")])
    again = parse_diagram(serialize_diagram(e))
    assert again.stale == {"AprilFools", "PhoneCall"}
    assert again == e


def _base():
    return dump_diagram(three_urn_diagram())


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda d: d["arcs"].append(["Identity", "Ghost"]), "unknown node 'Ghost'"),
        (lambda d: d["cpts"]["Color"]["rows"].update({"H9": [0.5, 0.5]}), "unknown outcome"),
        (lambda d: d["cpts"]["Color"]["rows"].update({"H1,H2": [0.5, 0.5]}), "malformed row key"),
        (lambda d: d["cpts"]["Identity"]["rows"].update({"": ["a", "b", "c"]}), "non-numeric"),
        (lambda d: d["cpts"]["Identity"]["rows"].update({"": [True, 0, 0]}), "non-numeric"),
        (lambda d: d.update({"extra": 1}), "unknown top-level"),
        (lambda d: d["nodes"].append(dict(d["nodes"][0])), "declared twice"),
        (lambda d: d.update({"stale": ["Ghost"]}), "stale"),
    ],
)
def test_syntax_errors(mutate, fragment):
    data = _base()
    mutate(data)
    with pytest.raises(DiagramSyntaxError, match=fragment):
        parse_diagram(json.dumps(data))


def test_bad_json_reports_position():
    with pytest.raises(DiagramSyntaxError, match="line 1, column"):
        parse_diagram("{nodes: []}")


def test_semantic_problems_parse_then_validate():
    data = _base()
    data["cpts"]["Color"]["rows"]["H1"] = [0.5, 0.6]
    d = parse_diagram(json.dumps(data))
    assert [f.kind for f in validate(d)] == ["not-normalized"]


@settings(max_examples=100)
@given(st.integers(0, 10**6))
def test_random_diagrams_round_trip(seed):
    rng = np.random.default_rng(seed)
    d = random_diagram(rng, binary=bool(seed % 2))
    text = serialize_diagram(d)
    again = parse_diagram(text)
    assert again == d
    assert serialize_diagram(again) == text
