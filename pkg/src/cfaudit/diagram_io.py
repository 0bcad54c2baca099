"""JSON reader and writer for ``.idg`` influence-diagram files.

Layout::

    {
      "nodes": [{"name": "Identity", "outcomes": ["H1", "H2", "H3"]}, ...],
      "arcs": [["Identity", "Color"]],
      "cpts": {
        "Identity": {"parents": [], "rows": {"": ["1/3", "1/3", "1/3"]}},
        "Color": {"parents": ["Identity"],
                  "rows": {"H1": [0.5, 0.5], "H2": [1.0, 0.0], "H3": [0.0, 1.0]}}
      },
      "stale": []
    }

Row keys join parent outcomes with commas, parents in lexicographic order.
Probabilities are JSON numbers or exact rationals written as ``"p/q"``
strings. Only syntactic problems raise here; semantic checks belong to
:func:`cfaudit.influence.validate`.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .influence import CPT, DiagramError, DiagramNode, InfluenceDiagram

__all__ = ["DiagramSyntaxError", "dump_diagram", "parse_diagram", "serialize_diagram"]


class DiagramSyntaxError(DiagramError):
    pass


def _prob(value, where: str):
    if isinstance(value, bool):
        raise DiagramSyntaxError(f"{where}: non-numeric probability {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            pass
    raise DiagramSyntaxError(f"{where}: non-numeric probability {value!r}")


def _dump_prob(v):
    if isinstance(v, Fraction):
        return str(v)
    return float(v)


def parse_diagram(text: str) -> InfluenceDiagram:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DiagramSyntaxError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise DiagramSyntaxError("top level must be an object")
    unknown = set(data) - {"nodes", "arcs", "cpts", "stale"}
    if unknown:
        raise DiagramSyntaxError(f"unknown top-level key(s) {sorted(unknown)}")

    nodes: dict[str, DiagramNode] = {}
    for i, entry in enumerate(data.get("nodes", [])):
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str):
            raise DiagramSyntaxError(f"nodes[{i}]: expected an object with a string name")
        outcomes = entry.get("outcomes")
        if not isinstance(outcomes, list) or not all(isinstance(o, str) for o in outcomes):
            raise DiagramSyntaxError(f"nodes[{i}]: outcomes must be a list of strings")
        if any("," in o for o in outcomes):
            raise DiagramSyntaxError(f"nodes[{i}]: outcome labels may not contain commas")
        name = entry["name"]
        if name in nodes:
            raise DiagramSyntaxError(f"node {name!r} declared twice")
        nodes[name] = DiagramNode(name, tuple(outcomes))

    arcs = set()
    for i, arc in enumerate(data.get("arcs", [])):
        if not (isinstance(arc, list) and len(arc) == 2 and all(isinstance(a, str) for a in arc)):
            raise DiagramSyntaxError(f"arcs[{i}]: expected [parent, child]")
        for end in arc:
            if end not in nodes:
                raise DiagramSyntaxError(f"arcs[{i}]: unknown node {end!r}")
        arcs.add(tuple(arc))

    cpts = {}
    for name, spec in data.get("cpts", {}).items():
        if name not in nodes:
            raise DiagramSyntaxError(f"cpts: unknown node {name!r}")
        if not isinstance(spec, dict):
            raise DiagramSyntaxError(f"cpts[{name}]: expected an object")
        parents = spec.get("parents", [])
        if not isinstance(parents, list):
            raise DiagramSyntaxError(f"cpts[{name}]: parents must be a list")
        for p in parents:
            if p not in nodes:
                raise DiagramSyntaxError(f"cpts[{name}]: unknown parent {p!r}")
        rows = {}
        for key, values in spec.get("rows", {}).items():
            parts = tuple(key.split(",")) if parents else ()
            if (not parents and key != "") or len(parts) != len(parents):
                raise DiagramSyntaxError(f"cpts[{name}]: malformed row key {key!r}")
            for p, v in zip(parents, parts):
                if v not in nodes[p].outcomes:
                    raise DiagramSyntaxError(
                        f"cpts[{name}]: row key {key!r} uses unknown outcome {v!r} of {p}"
                    )
            if not isinstance(values, list):
                raise DiagramSyntaxError(f"cpts[{name}][{key!r}]: expected a list of probabilities")
            rows[parts] = tuple(_prob(v, f"cpts[{name}][{key!r}]") for v in values)
        cpts[name] = CPT(name, tuple(parents), rows)

    stale = data.get("stale", [])
    for s in stale:
        if s not in nodes:
            raise DiagramSyntaxError(f"stale: unknown node {s!r}")
    return InfluenceDiagram(nodes, frozenset(arcs), cpts, frozenset(stale))


def dump_diagram(d: InfluenceDiagram) -> dict:
    return {
        "nodes": [{"name": n.name, "outcomes": list(n.outcomes)} for n in d.nodes.values()],
        "arcs": [list(a) for a in sorted(d.arcs)],
        "cpts": {
            name: {
                "parents": list(c.parents),
                "rows": {",".join(k): [_dump_prob(v) for v in row] for k, row in sorted(c.rows.items())},
            }
            for name, c in sorted(d.cpts.items())
        },
        "stale": sorted(d.stale),
    }


def serialize_diagram(d: InfluenceDiagram) -> str:
    return json.dumps(dump_diagram(d), indent=2) + "\n"
