"""Influence diagrams restricted to chance nodes.

A diagram is a DAG of propositions plus one conditional probability table
per node. Edits are functional: :func:`add_node`, :func:`delete_node` and
:func:`set_cpt` return new diagrams and carry untouched CPT objects over
as-is. Nodes whose incoming arcs changed are marked stale until a new CPT
is installed, and a diagram with stale nodes refuses inference.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .joint import (
    UNIVERSAL,
    Event,
    EventLike,
    JointModel,
    ModelError,
    conditional,
    probability,
)

__all__ = [
    "BINARY",
    "CPT",
    "DiagramError",
    "DiagramNode",
    "IncompleteDiagramError",
    "InfluenceDiagram",
    "StaleReport",
    "ValidationFinding",
    "add_node",
    "check_missing_arc_ci",
    "delete_node",
    "infer",
    "missing_arc_ci_detail",
    "noisy_or_cpt",
    "set_cpt",
    "to_joint",
    "validate",
]

BINARY = ("true", "false")
ROW_TOL = 1e-9
CI_TOL = 1e-9

Prob = Union[float, Fraction]


class DiagramError(ValueError):
    pass


class IncompleteDiagramError(DiagramError):
    pass


@dataclass(frozen=True)
class DiagramNode:
    name: str
    outcomes: tuple[str, ...] = BINARY

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        if len(self.outcomes) < 2:
            raise DiagramError(f"node {self.name!r} needs at least two outcomes")
        if len(set(self.outcomes)) != len(self.outcomes):
            raise DiagramError(f"node {self.name!r} has duplicate outcome labels")


@dataclass(frozen=True)
class CPT:
    """p(node | parents); ``rows`` maps a parent-outcome tuple to a distribution.

    Parents are kept in lexicographic order. A root node has the single
    row key ``()``.
    """

    node: str
    parents: tuple[str, ...]
    rows: Mapping[tuple[str, ...], tuple[Prob, ...]]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(
            self, "rows", {tuple(k): tuple(v) for k, v in dict(self.rows).items()}
        )

    def __hash__(self):
        return hash((self.node, self.parents, tuple(sorted(self.rows.items()))))

    def prob(self, node_outcome_index: int, parent_values: tuple[str, ...]) -> Prob:
        return self.rows[parent_values][node_outcome_index]


@dataclass(frozen=True)
class ValidationFinding:
    kind: str
    node: Optional[str]
    message: str

    def to_dict(self) -> dict:
        return {"kind": self.kind, "node": self.node, "message": self.message}


@dataclass(frozen=True)
class StaleReport:
    edited: str
    stale_nodes: frozenset[str]
    untouched_nodes: frozenset[str]

    def to_dict(self) -> dict:
        return {
            "edited": self.edited,
            "stale_nodes": sorted(self.stale_nodes),
            "untouched_nodes": sorted(self.untouched_nodes),
        }


@dataclass(frozen=True)
class InfluenceDiagram:
    nodes: Mapping[str, DiagramNode]
    arcs: frozenset[tuple[str, str]]
    cpts: Mapping[str, CPT]
    stale: frozenset[str] = field(default=frozenset())

    def __post_init__(self):
        if not isinstance(self.nodes, Mapping):
            object.__setattr__(self, "nodes", {n.name: n for n in self.nodes})
        object.__setattr__(self, "arcs", frozenset(tuple(a) for a in self.arcs))
        object.__setattr__(self, "cpts", dict(self.cpts))
        object.__setattr__(self, "stale", frozenset(self.stale))

    @classmethod
    def from_cpts(cls, nodes: Iterable[DiagramNode], cpts: Iterable[CPT]) -> "InfluenceDiagram":
        """Build a diagram whose arcs are read off the CPT parent lists."""
        cpts = list(cpts)
        arcs = {(p, c.node) for c in cpts for p in c.parents}
        return cls({n.name: n for n in nodes}, frozenset(arcs), {c.node: c for c in cpts})

    @property
    def complete(self) -> bool:
        return not self.stale

    def parents(self, name: str) -> tuple[str, ...]:
        return tuple(sorted(p for p, c in self.arcs if c == name))

    def children(self, name: str) -> tuple[str, ...]:
        return tuple(sorted(c for p, c in self.arcs if p == name))

    def order(self) -> list[str]:
        """Node names sorted so that parents precede children."""
        ts = TopologicalSorter({n: self.parents(n) for n in sorted(self.nodes)})
        out = []
        ts.prepare()
        while ts.is_active():
            ready = sorted(ts.get_ready())
            out.extend(ready)
            ts.done(*ready)
        return out


def _find_cycle(nodes: Iterable[str], arcs: Iterable[tuple[str, str]]) -> Optional[list[str]]:
    graph: dict[str, set[str]] = {n: set() for n in nodes}
    for p, c in arcs:
        graph.setdefault(c, set()).add(p)
        graph.setdefault(p, set())
    try:
        TopologicalSorter(graph).prepare()
    except CycleError as exc:
        return list(exc.args[1])
    return None


def _row_problems(cpt: CPT, d: InfluenceDiagram) -> list[ValidationFinding]:
    out = []
    node = d.nodes[cpt.node]
    parent_nodes = [d.nodes.get(p) for p in cpt.parents]
    if None in parent_nodes:
        return [ValidationFinding("unknown-node", cpt.node, "CPT names an undeclared parent")]
    expected = set(itertools.product(*(p.outcomes for p in parent_nodes)))
    for key in sorted(expected - set(cpt.rows)):
        out.append(
            ValidationFinding(
                "missing-row", cpt.node,
                f"missing parent configuration ({', '.join(key)}) for {cpt.node}",
            )
        )
    for key in sorted(set(cpt.rows) - expected):
        out.append(
            ValidationFinding("extra-row", cpt.node, f"row ({', '.join(key)}) matches no parent configuration")
        )
    for key in sorted(set(cpt.rows) & expected):
        row = cpt.rows[key]
        label = f"{cpt.node} | ({', '.join(key)})"
        if len(row) != len(node.outcomes):
            out.append(
                ValidationFinding(
                    "row-length", cpt.node,
                    f"row {label} has {len(row)} entries for {len(node.outcomes)} outcomes",
                )
            )
            continue
        if any(not (0 <= v <= 1) for v in row):
            out.append(ValidationFinding("out-of-range", cpt.node, f"row {label} has entries outside [0, 1]"))
        if abs(sum(row) - 1) > ROW_TOL:
            out.append(
                ValidationFinding("not-normalized", cpt.node, f"row {label} sums to {float(sum(row))!r}")
            )
    return out


def validate(d: InfluenceDiagram) -> list[ValidationFinding]:
    """Structural and numeric problems with a diagram, as findings."""
    findings = []
    for p, c in sorted(d.arcs):
        for end in (p, c):
            if end not in d.nodes:
                findings.append(ValidationFinding("unknown-node", end, f"arc {p}->{c} names undeclared node {end}"))
    cycle = _find_cycle(d.nodes, d.arcs)
    if cycle:
        findings.append(ValidationFinding("cycle", None, "arcs form a cycle: " + " -> ".join(cycle)))
    for name in sorted(d.nodes):
        if name in d.stale:
            findings.append(
                ValidationFinding("stale", name, f"{name} awaits reassessment after an edit")
            )
            continue
        cpt = d.cpts.get(name)
        if cpt is None:
            findings.append(ValidationFinding("missing-cpt", name, f"{name} has no probability table"))
            continue
        if cpt.parents != d.parents(name):
            findings.append(
                ValidationFinding(
                    "parent-mismatch", name,
                    f"CPT parents {list(cpt.parents)} differ from incoming arcs {list(d.parents(name))}",
                )
            )
            continue
        findings.extend(_row_problems(cpt, d))
    for name in sorted(set(d.cpts) - set(d.nodes)):
        findings.append(ValidationFinding("unknown-node", name, f"CPT for undeclared node {name}"))
    return findings


def to_joint(d: InfluenceDiagram) -> JointModel:
    """Multiply the CPTs out into an explicit joint over all nodes.

    Variables appear in lexicographic name order. Any Fraction entry makes
    the joint exact.
    """
    if d.stale:
        raise IncompleteDiagramError(f"diagram incomplete: stale nodes {sorted(d.stale)}")
    problems = validate(d)
    if problems:
        raise DiagramError("invalid diagram: " + "; ".join(f.message for f in problems))
    names = sorted(d.nodes)
    axis = {n: i for i, n in enumerate(names)}
    shape = tuple(len(d.nodes[n].outcomes) for n in names)
    exact = any(isinstance(v, Fraction) for c in d.cpts.values() for row in c.rows.values() for v in row)
    dtype = object if exact else float

    joint = np.ones(shape, dtype=dtype)
    if exact:
        joint[...] = Fraction(1)
    for name in names:
        cpt = d.cpts[name]
        scope = sorted((*cpt.parents, name), key=axis.get)
        factor = np.empty(tuple(shape[axis[v]] for v in scope), dtype=dtype)
        outs = [d.nodes[v].outcomes for v in scope]
        for idx in itertools.product(*(range(len(o)) for o in outs)):
            vals = dict(zip(scope, (o[i] for o, i in zip(outs, idx))))
            key = tuple(vals[p] for p in cpt.parents)
            factor[idx] = cpt.rows[key][d.nodes[name].outcomes.index(vals[name])]
        view = [1] * len(names)
        for v in scope:
            view[axis[v]] = shape[axis[v]]
        joint = joint * factor.reshape(view)
    return JointModel([(n, d.nodes[n].outcomes) for n in names], joint)


def infer(d: InfluenceDiagram, query: EventLike, given: EventLike = UNIVERSAL) -> Prob:
    """p(query | given) by enumeration of the diagram's joint."""
    return conditional(to_joint(d), query, given)


def check_missing_arc_ci(
    d: InfluenceDiagram, a: str, b: str, mediators: EventLike = UNIVERSAL
) -> bool:
    """Are nodes ``a`` and ``b`` independent once ``mediators`` is known?"""
    return missing_arc_ci_detail(d, a, b, mediators)[0]


def missing_arc_ci_detail(d: InfluenceDiagram, a: str, b: str, mediators: EventLike = UNIVERSAL):
    """Verdict plus ``(a_value, b_value, p(a, b | m), p(a | m) p(b | m))`` rows."""
    if (a, b) in d.arcs or (b, a) in d.arcs:
        raise DiagramError(f"not a missing-arc pair: {a} and {b} are directly linked")
    for n in (a, b):
        if n not in d.nodes:
            raise DiagramError(f"unknown node {n!r}")
    m = to_joint(d)
    pm = probability(m, mediators)
    if pm <= 0:
        raise ModelError(f"conditioning on impossible event {mediators}")
    rows = []
    ok = True
    for x in d.nodes[a].outcomes:
        ea = Event({a: x})
        pa = conditional(m, ea, mediators)
        for y in d.nodes[b].outcomes:
            eb = Event({b: y})
            pb = conditional(m, eb, mediators)
            pab = conditional(m, ea & eb, mediators)
            if abs(pab - pa * pb) > CI_TOL:
                ok = False
            rows.append((x, y, pab, pa * pb))
    return ok, rows


def _require_acyclic(nodes, arcs):
    cycle = _find_cycle(nodes, arcs)
    if cycle:
        raise DiagramError("edit would create a cycle: " + " -> ".join(cycle))


def add_node(
    d: InfluenceDiagram,
    node: DiagramNode,
    new_arcs: Iterable[tuple[str, str]] = (),
) -> tuple[InfluenceDiagram, StaleReport]:
    """Add a proposition and arcs; only nodes gaining parents go stale."""
    if node.name in d.nodes:
        raise DiagramError(f"node {node.name!r} already exists")
    nodes = dict(d.nodes)
    nodes[node.name] = node
    new_arcs = {tuple(a) for a in new_arcs} - set(d.arcs)
    for p, c in new_arcs:
        for end in (p, c):
            if end not in nodes:
                raise DiagramError(f"arc {p}->{c} names unknown node {end!r}")
    arcs = frozenset(d.arcs | new_arcs)
    _require_acyclic(nodes, arcs)

    changed = {node.name} | {c for _, c in new_arcs}
    cpts = {k: v for k, v in d.cpts.items() if k not in changed}
    stale = frozenset(d.stale | changed)
    report = StaleReport(
        f"add-node {node.name}",
        frozenset(changed),
        frozenset(nodes) - changed,
    )
    return InfluenceDiagram(nodes, arcs, cpts, stale), report


def delete_node(d: InfluenceDiagram, name: str) -> tuple[InfluenceDiagram, StaleReport]:
    """Remove a proposition; its former children go stale."""
    if name not in d.nodes:
        raise DiagramError(f"unknown node {name!r}")
    changed = set(d.children(name))
    nodes = {k: v for k, v in d.nodes.items() if k != name}
    arcs = frozenset(a for a in d.arcs if name not in a)
    cpts = {k: v for k, v in d.cpts.items() if k != name and k not in changed}
    stale = frozenset((d.stale - {name}) | changed)
    report = StaleReport(f"delete-node {name}", frozenset(changed), frozenset(nodes) - changed)
    return InfluenceDiagram(nodes, arcs, cpts, stale), report


def set_cpt(d: InfluenceDiagram, cpt: CPT) -> InfluenceDiagram:
    """Install a reassessed table and clear the node's stale mark."""
    if cpt.node not in d.nodes:
        raise DiagramError(f"unknown node {cpt.node!r}")
    if tuple(cpt.parents) != d.parents(cpt.node):
        raise DiagramError(
            f"CPT does not match incoming arcs: {list(cpt.parents)} vs {list(d.parents(cpt.node))}"
        )
    problems = _row_problems(cpt, d)
    if problems:
        raise DiagramError("; ".join(p.message for p in problems))
    if cpt.node not in d.stale and d.cpts.get(cpt.node) == cpt:
        return d
    cpts = dict(d.cpts)
    cpts[cpt.node] = cpt
    return InfluenceDiagram(d.nodes, d.arcs, cpts, d.stale - {cpt.node})


def noisy_or_cpt(
    node: Union[DiagramNode, str],
    causes: Sequence[Union[DiagramNode, str]],
    q: Mapping[str, Prob],
    leak: Prob = 1.0,
    strict: bool = False,
) -> CPT:
    """Binary CPT from per-cause inhibition probabilities.

    ``q[c]`` is p(~node | only c active). With the active cause set S,
    p(~node | S) is the product of ``q`` over S, and ``leak`` when S is
    empty. In strict mode the leak multiplies every row. A node's first
    outcome means present, the second absent; causes are active in their
    first outcome.
    """
    if isinstance(node, str):
        node = DiagramNode(node)
    if len(node.outcomes) != 2:
        raise DiagramError(f"noisy-OR needs a binary node, {node.name!r} has {len(node.outcomes)} outcomes")
    cause_nodes = sorted(
        (DiagramNode(c) if isinstance(c, str) else c for c in causes), key=lambda n: n.name
    )
    for c in cause_nodes:
        if len(c.outcomes) != 2:
            raise DiagramError(f"noisy-OR cause {c.name!r} must be binary")
        if c.name not in q:
            raise DiagramError(f"no inhibition probability for cause {c.name!r}")
    for name, v in list(q.items()) + [("leak", leak)]:
        if not (0 <= v <= 1):
            raise DiagramError(f"inhibition probability {name}={v!r} outside [0, 1]")

    rows = {}
    for combo in itertools.product(*(c.outcomes for c in cause_nodes)):
        active = [c.name for c, v in zip(cause_nodes, combo) if v == c.outcomes[0]]
        if active:
            absent = math.prod((q[a] for a in active), start=leak if strict else 1)
        else:
            absent = leak
        rows[combo] = (1 - absent, absent)
    return CPT(node.name, tuple(c.name for c in cause_nodes), rows)
