"""Inference networks: CF-weighted IF/THEN rules over binary propositions."""

from __future__ import annotations

from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Iterable, Mapping, Sequence, Union

from .cf import (
    ContradictionError,
    _check_cf,
    chain_sequential,
    combine_antecedent,
    combine_parallel,
)

__all__ = [
    "And",
    "Or",
    "Prop",
    "Rule",
    "InferenceNetwork",
    "NetworkError",
    "TopologyFinding",
    "build_network",
    "find_convergent_links",
    "find_cycles",
    "find_divergent_links",
    "lint_rules",
    "propagate",
]

DIVERGENT_RATIONALE = (
    "evidence that bears on several hypotheses cannot in general be "
    "propagated consistently: once the evidence is known the hypotheses "
    "become dependent, so each rule's CF depends on belief in the others"
)


class NetworkError(ValueError):
    pass


@dataclass(frozen=True)
class Prop:
    name: str

    def props(self) -> frozenset[str]:
        return frozenset((self.name,))

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class And:
    """Conjunction of antecedent expressions."""

    parts: tuple["Expr", ...]

    def props(self) -> frozenset[str]:
        return frozenset().union(*(p.props() for p in self.parts))

    def __str__(self) -> str:
        return " AND ".join(_wrap(p) for p in self.parts)


@dataclass(frozen=True)
class Or:
    """Disjunction of antecedent expressions."""

    parts: tuple["Expr", ...]

    def props(self) -> frozenset[str]:
        return frozenset().union(*(p.props() for p in self.parts))

    def __str__(self) -> str:
        return " OR ".join(_wrap(p) for p in self.parts)


Expr = Union[Prop, And, Or]


def _wrap(e: Expr) -> str:
    return str(e) if isinstance(e, Prop) else f"({e})"


def _evaluate(expr: Expr, beliefs: Mapping[str, float]) -> float:
    if isinstance(expr, Prop):
        return beliefs.get(expr.name, 0.0)
    kind = "and" if isinstance(expr, And) else "or"
    return combine_antecedent(kind, (_evaluate(p, beliefs) for p in expr.parts))


@dataclass(frozen=True)
class Rule:
    id: str
    antecedent: Expr
    consequent: str
    cf: float

    def __post_init__(self):
        if isinstance(self.antecedent, str):
            object.__setattr__(self, "antecedent", Prop(self.antecedent))
        _check_cf(self.cf, f"cf of rule {self.id}")
        if self.consequent in self.antecedent.props():
            raise NetworkError(
                f"rule {self.id}: consequent {self.consequent!r} appears in its own antecedent"
            )

    def __str__(self) -> str:
        return f"{self.id}: IF {self.antecedent} THEN {self.consequent} CF {self.cf}"


@dataclass(frozen=True)
class TopologyFinding:
    kind: str  # "divergent-link" | "cycle"
    subjects: tuple[str, ...]
    exempt: bool = False
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "subjects": list(self.subjects),
            "exempt": self.exempt,
            "message": self.message,
        }


@dataclass(frozen=True)
class InferenceNetwork:
    rules: tuple[Rule, ...]
    propositions: frozenset[str] = field(default=frozenset())

    @property
    def hypotheses(self) -> frozenset[str]:
        return frozenset(r.consequent for r in self.rules)

    @property
    def leaves(self) -> frozenset[str]:
        return self.propositions - self.hypotheses

    def parents(self, prop: str) -> frozenset[str]:
        return frozenset().union(
            *(r.antecedent.props() for r in self.rules if r.consequent == prop)
        )

    def children(self, prop: str) -> frozenset[str]:
        return frozenset(r.consequent for r in self.rules if prop in r.antecedent.props())

    def reaches(self, src: str, dst: str) -> bool:
        """True if a directed path of one or more links runs from src to dst."""
        seen: set[str] = set()
        stack = list(self.children(src))
        while stack:
            node = stack.pop()
            if node == dst:
                return True
            if node not in seen:
                seen.add(node)
                stack.extend(self.children(node))
        return False

    def topological_order(self) -> list[str]:
        return _toposort(self.rules)


def _graph(rules: Iterable[Rule]) -> dict[str, set[str]]:
    graph: dict[str, set[str]] = {}
    for r in rules:
        graph.setdefault(r.consequent, set()).update(r.antecedent.props())
        for p in r.antecedent.props():
            graph.setdefault(p, set())
    return graph


def _toposort(rules: Iterable[Rule]) -> list[str]:
    graph = _graph(rules)
    ts = TopologicalSorter({k: sorted(v) for k, v in sorted(graph.items())})
    ts.prepare()
    order: list[str] = []
    while ts.is_active():
        ready = sorted(ts.get_ready())
        order.extend(ready)
        ts.done(*ready)
    return order


def find_cycles(rules: Sequence[Rule]) -> list[TopologyFinding]:
    """Report one cycle of the rule graph, if any."""
    graph = _graph(rules)
    try:
        TopologicalSorter({k: sorted(v) for k, v in sorted(graph.items())}).prepare()
    except CycleError as exc:
        cycle = tuple(exc.args[1])
        return [
            TopologyFinding(
                "cycle", cycle, message="rule graph contains a cycle: " + " -> ".join(cycle)
            )
        ]
    return []


def build_network(rules: Iterable[Rule]) -> InferenceNetwork:
    rules = tuple(rules)
    seen: set[str] = set()
    for r in rules:
        if r.id in seen:
            raise NetworkError(f"duplicate rule id {r.id!r}")
        seen.add(r.id)
    cycles = find_cycles(rules)
    if cycles:
        raise NetworkError(cycles[0].message)
    props = frozenset(_graph(rules))
    return InferenceNetwork(rules, props)


def propagate(net: InferenceNetwork, evidence: Mapping[str, float]) -> dict[str, float]:
    """Forward-propagate leaf CFs through the network.

    Returns a CF for every proposition; anything not reached gets 0.
    Contributions to a hypothesis are folded in rule-id order, which is
    also order-free in exact arithmetic because parallel combination is
    associative.
    """
    for name, value in evidence.items():
        if name not in net.propositions:
            raise NetworkError(f"evidence names unknown proposition {name!r}")
        if name in net.hypotheses:
            raise NetworkError(f"evidence may only be asserted on leaves; {name!r} is derived")
        _check_cf(value, f"evidence {name}")

    beliefs: dict[str, float] = {p: 0.0 for p in net.propositions}
    beliefs.update(evidence)
    by_consequent: dict[str, list[Rule]] = {}
    for r in net.rules:
        by_consequent.setdefault(r.consequent, []).append(r)

    for prop in net.topological_order():
        rules = by_consequent.get(prop)
        if not rules:
            continue
        contributions = [
            (r.id, chain_sequential(r.cf, _evaluate(r.antecedent, beliefs)))
            for r in sorted(rules, key=lambda r: r.id)
        ]
        values = [c for _, c in contributions]
        if 1 in values and -1 in values:
            pos = [i for i, c in contributions if c == 1]
            neg = [i for i, c in contributions if c == -1]
            raise ContradictionError(
                f"contradictory categorical evidence for {prop!r}: "
                f"rules {', '.join(pos)} confirm, rules {', '.join(neg)} refute"
            )
        acc = 0.0
        for v in values:
            acc = combine_parallel(acc, v)
        beliefs[prop] = acc
    return beliefs


def find_divergent_links(net: InferenceNetwork) -> list[TopologyFinding]:
    """Find evidence propositions that bear on two or more hypotheses.

    A finding is exempt when no other rule bears on any of the affected
    hypotheses; consistent propagation is then still possible.
    """
    findings = []
    for prop in sorted(net.propositions):
        using = [r for r in net.rules if prop in r.antecedent.props()]
        targets = sorted({r.consequent for r in using})
        if len(targets) < 2:
            continue
        others = sorted(
            r.id
            for r in net.rules
            if r.consequent in targets and prop not in r.antecedent.props()
        )
        exempt = not others
        if exempt:
            msg = (
                f"{prop} diverges to {{{', '.join(targets)}}}; exempt because no "
                "other rule bears on those hypotheses"
            )
        else:
            msg = (
                f"{prop} diverges to {{{', '.join(targets)}}} while rule(s) "
                f"{', '.join(others)} also bear on them; {DIVERGENT_RATIONALE}"
            )
        findings.append(
            TopologyFinding("divergent-link", (prop, *targets), exempt=exempt, message=msg)
        )
    return findings


def find_convergent_links(net: InferenceNetwork) -> list[tuple[str, tuple[str, ...]]]:
    """Hypotheses fed by two or more distinct evidence propositions.

    Informational only: propagation there is sound when the evidence is
    conditionally independent given the hypothesis and its negation.
    """
    out = []
    for h in sorted(net.hypotheses):
        sources = sorted(net.parents(h))
        if len(sources) >= 2:
            out.append((h, tuple(sources)))
    return out


def lint_rules(rules: Sequence[Rule]) -> list[TopologyFinding]:
    """Cycle findings if the rule graph is cyclic, else divergent-link findings."""
    cycles = find_cycles(rules)
    if cycles:
        return cycles
    return find_divergent_links(build_network(rules))
