"""Random models for property and acceptance tests, plus brute-force oracles.

The oracles here deliberately avoid the library's mask machinery: events
are evaluated one assignment at a time and joints are multiplied out with
plain Python loops.
"""

import itertools
import math

import numpy as np

from cfaudit.influence import CPT, DiagramNode, InfluenceDiagram
from cfaudit.joint import AllOf, Event, JointModel, Not


# --- structural event evaluation --------------------------------------------


def holds(event, assignment: dict) -> bool:
    if isinstance(event, Event):
        return all(assignment[n] in vals for n, vals in event.constraints)
    if isinstance(event, AllOf):
        return all(holds(p, assignment) for p in event.parts)
    if isinstance(event, Not):
        return not holds(event.inner, assignment)
    raise TypeError(event)


def brute_joint(d: InfluenceDiagram):
    """List of (assignment dict, weight) by explicit product of CPT entries."""
    names = sorted(d.nodes)
    out = []
    for values in itertools.product(*(d.nodes[n].outcomes for n in names)):
        a = dict(zip(names, values))
        w = 1.0
        for n in names:
            cpt = d.cpts[n]
            row = cpt.rows[tuple(a[p] for p in cpt.parents)]
            w *= row[d.nodes[n].outcomes.index(a[n])]
        out.append((a, w))
    return out


def brute_conditional(table, query, given) -> float:
    pg = sum(w for a, w in table if holds(given, a))
    pq = sum(w for a, w in table if holds(given, a) and holds(query, a))
    return pq / pg


# --- random influence diagrams ----------------------------------------------


def random_row(rng, k: int):
    row = rng.dirichlet(np.ones(k))
    return tuple(float(x) for x in row)


def random_diagram(rng, max_nodes: int = 6, arc_prob: float = 0.45, binary: bool = True):
    n = int(rng.integers(1, max_nodes + 1))
    names = [f"N{i}" for i in range(n)]
    rng.shuffle(names)  # topological order differs from name order
    nodes = []
    for name in names:
        k = 2 if binary else int(rng.integers(2, 4))
        nodes.append(DiagramNode(name, tuple(f"v{j}" for j in range(k))))
    by_name = {x.name: x for x in nodes}
    arcs = {
        (names[i], names[j])
        for i in range(n)
        for j in range(i + 1, n)
        if rng.random() < arc_prob
    }
    cpts = []
    for name in names:
        parents = tuple(sorted(p for p, c in arcs if c == name))
        rows = {
            key: random_row(rng, len(by_name[name].outcomes))
            for key in itertools.product(*(by_name[p].outcomes for p in parents))
        }
        cpts.append(CPT(name, parents, rows))
    return InfluenceDiagram(by_name, frozenset(arcs), {c.node: c for c in cpts})


def random_event(rng, d: InfluenceDiagram, max_terms: int = 2):
    names = sorted(d.nodes)
    k = int(rng.integers(1, min(max_terms, len(names)) + 1))
    chosen = rng.choice(names, size=k, replace=False)
    ev = Event({})
    for name in chosen:
        outs = d.nodes[str(name)].outcomes
        atom = Event({str(name): outs[int(rng.integers(len(outs)))]})
        ev = ev & (~atom if rng.random() < 0.3 else atom)
    return ev


# --- random joint models ----------------------------------------------------


def binary_hypothesis_model(rng, n_evidence: int, structure: str) -> JointModel:
    """Joint over h and e1..en (all binary, outcome "1" means true).

    structure: "naive" makes every ei independent given h and given ~h;
    "partial" keeps only e1 independent of the rest; "free" is an arbitrary
    strictly positive joint.
    """
    names = ["h"] + [f"e{i + 1}" for i in range(n_evidence)]
    shape = (2,) * len(names)
    if structure == "free":
        table = rng.dirichlet(np.ones(2 ** len(names))).reshape(shape)
    else:
        table = np.zeros(shape)
        prior = rng.uniform(0.1, 0.9)
        for hv in (0, 1):
            ph = prior if hv == 0 else 1 - prior
            if structure == "naive":
                lik = [rng.uniform(0.05, 0.95) for _ in range(n_evidence)]
                for evals in itertools.product((0, 1), repeat=n_evidence):
                    w = ph
                    for p, v in zip(lik, evals):
                        w *= p if v == 0 else 1 - p
                    table[(hv, *evals)] = w
            else:  # partial
                p1 = rng.uniform(0.05, 0.95)
                rest = rng.dirichlet(np.ones(2 ** (n_evidence - 1)))
                for evals in itertools.product((0, 1), repeat=n_evidence):
                    r_index = int("".join(map(str, evals[1:])) or "0", 2)
                    w = ph * (p1 if evals[0] == 0 else 1 - p1) * rest[r_index]
                    table[(hv, *evals)] = w
    table = table / table.sum()
    return JointModel([(n, ("1", "0")) for n in names], table)


def mixture_model(rng, n_evidence: int, k: int = 3):
    """k mutually exclusive hypotheses, evidence independent given each one.

    Returns (model, likelihood matrix); rows are hypotheses.
    """
    while True:
        lik = rng.uniform(0.05, 0.95, size=(k, n_evidence))
        if _pairwise_non_proportional(lik):
            break
    prior = rng.dirichlet(np.ones(k))
    names = ["H"] + [f"e{i + 1}" for i in range(n_evidence)]
    table = np.zeros((k,) + (2,) * n_evidence)
    for hi in range(k):
        for evals in itertools.product((0, 1), repeat=n_evidence):
            w = prior[hi]
            for j, v in enumerate(evals):
                w *= lik[hi, j] if v == 0 else 1 - lik[hi, j]
            table[(hi, *evals)] = w
    table = table / table.sum()
    variables = [("H", tuple(f"H{i + 1}" for i in range(k)))]
    variables += [(n, ("1", "0")) for n in names[1:]]
    return JointModel(variables, table), lik


def _pairwise_non_proportional(lik, tol: float = 1e-3) -> bool:
    for a, b in itertools.combinations(range(lik.shape[0]), 2):
        r = lik[a] / lik[b]
        if np.ptp(r) < tol:
            return False
    return True


def log_uniform(rng, lo: float, hi: float, size: int):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), size=size))
