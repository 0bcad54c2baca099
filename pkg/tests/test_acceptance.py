"""Acceptance criteria, one test per criterion.

A PASS/FAIL line per criterion is printed in the terminal summary.
"""

import itertools
import json
import math
import tempfile
from fractions import Fraction as F
from importlib import resources
from pathlib import Path

import numpy as np
import pytest

from cfaudit.audit import audit_modularity, ci_given, ci_report, contextual_cf, likelihood_ratio
from cfaudit.cf import cf_from_lambda, combine_parallel
from cfaudit.diagram_io import parse_diagram, serialize_diagram
from cfaudit.fixtures import holmes_diagram, holmes_rules, three_urn_model, two_urn_model
from cfaudit.influence import DiagramNode, add_node, delete_node, infer, noisy_or_cpt
from cfaudit.joint import UNIVERSAL, Event, conditional
from cfaudit.network import Rule, build_network, find_divergent_links
from cfaudit.rulebase import parse_rulebase, serialize_rulebase

from corpus_runner import CORPUS, DATA, expand, load_manifest, run_cli
from generators import (
    binary_hypothesis_model,
    brute_conditional,
    brute_joint,
    log_uniform,
    mixture_model,
    random_diagram,
    random_event,
)

TOL = 1e-9
H1 = Event(urn="1")
H2 = Event(urn="2")
W1, B1 = Event(draw1="W"), Event(draw1="B")
W2, B2 = Event(draw2="W"), Event(draw2="B")
criterion = pytest.mark.criterion


@criterion(1, "two-urn with replacement: lambda 1/2, CF -1/2, no violations")
def test_two_urn_with_replacement():
    m = two_urn_model(replace=True)
    lam = likelihood_ratio(m, H1, W1)
    assert lam == F(1, 2)
    assert cf_from_lambda(lam) == F(-1, 2)
    assert abs(float(lam) - 0.5) <= TOL
    report = audit_modularity(m, H1, [W1, W2])
    assert report.violations == []


@criterion(2, "three-urn: context W flips CF(H1,B) from 0 to 1 at matching CI sites")
def test_three_urn():
    one = three_urn_model(draws=1)
    assert conditional(one, B1, ~H1) == F(1, 2)
    assert contextual_cf(one, H1, B1).cf == 0
    m = three_urn_model(replace=True)
    assert conditional(m, B2, ~H1 & W1) == 0
    flipped = contextual_cf(m, H1, B2, W1)
    assert flipped.likelihood_ratio == math.inf
    assert flipped.cf == 1
    report = audit_modularity(m, H1, [W1, W2])
    mod = report.sites("modularity-violation")
    assert len(mod) >= 1
    assert mod == report.sites("ci-violation")


@criterion(3, "two-urn without replacement: exact conditionals, CI fails, violations")
def test_two_urn_without_replacement():
    m = two_urn_model(replace=False)
    assert conditional(m, B2, H2 & B1) == 0
    assert conditional(m, B2, H2 & W1) == F(1, 2)
    assert ci_given(m, H1, B2, B1) is False
    assert audit_modularity(m, H1, [W1, W2]).violations


@criterion(4, "parallel combination is the image of lambda multiplication (10,000 pairs)")
def test_homomorphism():
    rng = np.random.default_rng(20240)
    l1 = log_uniform(rng, 1e-3, 1e3, 10_000)
    l2 = log_uniform(rng, 1e-3, 1e3, 10_000)
    worst = max(
        abs(combine_parallel(cf_from_lambda(a), cf_from_lambda(b)) - cf_from_lambda(a * b))
        for a, b in zip(l1.tolist(), l2.tolist())
    )
    assert worst <= TOL


@criterion(5, "modularity and CI violation sites coincide on 1,000 random models")
def test_equivalence_of_criteria():
    rng = np.random.default_rng(5)
    structures = ("naive", "partial", "free")
    for i in range(1000):
        n = int(rng.integers(1, 4))
        structure = structures[i % 3] if n > 1 else "free"
        m = binary_hypothesis_model(rng, n, structure)
        evidence = [Event({f"e{j + 1}": "1"}) for j in range(n)]
        report = audit_modularity(m, Event(h="1"), evidence)
        assert report.sites("modularity-violation") == report.sites("ci-violation"), i
        assert report.mismatched_sites == ()


@criterion(6, "every k=3 mixture model breaks CI given some ~Hi (500 models)")
def test_mixture_models_break_ci():
    rng = np.random.default_rng(6)
    for i in range(500):
        m, lik = mixture_model(rng, 2, k=3)
        found = False
        for h in m.outcomes("H"):
            for a, b in itertools.permutations(("e1", "e2")):
                r = ci_report(m, Event(H=h), Event({a: "1"}), Event({b: "1"}))
                if r.not_h_side is False:
                    found = True
            # given Hi itself the evidence is independent by construction
            assert ci_report(m, Event(H=h), Event(e1="1"), Event(e2="1")).h_side is True
        assert found, i


@criterion(7, "topology lint: Holmes divergence flagged, isolated divergence exempt")
def test_topology_lint():
    holmes = find_divergent_links(build_network(holmes_rules()))
    assert len(holmes) == 1 and holmes[0].exempt is False
    iso = find_divergent_links(build_network([Rule("r1", "E", "H1", 0.6), Rule("r2", "E", "H2", 0.3)]))
    assert len(iso) == 1 and iso[0].exempt is True


@criterion(8, "diagram inference matches brute-force enumeration (200 random DAGs)")
def test_infer_matches_enumeration():
    rng = np.random.default_rng(8)
    done = 0
    while done < 200:
        d = random_diagram(rng, max_nodes=6, binary=True)
        table = brute_joint(d)
        q, g = random_event(rng, d), random_event(rng, d)
        if brute_conditional(table, UNIVERSAL, g) == 0:
            continue
        assert abs(infer(d, q, g) - brute_conditional(table, q, g)) <= TOL
        done += 1


@criterion(9, "weak-modularity editing: only AprilFools and PhoneCall go stale")
def test_weak_modularity_editing():
    d = holmes_diagram()
    e, report = add_node(d, DiagramNode("AprilFools"), [("AprilFools", "PhoneCall")])
    assert e.stale == {"AprilFools", "PhoneCall"}
    assert report.stale_nodes == {"AprilFools", "PhoneCall"}
    for name in ("Alarm", "Burglary", "Earthquake", "Radio"):
        assert e.cpts[name] == d.cpts[name]
        assert serialize_diagram(e).count(name) >= 1
        for key, row in d.cpts[name].rows.items():
            assert e.cpts[name].rows[key] == row
            assert all(a.hex() == b.hex() for a, b in zip(map(float, e.cpts[name].rows[key]), map(float, row)))
    gone, report = delete_node(d, "Radio")
    assert gone.stale == frozenset()
    assert report.stale_nodes == frozenset()


@criterion(10, "explaining away on the Holmes fixture")
def test_explaining_away():
    d = holmes_diagram()
    burglary, alarm, quake = Event(Burglary="true"), Event(Alarm="true"), Event(Earthquake="true")
    table = brute_joint(d)
    prior = brute_conditional(table, burglary, UNIVERSAL)
    given_alarm = brute_conditional(table, burglary, alarm)
    given_both = brute_conditional(table, burglary, alarm & quake)
    assert given_alarm > prior
    assert given_both < given_alarm
    assert infer(d, burglary, alarm) == pytest.approx(given_alarm, abs=TOL)
    assert infer(d, burglary, alarm & quake) == pytest.approx(given_both, abs=TOL)


@criterion(11, "noisy-OR: two-cause product exact, rows monotone in the cause set")
def test_noisy_or():
    q = {"A": F(3, 20), "B": F(2, 7)}
    cpt = noisy_or_cpt("X", ["A", "B"], q)
    assert cpt.rows[("true", "true")][1] == cpt.rows[("true", "false")][1] * cpt.rows[("false", "true")][1]
    assert cpt.rows[("true", "true")][1] == F(3, 20) * F(2, 7)

    rng = np.random.default_rng(11)
    for _ in range(300):
        n = int(rng.integers(1, 5))
        causes = [f"C{i}" for i in range(n)]
        qs = {c: float(rng.uniform(0, 1)) for c in causes}
        leak = float(rng.uniform(0, 1))
        for c in (noisy_or_cpt("X", causes, qs), noisy_or_cpt("X", causes, qs, leak=leak, strict=True)):
            for key, row in c.rows.items():
                for i, v in enumerate(key):
                    if v == "false":
                        more = key[:i] + ("true",) + key[i + 1:]
                        assert c.rows[more][1] <= row[1]


@criterion(12, "parser round trip and exit-code contract on the fixture corpus")
def test_corpus():
    files = sorted(DATA.iterdir()) + sorted(CORPUS.iterdir())
    parsed = 0
    for path in files:
        text = path.read_text()
        if path.suffix == ".cfr":
            try:
                doc = parse_rulebase(text)
            except ValueError:
                continue
            assert parse_rulebase(serialize_rulebase(doc)) == doc
            parsed += 1
        elif path.suffix == ".idg":
            try:
                d = parse_diagram(text)
            except ValueError:
                continue
            assert parse_diagram(serialize_diagram(d)) == d
            parsed += 1
    assert parsed >= 8
    with tempfile.TemporaryDirectory() as out:
        for entry in load_manifest():
            code, _, err = run_cli(expand(entry["args"], out))
            assert code == entry["exit"], (entry["args"], err)
