"""Reference problems: the urn experiments and the Holmes burglary story.

The Holmes numbers are illustrative configuration, not measured values.
"""

from __future__ import annotations

from fractions import Fraction

from .influence import CPT, DiagramNode, InfluenceDiagram, noisy_or_cpt
from .joint import JointModel, urn_model
from .network import Rule

F = Fraction

# counts of (W)hite and (B)lack balls per candidate urn
TWO_URNS = [{"W": 1, "B": 2}, {"W": 2, "B": 1}]
THREE_URNS = [{"W": 1, "B": 1}, {"W": 2, "B": 0}, {"W": 0, "B": 2}]

HOLMES_PRIORS = {"Burglary": 0.01, "Earthquake": 0.001}
HOLMES_ALARM_Q = {"Burglary": 0.05, "Earthquake": 0.3}
HOLMES_ALARM_LEAK = 0.999
HOLMES_PHONE = {"true": 0.8, "false": 0.05}
HOLMES_RADIO = {"true": 0.9, "false": 0.001}


def two_urn_model(replace: bool = True, draws: int = 2) -> JointModel:
    return urn_model(TWO_URNS, draws, replace)


def three_urn_model(replace: bool = True, draws: int = 2) -> JointModel:
    return urn_model(THREE_URNS, draws, replace)


def three_urn_diagram(reversed_arc: bool = False) -> InfluenceDiagram:
    """Identity of urn -> Color of ball drawn, or the same joint with the arc reversed."""
    identity = DiagramNode("Identity", ("H1", "H2", "H3"))
    color = DiagramNode("Color", ("White", "Black"))
    if not reversed_arc:
        cpts = [
            CPT("Identity", (), {(): (F(1, 3), F(1, 3), F(1, 3))}),
            CPT(
                "Color",
                ("Identity",),
                {
                    ("H1",): (F(1, 2), F(1, 2)),
                    ("H2",): (F(1), F(0)),
                    ("H3",): (F(0), F(1)),
                },
            ),
        ]
    else:
        cpts = [
            CPT("Color", (), {(): (F(1, 2), F(1, 2))}),
            CPT(
                "Identity",
                ("Color",),
                {
                    ("White",): (F(1, 3), F(2, 3), F(0)),
                    ("Black",): (F(1, 3), F(0), F(2, 3)),
                },
            ),
        ]
    return InfluenceDiagram.from_cpts([identity, color], cpts)


def _binary_cpt(node: str, parent: str, p_true: dict) -> CPT:
    return CPT(
        node,
        (parent,),
        {(v,): (p, 1 - p) for v, p in p_true.items()},
    )


def holmes_diagram(
    priors=HOLMES_PRIORS,
    alarm_q=HOLMES_ALARM_Q,
    alarm_leak=HOLMES_ALARM_LEAK,
    phone=HOLMES_PHONE,
    radio=HOLMES_RADIO,
) -> InfluenceDiagram:
    names = ["Alarm", "Burglary", "Earthquake", "PhoneCall", "Radio"]
    nodes = [DiagramNode(n) for n in names]
    cpts = [
        CPT("Burglary", (), {(): (priors["Burglary"], 1 - priors["Burglary"])}),
        CPT("Earthquake", (), {(): (priors["Earthquake"], 1 - priors["Earthquake"])}),
        noisy_or_cpt("Alarm", ["Burglary", "Earthquake"], alarm_q, leak=alarm_leak),
        _binary_cpt("PhoneCall", "Alarm", phone),
        _binary_cpt("Radio", "Earthquake", radio),
    ]
    return InfluenceDiagram.from_cpts(nodes, cpts)


def holmes_rules() -> list[Rule]:
    return [
        Rule("r1", "Alarm", "Burglary", 0.7),
        Rule("r2", "Alarm", "Earthquake", 0.4),
        Rule("r3", "PhoneCall", "Alarm", 0.9),
        Rule("r4", "Radio", "Earthquake", 0.8),
    ]
