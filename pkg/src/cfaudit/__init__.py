"""Certainty-factor inference networks, modularity audits and influence diagrams."""

from .audit import (
    AuditReport,
    ContextualCF,
    audit_modularity,
    ci_given,
    ci_report,
    contextual_cf,
    likelihood_ratio,
)
from .cf import (
    UNDEFINED,
    chain_sequential,
    cf_from_lambda,
    combine_antecedent,
    combine_parallel,
    lambda_from_cf,
)
from .influence import (
    CPT,
    DiagramNode,
    InfluenceDiagram,
    add_node,
    check_missing_arc_ci,
    delete_node,
    infer,
    noisy_or_cpt,
    set_cpt,
    to_joint,
    validate,
)
from .joint import UNIVERSAL, Event, JointModel, conditional, parse_event, probability, urn_model
from .network import And, Or, Prop, Rule, build_network, find_divergent_links, propagate

__version__ = "0.1.0"
