"""Command-line front end.

Exit codes: 0 success with nothing to report, 1 findings reported,
2 usage or input error. Reports go to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from .audit import AuditConsistencyError, audit_modularity
from .cf import UNDEFINED
from .diagram_io import parse_diagram, serialize_diagram
from .influence import (
    CPT,
    DiagramNode,
    missing_arc_ci_detail,
    add_node,
    delete_node,
    infer,
    set_cpt,
    to_joint,
    validate,
)
from .joint import Event, parse_event, parse_urn_spec, urn_model
from .network import build_network, find_convergent_links, lint_rules, propagate
from .rulebase import parse_rulebase

EXIT_OK, EXIT_FINDINGS, EXIT_ERROR = 0, 1, 2

URN_HELP = """\
model is a .idg diagram file or an urn problem written
  urn:<urn>,<urn>,...[;draws=N][;replace=true|false]
where each <urn> lists ball counts per colour, e.g. 1W2B for one white and
two black. Urns are equally likely a priori; draws defaults to 2 and
replace to true. The model has variables urn (outcomes 1..k) and
draw1..drawN (outcomes are the colour letters). Without --evidence, an urn
audit uses drawK=<first colour> for every draw.

events are comma-joined terms node=outcome or node!=outcome; an empty
string is the universal event."""


class UsageError(ValueError):
    pass


def _num(x):
    if x is UNDEFINED:
        return "undefined"
    if isinstance(x, Fraction):
        return str(x)
    if x == math.inf:
        return "inf"
    return repr(float(x))


def _json_num(x):
    if x is UNDEFINED:
        return "undefined"
    if x == math.inf:
        return "inf"
    return float(x)


def _emit(args, payload: dict, text_lines: list[str]) -> None:
    if args.format == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            print(line)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _parse_cf_assignment(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    try:
        if not sep:
            raise ValueError
        return name.strip(), float(value)
    except ValueError:
        raise UsageError(f"bad evidence {text!r}; expected proposition=cf") from None


def cmd_propagate(args) -> int:
    doc = parse_rulebase(_read(args.rulebase))
    evidence = dict(doc.evidence)
    evidence.update(_parse_cf_assignment(e) for e in args.evidence)
    net = build_network(doc.rules)
    beliefs = propagate(net, evidence)
    hyps = sorted(net.hypotheses)
    _emit(
        args,
        {
            "hypotheses": {h: _json_num(beliefs[h]) for h in hyps},
            "evidence": {k: _json_num(v) for k, v in sorted(evidence.items())},
        },
        [f"{h}\t{_num(beliefs[h])}" for h in hyps],
    )
    return EXIT_OK


def cmd_lint(args) -> int:
    doc = parse_rulebase(_read(args.rulebase))
    findings = lint_rules(doc.rules)
    info = []
    if not any(f.kind == "cycle" for f in findings):
        info = find_convergent_links(build_network(doc.rules))
    blocking = [f for f in findings if not f.exempt]
    lines = []
    for f in findings:
        tag = "exempt" if f.exempt else "finding"
        lines.append(f"{tag}: {f.kind}: {f.message}")
    for h, sources in info:
        lines.append(
            f"info: convergent links into {h} from {', '.join(sources)}; "
            "sound only if they are conditionally independent given the hypothesis and its negation"
        )
    _emit(
        args,
        {
            "findings": [f.to_dict() for f in findings],
            "convergent": [{"hypothesis": h, "sources": list(s)} for h, s in info],
        },
        lines,
    )
    return EXIT_FINDINGS if blocking else EXIT_OK


def _load_model(spec: str):
    if spec.startswith("urn:"):
        urns, draws, replace = parse_urn_spec(spec)
        model = urn_model(urns, draws, replace)
        colour = model.outcomes("draw1")[0]
        default = [Event({f"draw{k + 1}": colour}) for k in range(draws)]
        return model, default
    return to_joint(parse_diagram(_read(spec))), None


def cmd_audit(args) -> int:
    model, default = _load_model(args.model)
    h = parse_event(args.hypothesis)
    evidence = [parse_event(e) for e in args.evidence] or default
    if not evidence:
        raise UsageError("audit needs at least one --evidence event")
    net = None
    if args.network:
        net = build_network(parse_rulebase(_read(args.network)).rules)
    report = audit_modularity(model, h, evidence, net=net, strict=args.strict)
    lines = [
        f"checked {report.sites_checked} site(s), excluded {report.excluded_sites}; "
        f"{len(report.of_kind('modularity-violation'))} modularity violation(s), "
        f"{len(report.of_kind('ci-violation'))} CI violation(s)"
    ]
    for f in report.findings:
        lines.append(f"{f.kind}: evidence {f.evidence} | context {f.context}: {f.message}")
        if f.ci is not None:
            c = f.ci
            lines.append(
                f"    p(E|H,e)={_num(c.p_given_h_ctx)} p(E|H)={_num(c.p_given_h)} "
                f"p(E|~H,e)={_num(c.p_given_not_h_ctx)} p(E|~H)={_num(c.p_given_not_h)}"
            )
        if f.contextual is not None:
            lines.append(
                f"    lambda {_num(f.baseline.likelihood_ratio)} -> {_num(f.contextual.likelihood_ratio)}"
            )
    if not report.equivalence_holds:
        print(
            f"warning: modularity and CI violations disagree at {len(report.mismatched_sites)} site(s)",
            file=sys.stderr,
        )
    _emit(args, report.to_dict(), lines)
    return EXIT_FINDINGS if report.violations else EXIT_OK


def cmd_infer(args) -> int:
    d = parse_diagram(_read(args.diagram))
    p = infer(d, parse_event(args.query), parse_event(args.given))
    payload = {"query": args.query, "given": args.given, "probability": float(p)}
    if isinstance(p, Fraction):
        payload["exact"] = str(p)
    _emit(args, payload, [_num(p)])
    return EXIT_OK


def cmd_check_ci(args) -> int:
    d = parse_diagram(_read(args.diagram))
    holds, rows = missing_arc_ci_detail(d, args.a, args.b, parse_event(args.given))
    lines = [f"independent: {str(holds).lower()}"]
    for x, y, pab, prod in rows:
        lines.append(f"  p({args.a}={x},{args.b}={y}|given)={_num(pab)}  product={_num(prod)}")
    payload = {
        "a": args.a,
        "b": args.b,
        "given": args.given,
        "independent": holds,
        "rows": [
            {"a": x, "b": y, "joint": float(pab), "product": float(prod)} for x, y, pab, prod in rows
        ],
    }
    _emit(args, payload, lines)
    return EXIT_OK if holds else EXIT_FINDINGS


def _parse_rows(items: list[str], d, node: str) -> dict:
    rows = {}
    parents = d.parents(node)
    for item in items:
        key, sep, values = item.rpartition("=")
        if not sep:
            raise UsageError(f"bad --row {item!r}; expected key=p1,p2,...")
        parts = tuple(key.split(",")) if parents else ()
        if len(parts) != len(parents) or (not parents and key):
            raise UsageError(f"row key {key!r} does not match parents {list(parents)}")
        try:
            probs = tuple(Fraction(v.strip()) if "/" in v else float(v) for v in values.split(","))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"non-numeric probability in --row {item!r}") from None
        rows[parts] = probs
    return rows


def cmd_edit(args) -> int:
    d = parse_diagram(_read(args.diagram))
    if args.action == "add-node":
        node = DiagramNode(args.name, tuple(o.strip() for o in args.outcomes.split(",")))
        arcs = [(p, args.name) for p in args.parent] + [(args.name, c) for c in args.child]
        d, report = add_node(d, node, arcs)
        payload, lines = report.to_dict(), [
            f"edit: {report.edited}",
            f"stale: {', '.join(sorted(report.stale_nodes)) or '(none)'}",
            f"untouched: {', '.join(sorted(report.untouched_nodes)) or '(none)'}",
        ]
    elif args.action == "delete-node":
        d, report = delete_node(d, args.name)
        payload, lines = report.to_dict(), [
            f"edit: {report.edited}",
            f"stale: {', '.join(sorted(report.stale_nodes)) or '(none)'}",
            f"untouched: {', '.join(sorted(report.untouched_nodes)) or '(none)'}",
        ]
    else:
        if args.name not in d.nodes:
            raise UsageError(f"unknown node {args.name!r}")
        cpt = CPT(args.name, d.parents(args.name), _parse_rows(args.row, d, args.name))
        d = set_cpt(d, cpt)
        payload = {"edited": f"set-cpt {args.name}", "stale_nodes": sorted(d.stale)}
        lines = [f"edit: set-cpt {args.name}", f"still stale: {', '.join(sorted(d.stale)) or '(none)'}"]
    Path(args.output).write_text(serialize_diagram(d))
    _emit(args, payload, lines)
    return EXIT_OK


def cmd_validate(args) -> int:
    d = parse_diagram(_read(args.diagram))
    findings = validate(d)
    _emit(
        args,
        {"findings": [f.to_dict() for f in findings]},
        [f"{f.kind}: {f.message}" for f in findings],
    )
    return EXIT_FINDINGS if findings else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentParser(add_help=False)
    fmt.add_argument("--format", choices=("text", "json"), default="text")

    parser = argparse.ArgumentParser(
        prog="cfaudit",
        description="Certainty-factor propagation, rule-base linting, modularity audits "
        "and influence-diagram inference.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("propagate", parents=[fmt], help="propagate evidence CFs through a rule base")
    p.add_argument("rulebase")
    p.add_argument("--evidence", action="append", default=[], metavar="PROP=CF")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("lint", parents=[fmt], help="report divergent links and cycles")
    p.add_argument("rulebase")
    p.set_defaults(func=cmd_lint)

    p = sub.add_parser(
        "audit",
        parents=[fmt],
        help="check whether rule CFs would be context-free",
        epilog=URN_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    p.add_argument("model", help="diagram file or urn:<spec>")
    p.add_argument("--hypothesis", required=True, metavar="EVENT")
    p.add_argument("--evidence", action="append", default=[], metavar="EVENT")
    p.add_argument("--network", metavar="RULEBASE", help="skip contexts lying on a path through the target")
    p.add_argument("--strict", action="store_true", help="fail if the two violation criteria disagree")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("infer", parents=[fmt], help="posterior probability from a diagram")
    p.add_argument("diagram")
    p.add_argument("--query", required=True, metavar="EVENT")
    p.add_argument("--given", default="", metavar="EVENT")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("check-ci", parents=[fmt], help="test independence of two unlinked nodes")
    p.add_argument("diagram")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--given", default="", metavar="EVENT")
    p.set_defaults(func=cmd_check_ci)

    p = sub.add_parser("validate", parents=[fmt], help="check a diagram's structure and tables")
    p.add_argument("diagram")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("edit", help="add or delete a node, or install a reassessed CPT")
    edit = p.add_subparsers(dest="action", required=True)
    for name in ("add-node", "delete-node", "set-cpt"):
        e = edit.add_parser(name, parents=[fmt])
        e.add_argument("diagram")
        e.add_argument("name", metavar="NODE")
        e.add_argument("-o", "--output", required=True)
        if name == "add-node":
            e.add_argument("--outcomes", default="true,false")
            e.add_argument("--parent", action="append", default=[])
            e.add_argument("--child", action="append", default=[])
        if name == "set-cpt":
            e.add_argument(
                "--row", action="append", default=[], metavar="KEY=P1,P2",
                help="parent outcomes (comma-joined, parents in name order; empty for roots) = distribution",
            )
        e.set_defaults(func=cmd_edit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, AuditConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
