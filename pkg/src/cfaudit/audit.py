"""Contextual certainty factors and modularity audits against a joint model."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .cf import UNDEFINED, LikelihoodRatio, UndefinedRatioError, cf_from_lambda, ratio
from .joint import (
    UNIVERSAL,
    AllOf,
    EventLike,
    JointModel,
    ModelError,
    Not,
)
from .network import InferenceNetwork

__all__ = [
    "AuditConsistencyError",
    "AuditFinding",
    "AuditReport",
    "CIResult",
    "ContextualCF",
    "EvidenceError",
    "UndefinedContextError",
    "audit_modularity",
    "check_distinct",
    "ci_given",
    "ci_report",
    "contextual_cf",
    "likelihood_ratio",
]

CF_TOL = 1e-6
PROB_TOL = 1e-9


class UndefinedContextError(ModelError):
    pass


class EvidenceError(ModelError):
    pass


class AuditConsistencyError(RuntimeError):
    pass


def _fmt(x) -> str:
    if x is UNDEFINED:
        return "undefined"
    if x == float("inf"):
        return "inf"
    return repr(float(x))


def _weight(model: JointModel, mask: np.ndarray):
    sel = model.weights[mask]
    return sel.sum() if sel.size else model.zero()


def _lr_masks(model, hm, em, cm, h, context) -> LikelihoodRatio:
    ph = _weight(model, hm & cm)
    pnh = _weight(model, ~hm & cm)
    if ph <= 0:
        raise UndefinedContextError(f"p({h} & {context}) = 0: hypothesis impossible in context")
    if pnh <= 0:
        raise UndefinedContextError(
            f"p(~({h}) & {context}) = 0: negated hypothesis impossible in context"
        )
    num = _weight(model, em & hm & cm) / ph
    den = _weight(model, em & ~hm & cm) / pnh
    return ratio(num, den)


def likelihood_ratio(
    model: JointModel, h: EventLike, e_new: EventLike, context: EventLike = UNIVERSAL
) -> LikelihoodRatio:
    """p(e_new | h & context) / p(e_new | ~h & context).

    Returns ``math.inf`` when only the denominator vanishes and
    :data:`UNDEFINED` when both do.
    """
    return _lr_masks(model, model.mask(h), model.mask(e_new), model.mask(context), h, context)


@dataclass(frozen=True)
class ContextualCF:
    hypothesis: EventLike
    evidence: EventLike
    context: EventLike
    likelihood_ratio: LikelihoodRatio
    cf: float

    def to_dict(self) -> dict:
        return {
            "hypothesis": str(self.hypothesis),
            "evidence": str(self.evidence),
            "context": str(self.context),
            "lambda": _fmt(self.likelihood_ratio),
            "cf": _fmt(self.cf),
        }


def contextual_cf(
    model: JointModel, h: EventLike, e_new: EventLike, context: EventLike = UNIVERSAL
) -> ContextualCF:
    """Certainty factor of ``e_new`` for ``h`` given what is already known.

    Raises :class:`UndefinedRatioError` (from the CF layer) for a 0/0 ratio.
    """
    lam = likelihood_ratio(model, h, e_new, context)
    return ContextualCF(h, e_new, context, lam, cf_from_lambda(lam))


@dataclass(frozen=True)
class CIResult:
    """The four conditionals compared by the conditional-independence test.

    ``holds`` is True/False, or None when some conditioning event has
    probability zero (the test is vacuous there).
    """

    p_given_h_ctx: Optional[float]
    p_given_h: Optional[float]
    p_given_not_h_ctx: Optional[float]
    p_given_not_h: Optional[float]
    holds: Optional[bool]

    @property
    def h_side(self) -> Optional[bool]:
        if self.p_given_h_ctx is None or self.p_given_h is None:
            return None
        return bool(abs(self.p_given_h_ctx - self.p_given_h) <= PROB_TOL)

    @property
    def not_h_side(self) -> Optional[bool]:
        if self.p_given_not_h_ctx is None or self.p_given_not_h is None:
            return None
        return bool(abs(self.p_given_not_h_ctx - self.p_given_not_h) <= PROB_TOL)

    def to_dict(self) -> dict:
        def f(x):
            return None if x is None else float(x)

        return {
            "p(target|h,context)": f(self.p_given_h_ctx),
            "p(target|h)": f(self.p_given_h),
            "p(target|~h,context)": f(self.p_given_not_h_ctx),
            "p(target|~h)": f(self.p_given_not_h),
            "holds": self.holds,
        }


def _cond(model, a, given):
    pg = _weight(model, given)
    if pg <= 0:
        return None
    return _weight(model, a & given) / pg


def _ci_masks(model, hm, tm, cm) -> CIResult:
    a = _cond(model, tm, hm & cm)
    b = _cond(model, tm, hm)
    c = _cond(model, tm, ~hm & cm)
    d = _cond(model, tm, ~hm)
    if None in (a, b, c, d):
        return CIResult(a, b, c, d, None)
    holds = bool(abs(a - b) <= PROB_TOL and abs(c - d) <= PROB_TOL)
    return CIResult(a, b, c, d, holds)


def ci_report(
    model: JointModel, h: EventLike, target: EventLike, context: EventLike
) -> CIResult:
    return _ci_masks(model, model.mask(h), model.mask(target), model.mask(context))


def ci_given(model: JointModel, h: EventLike, target: EventLike, context: EventLike) -> Optional[bool]:
    """Is ``target`` independent of ``context`` given ``h`` and given ``~h``?

    Returns None when a conditional is undefined.
    """
    return ci_report(model, h, target, context).holds


def check_distinct(model: JointModel, members: Sequence[EventLike]) -> None:
    """Raise :class:`EvidenceError` if any member logically entails another."""
    masks = [model.mask(m) for m in members]
    for i, j in itertools.permutations(range(len(members)), 2):
        if not (masks[i] & ~masks[j]).any():
            raise EvidenceError(
                f"evidence items are not logically distinct: {members[i]} entails {members[j]}"
            )


@dataclass(frozen=True)
class AuditFinding:
    kind: str  # modularity-violation | ci-violation | undefined-context
    hypothesis: str
    evidence: str
    context: str
    baseline: Optional[ContextualCF] = None
    contextual: Optional[ContextualCF] = None
    ci: Optional[CIResult] = None
    message: str = ""
    site: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "hypothesis": self.hypothesis,
            "evidence": self.evidence,
            "context": self.context,
            "message": self.message,
        }
        if self.baseline is not None:
            d["baseline"] = self.baseline.to_dict()
        if self.contextual is not None:
            d["contextual"] = self.contextual.to_dict()
        if self.ci is not None:
            d["ci"] = self.ci.to_dict()
        return d


_KIND_ORDER = {"modularity-violation": 0, "ci-violation": 1, "undefined-context": 2}


@dataclass(frozen=True)
class AuditReport:
    findings: tuple[AuditFinding, ...]
    sites_checked: int
    excluded_sites: int
    mismatched_sites: tuple[tuple, ...]

    def of_kind(self, kind: str) -> list[AuditFinding]:
        return [f for f in self.findings if f.kind == kind]

    def sites(self, kind: str) -> set[tuple]:
        return {f.site for f in self.findings if f.kind == kind}

    @property
    def violations(self) -> list[AuditFinding]:
        return [f for f in self.findings if f.kind != "undefined-context"]

    @property
    def equivalence_holds(self) -> bool:
        return not self.mismatched_sites

    def to_dict(self) -> dict:
        return {
            "sites_checked": self.sites_checked,
            "excluded_sites": self.excluded_sites,
            "equivalence_holds": self.equivalence_holds,
            "mismatched_sites": [list(map(str, s)) for s in self.mismatched_sites],
            "findings": [f.to_dict() for f in self.findings],
        }


def _label(event: EventLike) -> Optional[str]:
    """Variable name of a single-variable event, used to match network nodes."""
    while isinstance(event, Not):
        event = event.inner
    names = event.variables()
    return names[0] if len(names) == 1 else None


def _on_path(net: InferenceNetwork, ctx_label, target_label, h_label) -> bool:
    if None in (ctx_label, target_label, h_label):
        return False
    nodes = net.propositions
    if not {ctx_label, target_label, h_label} <= nodes:
        return False
    return net.reaches(ctx_label, target_label) and net.reaches(target_label, h_label)


def audit_modularity(
    model: JointModel,
    h: EventLike,
    evidence: Sequence[EventLike],
    net: Optional[InferenceNetwork] = None,
    strict: bool = False,
) -> AuditReport:
    """Compare every contextual CF with its context-free baseline.

    For each evidence item, contexts are all truth assignments to every
    nonempty subset of the other items. When ``net`` is given, contexts
    containing an item that reaches the target on a path into ``h`` are
    skipped. Sites where the CF moves by more than ``CF_TOL`` are
    modularity violations; sites failing :func:`ci_given` are CI
    violations. The two site sets are cross-checked; with ``strict`` a
    mismatch raises :class:`AuditConsistencyError`.
    """
    members = list(evidence)
    check_distinct(model, members)
    h_label = _label(h)
    hs = str(h)
    hm = model.mask(h)
    masks = [model.mask(m) for m in members]
    findings: list[AuditFinding] = []
    checked = excluded = 0
    defined_sites: set[tuple] = set()

    for i, target in enumerate(members):
        ts = str(target)
        try:
            base = contextual_cf(model, h, target, UNIVERSAL)
        except (UndefinedContextError, UndefinedRatioError) as exc:
            findings.append(
                AuditFinding(
                    "undefined-context", hs, ts, str(UNIVERSAL),
                    message=f"baseline CF undefined: {exc}", site=(i, ()),
                )
            )
            continue
        others = [j for j in range(len(members)) if j != i]
        for r in range(1, len(others) + 1):
            for subset in itertools.combinations(others, r):
                if net is not None and any(
                    _on_path(net, _label(members[j]), _label(target), h_label) for j in subset
                ):
                    excluded += 2 ** len(subset)
                    continue
                for truth in itertools.product((True, False), repeat=len(subset)):
                    key = (i, tuple(zip(subset, truth)))
                    parts = [members[j] if t else ~members[j] for j, t in zip(subset, truth)]
                    ctx = parts[0] if len(parts) == 1 else AllOf(tuple(parts))
                    cm = np.logical_and.reduce(
                        [masks[j] if t else ~masks[j] for j, t in zip(subset, truth)]
                    )
                    cs = str(ctx)
                    checked += 1
                    ci = _ci_masks(model, hm, masks[i], cm)
                    if ci.holds is False:
                        side = "~h" if ci.not_h_side is False else "h"
                        findings.append(
                            AuditFinding(
                                "ci-violation", hs, ts, cs, ci=ci, site=key,
                                message=f"{ts} depends on {cs} given {side}",
                            )
                        )
                    try:
                        lam = _lr_masks(model, hm, masks[i], cm, h, ctx)
                        cur = ContextualCF(h, target, ctx, lam, cf_from_lambda(lam))
                    except (UndefinedContextError, UndefinedRatioError) as exc:
                        findings.append(
                            AuditFinding(
                                "undefined-context", hs, ts, cs, baseline=base,
                                message=str(exc), site=key,
                            )
                        )
                        continue
                    defined_sites.add(key)
                    if abs(cur.cf - base.cf) > CF_TOL:
                        findings.append(
                            AuditFinding(
                                "modularity-violation", hs, ts, cs, base, cur, site=key,
                                message=(
                                    f"CF({hs},{ts}) is {_fmt(base.cf)} alone but "
                                    f"{_fmt(cur.cf)} once {cs} is known"
                                ),
                            )
                        )

    findings.sort(key=lambda f: (f.site, _KIND_ORDER[f.kind]))
    mod = {f.site for f in findings if f.kind == "modularity-violation"}
    ci_sites = {f.site for f in findings if f.kind == "ci-violation"} & defined_sites
    mismatched = tuple(sorted(mod ^ ci_sites))
    if strict and mismatched:
        raise AuditConsistencyError(
            f"modularity and conditional-independence violations disagree at {len(mismatched)} site(s)"
        )
    return AuditReport(tuple(findings), checked, excluded, mismatched)
