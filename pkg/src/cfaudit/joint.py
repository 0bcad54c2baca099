"""Explicit discrete joint distributions and events over them.

A :class:`JointModel` stores one weight per full assignment in an
n-dimensional numpy array (one axis per variable). Weights may be floats
or :class:`fractions.Fraction` objects; the latter keep every derived
probability exact.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

__all__ = [
    "AllOf",
    "Event",
    "ImpossibleConditionError",
    "JointModel",
    "ModelError",
    "Not",
    "UNIVERSAL",
    "conditional",
    "parse_event",
    "parse_urn_spec",
    "probability",
    "urn_model",
]

NORMALIZATION_TOL = 1e-9
MAX_CELLS = 2_000_000


class ModelError(ValueError):
    pass


class ImpossibleConditionError(ModelError):
    def __init__(self, message: str = "conditioning on impossible event"):
        super().__init__(message)


class JointModel:
    """Discrete joint distribution over named finite variables."""

    def __init__(
        self,
        variables: Sequence[tuple[str, Sequence[str]]],
        weights: Union[np.ndarray, Mapping[tuple[str, ...], float]],
    ):
        self.variables: tuple[tuple[str, tuple[str, ...]], ...] = tuple(
            (name, tuple(outcomes)) for name, outcomes in variables
        )
        names = [n for n, _ in self.variables]
        if len(set(names)) != len(names):
            raise ModelError("variable names must be unique")
        for name, outcomes in self.variables:
            if len(outcomes) == 0 or len(set(outcomes)) != len(outcomes):
                raise ModelError(f"variable {name!r} needs distinct, nonempty outcomes")
        shape = tuple(len(o) for _, o in self.variables)
        if math.prod(shape) > MAX_CELLS:
            raise ModelError(f"joint table of {math.prod(shape)} cells is too large")

        if isinstance(weights, Mapping):
            exact = any(isinstance(w, Fraction) for w in weights.values())
            table = np.zeros(shape, dtype=object if exact else float)
            if exact:
                table[...] = Fraction(0)
            index = [{o: i for i, o in enumerate(outs)} for _, outs in self.variables]
            for key, w in weights.items():
                if len(key) != len(shape):
                    raise ModelError(f"assignment {key!r} has the wrong length")
                try:
                    pos = tuple(index[i][v] for i, v in enumerate(key))
                except KeyError as exc:
                    raise ModelError(f"unknown outcome in assignment {key!r}") from exc
                table[pos] = w
        else:
            table = np.asarray(weights)
            if table.dtype != object:
                table = table.astype(float)
            if table.shape != shape:
                raise ModelError(f"weights have shape {table.shape}, expected {shape}")

        if any(w < 0 for w in table.flat):
            raise ModelError("weights must be nonnegative")
        total = table.sum()
        if abs(total - 1) > NORMALIZATION_TOL:
            raise ModelError(f"weights sum to {float(total)!r}, not 1")
        table.flags.writeable = False
        self.weights = table
        self.exact = table.dtype == object
        self._axis = {name: i for i, name in enumerate(names)}
        self._masks: dict = {}

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.variables)

    def outcomes(self, name: str) -> tuple[str, ...]:
        try:
            return self.variables[self._axis[name]][1]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def axis(self, name: str) -> int:
        try:
            return self._axis[name]
        except KeyError:
            raise ModelError(f"unknown variable {name!r}") from None

    def mask(self, event: "EventLike") -> np.ndarray:
        m = self._masks.get(event)
        if m is None:
            m = event.mask(self)
            m.flags.writeable = False
            self._masks[event] = m
        return m

    def assignments(self) -> Iterable[tuple[str, ...]]:
        return itertools.product(*(o for _, o in self.variables))

    def zero(self):
        return Fraction(0) if self.exact else 0.0

    def __repr__(self) -> str:
        vs = ", ".join(f"{n}{list(o)}" for n, o in self.variables)
        return f"JointModel({vs})"


class _EventBase:
    def __and__(self, other: "EventLike") -> "EventLike":
        if isinstance(self, Event) and isinstance(other, Event):
            if not set(self.variables()) & set(other.variables()):
                return Event(dict(self.constraints) | dict(other.constraints))
        parts: list = []
        for e in (self, other):
            if isinstance(e, AllOf):
                parts.extend(e.parts)
            elif not (isinstance(e, Event) and not e.constraints):
                parts.append(e)
        if not parts:
            return UNIVERSAL
        if len(parts) == 1:
            return parts[0]
        return AllOf(tuple(parts))

    def __invert__(self) -> "EventLike":
        if isinstance(self, Not):
            return self.inner
        return Not(self)


@dataclass(frozen=True, init=False)
class Event(_EventBase):
    """Product-set event: each constrained variable takes a value in a set.

    ``Event({})`` is the universal event. Values may be a single outcome
    or an iterable of outcomes.
    """

    constraints: tuple[tuple[str, frozenset[str]], ...]

    def __init__(self, constraints: Mapping[str, Union[str, Iterable[str]]] = None, **kw):
        merged = dict(constraints or {})
        merged.update(kw)
        items = []
        for name, values in merged.items():
            vals = frozenset((values,)) if isinstance(values, str) else frozenset(values)
            if not vals:
                raise ModelError(f"event constraint on {name!r} is empty")
            items.append((name, vals))
        object.__setattr__(self, "constraints", tuple(sorted(items)))

    def variables(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.constraints)

    def mask(self, model: JointModel) -> np.ndarray:
        shape = model.weights.shape
        m = np.ones(shape, dtype=bool)
        for name, vals in self.constraints:
            outs = model.outcomes(name)
            unknown = vals - set(outs)
            if unknown:
                raise ModelError(f"unknown outcome(s) {sorted(unknown)} for {name!r}")
            ax = model.axis(name)
            sel = np.array([o in vals for o in outs])
            view = [1] * len(shape)
            view[ax] = len(outs)
            m = m & sel.reshape(view)
        return m

    def __str__(self) -> str:
        if not self.constraints:
            return "<empty>"
        return ",".join(
            f"{n}={'|'.join(sorted(v))}" for n, v in self.constraints
        )


@dataclass(frozen=True)
class AllOf(_EventBase):
    parts: tuple

    def variables(self) -> tuple[str, ...]:
        return tuple(sorted(set().union(*(p.variables() for p in self.parts))))

    def mask(self, model: JointModel) -> np.ndarray:
        m = np.ones(model.weights.shape, dtype=bool)
        for p in self.parts:
            m = m & model.mask(p)
        return m

    def __str__(self) -> str:
        return ",".join(str(p) for p in self.parts)


@dataclass(frozen=True)
class Not(_EventBase):
    inner: object

    def variables(self) -> tuple[str, ...]:
        return self.inner.variables()

    def mask(self, model: JointModel) -> np.ndarray:
        return ~model.mask(self.inner)

    def __str__(self) -> str:
        inner = self.inner
        if isinstance(inner, Event) and len(inner.constraints) == 1:
            name, vals = inner.constraints[0]
            return f"{name}!={'|'.join(sorted(vals))}"
        return f"!({inner})"


EventLike = Union[Event, AllOf, Not]
UNIVERSAL = Event({})


def probability(model: JointModel, event: EventLike):
    """Total weight of the assignments satisfying ``event``."""
    sel = model.weights[model.mask(event)]
    return sel.sum() if sel.size else model.zero()


def conditional(model: JointModel, event: EventLike, given: EventLike):
    """p(event | given); raises :class:`ImpossibleConditionError` if p(given) = 0."""
    pg = probability(model, given)
    if pg <= 0:
        raise ImpossibleConditionError(f"conditioning on impossible event {given}")
    return probability(model, event & given) / pg


def parse_event(text: str) -> EventLike:
    """Parse ``node=outcome`` / ``node!=outcome`` terms joined by commas.

    An empty string is the universal event. ``node=a|b`` allows either value.
    """
    event: EventLike = UNIVERSAL
    text = text.strip()
    if not text:
        return event
    for term in text.split(","):
        term = term.strip()
        negate = "!=" in term
        name, sep, value = term.partition("!=" if negate else "=")
        name, value = name.strip(), value.strip()
        if not sep or not name or not value:
            raise ModelError(f"malformed event term {term!r}; expected node=outcome")
        atom = Event({name: [v.strip() for v in value.split("|")]})
        event = event & (~atom if negate else atom)
    return event


# --- urn problems -----------------------------------------------------------


def urn_model(
    urns: Sequence[Mapping[str, int]],
    draws: int,
    replace: bool,
    priors: Sequence[Fraction] = None,
    hypothesis: str = "urn",
) -> JointModel:
    """Joint over (urn identity, draw1..drawN) for the classic urn problems.

    ``urns`` gives ball counts per colour for each candidate urn; the urn
    variable takes outcomes ``"1"``..``"k"`` and each draw variable takes the
    colour labels. Weights are exact fractions.
    """
    if draws < 1:
        raise ModelError("need at least one draw")
    colours: list[str] = []
    for u in urns:
        for c in u:
            if c not in colours:
                colours.append(c)
    k = len(urns)
    if priors is None:
        priors = [Fraction(1, k)] * k
    priors = [Fraction(p) for p in priors]
    if len(priors) != k or sum(priors) != 1:
        raise ModelError("priors must give one probability per urn and sum to 1")

    weights = {}
    for i, (u, prior) in enumerate(zip(urns, priors)):
        total = sum(u.values())
        if total == 0 or (not replace and draws > total):
            raise ModelError(f"urn {i + 1} has too few balls for {draws} draws")
        for seq in itertools.product(colours, repeat=draws):
            w = prior
            left = dict(u)
            n = total
            for c in seq:
                have = left.get(c, 0)
                if have == 0:
                    w = Fraction(0)
                    break
                w *= Fraction(have, n)
                if not replace:
                    left[c] = have - 1
                    n -= 1
            weights[(str(i + 1), *seq)] = w
    variables = [(hypothesis, [str(i + 1) for i in range(k)])]
    variables += [(f"draw{j + 1}", colours) for j in range(draws)]
    return JointModel(variables, weights)


def parse_urn_spec(spec: str) -> tuple[list[dict[str, int]], int, bool]:
    """Parse ``1W2B,2W1B;draws=2;replace=false`` (draws defaults to 2, replace to true)."""
    body = spec[4:] if spec.startswith("urn:") else spec
    head, *opts = [s.strip() for s in body.split(";")]
    urns = []
    for token in head.split(","):
        token = token.strip()
        parts = re.findall(r"(\d+)([A-Za-z]+)", token)
        if not parts or "".join(n + c for n, c in parts) != token:
            raise ModelError(f"bad urn composition {token!r}; expected e.g. 1W2B")
        urns.append({c: int(n) for n, c in parts})
    draws, replace = 2, True
    for opt in opts:
        if not opt:
            continue
        key, _, value = opt.partition("=")
        key, value = key.strip().lower(), value.strip().lower()
        if key == "draws" and value.isdigit():
            draws = int(value)
        elif key == "replace" and value in ("true", "false"):
            replace = value == "true"
        else:
            raise ModelError(f"bad urn option {opt!r}")
    return urns, draws, replace
