"""Certainty-factor arithmetic.

A certainty factor (CF) is a belief-update number in [-1, 1]. It is a
monotone transform of the likelihood ratio

    lambda(H, E, e) = p(E | H & e) / p(E | ~H & e)

and the parallel-combination function below is exactly multiplication of
likelihood ratios carried through that transform.

All functions accept plain floats or :class:`fractions.Fraction`; rational
inputs give exact rational outputs.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Real
from typing import Iterable, Union

__all__ = [
    "UNDEFINED",
    "CFError",
    "CFRangeError",
    "ContradictionError",
    "UndefinedRatioError",
    "chain_sequential",
    "cf_from_lambda",
    "combine_antecedent",
    "combine_parallel",
    "lambda_from_cf",
    "ratio",
]

TOLERANCE = 1e-9


class _Undefined:
    """Sentinel for a 0/0 likelihood ratio."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEFINED"

    def __str__(self) -> str:
        return "undefined"

    def __reduce__(self):
        return (_Undefined, ())


UNDEFINED = _Undefined()

Number = Union[float, Fraction]
LikelihoodRatio = Union[float, Fraction, _Undefined]


class CFError(ValueError):
    pass


class CFRangeError(CFError):
    pass


class UndefinedRatioError(CFError):
    def __init__(self, message: str = "evidence impossible under both H and ~H"):
        super().__init__(message)


class ContradictionError(CFError):
    def __init__(self, message: str = "contradictory categorical evidence"):
        super().__init__(message)


def _check_cf(x: Number, name: str = "cf") -> None:
    if not isinstance(x, Real) or math.isnan(x):
        raise CFRangeError(f"{name} must be a real number, got {x!r}")
    if x < -1 or x > 1:
        raise CFRangeError(f"{name} must lie in [-1, 1], got {x!r}")


def ratio(numerator: Number, denominator: Number) -> LikelihoodRatio:
    """Divide two probabilities, keeping the infinite and 0/0 cases distinct."""
    if denominator == 0:
        return math.inf if numerator > 0 else UNDEFINED
    return numerator / denominator


def cf_from_lambda(lam: LikelihoodRatio) -> Number:
    """Map a likelihood ratio to a certainty factor.

    ``(lam - 1) / lam`` for ``lam >= 1`` and ``lam - 1`` for ``lam <= 1``;
    infinity maps to 1 and zero to -1.

    >>> cf_from_lambda(0.5)
    -0.5
    >>> cf_from_lambda(4)
    0.75
    """
    if lam is UNDEFINED or (isinstance(lam, float) and math.isnan(lam)):
        raise UndefinedRatioError()
    if not isinstance(lam, Real):
        raise CFRangeError(f"likelihood ratio must be a real number, got {lam!r}")
    if lam < 0:
        raise CFRangeError(f"likelihood ratio must be nonnegative, got {lam!r}")
    if lam == math.inf:
        return 1.0
    if lam >= 1:
        if isinstance(lam, int):
            lam = float(lam)
        return (lam - 1) / lam
    return lam - 1


def lambda_from_cf(cf: Number) -> LikelihoodRatio:
    """Inverse of :func:`cf_from_lambda`; ``cf == 1`` gives ``math.inf``."""
    _check_cf(cf)
    if cf == 1:
        return math.inf
    if cf >= 0:
        if isinstance(cf, int):
            cf = float(cf)
        return 1 / (1 - cf)
    return cf + 1


def combine_parallel(x: Number, y: Number) -> Number:
    """Combine two CFs bearing on the same hypothesis.

    Same-sign inputs reinforce each other; mixed-sign inputs use the
    ``(x + y) / (1 - min(|x|, |y|))`` form, which makes this function the
    image of likelihood-ratio multiplication under :func:`cf_from_lambda`.
    Combining +1 with -1 raises :class:`ContradictionError`.
    """
    _check_cf(x, "x")
    _check_cf(y, "y")
    if (x == 1 and y == -1) or (x == -1 and y == 1):
        raise ContradictionError()
    if x >= 0 and y >= 0:
        return x + y * (1 - x)
    if x <= 0 and y <= 0:
        return x + y * (1 + x)
    return (x + y) / (1 - min(abs(x), abs(y)))


def chain_sequential(cf_rule: Number, cf_antecedent: Number) -> Number:
    """Attenuate a rule's CF by the belief in its antecedent.

    A disbelieved antecedent (negative CF) contributes nothing.
    """
    _check_cf(cf_rule, "cf_rule")
    _check_cf(cf_antecedent, "cf_antecedent")
    return cf_rule * max(0, cf_antecedent)


def combine_antecedent(kind: str, parts: Iterable[Number]) -> Number:
    """Minimum of the parts for ``"and"``, maximum for ``"or"``."""
    values = list(parts)
    if not values:
        raise CFError("antecedent combination needs at least one part")
    for v in values:
        _check_cf(v, "part")
    kind = kind.lower()
    if kind == "and":
        return min(values)
    if kind == "or":
        return max(values)
    raise CFError(f"unknown antecedent kind {kind!r}")
