"""
Composable risk-measure descriptions and their evaluator.

Handles:
- Builtins: VaR, ES, mean, essential supremum, constants, entropic, ES mixtures
- Combinators: minimum / maximum over a family of measures
- Discount-ambiguous robust VaR (closed form plus brute-force oracle)
- Syntactic axiom profiles of a measure tree

Sign convention: measures are INCREASING, larger outcomes mean larger risk
numbers. The entropic measure is therefore (1/theta) log E[exp(theta X)].
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import FrozenSet, Iterable, Optional, Sequence, Tuple

import numpy as np

from scenario_core import (MERGE_TOL, WEIGHT_TOL, DomainError, EmpiricalDistribution,
                           RandomVariable, es_at, to_distribution, var_at)

# Largest exponent accepted before exp() would overflow a double.
_MAX_EXPONENT = 700.0


class MeasureSpecError(ValueError):
    """Raised for an invalid measure description or measure-spec text.

    Attributes:
        offset: Byte offset into the parsed text, when the error comes from the parser
        expected: Set of tokens that would have been accepted at offset
    """

    def __init__(self, message: str, offset: Optional[int] = None,
                 expected: Iterable[str] = ()):
        self.message = message
        self.offset = offset
        self.expected = frozenset(expected)
        text = message
        if offset is not None:
            text = f"{message} at offset {offset}"
        if self.expected:
            text += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(text)


class EntropicOverflowError(ArithmeticError):
    """Raised when theta * x cannot be exponentiated in double precision."""
    pass


class OracleSizeError(ValueError):
    """Raised when the brute-force oracle is asked for more than 20 scenarios."""
    pass


class Axiom(str, Enum):
    LAW_INVARIANT = "law-invariant"
    NORMALIZED = "normalized"
    MONOTONE = "monotone"
    STAR_SHAPED = "star-shaped"
    POSITIVELY_HOMOGENEOUS = "positively-homogeneous"
    CONVEX = "convex"
    SUBLINEAR = "sublinear"
    CASH_ADDITIVE = "cash-additive"
    CASH_SUBADDITIVE = "cash-subadditive"
    SSD_CONSISTENT = "ssd-consistent"
    CSD_CONSISTENT = "csd-consistent"


@dataclass(frozen=True)
class EvalResult:
    """A measure value in R or +infinity."""

    value: float
    finite: bool

    def __post_init__(self):
        if self.finite != math.isfinite(self.value):
            raise ValueError("finite flag disagrees with value")
        if not self.finite and self.value != math.inf:
            raise ValueError(f"only +inf is representable (got: {self.value})")

    @classmethod
    def of(cls, value: float) -> "EvalResult":
        value = float(value)
        return cls(value, math.isfinite(value))

    @classmethod
    def infinite(cls) -> "EvalResult":
        return cls(math.inf, False)


def _fmt(v: float) -> str:
    return format(v, ".12g")


def _check_level(beta: float, what: str = "level") -> float:
    if not isinstance(beta, (int, float)) or math.isnan(beta) or not 0.0 <= beta <= 1.0:
        raise MeasureSpecError(f"{what} must lie in [0, 1] (got: {beta})")
    return float(beta)


def _check_real(v: float, what: str) -> float:
    if not isinstance(v, (int, float)) or not math.isfinite(v):
        raise MeasureSpecError(f"{what} must be a finite real (got: {v})")
    return float(v)


class MeasureSpec:
    """Node of a measure description tree.

    Subclasses implement evaluate_law (every measure here is law-invariant,
    so evaluation only ever sees the canonical distribution), claimed_axioms
    and render (the canonical grammar text).
    """

    def evaluate_law(self, d: EmpiricalDistribution) -> float:
        raise NotImplementedError

    def claimed_axioms(self) -> FrozenSet[Axiom]:
        return frozenset()

    def render(self) -> str:
        raise NotImplementedError

    def value_at_zero(self) -> float:
        return self.evaluate_law(EmpiricalDistribution.point_mass(0.0))

    def __str__(self) -> str:
        return self.render()


_COHERENT = frozenset({Axiom.LAW_INVARIANT, Axiom.NORMALIZED, Axiom.MONOTONE, Axiom.SUBLINEAR,
                       Axiom.CASH_ADDITIVE, Axiom.SSD_CONSISTENT})


@dataclass(frozen=True)
class Var(MeasureSpec):
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", _check_level(self.beta))

    def evaluate_law(self, d):
        return var_at(d, self.beta)

    def claimed_axioms(self):
        return frozenset({Axiom.LAW_INVARIANT, Axiom.NORMALIZED, Axiom.MONOTONE,
                          Axiom.POSITIVELY_HOMOGENEOUS, Axiom.CASH_ADDITIVE})

    def render(self):
        return f"var:{_fmt(self.beta)}"


@dataclass(frozen=True)
class Es(MeasureSpec):
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", _check_level(self.beta))

    def evaluate_law(self, d):
        return es_at(d, self.beta)

    def claimed_axioms(self):
        return _COHERENT

    def render(self):
        return f"es:{_fmt(self.beta)}"


@dataclass(frozen=True)
class Mean(MeasureSpec):

    def evaluate_law(self, d):
        return d.mean

    def claimed_axioms(self):
        return _COHERENT

    def render(self):
        return "mean"


@dataclass(frozen=True)
class EssSup(MeasureSpec):

    def evaluate_law(self, d):
        return d.max

    def claimed_axioms(self):
        return _COHERENT

    def render(self):
        return "esssup"


@dataclass(frozen=True)
class Const(MeasureSpec):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", _check_real(self.value, "constant"))

    def evaluate_law(self, d):
        return self.value

    def claimed_axioms(self):
        axioms = {Axiom.LAW_INVARIANT, Axiom.MONOTONE, Axiom.CONVEX, Axiom.STAR_SHAPED,
                  Axiom.CASH_SUBADDITIVE, Axiom.SSD_CONSISTENT}
        if self.value == 0.0:
            axioms |= {Axiom.NORMALIZED, Axiom.POSITIVELY_HOMOGENEOUS}
        return frozenset(axioms)

    def render(self):
        return f"const:{_fmt(self.value)}"


@dataclass(frozen=True)
class Entropic(MeasureSpec):
    theta: float

    def __post_init__(self):
        theta = _check_real(self.theta, "entropic theta")
        if theta <= 0:
            raise MeasureSpecError(f"entropic theta must be positive (got: {theta})")
        object.__setattr__(self, "theta", theta)

    def evaluate_law(self, d):
        with np.errstate(over="ignore"):
            exponents = self.theta * np.asarray(d.values)
        shift = float(exponents.max())
        if not math.isfinite(shift):
            raise EntropicOverflowError(f"theta*x overflows (theta={self.theta}, max={d.max})")
        scaled = exponents - shift
        if float(scaled.min()) < -_MAX_EXPONENT:
            logging.debug("entropic: %d atoms underflow after shift", int((scaled < -_MAX_EXPONENT).sum()))
        total = float(np.dot(np.asarray(d.weights), np.exp(scaled)))
        return (shift + math.log(total)) / self.theta

    def claimed_axioms(self):
        return frozenset({Axiom.LAW_INVARIANT, Axiom.NORMALIZED, Axiom.MONOTONE, Axiom.CONVEX,
                          Axiom.CASH_ADDITIVE, Axiom.SSD_CONSISTENT})

    def render(self):
        return f"entropic:{_fmt(self.theta)}"


@dataclass(frozen=True)
class EsMixture(MeasureSpec):
    """Sum of w_i * ES_{s_i}: a probability measure on (0, 1] over ES levels."""

    terms: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        terms = tuple((float(w), float(s)) for w, s in self.terms)
        if not terms:
            raise MeasureSpecError("ES mixture needs at least one term")
        for w, s in terms:
            if not math.isfinite(w) or w <= 0:
                raise MeasureSpecError(f"mixture weights must be positive (got: {w})")
            if not 0.0 < s <= 1.0:
                raise MeasureSpecError(f"mixture levels must lie in (0, 1] (got: {s})")
        total = math.fsum(w for w, _ in terms)
        if abs(total - 1.0) > WEIGHT_TOL * max(1, len(terms)):
            raise MeasureSpecError(f"mixture weights must sum to 1 (got: {total!r})")
        object.__setattr__(self, "terms", terms)

    def evaluate_law(self, d):
        return math.fsum(w * es_at(d, s) for w, s in self.terms)

    def claimed_axioms(self):
        return _COHERENT

    def render(self):
        inner = ",".join(f"{_fmt(w)}@es:{_fmt(s)}" for w, s in self.terms)
        return f"mix:({inner})"


def _family_zero(children: Sequence[MeasureSpec]) -> Optional[float]:
    """Common value at 0 of all children, or None when they disagree."""
    zeros = [c.value_at_zero() for c in children]
    if all(abs(z - zeros[0]) <= 1e-12 for z in zeros):
        return zeros[0]
    return None


@dataclass(frozen=True)
class MinFamily(MeasureSpec):
    children: Tuple[MeasureSpec, ...]

    def __post_init__(self):
        children = tuple(self.children)
        if not children:
            raise MeasureSpecError("min family must not be empty")
        object.__setattr__(self, "children", children)

    def evaluate_law(self, d):
        # +inf children only win when every child is +inf
        return min(c.evaluate_law(d) for c in self.children)

    def claimed_axioms(self):
        shared = frozenset.intersection(*(measure_axiom_profile(c) for c in self.children))
        # Convexity and sublinearity are lost under a minimum.
        axioms = set(shared) - {Axiom.CONVEX, Axiom.SUBLINEAR, Axiom.STAR_SHAPED, Axiom.NORMALIZED}
        zero = _family_zero(self.children)
        if zero is not None:
            if Axiom.STAR_SHAPED in shared:
                axioms.add(Axiom.STAR_SHAPED)
            if zero == 0.0:
                axioms.add(Axiom.NORMALIZED)
        return frozenset(axioms)

    def render(self):
        return "min(" + ",".join(c.render() for c in self.children) + ")"


@dataclass(frozen=True)
class MaxFamily(MeasureSpec):
    children: Tuple[MeasureSpec, ...]

    def __post_init__(self):
        children = tuple(self.children)
        if not children:
            raise MeasureSpecError("max family must not be empty")
        object.__setattr__(self, "children", children)

    def evaluate_law(self, d):
        return max(c.evaluate_law(d) for c in self.children)

    def claimed_axioms(self):
        shared = frozenset.intersection(*(measure_axiom_profile(c) for c in self.children))
        axioms = set(shared) - {Axiom.NORMALIZED}
        if self.value_at_zero() == 0.0:
            axioms.add(Axiom.NORMALIZED)
        return frozenset(axioms)

    def render(self):
        return "max(" + ",".join(c.render() for c in self.children) + ")"


@dataclass(frozen=True)
class RobustVar(MeasureSpec):
    """sup of VaR_beta(D X) over discount factors D_b <= D <= D_u."""

    beta: float
    d_b: float
    d_u: float

    def __post_init__(self):
        object.__setattr__(self, "beta", _check_level(self.beta))
        d_b = _check_real(self.d_b, "lower discount")
        d_u = _check_real(self.d_u, "upper discount")
        if not 0.0 <= d_b <= d_u:
            raise MeasureSpecError(f"discounts must satisfy 0 <= d_b <= d_u (got: {d_b}, {d_u})")
        object.__setattr__(self, "d_b", d_b)
        object.__setattr__(self, "d_u", d_u)

    def evaluate_law(self, d):
        return var_at(_worst_case_law(d, self.d_b, self.d_u), self.beta)

    def claimed_axioms(self):
        return frozenset({Axiom.LAW_INVARIANT, Axiom.NORMALIZED, Axiom.MONOTONE,
                          Axiom.POSITIVELY_HOMOGENEOUS})

    def render(self):
        return f"robvar:{_fmt(self.beta)}:{_fmt(self.d_b)}:{_fmt(self.d_u)}"


def _close_axioms(axioms: Iterable[Axiom]) -> FrozenSet[Axiom]:
    """Add every axiom implied by the definitions."""
    result = set(axioms)
    changed = True
    while changed:
        before = len(result)
        if Axiom.SUBLINEAR in result:
            result |= {Axiom.CONVEX, Axiom.POSITIVELY_HOMOGENEOUS}
        if {Axiom.CONVEX, Axiom.POSITIVELY_HOMOGENEOUS} <= result:
            result.add(Axiom.SUBLINEAR)
        if Axiom.POSITIVELY_HOMOGENEOUS in result:
            result |= {Axiom.NORMALIZED, Axiom.STAR_SHAPED}
        if {Axiom.CONVEX, Axiom.NORMALIZED} <= result:
            result.add(Axiom.STAR_SHAPED)
        if Axiom.CASH_ADDITIVE in result:
            result.add(Axiom.CASH_SUBADDITIVE)
        if Axiom.SSD_CONSISTENT in result:
            result |= {Axiom.MONOTONE, Axiom.LAW_INVARIANT, Axiom.CSD_CONSISTENT}
        if Axiom.CSD_CONSISTENT in result:
            result.add(Axiom.LAW_INVARIANT)
        changed = len(result) != before
    return frozenset(result)


def measure_axiom_profile(spec: MeasureSpec) -> FrozenSet[Axiom]:
    """Axioms derivable from the shape of the tree (what the property harness verifies)."""
    return _close_axioms(spec.claimed_axioms())


def evaluate(spec: MeasureSpec, rv: RandomVariable) -> EvalResult:
    """Evaluate a measure description on a random variable."""
    return EvalResult.of(spec.evaluate_law(to_distribution(rv)))


def _check_discounts(beta: float, d_b: float, d_u: float) -> None:
    if not 0.0 <= beta <= 1.0:
        raise DomainError(f"level must lie in [0, 1] (got: {beta})")
    if not (math.isfinite(d_b) and math.isfinite(d_u)) or not 0.0 <= d_b <= d_u:
        raise DomainError(f"discounts must satisfy 0 <= d_b <= d_u (got: {d_b}, {d_u})")


def _worst_case_law(d: EmpiricalDistribution, d_b: float, d_u: float) -> EmpiricalDistribution:
    # Pointwise largest discounted outcome: d_u on gains, d_b on losses.
    worst = [d_u * v if v >= 0 else d_b * v for v in d.values]
    return EmpiricalDistribution.from_atoms(worst, d.weights)


def robust_var(rv: RandomVariable, beta: float, d_b: float, d_u: float) -> float:
    """Closed form of sup{VaR_beta(D X) : d_b <= D <= d_u}.

    VaR is monotone, so the supremum is VaR of the scenario-wise worst
    case d_u * x on x >= 0 and d_b * x on x < 0.

    Raises:
        DomainError: On beta outside [0, 1] or discounts violating 0 <= d_b <= d_u
    """
    _check_discounts(beta, d_b, d_u)
    return var_at(_worst_case_law(to_distribution(rv), d_b, d_u), beta)


def robust_var_oracle(rv: RandomVariable, beta: float, d_b: float, d_u: float) -> float:
    """Brute-force maximum of VaR_beta(D X) over the 2^n corner discount vectors.

    Each coordinate of D enters VaR monotonically, so the supremum over the
    box [d_b, d_u]^n is attained at a corner. Corners range over the atoms of
    the law of X, and every discounted corner law is merged the way
    EmpiricalDistribution.from_atoms merges, so the result equals the closed
    form exactly, near-tied values included.

    Raises:
        OracleSizeError: Above 20 scenarios
        DomainError: On invalid parameters
    """
    _check_discounts(beta, d_b, d_u)
    if rv.space.size > 20:
        raise OracleSizeError(f"oracle enumerates 2^n corners; n={rv.space.size} exceeds 20")
    d = to_distribution(rv)
    n = d.size
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n)) & 1
    discounted = np.where(bits == 1, d_u, d_b) * np.asarray(d.values)
    order = np.argsort(discounted, axis=1, kind="stable")
    sorted_vals = np.take_along_axis(discounted, order, axis=1)
    # each value collapses onto the first value of its run of near-equal neighbours
    heads = sorted_vals.copy()
    for j in range(1, n):
        cur, head = sorted_vals[:, j], heads[:, j - 1]
        close = np.abs(cur - head) <= np.maximum(MERGE_TOL * np.maximum(np.abs(cur), np.abs(head)),
                                                 MERGE_TOL)
        heads[:, j] = np.where(close, head, cur)
    if beta == 0.0:
        return float(heads[:, 0].max())
    cum = np.cumsum(np.asarray(d.weights)[order], axis=1)
    cum[:, -1] = 1.0
    idx = np.argmax(cum >= beta - WEIGHT_TOL, axis=1)
    return float(heads[np.arange(heads.shape[0]), idx].max())
