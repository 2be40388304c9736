"""
Finite scenario spaces and exact quantile-curve arithmetic.

Handles:
- Scenario spaces and random variables on them
- Canonical empirical distributions (sorted, merged atoms)
- VaR / ES evaluation through piecewise-constant quantile curves
  and their piecewise-linear integrals
- Quantile inner products and comonotone combinations

All types are immutable; every function is a pure function of its inputs.
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

# Comparison tolerance for derived quantities (curve values, means).
TOL = 1e-9
# Tolerance on weights and breakpoints (cumulative probabilities).
WEIGHT_TOL = 1e-12
# Relative tolerance under which two atom values are merged.
MERGE_TOL = 1e-12


class DomainError(ValueError):
    """Raised when a parameter lies outside its mathematical domain."""
    pass


def _check_level(beta: float) -> float:
    if not isinstance(beta, (int, float)) or math.isnan(beta) or beta < 0.0 or beta > 1.0:
        raise DomainError(f"level must lie in [0, 1] (got: {beta})")
    return float(beta)


def _check_weights(weights: Sequence[float], what: str) -> None:
    if len(weights) == 0:
        raise DomainError(f"{what} must not be empty")
    for w in weights:
        if not math.isfinite(w) or w <= 0.0:
            raise DomainError(f"{what} must be strictly positive (got: {w})")
    total = math.fsum(weights)
    if abs(total - 1.0) > WEIGHT_TOL * max(1, len(weights)):
        raise DomainError(f"{what} must sum to 1 (got: {total!r})")


@dataclass(frozen=True)
class ScenarioSpace:
    """Finite probability space: one strictly positive weight per scenario."""

    probabilities: Tuple[float, ...]

    def __post_init__(self):
        probs = tuple(float(p) for p in self.probabilities)
        _check_weights(probs, "scenario probabilities")
        object.__setattr__(self, "probabilities", probs)

    @classmethod
    def uniform(cls, n: int) -> "ScenarioSpace":
        if n < 1:
            raise DomainError(f"scenario count must be positive (got: {n})")
        return cls(tuple([1.0 / n] * n))

    @property
    def size(self) -> int:
        return len(self.probabilities)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probabilities, dtype=float)


@dataclass(frozen=True)
class RandomVariable:
    """Outcome vector over a ScenarioSpace (monetary units)."""

    space: ScenarioSpace
    values: Tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) != self.space.size:
            raise DomainError(
                f"value count {len(vals)} does not match scenario count {self.space.size}")
        for v in vals:
            if not math.isfinite(v):
                raise DomainError(f"random variable values must be finite (got: {v})")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_values(cls, values: Sequence[float],
                    probabilities: Optional[Sequence[float]] = None) -> "RandomVariable":
        """Build a random variable, on a uniform space when no probabilities are given."""
        if probabilities is None:
            space = ScenarioSpace.uniform(len(values))
        else:
            space = ScenarioSpace(tuple(probabilities))
        return cls(space, tuple(values))

    @classmethod
    def constant(cls, value: float, space: Optional[ScenarioSpace] = None) -> "RandomVariable":
        space = space or ScenarioSpace((1.0,))
        return cls(space, tuple([float(value)] * space.size))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def mean(self) -> float:
        return float(np.dot(self.space.as_array(), self.as_array()))

    def permuted(self, order: Sequence[int]) -> "RandomVariable":
        """Reorder scenarios (values and probabilities together)."""
        if sorted(order) != list(range(self.space.size)):
            raise DomainError("order must be a permutation of the scenario indices")
        probs = tuple(self.space.probabilities[i] for i in order)
        vals = tuple(self.values[i] for i in order)
        return RandomVariable(ScenarioSpace(probs), vals)

    def split(self, index: int, fraction: float) -> "RandomVariable":
        """Split one scenario into two with the same value; the law is unchanged."""
        if not 0.0 < fraction < 1.0:
            raise DomainError(f"split fraction must lie in (0, 1) (got: {fraction})")
        p = self.space.probabilities[index]
        probs = list(self.space.probabilities)
        vals = list(self.values)
        probs[index] = p * fraction
        probs.insert(index + 1, p - probs[index])
        vals.insert(index + 1, vals[index])
        return RandomVariable(ScenarioSpace(tuple(probs)), tuple(vals))


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Canonical law: strictly increasing atom values with positive weights."""

    values: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        wts = tuple(float(w) for w in self.weights)
        if len(vals) != len(wts):
            raise DomainError("atom values and weights differ in length")
        _check_weights(wts, "atom weights")
        for a, b in zip(vals, vals[1:]):
            if not b > a:
                raise DomainError(f"atom values must be strictly increasing ({a} >= {b})")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "weights", wts)

    @classmethod
    def from_atoms(cls, values: Iterable[float], weights: Iterable[float]) -> "EmpiricalDistribution":
        """Sort atoms and merge values equal within MERGE_TOL (weights added)."""
        vals = np.asarray(list(values), dtype=float)
        wts = np.asarray(list(weights), dtype=float)
        order = np.argsort(vals, kind="stable")
        merged_vals: List[float] = []
        merged_wts: List[float] = []
        for v, w in zip(vals[order], wts[order]):
            if merged_vals and math.isclose(v, merged_vals[-1], rel_tol=MERGE_TOL, abs_tol=MERGE_TOL):
                merged_wts[-1] += float(w)
            else:
                merged_vals.append(float(v))
                merged_wts.append(float(w))
        return cls(tuple(merged_vals), tuple(merged_wts))

    @classmethod
    def point_mass(cls, value: float) -> "EmpiricalDistribution":
        return cls((float(value),), (1.0,))

    @property
    def atoms(self) -> List[Tuple[float, float]]:
        return list(zip(self.values, self.weights))

    @property
    def size(self) -> int:
        return len(self.values)

    @property
    def min(self) -> float:
        return self.values[0]

    @property
    def max(self) -> float:
        return self.values[-1]

    @property
    def mean(self) -> float:
        return math.fsum(v * w for v, w in zip(self.values, self.weights))

    @property
    def is_point_mass(self) -> bool:
        return len(self.values) == 1

    @property
    def breakpoints(self) -> np.ndarray:
        """Cumulative weights 0 = c_0 < c_1 < ... < c_k = 1."""
        cum = np.concatenate(([0.0], np.cumsum(self.weights)))
        cum[-1] = 1.0
        return cum

    def scaled(self, scale: float, shift: float = 0.0) -> "EmpiricalDistribution":
        """Law of scale*X + shift for scale >= 0."""
        if scale < 0:
            raise DomainError(f"scale must be non-negative (got: {scale})")
        if scale == 0:
            return EmpiricalDistribution.point_mass(shift)
        return EmpiricalDistribution.from_atoms([scale * v + shift for v in self.values], self.weights)

    def to_text(self) -> str:
        """Canonical debugging form: one "value,weight" line per atom, ascending."""
        return "\n".join(f"{v!r},{w!r}" for v, w in self.atoms)


@dataclass(frozen=True)
class QuantileCurve:
    """Left-continuous step function beta -> VaR_beta on [0, 1]."""

    breakpoints: Tuple[float, ...]
    levels: Tuple[float, ...]

    def segment_index(self, beta: float) -> int:
        """Index j of the segment (c_{j-1}, c_j] holding beta (beta = 0 maps to the first)."""
        if beta <= 0.0:
            return 0
        cuts = np.asarray(self.breakpoints[1:])
        j = int(np.searchsorted(cuts, beta - WEIGHT_TOL, side="left"))
        return min(j, len(self.levels) - 1)

    def __call__(self, beta: float) -> float:
        return self.levels[self.segment_index(beta)]


@dataclass(frozen=True)
class IntegratedQuantileCurve:
    """G(beta) = integral of VaR_m over [beta, 1]; linear between breakpoints.

    Segment j has slope -levels[j]; levels increase, so slopes are
    nonincreasing and G is concave.
    """

    breakpoints: Tuple[float, ...]
    levels: Tuple[float, ...]
    nodes: Tuple[float, ...]

    def __call__(self, beta: float) -> float:
        if beta >= 1.0:
            return 0.0
        curve = QuantileCurve(self.breakpoints, self.levels)
        j = curve.segment_index(beta)
        # G(beta) = G(c_j) + (c_j - beta) * x_j on (c_{j-1}, c_j]
        upper = self.breakpoints[j + 1]
        return self.nodes[j + 1] + max(upper - beta, 0.0) * self.levels[j]

    @property
    def slopes(self) -> Tuple[float, ...]:
        return tuple(-x for x in self.levels)


def to_distribution(rv: RandomVariable) -> EmpiricalDistribution:
    """Extract the law of a random variable.

    Args:
        rv: Random variable on a finite scenario space

    Returns:
        Sorted, merged atom list; identical for any scenario permutation of rv
    """
    return EmpiricalDistribution.from_atoms(rv.values, rv.space.probabilities)


def quantile_curve(d: EmpiricalDistribution) -> QuantileCurve:
    return QuantileCurve(tuple(d.breakpoints), d.values)


def var_at(d: EmpiricalDistribution, beta: float) -> float:
    """Value-at-Risk: inf{x : F(x) >= beta}, with VaR_0 the smallest atom.

    Raises:
        DomainError: If beta is outside [0, 1]
    """
    beta = _check_level(beta)
    if beta == 0.0:
        return d.min
    return quantile_curve(d)(beta)


def integrated_quantile(d: EmpiricalDistribution) -> IntegratedQuantileCurve:
    """Exact node values G(c_j) = sum of w_i * x_i over atoms above c_j."""
    contrib = [v * w for v, w in zip(d.values, d.weights)]
    nodes = [0.0] * (d.size + 1)
    for j in range(d.size - 1, -1, -1):
        nodes[j] = nodes[j + 1] + contrib[j]
    return IntegratedQuantileCurve(tuple(d.breakpoints), d.values, tuple(nodes))


def es_at(d: EmpiricalDistribution, beta: float) -> float:
    """Expected Shortfall G(beta) / (1 - beta); ES_1 is the largest atom.

    Raises:
        DomainError: If beta is outside [0, 1]
    """
    beta = _check_level(beta)
    if beta >= 1.0:
        return d.max
    if beta == 0.0:
        return d.mean
    return integrated_quantile(d)(beta) / (1.0 - beta)


def union_breakpoints(*dists: EmpiricalDistribution) -> np.ndarray:
    """Sorted union of all breakpoints, near-duplicates merged, 0 and 1 included."""
    cuts = np.unique(np.concatenate([d.breakpoints for d in dists]))
    merged = [0.0]
    for c in cuts:
        if c - merged[-1] > WEIGHT_TOL:
            merged.append(float(c))
    merged[-1] = 1.0
    return np.asarray(merged)


def _segment_values(d: EmpiricalDistribution, cuts: np.ndarray) -> np.ndarray:
    """VaR of d on each open segment (cuts[k], cuts[k+1]) of a refinement."""
    mids = 0.5 * (cuts[:-1] + cuts[1:])
    inner = d.breakpoints[1:]
    idx = np.searchsorted(inner, mids, side="left")
    idx = np.minimum(idx, d.size - 1)
    return np.asarray(d.values)[idx]


def quantile_inner(x: EmpiricalDistribution, y: EmpiricalDistribution) -> float:
    """Integral over [0, 1] of VaR_beta(x) * VaR_beta(y), exact on the union refinement."""
    cuts = union_breakpoints(x, y)
    lengths = np.diff(cuts)
    return math.fsum(_segment_values(x, cuts) * _segment_values(y, cuts) * lengths)


def comonotone_combination(x: EmpiricalDistribution, y: EmpiricalDistribution,
                           lam: float) -> EmpiricalDistribution:
    """Law whose quantile curve is lam * Q_x + (1 - lam) * Q_y."""
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"mixing weight must lie in [0, 1] (got: {lam})")
    cuts = union_breakpoints(x, y)
    vals = lam * _segment_values(x, cuts) + (1.0 - lam) * _segment_values(y, cuts)
    return EmpiricalDistribution.from_atoms(vals, np.diff(cuts))


def transform(rv: RandomVariable, scale: float, shift: float) -> RandomVariable:
    """Pointwise scale * x_i + shift on the same scenario space.

    Raises:
        DomainError: If scale is negative
    """
    if not math.isfinite(scale) or scale < 0:
        raise DomainError(f"scale must be non-negative (got: {scale})")
    return RandomVariable(rv.space, tuple(scale * v + shift for v in rv.values))


def is_zero_law(d: EmpiricalDistribution, tol: float = TOL) -> bool:
    """ES zero test: ES vanishing at every breakpoint and at 1 means d is the point mass at 0."""
    levels = list(d.breakpoints[:-1]) + [1.0]
    return all(abs(es_at(d, float(b))) <= tol for b in levels)
