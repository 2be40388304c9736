"""
Seeded randomized verification of risk-measure axioms.

Handles:
- Random finite random variables (mixed integer / uniform / heavy-tailed atoms,
  rational probabilities over a denominator of at most 120)
- One check per axiom: star-shaped, positive homogeneity, cash (sub)additivity,
  monotonicity, SSD / CSD consistency, law invariance, convexity
- The axiom matrix of a measure and the claimed-vs-observed comparison

Trial i runs on numpy.random.default_rng(seed ^ i), so every failure is
reproducible from the seed recorded with it.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from dominance import csd_compare, fsd_compare, mps_contract, pointwise_reduce, ssd_compare
from measures import Axiom, MeasureSpec, evaluate, measure_axiom_profile
from scenario_core import (DomainError, RandomVariable, ScenarioSpace, to_distribution,
                           transform)

MAX_DENOMINATOR = 120
HEAVY_TAIL_CAP = 1e3


class GeneratorError(RuntimeError):
    """Raised when a generated input or dominated pair fails its own soundness check."""
    pass


class HarnessConsistencyError(RuntimeError):
    """Raised when matrix results contradict an implication between axioms."""
    pass


class Failure(NamedTuple):
    seed: int
    summary: str
    lhs: float
    rhs: float
    gap: float


@dataclass(frozen=True)
class PropertyReport:
    property: str
    spec: str
    trials: int
    seed: int
    failures: Tuple[Failure, ...] = ()
    aborted: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "property": self.property,
            "spec": self.spec,
            "trials": self.trials,
            "seed": self.seed,
            "pass": self.passed,
            "failures": [f._asdict() for f in self.failures],
            "aborted": self.aborted,
        }


class _Outcome(NamedTuple):
    lhs: float
    rhs: float
    summary: str
    equality: bool = False


def tolerance(*values: float) -> float:
    """1e-9 absolute plus 1e-9 relative to the largest finite magnitude."""
    finite = [abs(v) for v in values if math.isfinite(v)]
    return 1e-9 + 1e-9 * max(finite, default=0.0)


def random_variable(rng: np.random.Generator, min_atoms: int = 2, max_atoms: int = 12,
                    heavy_tail: bool = True) -> RandomVariable:
    """Draw a random variable with rational scenario probabilities.

    Values mix integers in [-10, 10] (to force ties), uniform reals in
    [-10, 10] and, when heavy_tail is set, two-sided Pareto draws capped at 1e3.
    """
    n = int(rng.integers(min_atoms, max_atoms + 1))
    space = random_space(rng, n)
    kinds = rng.random(n)
    values = np.where(kinds < 0.4, rng.integers(-10, 11, n).astype(float), rng.uniform(-10.0, 10.0, n))
    if heavy_tail:
        tails = np.minimum(rng.pareto(1.5, n) + 1.0, HEAVY_TAIL_CAP) * rng.choice([-1.0, 1.0], n)
        values = np.where(kinds >= 0.9, tails, values)
    return RandomVariable(space, tuple(values))


def random_space(rng: np.random.Generator, n: int) -> ScenarioSpace:
    """n scenarios with probabilities k_i / q for a random composition of q <= 120."""
    q = int(rng.integers(n, MAX_DENOMINATOR + 1))
    cuts = np.sort(rng.choice(np.arange(1, q), size=n - 1, replace=False)) if n > 1 else np.array([], int)
    counts = np.diff(np.concatenate(([0], cuts, [q])))
    try:
        return ScenarioSpace(tuple(counts / q))
    except DomainError as e:
        raise GeneratorError(f"invalid random space (q={q}, n={n})") from e


def _summary(rv: RandomVariable, **params: float) -> str:
    parts = [f"{k}={v!r}" for k, v in params.items()]
    parts.append("law=" + to_distribution(rv).to_text().replace("\n", ";"))
    return " ".join(parts)


def _value(spec: MeasureSpec, rv: RandomVariable) -> float:
    return evaluate(spec, rv).value


def _gap(outcome: _Outcome) -> float:
    lhs, rhs = outcome.lhs, outcome.rhs
    if lhs == rhs:
        return 0.0
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        return math.inf
    return abs(lhs - rhs) if outcome.equality else lhs - rhs


def _run(name: str, spec: MeasureSpec, trials: int, seed: int,
         trial: Callable[[MeasureSpec, np.random.Generator], _Outcome]) -> PropertyReport:
    if trials < 1:
        raise DomainError(f"trials must be at least 1 (got: {trials})")
    if seed < 0:
        raise DomainError(f"seed must be non-negative (got: {seed})")
    failures: List[Failure] = []
    aborted = 0
    for i in range(trials):
        trial_seed = seed ^ i
        try:
            outcome = trial(spec, np.random.default_rng(trial_seed))
        except GeneratorError as e:
            aborted += 1
            logging.warning("%s: trial %d aborted: %s", name, i, e)
            continue
        gap = _gap(outcome)
        if gap > tolerance(outcome.lhs, outcome.rhs):
            failures.append(Failure(trial_seed, outcome.summary, outcome.lhs, outcome.rhs, gap))
            logging.debug("%s: trial %d failed (gap %r)", name, i, gap)
    report = PropertyReport(name, str(spec), trials, seed, tuple(failures), aborted)
    logging.info("%s on %s: %d/%d trials failed, %d aborted",
                 name, spec, len(failures), trials, aborted)
    return report


def _star_trial(spec, rng):
    x = random_variable(rng)
    lam = float(rng.uniform(0.0, 1.0))
    lhs = _value(spec, transform(x, lam, 0.0))
    rhs = lam * _value(spec, x) + (1.0 - lam) * spec.value_at_zero()
    return _Outcome(lhs, rhs, _summary(x, lam=lam))


def _homogeneity_trial(spec, rng):
    x = random_variable(rng)
    lam = float(rng.uniform(0.0, 4.0))
    return _Outcome(_value(spec, transform(x, lam, 0.0)), lam * _value(spec, x),
                    _summary(x, lam=lam), equality=True)


def _cash_trial(low: float, equality: bool):
    def trial(spec, rng):
        x = random_variable(rng)
        m = float(rng.uniform(low, 5.0))
        return _Outcome(_value(spec, transform(x, 1.0, m)), _value(spec, x) + m,
                        _summary(x, m=m), equality=equality)
    return trial


def _random_deltas(rng, n: int) -> np.ndarray:
    mask = rng.random(n) < rng.uniform(0.2, 1.0)
    return np.where(mask, rng.uniform(0.0, 3.0, n), 0.0)


def _random_contraction(rng, rv: RandomVariable) -> RandomVariable:
    i, j = rng.choice(rv.space.size, size=2, replace=False)
    return mps_contract(rv, int(i), int(j))


def _monotone_trial(spec, rng):
    x = random_variable(rng)
    y = pointwise_reduce(x, list(_random_deltas(rng, x.space.size)))
    if not fsd_compare(to_distribution(x), to_distribution(y)).holds:
        raise GeneratorError("pointwise reduction is not first-order dominated")
    return _Outcome(_value(spec, y), _value(spec, x), _summary(x))


def _dominated_chain(rng, x: RandomVariable, with_reductions: bool) -> RandomVariable:
    y = x
    for _ in range(int(rng.integers(1, 4))):
        if with_reductions and rng.random() < 0.5:
            y = pointwise_reduce(y, list(_random_deltas(rng, y.space.size)))
        else:
            y = _random_contraction(rng, y)
    return y


def _ssd_trial(spec, rng):
    x = random_variable(rng)
    y = _dominated_chain(rng, x, with_reductions=True)
    verdict = ssd_compare(to_distribution(x), to_distribution(y))
    if not verdict.holds:
        raise GeneratorError(f"generated pair is not second-order dominated (witness {verdict.witness})")
    return _Outcome(_value(spec, y), _value(spec, x), _summary(x) + " | " + _summary(y))


def _csd_trial(spec, rng):
    x = random_variable(rng)
    y = _dominated_chain(rng, x, with_reductions=False)
    verdict = csd_compare(to_distribution(x), to_distribution(y))
    if not verdict.holds:
        raise GeneratorError(f"generated pair is not convex-order dominated (witness {verdict.witness})")
    return _Outcome(_value(spec, y), _value(spec, x), _summary(x) + " | " + _summary(y))


def _law_trial(spec, rng):
    x = random_variable(rng)
    n = x.space.size
    y = x.permuted([int(i) for i in rng.permutation(n)])
    y = y.split(int(rng.integers(0, n)), float(rng.uniform(0.1, 0.9)))
    return _Outcome(_value(spec, y), _value(spec, x), _summary(x), equality=True)


def _convex_trial(spec, rng):
    x = random_variable(rng)
    other = random_variable(rng, x.space.size, x.space.size)
    y = RandomVariable(x.space, other.values)
    lam = float(rng.uniform(0.0, 1.0))
    mix = RandomVariable(x.space, tuple(lam * a + (1.0 - lam) * b for a, b in zip(x.values, y.values)))
    rhs = lam * _value(spec, x) + (1.0 - lam) * _value(spec, y)
    return _Outcome(_value(spec, mix), rhs, _summary(x, lam=lam) + " | " + _summary(y))


def check_star_shaped(spec: MeasureSpec, trials: int, seed: int) -> PropertyReport:
    """f(lam*X) <= lam*f(X) + (1-lam)*f(0) for random lam in (0, 1)."""
    return _run(Axiom.STAR_SHAPED.value, spec, trials, seed, _star_trial)


def check_positive_homogeneity(spec: MeasureSpec, trials: int, seed: int) -> PropertyReport:
    return _run(Axiom.POSITIVELY_HOMOGENEOUS.value, spec, trials, seed, _homogeneity_trial)


def check_cash_additive(spec: MeasureSpec, trials: int, seed: int) -> PropertyReport:
    return _run(Axiom.CASH_ADDITIVE.value, spec, trials, seed, _cash_trial(-5.0, True))


def check_cash_subadditive(spec: MeasureSpec, trials: int, seed: int) -> PropertyReport:
    return _run(Axiom.CASH_SUBADDITIVE.value, spec, trials, seed, _cash_trial(0.0, False))


def check_monotone(spec: MeasureSpec, trials: int, seed: int) -> PropertyReport:
    return _run(Axiom.MONOTONE.value, spec, trials, seed, _monotone_trial)


def check_ssd_consistent(spec: MeasureSpec, trials: int, seed: int) -> PropertyReport:
    """Dominated pairs come from chains of contractions and pointwise reductions."""
    return _run(Axiom.SSD_CONSISTENT.value, spec, trials, seed, _ssd_trial)


def check_csd_consistent(spec: MeasureSpec, trials: int, seed: int) -> PropertyReport:
    return _run(Axiom.CSD_CONSISTENT.value, spec, trials, seed, _csd_trial)


def check_law_invariant(spec: MeasureSpec, trials: int, seed: int) -> PropertyReport:
    """Compare against a permuted copy with one scenario split in two."""
    return _run(Axiom.LAW_INVARIANT.value, spec, trials, seed, _law_trial)


def check_convex(spec: MeasureSpec, trials: int, seed: int) -> PropertyReport:
    return _run(Axiom.CONVEX.value, spec, trials, seed, _convex_trial)


CHECKS: Dict[Axiom, Callable[[MeasureSpec, int, int], PropertyReport]] = {
    Axiom.STAR_SHAPED: check_star_shaped,
    Axiom.POSITIVELY_HOMOGENEOUS: check_positive_homogeneity,
    Axiom.CASH_ADDITIVE: check_cash_additive,
    Axiom.CASH_SUBADDITIVE: check_cash_subadditive,
    Axiom.MONOTONE: check_monotone,
    Axiom.SSD_CONSISTENT: check_ssd_consistent,
    Axiom.CSD_CONSISTENT: check_csd_consistent,
    Axiom.LAW_INVARIANT: check_law_invariant,
    Axiom.CONVEX: check_convex,
}


def run_axiom_matrix(spec: MeasureSpec, trials: int, seed: int) -> Dict[str, PropertyReport]:
    """Run every property check, in a fixed order, and cross-check the results.

    Raises:
        HarnessConsistencyError: If positive homogeneity passes for a
            normalized measure while star-shapedness fails
    """
    reports = {axiom.value: check(spec, trials, seed) for axiom, check in CHECKS.items()}
    homogeneous = reports[Axiom.POSITIVELY_HOMOGENEOUS.value].passed
    star = reports[Axiom.STAR_SHAPED.value].passed
    if homogeneous and abs(spec.value_at_zero()) <= tolerance() and not star:
        raise HarnessConsistencyError(
            f"{spec}: positive homogeneity passed with f(0)=0 but star-shapedness failed")
    return reports


def check_claimed_axioms(spec: MeasureSpec, trials: int, seed: int,
                         matrix: Optional[Dict[str, PropertyReport]] = None) -> List[Axiom]:
    """Axioms in measure_axiom_profile(spec) that the harness refutes.

    Sublinearity is judged through convexity and positive homogeneity;
    normalization by evaluating at the zero variable.
    """
    matrix = matrix if matrix is not None else run_axiom_matrix(spec, trials, seed)
    refuted = []
    for axiom in sorted(measure_axiom_profile(spec), key=lambda a: a.value):
        if axiom is Axiom.NORMALIZED:
            ok = abs(spec.value_at_zero()) <= tolerance()
        elif axiom is Axiom.SUBLINEAR:
            ok = (matrix[Axiom.CONVEX.value].passed
                  and matrix[Axiom.POSITIVELY_HOMOGENEOUS.value].passed)
        else:
            ok = matrix[axiom.value].passed
        if not ok:
            refuted.append(axiom)
    if refuted:
        logging.warning("%s: claimed axioms refuted: %s", spec, ", ".join(a.value for a in refuted))
    return refuted
