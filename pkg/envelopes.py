"""
Envelope constructions and min-representation checks.

Handles:
- Scale envelopes: the auxiliary measure rho_Z and its SSD / CSD envelopes
- The affine envelope min{alpha*rho(Z) + c : alpha*Z + c >=_2 X} by vertex enumeration
- The ES / quantile inner-product identity against the two-atom dual variable
- Min-sup VaR robustification checks over finite candidate families

A candidate family is a finite stand-in for the domain of a measure: each
member carries its measure value, and the family is expected to contain the
target itself (or its cash-shifted copy) so every minimum is attained.
"""

import logging
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from dominance import fsd_compare, law_match_affine, law_match_scale
from measures import EvalResult
from scenario_core import (TOL, DomainError, EmpiricalDistribution, RandomVariable,
                           es_at, integrated_quantile, quantile_inner,
                           to_distribution, union_breakpoints, var_at)

Law = Union[RandomVariable, EmpiricalDistribution]

# |coefficient| below which a constraint no longer constrains alpha.
_COEF_EPS = 1e-12


class Regime(str, Enum):
    """Range of the scale factor: [0, 1] for star-shaped, [0, inf) for positively homogeneous."""

    STAR = "star"
    HOMOG = "homog"

    @property
    def alpha_max(self) -> float:
        return 1.0 if self is Regime.STAR else math.inf


class Mode(str, Enum):
    SSD = "ssd"
    CSD = "csd"
    AFFINE = "affine"


class Candidate(NamedTuple):
    z: RandomVariable
    rho_z: float


@dataclass(frozen=True)
class CandidateFamily:
    """Finite list of (z, rho(z)) plus rho(0)."""

    members: Tuple[Candidate, ...]
    rho_zero: float = 0.0

    def __post_init__(self):
        members = tuple(Candidate(z, float(r)) for z, r in self.members)
        if not members:
            raise DomainError("candidate family must not be empty")
        for i, (_, r) in enumerate(members):
            if not math.isfinite(r):
                raise DomainError(f"candidate {i} has a non-finite measure value ({r})")
        if not math.isfinite(self.rho_zero):
            raise DomainError(f"rho(0) must be finite (got: {self.rho_zero})")
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "rho_zero", float(self.rho_zero))

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class EnvelopeCertificate:
    """Envelope value with the (alpha, c) witness that attains it."""

    value: float
    alpha: Optional[float] = None
    c: Optional[float] = None
    chosen_index: Optional[int] = None
    active_breakpoints: Tuple[float, ...] = ()

    @classmethod
    def infeasible(cls) -> "EnvelopeCertificate":
        return cls(math.inf)

    @property
    def feasible(self) -> bool:
        return self.value != math.inf

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "alpha": self.alpha,
            "c": self.c,
            "chosen_index": self.chosen_index,
            "active_breakpoints": list(self.active_breakpoints),
        }


@dataclass(frozen=True)
class AlphaInterval:
    """Feasible scale factors [lo, hi]; an infeasible interval carries no endpoints.

    lo_breakpoint / hi_breakpoint name the level whose constraint set the
    endpoint (None when the endpoint is a regime bound).
    """

    lo: Optional[float]
    hi: Optional[float]
    feasible: bool
    lo_breakpoint: Optional[float] = None
    hi_breakpoint: Optional[float] = None

    def __post_init__(self):
        if self.feasible and not self.lo <= self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}] marked feasible")
        if not self.feasible and (self.lo is not None or self.hi is not None):
            raise ValueError("infeasible interval must not carry endpoints")

    @classmethod
    def empty(cls) -> "AlphaInterval":
        return cls(None, None, False)


@dataclass(frozen=True)
class MemberRow:
    index: int
    in_gamma: bool
    alpha: Optional[float]
    c: Optional[float]
    value: float
    active_breakpoints: Tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "in_gamma": self.in_gamma,
            "alpha": self.alpha,
            "c": self.c,
            "value": self.value,
            "active_breakpoints": list(self.active_breakpoints),
        }


@dataclass(frozen=True)
class RepresentationReport:
    """Outcome of a min-representation check against the target value."""

    target: float
    members: Tuple[MemberRow, ...]
    minimum: float
    argmin: Optional[int]
    passed: bool
    tolerance: float
    certificate: Optional[EnvelopeCertificate] = None

    def to_dict(self) -> dict:
        doc = {
            "target": self.target,
            "members": [m.to_dict() for m in self.members],
            "min": self.minimum,
            "argmin": self.argmin,
            "pass": self.passed,
            "tolerance": self.tolerance,
        }
        if self.certificate is not None:
            doc["certificate"] = self.certificate.to_dict()
        return doc


def _law(v: Law) -> EmpiricalDistribution:
    return to_distribution(v) if isinstance(v, RandomVariable) else v


def _interval(constraints: Sequence[Tuple[float, float, float]], alpha_max: float,
              tol: float) -> AlphaInterval:
    """Intersect {alpha >= 0 : alpha*a >= r} over (level, a, r) constraints, clipped to [0, alpha_max]."""
    lo, hi = 0.0, alpha_max
    lo_b = hi_b = None
    for beta, a, r in constraints:
        if abs(a) <= _COEF_EPS:
            if r > tol:
                logging.debug("scale interval empty: 0 >= %r fails at beta=%r", r, beta)
                return AlphaInterval.empty()
            continue
        bound = r / a
        if a > 0:
            if bound > lo:
                lo, lo_b = bound, float(beta)
        elif bound < hi:
            hi, hi_b = bound, float(beta)
    if lo > hi:
        if lo - hi > tol * max(1.0, abs(lo)):
            return AlphaInterval.empty()
        lo = hi
    return AlphaInterval(lo, hi, True, lo_b, hi_b)


def ssd_scale_interval(x: Law, z: Law, alpha_max: float = 1.0, tol: float = TOL) -> AlphaInterval:
    """Scale factors alpha in [0, alpha_max] with alpha*Z >=_2 X.

    The integrated quantile curves are linear between union breakpoints,
    so one constraint per breakpoint in [0, 1) plus the maxima at 1 decides it.
    """
    lx, lz = _law(x), _law(z)
    gx, gz = integrated_quantile(lx), integrated_quantile(lz)
    constraints = [(b, gz(b), gx(b)) for b in union_breakpoints(lx, lz)[:-1]]
    constraints.append((1.0, lz.max, lx.max))
    return _interval(constraints, alpha_max, tol)


def rho_z_eval(x: Law, z: Law, rho_z: float, rho_zero: float = 0.0,
               regime: Regime = Regime.STAR) -> EvalResult:
    """The auxiliary measure rho_Z: finite only on the scale orbit of Z.

    Returns alpha*rho_z + (1-alpha)*rho_zero (star) or alpha*rho_z (homog)
    when X equals alpha*Z in law, +inf otherwise.
    """
    alpha = law_match_scale(_law(x), _law(z), regime.alpha_max)
    if alpha is None:
        return EvalResult.infinite()
    if regime is Regime.STAR:
        return EvalResult.of(alpha * rho_z + (1.0 - alpha) * rho_zero)
    return EvalResult.of(alpha * rho_z)


def _minimize_over(interval: AlphaInterval, slope: float, intercept: float) -> EnvelopeCertificate:
    if slope >= 0:
        alpha, beta = interval.lo, interval.lo_breakpoint
    else:
        alpha, beta = interval.hi, interval.hi_breakpoint
    if math.isinf(alpha):
        # Unbounded homogeneous regime with negative rho_z.
        return EnvelopeCertificate(-math.inf)
    active = () if beta is None else (beta,)
    return EnvelopeCertificate(alpha * slope + intercept, alpha=alpha, active_breakpoints=active)


def _objective(rho_z: float, rho_zero: float, regime: Regime) -> Tuple[float, float]:
    if regime is Regime.STAR:
        return rho_z - rho_zero, rho_zero
    return rho_z, 0.0


def tilde_rho_z(x: Law, z: Law, rho_z: float, rho_zero: float = 0.0,
                regime: Regime = Regime.STAR, tol: float = TOL) -> EnvelopeCertificate:
    """SSD envelope inf{rho_Z(Y) : Y >=_2 X}.

    Linear in alpha over the feasible interval, so the minimum sits at an
    endpoint: lo when rho_z >= rho_zero, hi otherwise.
    """
    interval = ssd_scale_interval(x, z, regime.alpha_max, tol)
    if not interval.feasible:
        return EnvelopeCertificate.infeasible()
    return _minimize_over(interval, *_objective(rho_z, rho_zero, regime))


def csd_scale_envelope(x: Law, z: Law, rho_z: float, rho_zero: float = 0.0,
                       regime: Regime = Regime.STAR, tol: float = TOL) -> EnvelopeCertificate:
    """Convex-order envelope: tilde_rho_z with the extra constraint mean(alpha*Z) = mean(X)."""
    lx, lz = _law(x), _law(z)
    interval = ssd_scale_interval(lx, lz, regime.alpha_max, tol)
    if not interval.feasible:
        return EnvelopeCertificate.infeasible()
    mx, mz = lx.mean, lz.mean
    if abs(mz) > tol:
        alpha = mx / mz
        slack = tol * max(1.0, abs(alpha))
        if alpha < interval.lo - slack or alpha > interval.hi + slack:
            return EnvelopeCertificate.infeasible()
        alpha = min(max(alpha, interval.lo), interval.hi)
        slope, intercept = _objective(rho_z, rho_zero, regime)
        return EnvelopeCertificate(alpha * slope + intercept, alpha=alpha, active_breakpoints=(0.0,))
    if abs(mx) > tol:
        return EnvelopeCertificate.infeasible()
    return _minimize_over(interval, *_objective(rho_z, rho_zero, regime))


def _es_constraints(lx: EmpiricalDistribution, lz: EmpiricalDistribution):
    levels = union_breakpoints(lx, lz)
    a = np.array([es_at(lz, float(b)) for b in levels])
    b = np.array([es_at(lx, float(b)) for b in levels])
    return levels, a, b


def affine_envelope_lp(x: Law, z: Law, rho_z: float, tol: float = TOL) -> EnvelopeCertificate:
    """Solve min alpha*rho_z + c s.t. alpha*ES_b(Z) + c >= ES_b(X) at every union breakpoint, alpha in [0, 1].

    For fixed alpha the best c is max_k(b_k - alpha*a_k), so the objective
    is convex piecewise linear in alpha; its minimum lies at 0, 1 or where
    two constraints cross. Ties go to the smallest alpha.
    """
    lx, lz = _law(x), _law(z)
    levels, a, b = _es_constraints(lx, lz)

    da = a[:, None] - a[None, :]
    db = b[:, None] - b[None, :]
    crossing = np.abs(da) > _COEF_EPS
    alphas = np.divide(db, da, out=np.zeros_like(db), where=crossing)[crossing]
    alphas = alphas[(alphas >= 0.0) & (alphas <= 1.0)]
    alphas = np.unique(np.concatenate(([0.0, 1.0], alphas)))

    c_best = (b[None, :] - alphas[:, None] * a[None, :]).max(axis=1)
    phi = alphas * rho_z + c_best
    idx = int(np.flatnonzero(phi <= phi.min() + 1e-12)[0])
    alpha, c = float(alphas[idx]), float(c_best[idx])

    slack = b - alpha * a - c
    active = tuple(float(lv) for lv, s in zip(levels, slack) if s >= -tol)
    logging.debug("affine LP: %d constraints, %d vertices, optimum alpha=%r c=%r",
                  len(levels), len(alphas), alpha, c)
    return EnvelopeCertificate(float(phi[idx]), alpha=alpha, c=c, active_breakpoints=active)


def csd_affine_envelope(x: Law, z: Law, rho_z: float, tol: float = TOL) -> EnvelopeCertificate:
    """Affine envelope with the convex-order mean constraint alpha*mean(Z) + c = mean(X).

    Substituting c = mean(X) - alpha*mean(Z) leaves a one-dimensional
    interval problem; a_k - mean(Z) >= 0 because ES never falls below the mean.
    """
    lx, lz = _law(x), _law(z)
    levels, a, b = _es_constraints(lx, lz)
    mx, mz = lx.mean, lz.mean
    interval = _interval(list(zip(levels, a - mz, b - mx)), 1.0, tol)
    if not interval.feasible:
        return EnvelopeCertificate.infeasible()
    cert = _minimize_over(interval, rho_z - mz, mx)
    return EnvelopeCertificate(cert.value, alpha=cert.alpha, c=mx - cert.alpha * mz,
                               active_breakpoints=cert.active_breakpoints)


def affine_fsd_alpha_bound(x: Law, z: Law, tol: float = TOL) -> float:
    """sup{alpha in [0, 1] : alpha*Z + c >=_1 X for some real c}.

    Each candidate alpha is checked with c = sup_b(VaR_b(X) - alpha*VaR_b(Z)),
    the smallest shift that can work. On a finite space alpha = 1 is
    always feasible, so the first check normally settles it.
    """
    lx, lz = _law(x), _law(z)
    levels = union_breakpoints(lx, lz)[1:]
    alpha = 1.0
    while alpha > 1e-6:
        c = max(var_at(lx, float(b)) - alpha * var_at(lz, float(b)) for b in levels)
        if fsd_compare(lz.scaled(alpha, c), lx, tol).holds:
            return alpha
        logging.debug("affine FSD bound: alpha=%r infeasible, halving", alpha)
        alpha /= 2.0
    return 0.0


def kusuoka_es_identity(x: Law, beta: float) -> Tuple[float, float]:
    """ES_beta(X) and the quantile inner product of X with the dual variable y_beta.

    y_beta takes 0 with weight beta and 1/(1-beta) with weight 1-beta
    (the point mass 1 at beta = 0); the two returned values coincide.

    Raises:
        DomainError: If beta is outside [0, 1)
    """
    if not 0.0 <= beta < 1.0:
        raise DomainError(f"level must lie in [0, 1) (got: {beta})")
    lx = _law(x)
    if beta == 0.0:
        dual = EmpiricalDistribution.point_mass(1.0)
    else:
        dual = EmpiricalDistribution.from_atoms([0.0, 1.0 / (1.0 - beta)], [beta, 1.0 - beta])
    return es_at(lx, beta), quantile_inner(lx, dual)


def _report(rows: List[MemberRow], target: float, tol: float, kind: str) -> RepresentationReport:
    """Assemble a report: every member in Gamma bounds the target from above, the min attains it."""
    slack = tol * max(1.0, abs(target)) if math.isfinite(target) else tol
    gamma = [r for r in rows if r.in_gamma]
    if gamma:
        best = min(gamma, key=lambda r: (r.value, r.index))
        minimum, argmin = best.value, best.index
    else:
        minimum, argmin = math.inf, None

    if math.isinf(target):
        passed = minimum == target
    else:
        bounded = all(r.value >= target - slack for r in gamma)
        passed = bounded and abs(minimum - target) <= slack
    logging.info("%s representation: min=%r over %d of %d members, target=%r, %s",
                 kind, minimum, len(gamma), len(rows), target, "pass" if passed else "FAIL")
    return RepresentationReport(target, tuple(rows), minimum, argmin, passed, tol)


def minfamily_representation_check(x: RandomVariable, fam: CandidateFamily, rho_x: float,
                                   regime: Regime = Regime.STAR, mode: Mode = Mode.SSD,
                                   tol: float = TOL) -> RepresentationReport:
    """Check rho(X) = min over the family of the chosen envelope at X.

    Every envelope value must bound rho(X) from above (fails for measures
    that are not dominance-consistent and star-shaped) and the minimum must
    equal rho(X) through the self-member.
    """
    lx = to_distribution(x)
    if mode is Mode.AFFINE and fam.rho_zero != 0.0:
        logging.warning("affine envelopes assume rho(0) = 0 (got: %r)", fam.rho_zero)
    rows = []
    certs = []
    for i, (z, rho_z) in enumerate(fam.members):
        if mode is Mode.SSD:
            cert = tilde_rho_z(lx, z, rho_z, fam.rho_zero, regime, tol)
        elif mode is Mode.CSD:
            cert = csd_scale_envelope(lx, z, rho_z, fam.rho_zero, regime, tol)
        else:
            cert = affine_envelope_lp(lx, z, rho_z, tol)
        certs.append(replace(cert, chosen_index=i))
        rows.append(MemberRow(i, True, cert.alpha, cert.c, cert.value, cert.active_breakpoints))
        logging.debug("member %d: envelope=%r alpha=%r", i, cert.value, cert.alpha)
    report = _report(rows, rho_x, tol, f"minfamily/{mode.value}")
    if report.argmin is None or not math.isfinite(report.minimum):
        return report
    return replace(report, certificate=certs[report.argmin])


def _sup_gap(lx: EmpiricalDistribution, lz: EmpiricalDistribution,
             gamma) -> Tuple[float, Tuple[float, ...]]:
    """sup over union breakpoints in (0, 1] of VaR_b(X) - gamma(b), with the attaining levels."""
    levels = union_breakpoints(lx, lz)[1:]
    gaps = [var_at(lx, float(b)) - gamma(float(b)) for b in levels]
    top = max(gaps)
    return top, tuple(float(b) for b, g in zip(levels, gaps) if g >= top - TOL)


def var_robust_representation(x: RandomVariable, fam: CandidateFamily, f_x: float,
                              regime: Regime = Regime.STAR, tol: float = TOL) -> RepresentationReport:
    """Check f(X) = min over Gamma_X of sup_b {VaR_b(X) - gamma_Z(b)}.

    Gamma_X holds the members with X equal in law to alpha*Z, alpha within
    the regime bound; gamma_Z(b) = alpha*(VaR_b(Z) - f(Z)) - (1-alpha)*f(0)
    (f(0) is dropped in the homogeneous regime).
    """
    lx = to_distribution(x)
    f_zero = fam.rho_zero if regime is Regime.STAR else 0.0
    rows = []
    for i, (z, f_z) in enumerate(fam.members):
        lz = to_distribution(z)
        alpha = law_match_scale(lx, lz, regime.alpha_max, tol)
        if alpha is None:
            rows.append(MemberRow(i, False, None, None, math.inf))
            continue
        if math.isinf(f_x):
            rows.append(MemberRow(i, True, alpha, None, math.inf))
            continue
        value, active = _sup_gap(
            lx, lz, lambda b: alpha * (var_at(lz, b) - f_z) - (1.0 - alpha) * f_zero)
        rows.append(MemberRow(i, True, alpha, None, value, active))
    return _report(rows, f_x, tol, "var-robust")


def ca_var_representation(x: RandomVariable, fam: CandidateFamily, rho_x: float,
                          tol: float = TOL) -> RepresentationReport:
    """Cash-additive robustification: min over {rho(Z) <= 0} of sup_b {VaR_b(X) - a*VaR_b(Z)}.

    a is the affine first-order bound of affine_fsd_alpha_bound; the value
    for a member is also the shift c that makes a*Z + c dominate X.
    """
    lx = to_distribution(x)
    rows = []
    for i, (z, rho_z) in enumerate(fam.members):
        if rho_z > tol:
            rows.append(MemberRow(i, False, None, None, math.inf))
            continue
        lz = to_distribution(z)
        alpha_bar = affine_fsd_alpha_bound(lx, lz, tol)
        value, active = _sup_gap(lx, lz, lambda b: alpha_bar * var_at(lz, b))
        rows.append(MemberRow(i, True, alpha_bar, value, value, active))
    return _report(rows, rho_x, tol, "ca-var")


def affine_var_representation(x: RandomVariable, fam: CandidateFamily, f_x: float,
                              tol: float = TOL) -> RepresentationReport:
    """Affine-orbit robustification for normalized star-shaped measures.

    Gamma_X holds the members with rho(Z) <= 0 and X equal in law to
    alpha*Z + c for some (alpha, c) in [0, 1] x R; gamma_Z(b) = alpha*VaR_b(Z).
    """
    lx = to_distribution(x)
    rows = []
    for i, (z, f_z) in enumerate(fam.members):
        lz = to_distribution(z)
        match = law_match_affine(lx, lz, tol) if f_z <= tol else None
        if match is None:
            rows.append(MemberRow(i, False, None, None, math.inf))
            continue
        alpha, c = match
        value, active = _sup_gap(lx, lz, lambda b: alpha * var_at(lz, b))
        rows.append(MemberRow(i, True, alpha, c, value, active))
    return _report(rows, f_x, tol, "affine-var")
