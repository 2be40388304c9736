"""
starshape: compute, compare and verify law-invariant star-shaped risk measures.

Commands:
- compute     evaluate a measure spec on a scenario CSV
- dominance   first / second / convex order comparison of two CSVs
- verify      randomized axiom checks, or min-representation checks over candidate CSVs
- envelope    scale / affine envelope certificate of X against a reference Z

JSON goes to stdout (or --output); diagnostics go to stderr at the level
named by STARSHAPE_LOG.

Exit codes: 0 success, 1 usage / measure-spec / configuration error,
2 data error, 3 verification failure, 4 internal error.
"""

import argparse
import json
import logging
import math
import os
import sys
from typing import Any, List, Optional

from config_loader import (DEFAULT_LOG_LEVEL, CliConfig, ConfigError, build_cli_config,
                           configure_logging)
from dominance import csd_compare, fsd_compare, ssd_compare
from envelopes import (Candidate, CandidateFamily, Mode, Regime, affine_envelope_lp,
                       affine_var_representation, ca_var_representation,
                       csd_affine_envelope, csd_scale_envelope,
                       minfamily_representation_check, tilde_rho_z,
                       var_robust_representation)
from measure_parser import parse_measure_spec
from measures import (EntropicOverflowError, MeasureSpec, MeasureSpecError, RobustVar,
                      evaluate)
from property_harness import (CHECKS, HarnessConsistencyError, check_claimed_axioms,
                              run_axiom_matrix)
from scenario_core import DomainError, RandomVariable, to_distribution, transform
from table_parser import InputError, ingest_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_VERIFY = 3
EXIT_INTERNAL = 4

ORDERS = {"first": fsd_compare, "second": ssd_compare, "convex": csd_compare}
ENVELOPE_KINDS = ("ssd-scale", "csd-scale", "ssd-affine", "csd-affine")
REPRESENTATIONS = ("minfamily", "var-robust", "ca-var", "affine-var")
PROPERTIES = tuple(axiom.value for axiom in CHECKS) + ("all",)


class _ArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with EXIT_USAGE instead of argparse's 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


class _UsageError(Exception):
    pass


def _jsonable(obj: Any) -> Any:
    """Round floats to 12 significant digits; infinities become "inf" / "-inf".

    "-inf" only comes out of the homogeneous-regime envelope with a negative
    --rho-z. NaN has no JSON form here and is refused.
    """
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            raise ValueError("NaN cannot be reported")
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(doc: dict, config: CliConfig) -> None:
    text = json.dumps(_jsonable(doc), indent=2) + "\n"
    if config.output:
        with open(config.output, "w", encoding="utf-8") as fh:
            fh.write(text)
        logging.info("Wrote %s", config.output)
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _load(path: str) -> RandomVariable:
    return ingest_csv(path).to_random_variable()


def _measure(config: CliConfig) -> MeasureSpec:
    if config.measure is None:
        raise _UsageError("--measure is required")
    return parse_measure_spec(config.measure)


def _single_input(config: CliConfig) -> RandomVariable:
    if len(config.inputs) != 1:
        raise _UsageError("exactly one --input is required")
    return _load(config.inputs[0])


def _pair_inputs(config: CliConfig):
    if len(config.inputs) != 2:
        raise _UsageError("two --input files are required")
    return _load(config.inputs[0]), _load(config.inputs[1])


def cmd_compute(config: CliConfig) -> int:
    if config.measure is not None:
        spec = parse_measure_spec(config.measure)
    elif None not in (config.beta, config.d_b, config.d_u):
        spec = RobustVar(config.beta, config.d_b, config.d_u)
    else:
        raise _UsageError("compute needs --measure or all of --beta, --d-b, --d-u")
    rv = _single_input(config)
    result = evaluate(spec, rv)
    _emit({"spec": str(spec), "value": result.value, "n_atoms": to_distribution(rv).size}, config)
    return EXIT_OK


def cmd_dominance(config: CliConfig) -> int:
    x, y = _pair_inputs(config)
    verdict = ORDERS[config.order](to_distribution(x), to_distribution(y), config.tolerance)
    _emit({"order": config.order, **verdict.to_dict()}, config)
    return EXIT_OK


def _verify_property(config: CliConfig, spec: MeasureSpec) -> int:
    if config.property_name != "all":
        report = CHECKS_BY_NAME[config.property_name](spec, config.trials, config.seed)
        _emit(report.to_dict(), config)
        return EXIT_OK if report.passed else EXIT_VERIFY

    try:
        matrix = run_axiom_matrix(spec, config.trials, config.seed)
    except HarnessConsistencyError as e:
        logging.error("%s", e)
        return EXIT_VERIFY
    refuted = check_claimed_axioms(spec, config.trials, config.seed, matrix)
    doc = {
        "spec": str(spec),
        "trials": config.trials,
        "seed": config.seed,
        "properties": {name: r.to_dict() for name, r in matrix.items()},
        "refuted": [a.value for a in refuted],
        "pass": not refuted,
    }
    _emit(doc, config)
    return EXIT_OK if not refuted else EXIT_VERIFY


def _verify_representation(config: CliConfig, spec: MeasureSpec) -> int:
    x = _single_input(config)
    rho_x = evaluate(spec, x).value
    candidates = [Candidate(z, evaluate(spec, z).value) for z in map(_load, config.candidates)]
    rho_zero = spec.value_at_zero()
    kind = config.representation
    regime = Regime(config.regime)

    if kind in ("ca-var", "affine-var"):
        # Cash-shifted self-member x - rho(x).
        shifted = transform(x, 1.0, -rho_x)
        candidates.append(Candidate(shifted, evaluate(spec, shifted).value))
    else:
        candidates.append(Candidate(x, rho_x))
    family = CandidateFamily(tuple(candidates), rho_zero)

    if kind == "minfamily":
        report = minfamily_representation_check(x, family, rho_x, regime, Mode(config.mode),
                                                config.tolerance)
    elif kind == "var-robust":
        report = var_robust_representation(x, family, rho_x, regime, config.tolerance)
    elif kind == "ca-var":
        report = ca_var_representation(x, family, rho_x, config.tolerance)
    else:
        report = affine_var_representation(x, family, rho_x, config.tolerance)

    _emit({"representation": kind, "spec": str(spec), **report.to_dict()}, config)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_verify(config: CliConfig) -> int:
    spec = _measure(config)
    if (config.property_name is None) == (config.representation is None):
        raise _UsageError("verify needs exactly one of --property or --representation")
    if config.property_name is not None:
        return _verify_property(config, spec)
    return _verify_representation(config, spec)


def cmd_envelope(config: CliConfig) -> int:
    if config.rho_z is None:
        raise _UsageError("--rho-z is required")
    x, z = _pair_inputs(config)
    regime = Regime(config.regime)
    if config.kind == "ssd-scale":
        cert = tilde_rho_z(x, z, config.rho_z, config.rho_zero, regime, config.tolerance)
    elif config.kind == "csd-scale":
        cert = csd_scale_envelope(x, z, config.rho_z, config.rho_zero, regime, config.tolerance)
    elif config.kind == "ssd-affine":
        cert = affine_envelope_lp(x, z, config.rho_z, config.tolerance)
    else:
        cert = csd_affine_envelope(x, z, config.rho_z, config.tolerance)
    _emit({"kind": config.kind, **cert.to_dict()}, config)
    return EXIT_OK


COMMANDS = {
    "compute": cmd_compute,
    "dominance": cmd_dominance,
    "verify": cmd_verify,
    "envelope": cmd_envelope,
}
CHECKS_BY_NAME = {axiom.value: check for axiom, check in CHECKS.items()}


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="starshape", description="Law-invariant star-shaped risk measures")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, inputs="+"):
        p.add_argument('--input', '-i', dest='inputs', nargs=inputs, default=[],
                       help='Scenario CSV file(s): "value[,weight]" per line')
        p.add_argument('--tolerance', type=float, default=1e-9, help='Absolute comparison tolerance')
        p.add_argument('--output', '-o', help='Write JSON here instead of stdout')

    p = sub.add_parser('compute', help='Evaluate a measure on a scenario file')
    common(p, inputs=1)
    p.add_argument('--measure', '-m', help='Measure spec, e.g. "min(es:0.5,entropic:1)"')
    p.add_argument('--beta', type=float, help='Robust VaR level (shorthand when --measure is omitted)')
    p.add_argument('--d-b', dest='d_b', type=float, help='Lower discount factor')
    p.add_argument('--d-u', dest='d_u', type=float, help='Upper discount factor')

    p = sub.add_parser('dominance', help='Stochastic dominance of the first input over the second')
    common(p, inputs=2)
    p.add_argument('--order', choices=sorted(ORDERS), default='second', help='Dominance order')

    p = sub.add_parser('verify', help='Check axioms or min-representations')
    common(p)
    p.add_argument('--measure', '-m', help='Measure spec')
    p.add_argument('--property', dest='property_name', choices=PROPERTIES, help='Axiom to check')
    p.add_argument('--representation', choices=REPRESENTATIONS, help='Representation to check')
    p.add_argument('--candidates', nargs='*', default=[], help='Candidate CSV files')
    p.add_argument('--mode', choices=[m.value for m in Mode], default='ssd', help='Envelope used by minfamily')
    p.add_argument('--regime', choices=[r.value for r in Regime], default='star', help='Scale range')
    p.add_argument('--trials', type=int, default=500, help='Randomized trials per property')
    p.add_argument('--seed', type=int, default=0, help='Base seed')

    p = sub.add_parser('envelope', help='Envelope certificate of X (first input) against Z (second)')
    common(p, inputs=2)
    p.add_argument('--kind', choices=ENVELOPE_KINDS, default='ssd-scale', help='Envelope construction')
    p.add_argument('--rho-z', dest='rho_z', type=float, help='Measure value of Z')
    p.add_argument('--rho-0', dest='rho_zero', type=float, default=0.0, help='Measure value of 0')
    p.add_argument('--regime', choices=[r.value for r in Regime], default='star', help='Scale range')
    return parser


def main(argv: Optional[List[str]] = None, environ=None) -> int:
    """Run one command; returns the process exit code."""
    environ = os.environ if environ is None else environ
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    try:
        config = build_cli_config(args, environ)
    except ConfigError as e:
        configure_logging(DEFAULT_LOG_LEVEL)
        logging.error("Configuration error: %s", e)
        return EXIT_USAGE
    configure_logging(config.log_level)

    try:
        return COMMANDS[config.command](config)
    except (_UsageError, MeasureSpecError) as e:
        logging.error("%s", e)
        return EXIT_USAGE
    except (InputError, DomainError, EntropicOverflowError, OSError) as e:
        logging.error("Data error: %s", e)
        return EXIT_DATA
    except Exception as e:
        logging.exception("Unexpected failure: %s", e)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
