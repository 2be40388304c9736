#!/usr/bin/env python3
"""
Print the axiom matrix (pass / fail per property) for a set of measure specs.

Each cell runs the randomized property check with a fixed seed; failed
cells list the seed of their first counterexample so it can be replayed.

Usage:
    # Default set of measures, 500 trials per cell
    python tools/axiom_matrix.py

    # Custom measures and trial count
    python tools/axiom_matrix.py --trials 200 --seed 7 "es:0.9" "robvar:0.9:0.5:2"
"""

import argparse
import logging
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from measure_parser import parse_measure_spec
from measures import MeasureSpecError, measure_axiom_profile
from property_harness import CHECKS, run_axiom_matrix

DEFAULT_SPECS = [
    "var:0.9",
    "es:0.9",
    "entropic:1",
    "mix:(0.5@es:0.5,0.5@es:0.99)",
    "robvar:0.9:0.5:2",
    "max(var:0.9,const:1)",
    "min(es:0.5,es:0.9)",
    "min(es:0.5,entropic:1)",
]


def format_cell(report, claimed: bool) -> str:
    """'ok' / 'FAIL@seed', with '*' marking properties the profile claims."""
    mark = "*" if claimed else " "
    if report.passed:
        return f"ok{mark}"
    return f"FAIL@{report.failures[0].seed}{mark}"


def main():
    logging.basicConfig(level=logging.WARNING, format='[%(asctime)s] %(levelname)s: %(message)s')
    parser = argparse.ArgumentParser(description="Randomized axiom matrix for measure specs")
    parser.add_argument('specs', nargs='*', default=DEFAULT_SPECS, help='Measure specs')
    parser.add_argument('--trials', type=int, default=500, help='Trials per cell')
    parser.add_argument('--seed', type=int, default=0, help='Base seed')
    args = parser.parse_args()

    columns = [axiom.value for axiom in CHECKS]
    width = max(len(s) for s in args.specs)
    print(" " * width + " | " + " | ".join(columns))

    exit_code = 0
    for text in args.specs:
        try:
            spec = parse_measure_spec(text)
        except MeasureSpecError as e:
            print(f"Error: {e}", file=sys.stderr)
            exit_code = 1
            continue
        claimed = {a.value for a in measure_axiom_profile(spec)}
        matrix = run_axiom_matrix(spec, args.trials, args.seed)
        cells = [format_cell(matrix[c], c in claimed).ljust(len(c)) for c in columns]
        print(text.ljust(width) + " | " + " | ".join(cells))
        if any(c in claimed and not matrix[c].passed for c in columns):
            exit_code = 3

    sys.exit(exit_code)


if __name__ == "__main__":
    main()
