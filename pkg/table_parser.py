"""
CSV ingestion of scenario tables.

Format: one scenario per line, "value" or "value,weight", with an optional
header line "value" / "value,weight". Blank lines are skipped. Weights, when
given, must be positive on every row and are normalized to sum to 1;
without weights scenarios are equally likely.
"""

import csv
import io
import logging
import math
import os
from dataclasses import dataclass
from typing import List, Optional, Tuple

from scenario_core import RandomVariable, ScenarioSpace


class InputError(Exception):
    """Raised for unreadable or malformed scenario data, with its line and column."""

    def __init__(self, message: str, path: str, line: int, column: int):
        self.path = path
        self.line = line
        self.column = column
        super().__init__(f"{path}:{line}:{column}: {message}")


@dataclass(frozen=True)
class InputTable:
    rows: Tuple[Tuple[float, Optional[float]], ...]
    source: str
    diagnostics: Tuple[str, ...] = ()

    @property
    def weighted(self) -> bool:
        return self.rows[0][1] is not None

    def to_random_variable(self) -> RandomVariable:
        """One scenario per row; duplicate values are merged later, by the law."""
        values = [v for v, _ in self.rows]
        if not self.weighted:
            return RandomVariable.from_values(values)
        total = math.fsum(w for _, w in self.rows)
        return RandomVariable(ScenarioSpace(tuple(w / total for _, w in self.rows)), tuple(values))


def _number(cell: str, path: str, line: int, column: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise InputError(f"non-numeric cell {cell!r}", path, line, column) from None
    if not math.isfinite(value):
        raise InputError(f"non-finite cell {cell!r}", path, line, column)
    return value


def _is_header(cells: List[str]) -> bool:
    names = [c.strip().lower() for c in cells]
    return names in (["value"], ["value", "weight"])


def ingest_csv(path: str) -> InputTable:
    """Parse a scenario CSV file.

    Args:
        path: Absolute or relative path to the CSV file (UTF-8)

    Returns:
        InputTable with at least one row

    Raises:
        InputError: Invalid UTF-8, non-numeric cell, nonpositive weight, inconsistent
            columns or empty file
        OSError: If the file cannot be read
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"input file not found: {path}")

    rows: List[Tuple[float, Optional[float]]] = []
    diagnostics: List[str] = []
    blank = 0
    width = None
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line = raw.count(b"\n", 0, e.start) + 1
        raise InputError(f"invalid UTF-8 byte 0x{raw[e.start]:02x}", path, line, 1) from e

    with io.StringIO(text, newline="") as fh:
        for line_no, cells in enumerate(csv.reader(fh), start=1):
            if not cells or all(not c.strip() for c in cells):
                blank += 1
                continue
            if not rows and width is None and _is_header(cells):
                width = len(cells)
                diagnostics.append(f"header on line {line_no}")
                continue
            if len(cells) > 2:
                raise InputError(f"expected at most 2 columns (got: {len(cells)})", path, line_no, 3)
            if width is None:
                width = len(cells)
            elif len(cells) != width:
                raise InputError(f"expected {width} column(s) (got: {len(cells)})", path, line_no, 1)

            value = _number(cells[0].strip(), path, line_no, 1)
            weight = None
            if len(cells) == 2:
                weight = _number(cells[1].strip(), path, line_no, 2)
                if weight <= 0:
                    raise InputError(f"nonpositive weight {weight}", path, line_no, 2)
            rows.append((value, weight))

    if not rows:
        raise InputError("empty file: no scenario rows", path, 1, 1)
    if blank:
        diagnostics.append(f"skipped {blank} blank line(s)")
    if rows[0][1] is not None:
        total = math.fsum(w for _, w in rows)
        if abs(total - 1.0) > 1e-12:
            diagnostics.append(f"weights normalized from total {total!r}")

    logging.info("Read %d scenario row(s) from %s", len(rows), path)
    for note in diagnostics:
        logging.debug("%s: %s", path, note)
    return InputTable(tuple(rows), path, tuple(diagnostics))
