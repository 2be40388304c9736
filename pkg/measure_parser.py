"""
Measure-spec text parsing.

Grammar (whitespace-insensitive):

    spec := atom | "min(" spec {"," spec} ")" | "max(" spec {"," spec} ")"
    atom := "var:" P | "es:" P | "mean" | "esssup" | "const:" R | "entropic:" Rpos
          | "mix:(" W "@es:" P {"," W "@es:" P} ")" | "robvar:" P ":" R ":" R

Mixture weights are normalized to sum to 1. Every error is a
MeasureSpecError carrying the byte offset and the tokens expected there.
"""

import logging
import re
from typing import List, Tuple

from measures import (Const, Entropic, Es, EsMixture, EssSup, MaxFamily, Mean,
                      MeasureSpec, MeasureSpecError, MinFamily, RobustVar, Var)

_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?")
_WORD = re.compile(r"[a-z]+")

_KEYWORDS = ("var", "es", "mean", "esssup", "const", "entropic", "mix", "robvar", "min", "max")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _fail(self, message: str, expected) -> MeasureSpecError:
        return MeasureSpecError(message, offset=self.pos, expected=expected)

    def _expect(self, token: str) -> None:
        self._skip()
        if not self.text.startswith(token, self.pos):
            found = self.text[self.pos:self.pos + 1] or "end of input"
            raise self._fail(f"unexpected {found!r}", {token})
        self.pos += len(token)

    def _peek(self, token: str) -> bool:
        self._skip()
        return self.text.startswith(token, self.pos)

    def _number(self, what: str) -> float:
        self._skip()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            raise self._fail(f"expected {what}", {"<number>"})
        self.pos = m.end()
        return float(m.group(0))

    def _build(self, start: int, factory, *args) -> MeasureSpec:
        try:
            return factory(*args)
        except MeasureSpecError as e:
            raise MeasureSpecError(e.message, offset=start) from e

    def parse(self) -> MeasureSpec:
        spec = self.spec()
        self._skip()
        if self.pos != len(self.text):
            raise self._fail(f"trailing input {self.text[self.pos:]!r}", {"end of input"})
        return spec

    def spec(self) -> MeasureSpec:
        self._skip()
        start = self.pos
        m = _WORD.match(self.text, self.pos)
        if not m or m.group(0) not in _KEYWORDS:
            raise self._fail("expected a measure", set(_KEYWORDS))
        word = m.group(0)
        self.pos = m.end()

        if word in ("min", "max"):
            children = self._spec_list()
            return self._build(start, MinFamily if word == "min" else MaxFamily, tuple(children))
        if word == "mean":
            return Mean()
        if word == "esssup":
            return EssSup()
        if word == "mix":
            self._expect(":")
            return self._build(start, EsMixture, self._mixture_terms())

        self._expect(":")
        if word == "var":
            return self._build(start, Var, self._number("a level in [0, 1]"))
        if word == "es":
            return self._build(start, Es, self._number("a level in [0, 1]"))
        if word == "const":
            return self._build(start, Const, self._number("a real constant"))
        if word == "entropic":
            return self._build(start, Entropic, self._number("a positive theta"))
        # robvar
        beta = self._number("a level in [0, 1]")
        self._expect(":")
        d_b = self._number("a lower discount")
        self._expect(":")
        d_u = self._number("an upper discount")
        return self._build(start, RobustVar, beta, d_b, d_u)

    def _spec_list(self) -> List[MeasureSpec]:
        self._expect("(")
        children = [self.spec()]
        while self._peek(","):
            self.pos += 1
            children.append(self.spec())
        self._expect(")")
        return children

    def _mixture_terms(self) -> Tuple[Tuple[float, float], ...]:
        self._expect("(")
        start = self.pos
        raw = [self._mixture_term()]
        while self._peek(","):
            self.pos += 1
            raw.append(self._mixture_term())
        self._expect(")")
        for w, _ in raw:
            if w <= 0:
                raise MeasureSpecError(f"mixture weights must be positive (got: {w})", offset=start)
        total = sum(w for w, _ in raw)
        return tuple((w / total, s) for w, s in raw)

    def _mixture_term(self) -> Tuple[float, float]:
        weight = self._number("a mixture weight")
        self._expect("@")
        self._expect("es")
        self._expect(":")
        return weight, self._number("a level in (0, 1]")


def parse_measure_spec(text: str) -> MeasureSpec:
    """Parse measure-spec text into a MeasureSpec tree.

    Args:
        text: Measure-spec text, e.g. "min(es:0.5,entropic:1)"

    Returns:
        The validated MeasureSpec

    Raises:
        MeasureSpecError: With byte offset and expected tokens on any error
    """
    spec = _Parser(text).parse()
    logging.debug("Parsed measure spec %r as %s", text, spec)
    return spec
