"""
Tests for measure_parser.py module.
"""

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from measure_parser import parse_measure_spec
from measures import (Const, Entropic, Es, EsMixture, EssSup, MaxFamily, Mean,
                      MeasureSpecError, MinFamily, RobustVar, Var)


class TestParseMeasureSpec:
    """Tests for parse_measure_spec."""

    @pytest.mark.parametrize("text,expected", [
        ("var:0.9", Var(0.9)),
        ("es:0.5", Es(0.5)),
        ("mean", Mean()),
        ("esssup", EssSup()),
        ("const:-3", Const(-3.0)),
        ("const:1e2", Const(100.0)),
        ("entropic:1.0", Entropic(1.0)),
        ("entropic:.5", Entropic(0.5)),
        ("robvar:0.75:0.5:2", RobustVar(0.75, 0.5, 2.0)),
        ("min(es:0.5,es:0.9)", MinFamily((Es(0.5), Es(0.9)))),
        ("max(var:0.95,const:1)", MaxFamily((Var(0.95), Const(1.0)))),
        ("min(es:0.5,entropic:1.0)", MinFamily((Es(0.5), Entropic(1.0)))),
    ])
    def test_parses(self, text, expected):
        assert parse_measure_spec(text) == expected

    def test_whitespace_insensitive(self):
        assert parse_measure_spec("  min( es : 0.5 ,\tmax(var:0.9, const:1) ) ") == \
            MinFamily((Es(0.5), MaxFamily((Var(0.9), Const(1.0)))))

    def test_mixture_weights_normalized(self):
        spec = parse_measure_spec("mix:(1@es:0.5,3@es:0.99)")
        assert isinstance(spec, EsMixture)
        assert spec.terms == ((0.25, 0.5), (0.75, 0.99))

    @pytest.mark.parametrize("text", [
        "var:0.9",
        "mix:(0.5@es:0.5,0.5@es:0.99)",
        "min(es:0.5,max(var:0.95,const:1),robvar:0.9:0.5:2)",
        "entropic:0.25",
        "esssup",
    ])
    def test_canonical_text_round_trips(self, text):
        spec = parse_measure_spec(text)
        assert str(spec) == text
        assert parse_measure_spec(str(spec)) == spec


class TestParseErrors:
    """Tests for parse diagnostics."""

    @pytest.mark.parametrize("text,offset", [
        ("", 0),
        ("foo", 0),
        ("var:", 4),
        ("var:x", 4),
        ("min(es:0.5", 10),
        ("min(es:0.5;es:0.9)", 10),
        ("mean extra", 5),
        ("mix:(0.5@var:0.5)", 9),
    ])
    def test_error_offsets(self, text, offset):
        with pytest.raises(MeasureSpecError) as exc_info:
            parse_measure_spec(text)
        assert exc_info.value.offset == offset

    def test_expected_tokens_listed(self):
        with pytest.raises(MeasureSpecError) as exc_info:
            parse_measure_spec("bogus")
        assert {"var", "es", "min", "max"} <= exc_info.value.expected
        assert "offset 0" in str(exc_info.value)

    def test_missing_close_paren_expected(self):
        with pytest.raises(MeasureSpecError) as exc_info:
            parse_measure_spec("max(var:0.9")
        assert exc_info.value.expected == frozenset({")"})

    @pytest.mark.parametrize("text,offset", [
        ("var:1.5", 0),
        ("entropic:0", 0),
        ("min(es:0.5,robvar:0.5:2:1)", 11),
        ("mix:(0@es:0.5)", 5),
    ])
    def test_domain_errors_point_at_measure(self, text, offset):
        with pytest.raises(MeasureSpecError) as exc_info:
            parse_measure_spec(text)
        assert exc_info.value.offset == offset
