"""
Integration tests for the starshape command line.
"""

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

import starshape
from starshape import EXIT_DATA, EXIT_INTERNAL, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main

pytestmark = pytest.mark.integration


@pytest.fixture
def golden(fixture_path):
    def _read(name: str) -> str:
        return (fixture_path / "golden" / name).read_text(encoding="utf-8")
    return _read


@pytest.fixture
def run(capsys):
    """Run main() with an empty environment unless given one; returns (code, stdout, stderr)."""
    def _run(*argv, environ=None):
        code = main([str(a) for a in argv], environ if environ is not None else {})
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run


class TestCompute:
    """Tests for the compute command."""

    @pytest.mark.parametrize("measure,fixture,golden_file", [
        ("es:0.5", "u1234.csv", "compute_es.json"),
        ("min(es:0.5,es:0.9)", "u1234.csv", "compute_min.json"),
        ("robvar:0.75:0.5:2", "minus1_2.csv", "compute_robvar.json"),
    ])
    def test_golden(self, run, golden, fixture_path, measure, fixture, golden_file):
        code, out, _ = run("compute", "--measure", measure, "--input", fixture_path / fixture)
        assert code == EXIT_OK
        assert out == golden(golden_file)

    def test_robust_var_shorthand(self, run, golden, minus1_2_csv):
        code, out, _ = run("compute", "--beta", "0.75", "--d-b", "0.5", "--d-u", "2",
                           "--input", minus1_2_csv)
        assert code == EXIT_OK
        assert out == golden("compute_robvar.json")

    def test_weighted_input(self, run, weighted_csv):
        code, out, _ = run("compute", "--measure", "mean", "--input", weighted_csv)
        assert code == EXIT_OK
        assert json.loads(out) == {"spec": "mean", "value": 1.75, "n_atoms": 2}

    def test_byte_identical_reruns(self, run, u1234_csv):
        first = run("compute", "-m", "entropic:0.3", "-i", u1234_csv)
        second = run("compute", "-m", "entropic:0.3", "-i", u1234_csv)
        assert first[0] == EXIT_OK
        assert first[1] == second[1]

    def test_output_file(self, run, tmp_path, golden, u1234_csv):
        target = tmp_path / "out.json"
        code, out, _ = run("compute", "-m", "es:0.5", "-i", u1234_csv, "-o", target)
        assert code == EXIT_OK
        assert out == ""
        assert target.read_text(encoding="utf-8") == golden("compute_es.json")

    def test_diagnostics_on_stderr(self, run, u1234_csv):
        code, out, err = run("compute", "-m", "mean", "-i", u1234_csv,
                             environ={"STARSHAPE_LOG": "info"})
        assert code == EXIT_OK
        assert "Read 4 scenario row(s)" in err
        assert json.loads(out)["value"] == 2.5


class TestExitCodes:
    """The 0 / 1 / 2 / 3 exit-code contract."""

    def test_help(self, run):
        assert run("--help")[0] == EXIT_OK

    @pytest.mark.parametrize("argv", [
        ["bogus"],
        ["compute"],
        ["compute", "--trials", "3"],
        ["dominance", "--order", "fourth"],
    ])
    def test_usage_errors(self, run, argv):
        assert run(*argv)[0] == EXIT_USAGE

    def test_missing_measure(self, run, u1234_csv):
        assert run("compute", "-i", u1234_csv)[0] == EXIT_USAGE

    def test_spec_parse_error_reports_offset(self, run, u1234_csv):
        code, out, err = run("compute", "-m", "min(es:0.5", "-i", u1234_csv)
        assert code == EXIT_USAGE
        assert out == ""
        assert "offset 10" in err

    def test_spec_domain_error(self, run, u1234_csv):
        assert run("compute", "-m", "es:1.5", "-i", u1234_csv)[0] == EXIT_USAGE

    def test_invalid_log_level(self, run, u1234_csv):
        code, _, err = run("compute", "-m", "mean", "-i", u1234_csv, environ={"STARSHAPE_LOG": "loud"})
        assert code == EXIT_USAGE
        assert "STARSHAPE_LOG" in err

    def test_invalid_flag_range(self, run, u1234_csv):
        assert run("verify", "-m", "mean", "--property", "convex", "--trials", "0")[0] == EXIT_USAGE

    def test_data_error_with_location(self, run, write_csv):
        path = write_csv("bad.csv", "1,-0.5\n")
        code, _, err = run("compute", "-m", "mean", "-i", path)
        assert code == EXIT_DATA
        assert f"{path}:1:2:" in err

    def test_invalid_utf8_is_data_error(self, run, tmp_path):
        path = tmp_path / "latin.csv"
        path.write_bytes(b"1\n\xff\xfe2\n")
        code, out, err = run("compute", "-m", "mean", "-i", path)
        assert code == EXIT_DATA
        assert out == ""
        assert f"{path}:2:1:" in err
        assert "Traceback" not in err

    def test_missing_file(self, run, tmp_path):
        assert run("compute", "-m", "mean", "-i", tmp_path / "none.csv")[0] == EXIT_DATA

    def test_verification_failure(self, run):
        code, out, _ = run("verify", "-m", "var:0.9", "--property", "ssd-consistent",
                           "--trials", "500", "--seed", "7")
        assert code == EXIT_VERIFY
        doc = json.loads(out)
        assert doc["pass"] is False
        assert doc["failures"]

    def test_internal_error(self, run, u1234_csv, mocker):
        mocker.patch.object(starshape, "evaluate", side_effect=RuntimeError("boom"))
        code, _, err = run("compute", "-m", "mean", "-i", u1234_csv)
        assert code == EXIT_INTERNAL
        assert "boom" in err


class TestDominance:
    """Tests for the dominance command."""

    def test_first_order_holds(self, run, u02_csv, u01_csv):
        code, out, _ = run("dominance", "--order", "first", "-i", u02_csv, u01_csv)
        assert code == EXIT_OK
        assert json.loads(out) == {"order": "first", "holds": True, "witness": None}

    def test_second_order_fails_with_witness(self, run, u01_csv, u02_csv):
        code, out, _ = run("dominance", "-i", u01_csv, u02_csv)
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["order"] == "second"
        assert doc["holds"] is False
        assert set(doc["witness"]) == {"beta", "lhs", "rhs"}

    def test_needs_two_inputs(self, run, u01_csv):
        assert run("dominance", "-i", u01_csv)[0] == EXIT_USAGE


class TestVerify:
    """Tests for the verify command."""

    def test_property_pass(self, run):
        code, out, _ = run("verify", "-m", "es:0.9", "--property", "ssd-consistent",
                           "--trials", "100", "--seed", "7")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["pass"] is True
        assert doc["spec"] == "es:0.9"

    def test_star_shaped_min_family(self, run):
        code, _, _ = run("verify", "-m", "min(es:0.5,entropic:1.0)", "--property", "star-shaped",
                         "--trials", "100", "--seed", "7")
        assert code == EXIT_OK

    def test_all_properties(self, run):
        code, out, _ = run("verify", "-m", "es:0.5", "--property", "all", "--trials", "20")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["refuted"] == []
        assert "cash-additive" in doc["properties"]

    def test_minfamily_representation(self, run, u1234_csv, u01_csv, u02_csv):
        code, out, _ = run("verify", "-m", "es:0.9", "--representation", "minfamily",
                           "-i", u1234_csv, "--candidates", u01_csv, u02_csv)
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["pass"] is True
        assert doc["representation"] == "minfamily"
        assert doc["argmin"] == 2
        assert doc["min"] == 4.0
        assert len(doc["members"]) == 3
        assert doc["certificate"]["chosen_index"] == 2

    @pytest.mark.parametrize("kind,measure", [
        ("var-robust", "var:0.9"),
        ("ca-var", "es:0.9"),
        ("affine-var", "es:0.9"),
    ])
    def test_other_representations(self, run, minus1_2_csv, u02_csv, kind, measure):
        code, out, _ = run("verify", "-m", measure, "--representation", kind,
                           "-i", minus1_2_csv, "--candidates", u02_csv)
        assert code == EXIT_OK
        assert json.loads(out)["pass"] is True

    def test_needs_property_or_representation(self, run):
        assert run("verify", "-m", "mean")[0] == EXIT_USAGE

    def test_rejects_both(self, run, u01_csv):
        assert run("verify", "-m", "mean", "--property", "convex", "--representation", "ca-var",
                   "-i", u01_csv)[0] == EXIT_USAGE


class TestEnvelope:
    """Tests for the envelope command."""

    def test_ssd_scale(self, run, u01_csv, u02_csv):
        code, out, _ = run("envelope", "-i", u01_csv, u02_csv, "--rho-z", "1")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["kind"] == "ssd-scale"
        assert doc["value"] == 0.5
        assert doc["alpha"] == 0.5

    def test_infeasible_prints_inf(self, run, u1234_csv, u01_csv):
        code, out, _ = run("envelope", "-i", u1234_csv, u01_csv, "--rho-z", "1")
        assert code == EXIT_OK
        assert json.loads(out)["value"] == "inf"
        assert '"value": "inf"' in out

    def test_affine(self, run, u01_csv, write_csv):
        z = write_csv("z.csv", "-1\n1\n")
        code, out, _ = run("envelope", "--kind", "ssd-affine", "-i", u01_csv, z, "--rho-z", "0.2")
        assert code == EXIT_OK
        doc = json.loads(out)
        assert doc["value"] == 0.6
        assert doc["alpha"] == 0.5
        assert doc["c"] == 0.5

    def test_csd_scale(self, run, u01_csv, u02_csv):
        code, out, _ = run("envelope", "--kind", "csd-scale", "-i", u01_csv, u02_csv,
                           "--rho-z", "3", "--rho-0", "1")
        assert code == EXIT_OK
        assert json.loads(out)["value"] == 2.0

    def test_requires_rho_z(self, run, u01_csv, u02_csv):
        assert run("envelope", "-i", u01_csv, u02_csv)[0] == EXIT_USAGE

    def test_unbounded_homogeneous_envelope(self, run, u01_csv, u02_csv):
        code, out, _ = run("envelope", "-i", u01_csv, u02_csv, "--rho-z", "-1", "--regime", "homog")
        assert code == EXIT_OK
        assert json.loads(out)["value"] == "-inf"


class TestJsonable:
    """Tests for the JSON value encoding."""

    def test_infinities(self):
        assert starshape._jsonable({"a": float("inf"), "b": [float("-inf")]}) == {"a": "inf", "b": ["-inf"]}

    def test_rounds_to_twelve_digits(self):
        assert starshape._jsonable(1.0 / 3.0) == 0.333333333333

    def test_nan_refused(self):
        with pytest.raises(ValueError, match="NaN"):
            starshape._jsonable(float("nan"))
