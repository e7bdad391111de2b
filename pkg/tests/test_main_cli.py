"""Tests for the command-line entry point."""

import json
import math

import pytest
from pytest_mock import MockerFixture

import northcott_towers.main as main_module
from northcott_towers.exceptions import NonConvergenceError
from northcott_towers.main import EXIT_OK, EXIT_PRECISION, EXIT_SEARCH_EXHAUSTED, EXIT_USAGE, run
from northcott_towers.models import SuiteResult

TOL = ["--tol", "1/1000000"]


def _json(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


@pytest.fixture
def certificate_file(tmp_path):
    """A one-step house-above certificate written through --out."""
    path = tmp_path / "cert.json"
    code = run(["construct", "--variant", "b", "--t", "2", "--steps", "1", "--d-seed", "7", "--out", str(path), *TOL])
    assert code == EXIT_OK
    return path


class TestConstruct:
    """Tests for the construct and verify subcommands."""

    def test_json(self, capsys):
        """Test the certificate on stdout."""
        assert run(["construct", "--variant", "b", "--t", "2", "--steps", "1", "--d-seed", "7", *TOL]) == EXIT_OK
        cert = _json(capsys)
        assert cert["schema"] == 1
        assert (cert["tower"]["steps"][0]["p"], cert["tower"]["steps"][0]["d"]) == ("251", "7")

    def test_csv(self, capsys):
        """Test the per-step CSV rows."""
        args = ["construct", "--variant", "house-above", "--t", "2", "--steps", "1", "--d-seed", "7", "--format", "csv"]
        assert run([*args, *TOL]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("step,p,d,")
        assert lines[1].startswith("1,251,7,True")

    def test_out_file(self, certificate_file, capsys):
        """Test that --out leaves stdout empty."""
        assert capsys.readouterr().out == ""
        assert json.loads(certificate_file.read_text())["tower"]["steps"][0]["p"] == "251"

    def test_exhausted(self, capsys):
        """Test that an empty prime window exits with code 3."""
        assert run(["construct", "--variant", "a", "--t", "2", "--steps", "1", "--d-seed", "7", *TOL]) == EXIT_SEARCH_EXHAUSTED
        assert "northcott construct:" in capsys.readouterr().err

    def test_weighted_needs_gamma(self, capsys):
        """Test that the weighted variant requires gamma and epsilon."""
        assert run(["construct", "--variant", "weighted", "--steps", "1", "--d-seed", "3"]) == EXIT_USAGE
        assert "--gamma" in capsys.readouterr().err

    def test_verify(self, certificate_file, capsys):
        """Test that a fresh certificate verifies."""
        assert run(["verify", str(certificate_file)]) == EXIT_OK
        report = _json(capsys)
        assert report["passed"] is True
        assert report["steps_checked"] == 1

    def test_three_step_round_trip(self, tmp_path, capsys):
        """Test construct then verify on the three-step house-above tower for t = 2."""
        path = tmp_path / "cert.json"
        args = ["construct", "--variant", "b", "--t", "2", "--steps", "3", "--d-seed", "7", "--ordering", "weak"]
        assert run([*args, "--out", str(path)]) == EXIT_OK
        cert = json.loads(path.read_text())
        assert cert["variant"] == "thm12b"
        assert [(s["p"], s["d"]) for s in cert["tower"]["steps"]] == [("251", "7"), ("2309", "11"), ("8293", "13")]
        assert run(["verify", str(path)]) == EXIT_OK
        assert _json(capsys)["passed"] is True

    def test_legacy_flags(self, tmp_path, capsys):
        """Test that --k and --certificate still work."""
        path = tmp_path / "cert.json"
        args = ["construct", "--variant", "house-above", "--t", "2", "--k", "1", "--d-seed", "7", "--out", str(path)]
        assert run([*args, *TOL]) == EXIT_OK
        assert run(["verify", "--certificate", str(path)]) == EXIT_OK
        assert _json(capsys)["passed"] is True

    def test_verify_needs_path(self, capsys):
        """Test that verify without a certificate path is a usage error."""
        assert run(["verify"]) == EXIT_USAGE
        assert "certificate path" in capsys.readouterr().err

    def test_verify_tampered(self, certificate_file, capsys):
        """Test that a tampered flag exits with code 1."""
        data = json.loads(certificate_file.read_text())
        data["per_step"][0]["eisenstein"] = False
        certificate_file.write_text(json.dumps(data))
        assert run(["verify", str(certificate_file)]) == 1
        assert _json(capsys)["mismatches"][0]["field"] == "eisenstein"

    def test_verify_malformed(self, tmp_path):
        """Test that a malformed certificate is a usage error."""
        path = tmp_path / "bad.json"
        path.write_text("{")
        assert run(["verify", str(path)]) == EXIT_USAGE

    def test_verify_missing_file(self, tmp_path):
        """Test that an unreadable file is a usage error."""
        assert run(["verify", "--certificate", str(tmp_path / "missing.json")]) == EXIT_USAGE


class TestQueries:
    """Tests for the single-value subcommands."""

    def test_find_prime(self, capsys):
        """Test the least prime 10 mod 121 in (86.49, 173)."""
        assert run(["find-prime", "--lo", "86.49", "--hi", "173", "--a", "10", "--m", "121"]) == EXIT_OK
        assert _json(capsys) == {"prime": "131"}

    def test_find_prime_none(self, capsys):
        """Test that an empty interval exits with code 3."""
        assert run(["find-prime", "--lo", "24", "--hi", "28", "--a", "0", "--m", "1"]) == EXIT_SEARCH_EXHAUSTED

    def test_house(self, capsys):
        """Test the house of x1 + x2."""
        assert run(["house", "--tower", "5:3,7:2", "--element", "x1 + x2", *TOL]) == EXIT_OK
        out = _json(capsys)
        assert out["element"] == "x2+x1"
        assert float(out["house"]["lo"]) == pytest.approx(5 ** (1 / 3) + math.sqrt(7), abs=1e-5)

    def test_height(self, capsys):
        """Test the Weil height of x2."""
        assert run(["height", "--tower", "5:3,7:2", "--element", "x2", *TOL]) == EXIT_OK
        out = _json(capsys)
        assert out["kind"] == "weil"
        assert float(out["height"]["lo"]) == pytest.approx(math.log(7) / 2, abs=1e-5)

    def test_weighted_height(self, capsys):
        """Test the gamma-weighted height of x2 with gamma = 1."""
        assert run(["height", "--tower", "5:3,7:2", "--element", "x2", "--gamma", "1", *TOL]) == EXIT_OK
        out = _json(capsys)
        assert out["kind"] == "weighted"
        assert out["degree"] == 2
        assert float(out["height"]["lo"]) == pytest.approx(math.log(7), abs=1e-5)

    def test_discrepancy(self, tmp_path, capsys):
        """Test the discrepancy of {1, -1} from a CSV file."""
        path = tmp_path / "points.csv"
        path.write_text("# re,im\n1,0\n-1,0\n")
        assert run(["discrepancy", "--points", str(path), *TOL]) == EXIT_OK
        out = _json(capsys)
        assert out["points"] == 2
        assert float(out["value"]["lo"]) == 0
        assert float(out["value"]["hi"]) <= 1e-6

    def test_eta_radical_step(self, capsys):
        """Test eta of the first house-above step."""
        assert run(["eta", "--tower", "251:7", "--step", "1", *TOL]) == EXIT_OK
        out = _json(capsys)
        assert out["informative"] is True
        assert float(out["eta"]["lo"]) == pytest.approx(251 ** (1 / 7), abs=1e-5)

    def test_eta_needs_input(self, capsys):
        """Test that eta needs a source of points."""
        assert run(["eta"]) == EXIT_USAGE

    def test_dedekind(self, capsys):
        """Test that 2 divides the index of Z[sqrt(5)]."""
        assert run(["dedekind", "--poly", "x^2 - 5", "--q", "2"]) == EXIT_OK
        assert _json(capsys)["index_coprime"] is False

    def test_bad_tower(self, capsys):
        """Test that a malformed tower is a usage error."""
        assert run(["house", "--tower", "5-3", "--element", "x1"]) == EXIT_USAGE
        assert "p:d" in capsys.readouterr().err


class TestReports:
    """Tests for the report, oracle and property-suite subcommands."""

    def test_bounds_report_csv(self, capsys):
        """Test the per-step report with window membership."""
        args = ["bounds-report", "--tower", "251:7,2309:11", "--claimed-limit", "2", "--window", "above"]
        assert run([*args, "--format", "csv", *TOL]) == EXIT_OK
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "step,p,d,eta_lo,eta_hi,house_lo,house_hi,in_window"
        assert len(lines) == 3
        assert all(line.endswith(",True") for line in lines[1:])

    def test_enumerate_min_house(self, capsys):
        """Test the brute-force minimum over Z[131^(1/11)]."""
        args = ["enumerate-min-house", "--tower", "131:11", "--step", "1", "--coeff-bound", "1", "--mask", "0;1"]
        assert run([*args, *TOL]) == EXIT_OK
        out = _json(capsys)
        assert out["count"] == 6
        assert out["witness"] in {"x1", "-x1"}
        assert float(out["min_house"]["lo"]) >= float(out["new_element_bound"]["lo"]) - 1e-6

    def test_lemma_check(self, capsys):
        """Test one small suite."""
        assert run(["lemma-check", "--suite", "dedekind", "--instances", "5", "--seed", "0"]) == EXIT_OK
        out = _json(capsys)
        assert out["name"] == "dedekind"
        assert out["passed"] is True

    def test_lemma_check_violation(self, mocker: MockerFixture, capsys):
        """Test that a suite with violations exits with code 1."""
        failing = SuiteResult(name="dedekind", seed=0, instances=1, violations=1)
        mocker.patch.object(main_module, "run_suite", return_value=failing)
        assert run(["lemma-check", "--suite", "dedekind"]) == 1
        assert _json(capsys)["passed"] is False


class TestErrors:
    """Tests for argument and setting errors."""

    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["construct"],
            ["construct", "--variant", "z", "--steps", "1", "--d-seed", "7"],
            ["find-prime", "--lo", "abc", "--hi", "3"],
            ["lemma-check", "--suite", "no-such-suite"],
        ],
    )
    def test_bad_arguments(self, argv):
        """Test that argparse failures exit with code 2."""
        assert run(argv) == EXIT_USAGE

    def test_precision_ceiling_below_bits(self, capsys):
        """Test that an invalid override is reported as a usage error."""
        assert run(["find-prime", "--lo", "1", "--hi", "10", "--precision-ceiling", "64"]) == EXIT_USAGE
        assert "invalid setting" in capsys.readouterr().err

    def test_precision_failure_code(self, mocker: MockerFixture):
        """Test that numerical failures exit with code 4."""
        mocker.patch.object(main_module, "find_prime_in_ap", side_effect=NonConvergenceError("no luck"))
        assert run(["find-prime", "--lo", "1", "--hi", "10"]) == EXIT_PRECISION

    def test_version(self, capsys):
        """Test --version."""
        assert run(["--version"]) == EXIT_OK
        assert "northcott" in capsys.readouterr().out

    def test_settings_restored(self):
        """Test that command-line overrides do not leak into the settings."""
        before = main_module.settings.NORTHCOTT_SEED
        run(["lemma-check", "--suite", "dedekind", "--instances", "1", "--seed", "42"])
        assert main_module.settings.NORTHCOTT_SEED == before
