"""Command-line interface: subcommands, exit codes, determinism."""

import json
import os

import pytest

from castcost.cli import cli_main
from castcost.modelfile import print_model

from genmodels import gen_model


REFERENCE = "src/castcost/data/reference.cmdl"
PART = "src/castcost/data/reference_part.json"


@pytest.fixture()
def run(capsys):
    def _run(*argv):
        code = cli_main(list(argv))
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run


@pytest.fixture()
def workdir(tmp_path, bundle):
    model_path = tmp_path / "ref.cmdl"
    model_path.write_text(print_model(bundle.document))
    part_path = tmp_path / "part.json"
    part_path.write_text(json.dumps({
        "process": bundle.part.process,
        "material": bundle.part.material,
        "params": bundle.part.params,
    }))
    scenario_path = tmp_path / "scenario.json"
    scenario_path.write_text(json.dumps({
        "id": "more_cavities", "label": "4 per mold",
        "overrides": {"parts_per_mold": 4},
    }))
    rates_path = tmp_path / "plant_b.json"
    rates_path.write_text(json.dumps({
        "plant_id": "plant_b",
        "overrides": {"labor_rate_eur_h": 64, "mold_machine_rate_eur_h": 190},
    }))
    return tmp_path


class TestValidate:
    def test_reference_ok(self, run):
        code, out, _ = run("validate", REFERENCE)
        assert code == 0
        assert "ok" in out

    def test_invalid_model_exits_1(self, run, tmp_path):
        bad = tmp_path / "bad.cmdl"
        bad.write_text('model "bad" { component c { kind = purchased; } }')
        code, out, _ = run("validate", str(bad))
        assert code == 1
        assert "error" in out

    def test_syntax_error_exits_1(self, run, tmp_path):
        bad = tmp_path / "empty.cmdl"
        bad.write_text("")
        code, _, err = run("validate", str(bad))
        assert code == 1
        assert "expected model" in err

    def test_usage_error_exits_2(self, run):
        code, _, _ = run("no_such_command")
        assert code == 2

    def test_missing_file_exits_1(self, run):
        code, _, err = run("validate", "does_not_exist.cmdl")
        assert code == 1
        assert "not found" in err


class TestCompute:
    def test_target_equal_to_total_gives_ratio_one(self, run, workdir):
        code, out, _ = run("compute", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"))
        assert code == 0
        total = json.loads(out)["cost_per_part"]
        code, out, _ = run("compute", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"),
                           "--target", str(total))
        report = json.loads(out)
        assert report["indicators"]["cost_to_target_ratio"] == 1.0
        assert report["indicators"]["budget_overrun_ratio"] == 0.0

    def test_total_matches_oracle_fixture(self, run, workdir, bundle):
        code, out, _ = run("compute", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"))
        report = json.loads(out)
        assert report["direct_cost_per_part"] == pytest.approx(
            bundle.oracle_total, rel=1e-6)

    def test_series_amortization(self, run, workdir, bundle):
        code, out, _ = run("compute", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"),
                           "--series", "2000:18000")
        report = json.loads(out)
        assert report["series"]["quantity"] == 2000
        assert report["cost_per_part"] == pytest.approx(
            report["direct_cost_per_part"] + 9.0, abs=1e-5)

    def test_csv_format(self, run, workdir):
        code, out, _ = run("compute", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"),
                           "--format", "csv")
        assert code == 0
        assert out.startswith("path,category,amount")

    def test_out_file(self, run, workdir):
        out_path = workdir / "report.json"
        code, out, _ = run("compute", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"),
                           "--out", str(out_path))
        assert code == 0
        assert out == ""
        assert json.loads(out_path.read_text())["model"] == "foundry_sand_reference"

    def test_byte_identical_runs(self, run, workdir):
        args = ("compute", "--model", str(workdir / "ref.cmdl"),
                "--part", str(workdir / "part.json"), "--target", "42.5")
        _, first, _ = run(*args)
        _, second, _ = run(*args)
        assert first == second

    def test_verbose_banner_on_stderr(self, run, workdir):
        code, out, err = run("--verbose", "compute",
                             "--model", str(workdir / "ref.cmdl"),
                             "--part", str(workdir / "part.json"))
        assert "castcost" in err
        assert json.loads(out)["model"] == "foundry_sand_reference"


class TestWhatif:
    def test_delta_tree_emitted(self, run, workdir):
        code, out, _ = run("whatif", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"),
                           "--scenario", str(workdir / "scenario.json"))
        assert code == 0
        payload = json.loads(out)
        assert payload["scenarios"][0]["id"] == "more_cavities"
        assert payload["scenarios"][0]["delta"] < 0  # more cavities is cheaper
        assert payload["scenarios"][0]["tree"]["label"] == "piece_brute"


class TestSweep:
    def test_rows_in_given_order(self, run, workdir):
        code, out, _ = run("sweep", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"),
                           "--lever", "parts_per_mold", "--values", "4,1,2")
        rows = json.loads(out)["rows"]
        assert [row["value"] for row in rows] == [4.0, 1.0, 2.0]

    def test_row_matches_compute(self, run, workdir):
        code, out, _ = run("sweep", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"),
                           "--lever", "parts_per_mold", "--values", "2")
        row_total = json.loads(out)["rows"][0]["total"]
        code, out, _ = run("compute", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"))
        assert row_total == json.loads(out)["cost_per_part"]


class TestBench:
    def test_rank_table(self, run, workdir):
        base_rates = workdir / "plant_a.json"
        base_rates.write_text(json.dumps({"plant_id": "plant_a", "overrides": {}}))
        code, out, _ = run("bench", "--model", str(workdir / "ref.cmdl"),
                           "--part", str(workdir / "part.json"),
                           "--rates", f"{base_rates},{workdir / 'plant_b.json'}")
        payload = json.loads(out)
        assert [row["plant_id"] for row in payload["results"]] == ["plant_a", "plant_b"]
        assert [row["rank"] for row in payload["results"]] == [1, 2]


class TestModelSearchPath:
    def test_cost_model_path_env(self, run, workdir, monkeypatch):
        monkeypatch.setenv("COST_MODEL_PATH", str(workdir))
        monkeypatch.chdir(workdir.parent)
        code, out, _ = run("validate", "ref.cmdl")
        assert code == 0
