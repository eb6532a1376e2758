import json

import numpy as np
import pytest

from lplab.cli import bundled_scenario_path, bundled_scenarios, main
from lplab.reports import format_float
from lplab.scenario import ScenarioError, load_scenario, parse_scenario
from lplab.tasks import execute, sweep

EXPECTED_STATUS = {
    "swap-decompose": "pass",
    "swap-gap": "pass",
    "swap-cocycle-cobound": "pass",
    "swap-cocycle-fm": "pass",
    "swap-cocycle-fixpoint": "pass",
    "translation-fm": "not-applicable",
    "translation-fixpoint": "not-applicable",
    "cyclic3-gap": "pass",
    "cyclic5-gap": "pass",
    "dihedral4-gap": "pass",
    "grid-z2xz2-gap": "pass",
    "grid-z2xz2-split": "pass",
    "commuting-pair-displacement": "pass",
    "mautner-matrix": "pass",
    "induce-sign-z4": "pass",
    "superrigid-diagonal-s3": "pass",
    "superrigid-overlap-d3": "pass",
    "mazur-z4": "pass",
    "modulus-p2": "pass",
    "schoenberg-p15": "pass",
    "schoenberg-p3-search": "pass",
    "klee-p4": "pass",
}


def run_bundled(name, **kw):
    return execute(load_scenario(bundled_scenario_path(name)), **kw)


class TestSchema:
    def test_zero_weight_refused_with_field_path(self):
        raw = {
            "name": "bad",
            "space": {"dim": 2, "p": 2.0, "weights": [1.0, 0.0]},
            "group": {"kind": "presentation", "generators": ["a"], "relators": []},
            "task": {"command": "gap"},
        }
        with pytest.raises(ScenarioError) as err:
            parse_scenario(raw)
        assert "$.space.weights" in str(err.value)

    def test_unknown_command(self):
        raw = {
            "name": "bad",
            "space": {"dim": 1, "p": 2.0},
            "group": {"kind": "presentation", "generators": ["a"], "relators": []},
            "task": {"command": "frobnicate"},
        }
        with pytest.raises(ScenarioError, match="task.command"):
            parse_scenario(raw)

    def test_missing_field(self):
        with pytest.raises(ScenarioError, match="missing"):
            parse_scenario({"name": "x", "space": {"dim": 1, "p": 2.0}})

    def test_invalid_representation_reported(self):
        raw = {
            "name": "bad",
            "space": {"dim": 2, "p": 2.0},
            "group": {"kind": "table", "table": [[0, 1], [1, 0]], "identity": 0, "generators": {"s": 1}},
            "representation": {"images": {"s": {"kind": "matrix", "entries": [[2.0, 0.0], [0.0, 0.5]]}}},
            "task": {"command": "decompose"},
        }
        with pytest.raises(ScenarioError, match="representation"):
            parse_scenario(raw)


class TestBundledScenarios:
    def test_corpus_is_listed(self):
        names = bundled_scenarios()
        assert len(names) >= 20
        for key in EXPECTED_STATUS:
            assert f"{key}.json" in names

    @pytest.mark.parametrize("name", sorted(EXPECTED_STATUS))
    def test_scenario_status(self, name):
        report = run_bundled(name)
        assert report.status == EXPECTED_STATUS[name]

    def test_minimal_decompose_dims(self):
        report = run_bundled("swap-decompose")
        assert report.payload["fixed_dim"] == 1
        assert report.payload["complement_dim"] == 1

    def test_split_residual_field(self):
        report = run_bundled("grid-z2xz2-split")
        assert report.payload["reconstruction_residual"] <= 1e-8

    def test_overlap_scenario_dims(self):
        report = run_bundled("superrigid-overlap-d3")
        assert report.payload["overlap_dim"] == 1

    def test_refused_split_exit_code(self):
        assert main(["run", "grid-split-refused"]) == 2


class TestDeterminism:
    @pytest.mark.parametrize("name", ["cyclic3-gap", "grid-z2xz2-split", "swap-cocycle-fm", "modulus-p2"])
    def test_byte_identical_reports(self, name):
        a = run_bundled(name, seed=7).to_json()
        b = run_bundled(name, seed=7).to_json()
        assert a == b

    def test_seed_recorded_in_provenance(self):
        report = run_bundled("cyclic3-gap", seed=11)
        doc = json.loads(report.to_json())
        assert doc["provenance"]["seed"] == 11

    def test_float_formatting_17_digits(self):
        assert format_float(1.0 / 3.0) == format(1.0 / 3.0, ".17g")
        assert format_float(float("inf")) == '"inf"'
        assert json.loads("[" + format_float(np.pi) + "]")[0] == np.pi


class TestSweep:
    def test_gap_sweep_transfer(self):
        scenario = load_scenario(bundled_scenario_path("cyclic3-gap"))
        cells = sweep(scenario, [1.5, 2.0, 3.0, 4.0])
        assert len(cells) == 4
        for p, report, _ in cells:
            assert report.status == "pass"
            assert report.payload["gap_upper"] > 0.01

    def test_inadmissible_cell_recorded_not_raised(self):
        scenario = load_scenario(bundled_scenario_path("cyclic3-gap"))
        cells = sweep(scenario, [1.0, 2.0])
        statuses = [report.status for _, report, _ in cells]
        assert statuses == ["refused", "pass"]

    def test_empty_p_list(self):
        scenario = load_scenario(bundled_scenario_path("cyclic3-gap"))
        assert sweep(scenario, []) == []


class TestCli:
    def test_run_writes_files(self, tmp_path, capsys):
        code = main(["run", "swap-decompose", "--out", str(tmp_path), "--format", "both"])
        assert code == 0
        capsys.readouterr()
        assert (tmp_path / "swap-decompose.decompose.json").exists()
        csv_text = (tmp_path / "swap-decompose.decompose.csv").read_text()
        assert csv_text.splitlines()[0] == "scenario,task,status,key,value"

    def test_sweep_csv_columns(self, tmp_path, capsys):
        code = main(["run", "cyclic3-gap"])
        capsys.readouterr()
        assert code == 0
        code = main(["sweep", "cyclic3-gap", "--p", "1.5,2", "--out", str(tmp_path), "--format", "csv"])
        capsys.readouterr()
        assert code == 0
        lines = (tmp_path / "cyclic3-gap.sweep.csv").read_text().splitlines()
        assert lines[0] == "p,status,gap_upper,witness_norm,runtime_s"
        assert len(lines) == 3

    def test_missing_scenario_is_invalid_input(self, capsys):
        assert main(["run", "no-such-scenario"]) == 2
        capsys.readouterr()

    def test_env_seed_override(self, monkeypatch, capsys):
        monkeypatch.setenv("LPLAB_SEED", "33")
        main(["run", "cyclic3-gap"])
        doc = json.loads(capsys.readouterr().out)
        assert doc["provenance"]["seed"] == 33

    def test_list_scenarios(self, capsys):
        assert main(["list-scenarios"]) == 0
        out = capsys.readouterr().out
        assert "swap-decompose.json" in out


class TestSchoenbergSweep:
    def test_mode_switches_with_exponent(self):
        # without an explicit mode the task checks positivity for p <= 2 and
        # hunts for a violation beyond
        raw = {
            "name": "schoenberg-sweep",
            "space": {"dim": 3, "p": 2.0},
            "group": {"kind": "presentation", "generators": ["e"], "relators": ["e"]},
            "task": {"command": "schoenberg", "n_configs": 60, "trials": 1500},
        }
        scenario = parse_scenario(raw)
        cells = sweep(scenario, [1.0, 1.5, 2.0, 3.0])
        for p, report, _ in cells:
            assert report.status == "pass"
        found = [report.payload.get("found") for _, report, _ in cells]
        assert found[:3] == [None, None, None]
        assert found[3] in (True, False)  # none-found must not fail the sweep


class TestChecksInvariant:
    @pytest.mark.parametrize("name", sorted(EXPECTED_STATUS))
    def test_pass_reports_carry_inequality_records(self, name):
        report = run_bundled(name)
        assert "checks" in report.payload
        for check in report.payload["checks"]:
            assert {"name", "value", "bound", "kind", "ok"} <= set(check)
        if report.status == "pass" and report.payload["checks"]:
            assert all(c["ok"] for c in report.payload["checks"])


class TestMalformedFile:
    def test_invalid_json_file_is_refused(self, tmp_path, capsys):
        bad = tmp_path / "broken.json"
        bad.write_text("{not json")
        assert main(["run", str(bad)]) == 2
        capsys.readouterr()

    def test_zero_weight_file_refused_with_path(self, tmp_path, capsys):
        bad = tmp_path / "weights.json"
        bad.write_text(json.dumps({
            "name": "bad-weights",
            "space": {"dim": 2, "p": 2.0, "weights": [1.0, 0.0]},
            "group": {"kind": "presentation", "generators": ["a"], "relators": []},
            "task": {"command": "gap"},
        }))
        assert main(["run", str(bad)]) == 2
        err = capsys.readouterr().err
        assert "$.space.weights" in err
