import csv
import json

import pytest

from crosswalk_sim.cli import main
from crosswalk_sim.outputs import TRIAL_COLUMNS, aggregate_to_dict, read_trials_csv
from crosswalk_sim.stats import aggregate


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run500")
    assert main(["run", "--trials", "500", "--seed", "0", "--out", str(out), "--emit-plot-data"]) == 0
    return out


def test_run_twice_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["run", "--trials", "1", "--seed", "7", "--out", str(tmp_path / name)]) == 0
    for f in ("trials.csv", "aggregate.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_invalid_speed_range_exit_1(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"veh_speed_min_mps": 20, "veh_speed_max_mps": 10}))
    assert main(["run", "--trials", "1", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1
    assert "veh_speed" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_unknown_config_key_exit_1(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"idm": {"a_maxx": 1.0}}))
    assert main(["run", "--trials", "1", "--config", str(cfg)]) == 1
    assert "idm.a_maxx" in capsys.readouterr().err


def test_bad_flag_exit_1(capsys):
    with pytest.raises(SystemExit) as err:
        main(["run", "--frobnicate"])
    assert err.value.code == 1
    assert "usage" in capsys.readouterr().err


def test_io_error_exit_2(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["run", "--trials", "1", "--out", str(blocker / "sub")]) == 2
    assert "I/O error" in capsys.readouterr().err


def test_missing_config_file_exit_2(tmp_path):
    assert main(["run", "--trials", "1", "--config", str(tmp_path / "nope.json")]) == 2


def test_trial_row_count_and_encoding(full_run):
    lines = (full_run / "trials.csv").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 501
    assert tuple(lines[0].split(",")) == TRIAL_COLUMNS
    with open(full_run / "trials.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["success"] for r in rows} <= {"0", "1"}
    assert [int(r["trial"]) for r in rows] == list(range(500))


def test_fig5_bin_edges(full_run):
    with open(full_run / "fig5_distance_hist.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert [r["bin_low_m"] for r in rows] == ["0", "5", "10", "15", "20", "25"]
    assert [r["bin_high_m"] for r in rows] == ["5", "10", "15", "20", "25", "inf"]


def test_plot_files_and_manifest(full_run):
    for name in ("fig3_wait_by_light.csv", "fig4_success_by_light.csv", "manifest.json"):
        assert (full_run / name).exists()
    manifest = json.loads((full_run / "manifest.json").read_text())
    assert manifest["master_seed"] == 0 and manifest["n_trials"] == 500
    assert "trials.csv" in manifest["outputs"]
    assert manifest["config"]["idm"]["a_max"] == 1.5


def test_roundtrip_reaggregates_exactly(full_run):
    outcomes = read_trials_csv(full_run / "trials.csv")
    again = json.loads(json.dumps(aggregate_to_dict(aggregate(outcomes, strict=False))))
    assert again == json.loads((full_run / "aggregate.json").read_text())


def test_csv_aggregate_format(tmp_path):
    assert main(["run", "--trials", "5", "--format", "csv", "--out", str(tmp_path)]) == 0
    text = (tmp_path / "aggregate.csv").read_text()
    assert text.startswith("metric,value\n") and "n_trials,5" in text


def test_sweep_base_threshold_monotone(tmp_path):
    args = ["sweep", "decision.base_threshold=[-0.4,-0.2,0.0]", "--trials", "100", "--out", str(tmp_path)]
    assert main(args) == 0
    greens = []
    for value in ("-0.4", "-0.2", "0.0"):
        agg = json.loads((tmp_path / f"decision.base_threshold={value}" / "aggregate.json").read_text())
        g = agg["success_rate_by_light_at_crossing"]["green"]
        greens.append(g["successes"] + g["failures"])
    assert greens[0] == 0
    assert greens == sorted(greens) and greens[-1] > 0
    assert len(json.loads((tmp_path / "sweep.json").read_text())) == 3


def test_trial_event_log(tmp_path):
    assert main(["trial", "--seed", "3", "--index", "2", "--out", str(tmp_path)]) == 0
    events = [
        json.loads(line, parse_constant=lambda c: pytest.fail(f"non-standard JSON {c}"))
        for line in (tmp_path / "events.jsonl").read_text().splitlines()
    ]
    kinds = {e["event"] for e in events}
    assert {"light", "decision", "spawn"} <= kinds
    assert events[-1]["event"] in ("arrived", "collision", "timeout")
    decision = next(e for e in events if e["event"] == "decision")
    for key in ("base", "patience", "distance", "light_factor", "bias", "threshold", "choice"):
        assert key in decision
    record = json.loads((tmp_path / "trial.json").read_text())
    assert record["outcome"]["trial"] == "2"
