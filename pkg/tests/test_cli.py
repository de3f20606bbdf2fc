"""End-to-end command checks: files written, exit codes, byte determinism."""

import json
import os

import pytest

from edgesched.cli import GRID_NODE_COUNTS, POLICY_ORDER, build_parser, main
from edgesched.core import mix_seed
from edgesched.metrics import CSV_COLUMNS

FAST = ["--override", "task_count=60"]


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def csv_rows(path):
    lines = read(path).decode().strip().split("\n")
    header = lines[0].split(",")
    return [dict(zip(header, row.split(","))) for row in lines[1:]]


# ---------------------------------------------------------------------------
# parser


def test_parser_accepts_documented_flags():
    args = build_parser().parse_args(
        ["run", "--config", "c.json", "--override", "a=1", "--override", "b=2",
         "--out", "d", "--seed", "7", "--policy", "rr", "--scenario", "s2",
         "--nodes", "12"]
    )
    assert args.command == "run"
    assert args.override == ["a=1", "b=2"]
    assert args.seed == 7
    assert args.policy == "rr"
    assert args.nodes == 12


def test_parser_rejects_unknown_policy():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["run", "--policy", "random"])


def test_compare_takes_no_policy_flag():
    with pytest.raises(SystemExit):
        build_parser().parse_args(["compare", "--policy", "rr"])


# ---------------------------------------------------------------------------
# run


def test_run_writes_results_and_summary_line(tmp_path, capsys):
    out = str(tmp_path / "out")
    assert main(["run", "--out", out, "--seed", "3", "--nodes", "4"] + FAST) == 0
    rows = csv_rows(os.path.join(out, "results.csv"))
    assert len(rows) == 1
    assert list(rows[0]) == list(CSV_COLUMNS)
    assert rows[0]["policy"] == "dynamic"
    assert rows[0]["seed"] == "3"
    doc = json.loads(read(os.path.join(out, "results.json")))
    assert doc["configs"][0]["task_count"] == 60
    line = capsys.readouterr().out
    assert "run policy=dynamic" in line
    assert "throughput_tps=" in line and "out=" in line


def test_run_override_echoed_in_json(tmp_path):
    out = str(tmp_path / "o")
    rc = main(["run", "--out", out, "--override", "smoothing_eta=0.9"] + FAST)
    assert rc == 0
    doc = json.loads(read(os.path.join(out, "results.json")))
    assert doc["configs"][0]["smoothing_eta"] == 0.9


def test_run_records_events_when_asked(tmp_path):
    out = str(tmp_path / "ev")
    rc = main(["run", "--out", out, "--override", "record_events=true"] + FAST)
    assert rc == 0
    lines = read(os.path.join(out, "events.ndjson")).decode().strip().split("\n")
    assert len(lines) > 60
    assert all(json.loads(line)["kind"] for line in lines)


def test_run_reads_config_file(tmp_path):
    from edgesched.core import scenario_to_dict
    from edgesched.sim import make_default_config

    doc = scenario_to_dict(make_default_config(policy="rr", node_count=4,
                                               seed=11, task_count=50))
    cfg_path = tmp_path / "scenario.json"
    cfg_path.write_text(json.dumps(doc))
    out = str(tmp_path / "out")
    assert main(["run", "--config", str(cfg_path), "--out", out]) == 0
    rows = csv_rows(os.path.join(out, "results.csv"))
    assert rows[0]["policy"] == "rr"
    assert rows[0]["seed"] == "11"


def test_missing_config_exits_2_naming_path(tmp_path, capsys):
    missing = str(tmp_path / "nope.json")
    assert main(["run", "--config", missing, "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "config error" in err
    assert "nope.json" in err


def test_bad_override_exits_2_without_partial_files(tmp_path, capsys):
    out = tmp_path / "never"
    rc = main(["run", "--out", str(out), "--override", "no_such_field=1"])
    assert rc == 2
    assert "config error" in capsys.readouterr().err
    assert not out.exists()


def test_unwritable_out_exits_3(tmp_path, capsys):
    blocker = tmp_path / "blocked"
    blocker.write_text("a file, not a directory")
    rc = main(["run", "--out", str(blocker)] + FAST)
    assert rc == 3
    assert "i/o error" in capsys.readouterr().err


def test_out_dir_env_fallback(tmp_path, monkeypatch):
    envdir = tmp_path / "from-env"
    monkeypatch.setenv("EDGESCHED_OUT", str(envdir))
    assert main(["run"] + FAST) == 0
    assert (envdir / "results.csv").exists()


def test_out_flag_beats_env(tmp_path, monkeypatch):
    monkeypatch.setenv("EDGESCHED_OUT", str(tmp_path / "ignored"))
    out = tmp_path / "explicit"
    assert main(["run", "--out", str(out)] + FAST) == 0
    assert (out / "results.csv").exists()
    assert not (tmp_path / "ignored").exists()


# ---------------------------------------------------------------------------
# sweep


def test_sweep_covers_scenario_by_fleet_grid(tmp_path):
    out = str(tmp_path / "sw")
    rc = main(["sweep", "--policy", "rr", "--out", out, "--seed", "2"] + FAST)
    assert rc == 0
    rows = csv_rows(os.path.join(out, "sweep.csv"))
    assert len(rows) == 12
    assert {r["policy"] for r in rows} == {"rr"}
    cells = {(r["scenario"], int(r["node_count"])) for r in rows}
    assert cells == {(s, n) for s in ("s1", "s2", "s3") for n in GRID_NODE_COUNTS}


def test_sweep_seeds_follow_mixing_function(tmp_path):
    out = str(tmp_path / "sw2")
    assert main(["sweep", "--out", out, "--seed", "5"] + FAST) == 0
    rows = csv_rows(os.path.join(out, "sweep.csv"))
    scen_idx = {"s1": 1, "s2": 2, "s3": 3}
    for r in rows:
        expect = mix_seed(5, 0, scen_idx[r["scenario"]], int(r["node_count"]))
        assert int(r["seed"]) == expect


# ---------------------------------------------------------------------------
# compare


@pytest.fixture(scope="module")
def compare_out(tmp_path_factory):
    out = str(tmp_path_factory.mktemp("cmp") / "out")
    rc = main(["compare", "--out", out, "--seed", "1", "--override",
               "task_count=40"])
    assert rc == 0
    return out


def test_compare_covers_full_grid(compare_out):
    rows = csv_rows(os.path.join(compare_out, "compare.csv"))
    assert len(rows) == 48
    assert {r["policy"] for r in rows} == {p.value for p in POLICY_ORDER}


def test_compare_improvement_summary_shape(compare_out):
    doc = json.loads(read(os.path.join(compare_out, "compare.json")))
    summary = doc["improvement_summary"]
    assert len(summary) == 12
    for entry in summary:
        assert entry["node_count"] in GRID_NODE_COUNTS
        for tag in ("rr", "sra", "cloud_only"):
            assert f"throughput_gain_vs_{tag}_pct" in entry
            assert f"latency_reduction_vs_{tag}_pct" in entry


def test_compare_repeat_invocation_byte_identical(compare_out, tmp_path):
    out2 = str(tmp_path / "again")
    rc = main(["compare", "--out", out2, "--seed", "1", "--override",
               "task_count=40"])
    assert rc == 0
    for name in ("compare.csv", "compare.json"):
        assert read(os.path.join(out2, name)) == read(
            os.path.join(compare_out, name))


# ---------------------------------------------------------------------------
# selfcheck


def test_selfcheck_passes(capsys):
    assert main(["selfcheck"]) == 0
    out = capsys.readouterr().out
    assert "all 7 checks passed" in out
    assert out.count("ok: ") == 7
    assert "FAIL" not in out
