import json

import pytest

from railplan.cli import RunConfig, main
from railplan.domain import WeekScenario


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run(capsys, "generate", "--seed", "1", "--capacity", "random", "--out", str(a))[0] == 0
    assert run(capsys, "generate", "--seed", "1", "--capacity", "random", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    sc = WeekScenario.from_json(a.read_text())
    assert len(sc.containers) == 100 and sc.seed is not None


def test_generate_to_stdout(capsys):
    code, out, _ = run(capsys, "generate", "--seed", "2", "--capacity", "4", "--containers", "7")
    assert code == 0
    sc = WeekScenario.from_json(out)
    assert len(sc.containers) == 7 and {s.capacity for s in sc.schedules} == {4}


def test_solve_then_plan_first(tmp_path, capsys):
    week = tmp_path / "w.json"
    run(capsys, "generate", "--seed", "4", "--out", str(week))
    code, out, _ = run(capsys, "solve", str(week))
    assert code == 0
    opt = json.loads(out)
    assert {"cost", "utilization", "assignment"} <= set(opt)
    for method in ("first", "cheapest", "2ilp", "7ilp", "optimal"):
        code, out, _ = run(capsys, "plan", str(week), "--method", method)
        assert code == 0
        assert json.loads(out)["cost"] >= opt["cost"]


def test_train_quick_smoke(tmp_path, capsys):
    stats, ck = tmp_path / "s.csv", tmp_path / "n.json"
    code, out, _ = run(capsys, "train", "--episodes", "10", "--quick", "--seed", "1", "--stats", str(stats), "--save", str(ck))
    assert code == 0
    assert len(stats.read_text().splitlines()) == 11
    week = tmp_path / "w.json"
    run(capsys, "generate", "--seed", "1", "--out", str(week))
    code, out, _ = run(capsys, "plan", str(week), "--method", "drl", "--load", str(ck))
    assert code == 0 and json.loads(out)["cost"] > 0


def test_train_stats_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, "train", "--episodes", "3", "--seed", "7", "--heuristic", "edf", "--stats", str(a))
    run(capsys, "train", "--episodes", "3", "--seed", "7", "--heuristic", "edf", "--stats", str(b))
    assert a.read_bytes() == b.read_bytes()


def test_bench_quick(tmp_path, capsys):
    out_dir = tmp_path / "out"
    args = ["bench", "--quick", "--weeks", "3", "--episodes", "4", "--seed", "2", "--out-dir", str(out_dir)]
    code, out, _ = run(capsys, *args, "--checkpoint-dir", str(tmp_path / "ck"))
    assert code == 0
    for name in ("report.csv", "raw_weeks.jsonl", "curves_fifo.csv", "curves_edf.csv"):
        assert (out_dir / name).exists()
    first = (out_dir / "report.csv").read_bytes()
    # second run reuses the saved checkpoints and must reproduce the report
    code, _, _ = run(capsys, *args, "--checkpoint-dir", str(tmp_path / "ck"), "--eval-only")
    assert code == 0 and (out_dir / "report.csv").read_bytes() == first


def test_bench_eval_only_without_checkpoint(tmp_path, capsys):
    code, _, err = run(
        capsys, "bench", "--weeks", "1", "--eval-only", "--out-dir", str(tmp_path), "--checkpoint-dir", str(tmp_path / "none")
    )
    assert code != 0 and "drl-fifo" in err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"seed": 3, "generator": {"capacity": "2", "containers_per_week": 5}}))
    code, out, _ = run(capsys, "generate", "--config", str(cfg))
    sc = WeekScenario.from_json(out)
    assert len(sc.containers) == 5 and {s.capacity for s in sc.schedules} == {2}
    code, out2, _ = run(capsys, "generate", "--config", str(cfg), "--containers", "9")
    assert len(WeekScenario.from_json(out2).containers) == 9


@pytest.mark.parametrize(
    "doc",
    [{"sead": 1}, {"generator": {"capcity": "2"}}, {"training": 5}, {"generator": {"capacity": "9"}}, {"bench": {"methods": ["x"]}}],
)
def test_bad_config_rejected(tmp_path, capsys, doc):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(doc))
    code, _, err = run(capsys, "generate", "--config", str(cfg))
    assert code == 1 and "error" in err


def test_bad_flags(capsys):
    assert run(capsys, "plan")[0] == 2
    assert run(capsys, "generate", "--capacity", "8")[0] == 2
    assert run(capsys, "frobnicate")[0] == 2


def test_missing_scenario_file(tmp_path, capsys):
    code, _, err = run(capsys, "solve", str(tmp_path / "nope.json"))
    assert code == 1 and "nope.json" in err


def test_default_config_round_trip():
    cfg = RunConfig()
    assert RunConfig.from_dict(cfg.to_dict()) == cfg
    tc = cfg.training_config()
    assert (tc.episodes, tc.update_every, tc.batch_size, tc.gamma, tc.lr) == (4000, 20, 10, 0.99, 0.01)
