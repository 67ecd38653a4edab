import json

import numpy as np
import pytest
import yaml

from mcmo import io
from mcmo.cli import main
from mcmo.config import ConfigError, config_from_dict, load_config
from mcmo.engine import train
from mcmo.pareto import DecompositionGrid

TINY = {"problem": "kursawe",
        "training": {"episodes": 60, "hidden": [8, 8], "learning_iterations": 2,
                     "n_reproduce": 5, "batch_size": 16, "log_interval": 20, "seed": 7,
                     "checkpoint_interval": 30}}


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text(yaml.safe_dump(TINY))
    return path


def test_records_round_trip(kursawe, small_config, tmp_path):
    tr = train(kursawe, small_config)
    path = io.write_records(tr.records, tmp_path / "r.csv", 1, 3, 2)
    records, dims = io.read_records(path)
    assert dims == (1, 3, 2)
    for a, b in zip(records, tr.records):
        assert a.episode == b.episode
        assert np.array_equal(a.decision_raw, b.decision_raw)
        assert np.array_equal(a.objectives, b.objectives)
        assert np.array_equal(a.weight, b.weight)


def test_records_parse_errors_name_the_line(tmp_path):
    path = tmp_path / "r.csv"
    with pytest.raises(io.RecordsParseError, match="not found"):
        io.read_records(path)
    header = ",".join(io.records_header(1, 1, 2))
    path.write_text(header + "\n1,0.1,0.2,1.0,2.0,0.5,0.5,0\n2,0.1,0.2,oops,2.0,0.5,0.5,0\n")
    with pytest.raises(io.RecordsParseError, match=":3:"):
        io.read_records(path)
    path.write_text(header + "\n1,0.1,0.2\n")
    with pytest.raises(io.RecordsParseError, match=":2:"):
        io.read_records(path)
    path.write_text("a,b\n")
    with pytest.raises(io.RecordsParseError, match=":1:"):
        io.read_records(path)


def test_config_defaults_and_errors(tmp_path):
    cfg = config_from_dict({})
    assert cfg.problem == "kursawe" and cfg.training.batch_size == 100
    with pytest.raises(ConfigError, match=r"^training\.batchsize"):
        config_from_dict({"training": {"batchsize": 3}})
    with pytest.raises(ConfigError, match=r"^training\.episodes"):
        config_from_dict({"training": {"episodes": "many"}})
    with pytest.raises(ConfigError, match=r"^training\.episodes"):
        config_from_dict({"training": {"episodes": 0}})
    with pytest.raises(ConfigError, match=r"^problem"):
        config_from_dict({"problem": "rosenbrock"})
    with pytest.raises(ConfigError, match=r"^airfoil\.xfoil_binary"):
        config_from_dict({"problem": "airfoil-external"})
    with pytest.raises(ConfigError, match=r"^experiment\.repetitons"):
        config_from_dict({"experiment": {"repetitons": 2}})
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "problem": "kursawe",\n  oops\n}')
    with pytest.raises(ConfigError, match=":3:"):
        load_config(bad)


def test_optimize_analyze_and_replay(config_file, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["optimize", "-c", str(config_file), "-o", str(out)]) == 0
    records, _ = io.read_records(out / io.RECORDS_FILE)
    assert len(records) == 60
    assert sorted(p.name for p in (out / "checkpoints").iterdir()) == [
        "actor_00000030.npz", "actor_00000060.npz", "critic_00000030.npz", "critic_00000060.npz"]
    manifest = json.loads((out / io.MANIFEST_FILE).read_text())
    assert manifest["config"]["training"]["hv_reference"] == [-2.0, 13.0]
    assert manifest["config"]["training"]["seed"] == 7

    replay = tmp_path / "replay"
    assert main(["optimize", "-c", str(out / io.MANIFEST_FILE), "-o", str(replay)]) == 0
    assert (out / io.RECORDS_FILE).read_bytes() == (replay / io.RECORDS_FILE).read_bytes()

    other = tmp_path / "seed8"
    assert main(["optimize", "-c", str(config_file), "-o", str(other), "--seed", "8"]) == 0
    assert (out / io.RECORDS_FILE).read_bytes() != (other / io.RECORDS_FILE).read_bytes()

    before = (out / io.RECORDS_FILE).read_bytes()
    capsys.readouterr()
    assert main(["analyze", str(out)]) == 0
    logged = io.read_hv_history(out / io.HV_FILE)[1][-1]
    assert f"HV_avg {logged:.10g}" in capsys.readouterr().out
    assert main(["analyze", str(out), "--cells", "5"]) == 0
    fronts = (out / "analysis_N5" / io.FRONTS_FILE).read_text().splitlines()
    assert fronts[0].startswith("cell,c_lo0,c_hi0,x0,x1,x2,f0,f1,episode")
    assert {int(line.split(",")[0]) for line in fronts[1:]} <= set(range(5))
    assert len((out / "analysis_N5" / io.HV_REPORT_FILE).read_text().splitlines()) == 6
    assert (out / io.RECORDS_FILE).read_bytes() == before


def test_fronts_file_matches_select_front(kursawe, small_config, tmp_path):
    tr = train(kursawe, small_config)
    grid = DecompositionGrid(kursawe.condition_space, 3)
    path = io.write_fronts(tr.records, grid, tmp_path / "f.csv")
    rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
    from mcmo.pareto import select_front
    expected = sum(len(select_front(tr.records, grid, k)) for k in range(3))
    assert len(rows) == expected


def test_cli_exit_codes(tmp_path, config_file):
    bad = tmp_path / "bad.yaml"
    bad.write_text("training: {bach_size: 3}\n")
    assert main(["optimize", "-c", str(bad)]) == 1
    bad.write_text("problem: airfoil-external\n")
    assert main(["optimize", "-c", str(bad)]) == 1
    assert main(["analyze", str(tmp_path / "missing")]) != 0
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 1
    # a runtime failure inside an evaluator maps to exit code 2
    run = tmp_path / "corrupt"
    assert main(["optimize", "-c", str(config_file), "-o", str(run)]) == 0
    (run / io.RECORDS_FILE).write_text("episode,c0\n1,x\n")
    assert main(["analyze", str(run)]) == 1


def test_runtime_error_exit_code(monkeypatch, config_file, tmp_path):
    import mcmo.cli as cli

    def explode(*args, **kwargs):
        raise FloatingPointError("critic loss is not finite")

    monkeypatch.setattr(cli.Trainer, "train", explode)
    assert main(["optimize", "-c", str(config_file), "-o", str(tmp_path / "x")]) == 2


def test_experiment_command(tmp_path):
    cfg = dict(TINY, experiment={"n_conditions": 2, "repetitions": 1, "sc_budget": 20,
                                 "hv_target_fraction": 0.99, "oracle_samples": 5000,
                                 "oracle_refine_rounds": 0})
    path = tmp_path / "exp.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "exp"
    assert main(["experiment", "-c", str(path), "-o", str(out)]) == 0
    summary = json.loads((out / "experiment_summary.json").read_text())
    assert summary["n_conditions"] == 2 and summary["sc"]["all_reached"] is False


def test_airfoil_geom_command(tmp_path):
    out = tmp_path / "a.dat"
    assert main(["airfoil-geom", "--mu-x", "-0.1", "--mu-y", "0.0", "--beta", "10",
                 "--out", str(out)]) == 0
    xy = np.loadtxt(out)
    assert xy.shape == (200, 2)
    assert np.allclose(xy[:, 1], -xy[::-1, 1], atol=1e-9)
    assert main(["airfoil-geom", "--mu-x", "-0.9", "--mu-y", "0.0", "--beta", "10",
                 "--out", str(out)]) == 1


def test_airfoil_mock_optimize(tmp_path):
    cfg = {"problem": "airfoil-mock",
           "training": {"episodes": 20, "hidden": [8], "learning_iterations": 2, "n_reproduce": 4},
           "airfoil": {"cache": str(tmp_path / "cache.jsonl")}}
    path = tmp_path / "a.json"
    path.write_text(json.dumps(cfg))
    assert main(["optimize", "-c", str(path), "-o", str(tmp_path / "run")]) == 0
    records, dims = io.read_records(tmp_path / "run" / io.RECORDS_FILE)
    assert dims == (1, 4, 2) and len(records) == 20
    assert len((tmp_path / "cache.jsonl").read_text().splitlines()) == 21
