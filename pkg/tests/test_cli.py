import json
from pathlib import Path

import pytest

from sparse_gp.cli import EXIT_INPUT, EXIT_OK, EXIT_STALE, EXIT_TRAINING, exit_code_for, main
from sparse_gp.errors import ConfigError, StaleCheckpointError, TrainingError

SMOKE = Path(__file__).resolve().parent.parent / "configs" / "f1_smoke.yaml"


@pytest.fixture()
def trained(tmp_path, capsys):
    out = tmp_path / "train"
    code = main(["train", "--config", str(SMOKE), "--set", "mcmc.initial_scale=0.0001", "--out", str(out)])
    assert code == EXIT_OK
    assert capsys.readouterr().out.strip().endswith("model.json")
    return out / "model.json"


def _features(tmp_path):
    path = tmp_path / "test.csv"
    path.write_text("x0\n0.1\n0.5\n0.9\n", encoding="utf-8")
    return path


def test_exit_codes():
    assert exit_code_for(ConfigError("x")) == EXIT_INPUT
    assert exit_code_for(StaleCheckpointError("x")) == EXIT_STALE
    assert exit_code_for(TrainingError("x")) == EXIT_TRAINING


def test_missing_config_is_an_input_error(tmp_path, capsys):
    assert main(["train", "--config", str(tmp_path / "missing.yaml")]) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err


def test_unknown_override_is_an_input_error(tmp_path):
    code = main(["train", "--config", str(SMOKE), "--set", "mcmc.nope=1", "--out", str(tmp_path)])
    assert code == EXIT_INPUT


def test_train_writes_checkpoint_and_trace(trained):
    assert trained.exists()
    assert (trained.parent / "trace.ndjson").exists()
    assert (trained.parent / "chain_checkpoint.json").exists()
    payload = json.loads(trained.read_text(encoding="utf-8"))
    assert payload["dataset"]["n"] == 50
    assert payload["data_source"]["source"] == "synthetic_f1"


def test_predict_then_evaluate(trained, tmp_path, capsys):
    pred_dir = tmp_path / "pred"
    code = main(["predict", "--checkpoint", str(trained), "--test", str(_features(tmp_path)), "--out", str(pred_dir)])
    assert code == EXIT_OK
    lines = (pred_dir / "predictions.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "index,mean,variance,variance_kind"
    assert len(lines) == 4
    assert all(line.endswith(",f") for line in lines[1:])
    capsys.readouterr()

    truth = tmp_path / "truth.csv"
    truth.write_text("x0,y\n0.1,1.2\n0.5,0.4\n0.9,-0.3\n", encoding="utf-8")
    code = main(["evaluate", "--predictions", str(pred_dir / "predictions.csv"), "--truth", str(truth), "--out", str(tmp_path / "eval")])
    assert code == EXIT_OK
    metrics = json.loads((tmp_path / "eval" / "metrics.json").read_text(encoding="utf-8"))
    assert metrics["n_test"] == 3
    assert metrics["variance_kind"] == "f"
    assert metrics["rmse"] >= 0.0


def test_evaluate_rejects_mismatched_truth(trained, tmp_path):
    pred_dir = tmp_path / "pred"
    main(["predict", "--checkpoint", str(trained), "--test", str(_features(tmp_path)), "--out", str(pred_dir)])
    truth = tmp_path / "truth.csv"
    truth.write_text("x0,y\n0.1,1.2\n", encoding="utf-8")
    code = main(["evaluate", "--predictions", str(pred_dir / "predictions.csv"), "--truth", str(truth)])
    assert code == EXIT_INPUT


def test_predict_with_stale_data_exits_with_stale_code(trained, tmp_path):
    payload = json.loads(trained.read_text(encoding="utf-8"))
    payload["data_source"]["seed"] = 7
    trained.write_text(json.dumps(payload), encoding="utf-8")
    code = main(["predict", "--checkpoint", str(trained), "--test", str(_features(tmp_path)), "--out", str(tmp_path)])
    assert code == EXIT_STALE


def test_inspect_summarizes_the_checkpoint(trained, capsys):
    capsys.readouterr()
    assert main(["inspect", "--checkpoint", str(trained)]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.startswith("kernel:")
    assert "noise_var = " in text
    assert "dataset: n=50 dim=1 metric=euclidean" in text


def test_inspect_rejects_a_corrupt_checkpoint(tmp_path):
    bad = tmp_path / "model.json"
    bad.write_text("{not json", encoding="utf-8")
    assert main(["inspect", "--checkpoint", str(bad)]) == EXIT_INPUT


def test_missing_prediction_file_is_an_input_error(tmp_path, capsys):
    truth = tmp_path / "truth.csv"
    truth.write_text("x0,y\n0.1,1.2\n", encoding="utf-8")
    code = main(["evaluate", "--predictions", str(tmp_path / "missing.csv"), "--truth", str(truth)])
    assert code == EXIT_INPUT
    assert "error:" in capsys.readouterr().err


def test_unwritable_output_is_an_input_error(tmp_path, capsys):
    predictions = tmp_path / "predictions.csv"
    predictions.write_text("index,mean,variance,variance_kind\n0,1.0,0.1,f\n", encoding="utf-8")
    truth = tmp_path / "truth.csv"
    truth.write_text("x0,y\n0.1,1.2\n", encoding="utf-8")
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    code = main(["evaluate", "--predictions", str(predictions), "--truth", str(truth), "--out", str(blocker)])
    assert code == EXIT_INPUT
    assert "error:" in capsys.readouterr().err


def test_seed_is_recorded_by_predict_evaluate_and_inspect(trained, tmp_path, capsys):
    pred_dir = tmp_path / "pred"
    test = str(_features(tmp_path))
    assert main(["predict", "--checkpoint", str(trained), "--test", test, "--seed", "5", "--out", str(pred_dir)]) == EXIT_OK
    run = json.loads((pred_dir / "run.json").read_text(encoding="utf-8"))
    assert run["seeds"] == {"override": 5, "data": 0, "chain": 0}

    truth = tmp_path / "truth.csv"
    truth.write_text("x0,y\n0.1,1.2\n0.5,0.4\n0.9,-0.3\n", encoding="utf-8")
    predictions = str(pred_dir / "predictions.csv")
    assert main(["evaluate", "--predictions", predictions, "--truth", str(truth), "--seed", "5", "--out", str(pred_dir)]) == EXIT_OK
    metrics = json.loads((pred_dir / "metrics.json").read_text(encoding="utf-8"))
    assert metrics["seeds"] == {"override": 5}

    capsys.readouterr()
    assert main(["inspect", "--checkpoint", str(trained)]) == EXIT_OK
    assert "seeds: data=0 chain=0 override=None" in capsys.readouterr().out
