"""CLI subcommands drive the same library paths the tests exercise."""

import json

import pytest

from liesindy.cli import main
from liesindy.harness import ExperimentConfig

SMALL_KDV = dict(system="kdv", nx=64, length=20.0, dt=0.01, nt=60,
                 scheme="etdrk4", dealias=True, transient=0.0, params={})


@pytest.fixture(scope="module")
def config_path(tmp_path_factory):
    cfg = ExperimentConfig(system="kdv", method="di-sindy", runs=2, seed=11,
                           solver=dict(SMALL_KDV), long_term=True)
    path = tmp_path_factory.mktemp("cfg") / "experiment.json"
    cfg.save(path)
    return path


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory, config_path):
    """generate -> discover once; several tests read the results."""
    root = tmp_path_factory.mktemp("pipe")
    data = root / "data"
    out = root / "report"
    assert main(["generate", "--config", str(config_path),
                 "--out", str(data)]) == 0
    assert main(["discover", "--config", str(config_path),
                 "--data", str(data), "--out", str(out)]) == 0
    return data, out


def test_generate_writes_dataset(pipeline, config_path):
    data, _ = pipeline
    blob = json.loads((data / "dataset.json").read_text())
    assert blob["data_digest"] == ExperimentConfig.load(config_path
                                                        ).data_digest()
    assert (data / "test" / "traj_3.csv").exists()
    assert (data / "run_1" / "manifest").exists()


def test_discover_writes_report(pipeline, capsys):
    _, out = pipeline
    for name in ("config.json", "runs.csv", "summary.csv",
                 "longterm.csv", "longterm.svg"):
        assert (out / name).exists(), name
    summary = (out / "summary.csv").read_text().splitlines()
    assert summary[0] == "system,method,success_rate,rmse_successful,rmse_all"
    assert summary[1].startswith("kdv,di-sindy,1.0,")


def test_report_rewrites_summary_identically(pipeline, capsys):
    _, out = pipeline
    before = (out / "summary.csv").read_bytes()
    svg_before = (out / "longterm.svg").read_bytes()
    assert main(["report", "--in", str(out)]) == 0
    assert (out / "summary.csv").read_bytes() == before
    assert (out / "longterm.svg").read_bytes() == svg_before
    shown = capsys.readouterr().out
    assert "success rate" in shown and "kdv" in shown


def test_evaluate_reproduces_longterm(pipeline, tmp_path, capsys):
    data, out = pipeline
    evald = tmp_path / "eval"
    assert main(["evaluate", "--models", str(out), "--data", str(data),
                 "--out", str(evald)]) == 0
    # same models, same test data, same integrator: identical curve
    assert (evald / "longterm.csv").read_bytes() == \
        (out / "longterm.csv").read_bytes()
    assert (evald / "longterm.svg").exists()


def test_verify_passes_for_catalog_systems(capsys):
    assert main(["verify", "--system", "kdv"]) == 0
    shown = capsys.readouterr().out
    assert "PASS" in shown
    assert "invariance pairs checked" in shown


def test_verify_unknown_system_fails(capsys):
    assert main(["verify", "--system", "euler"]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_missing_config_is_an_error(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["generate", "--config", str(missing),
                 "--out", str(tmp_path / "d")]) == 1
    assert "error:" in capsys.readouterr().err


def test_report_without_runs_csv(tmp_path, capsys):
    assert main(["report", "--in", str(tmp_path)]) == 1
