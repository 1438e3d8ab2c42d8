import json
import os

import numpy as np
import pytest

from neckflow.cli import main
from neckflow.sweeps import (
    ConfigError,
    RateReport,
    RateRow,
    RunConfig,
    emit,
    parse_report,
    run,
)

SMALL = RunConfig(profile="sym-quadratic", alphas=(1,), m_max=1,
                  eps=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4))


def test_config_validation_errors():
    with pytest.raises(ConfigError, match="insufficient eps span"):
        RunConfig(eps=(1e-2, 1e-3)).validate()
    with pytest.raises(ConfigError, match="exceeds derivative cap"):
        RunConfig(m_max=7).validate()
    with pytest.raises(ConfigError, match="strictly decreasing"):
        RunConfig(eps=(1e-3, 1e-2, 1e-3, 1e-4, 1e-5)).validate()
    with pytest.raises(ConfigError, match="unknown profile"):
        RunConfig(profile="does-not-exist").validate()
    with pytest.raises(ConfigError):
        RunConfig(alphas=(4,)).validate()
    RunConfig(eps=(1e-2,)).validate(sweep=False)  # single-eps tools are fine


def test_run_small_config_all_pass():
    rep = run(SMALL)
    assert len(rep.rows) >= 12
    assert rep.all_passed
    kinds = {r.check for r in rep.rows}
    assert {"structural/divergence", "structural/trace", "structural/degrees",
            "decay/residual", "rate/blowup"} <= kinds


def test_run_reference_config():
    # single translation mode, symmetric quadratic walls, m_max = 2, the
    # default five-value eps sweep: a dozen-plus checks, all passing
    rep = run(RunConfig(profile="sym-quadratic", alphas=(1,), m_max=2,
                        eps=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4)))
    assert len(rep.rows) >= 12
    assert rep.all_passed


def test_report_determinism_and_roundtrip():
    rep1 = run(SMALL)
    rep2 = run(SMALL)
    assert emit(rep1, "csv") == emit(rep2, "csv")
    j1, j2 = json.loads(emit(rep1, "json")), json.loads(emit(rep2, "json"))
    j1.pop("created_at"), j2.pop("created_at")
    assert j1 == j2
    back = parse_report(emit(rep1, "json"))
    assert back.rows == rep1.rows
    assert back.config_digest == rep1.config_digest


def test_emit_csv_shapes(tmp_path):
    empty = RateReport("deadbeef")
    text = emit(empty, "csv")
    assert text.splitlines() == [
        "check,anchor,profile,alpha,m,s,window,predicted,measured,tolerance,pass"]
    rows = [RateRow("a/b", "x", "p", 1, 0, None, "w", 1.0, 1.0001, 0.1, True)
            for _ in range(3)]
    rep = RateReport("deadbeef", rows=rows)
    assert len(emit(rep, "csv").splitlines()) == 4
    path = tmp_path / "out.csv"
    emit(rep, "csv", str(path))
    assert path.read_text() == emit(rep, "csv")
    with pytest.raises(ConfigError):
        emit(rep, "xml")


def test_worker_pool_env(monkeypatch):
    monkeypatch.setenv("NECK_THREADS", "2")
    rep = run(RunConfig(profile="sym-quadratic", alphas=(1,), m_max=1,
                        eps=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4), decay=False,
                        blowup=False))
    assert rep.all_passed
    keys = [r.key() for r in rep.rows]
    assert keys == sorted(keys)  # merged deterministically by sorted key


def test_fd_rows_family():
    rep = run(RunConfig(profile="sym-quadratic", alphas=(1,), m_max=1,
                        eps=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4), structural=False,
                        decay=False, blowup=False, fd_checks=True))
    assert [r.check for r in rep.rows] == ["fd/manufactured-order"]
    assert rep.all_passed


def test_cli_sweep_rates_and_report_emit(tmp_path, capsys):
    out = tmp_path / "reports"
    code = main(["sweep", "rates", "--profile", "sym-quadratic", "--alpha", "1",
                 "--m", "1", "--out", str(out)])
    assert code == 0
    files = sorted(os.listdir(out))
    assert any(f.endswith(".csv") for f in files)
    jsons = [f for f in files if f.endswith(".json")]
    assert jsons
    code = main(["report", "emit", "--input", str(out / jsons[0]),
                 "--to", "csv", "--output", str(tmp_path / "again.csv")])
    assert code == 0
    assert (tmp_path / "again.csv").read_text() == (
        out / jsons[0].replace(".json", ".csv")).read_text()


def test_cli_exit_codes(tmp_path):
    assert main(["sweep", "rates", "--eps", "1e-2,1e-3", "--out",
                 str(tmp_path)]) == 2
    assert main(["sweep", "rates", "--m", "7", "--out", str(tmp_path)]) == 2
    assert main(["corrector", "build", "--profile", "sym-quadratic",
                 "--eps", "5e-2", "--alpha", "1", "--m", "1",
                 "--out", str(tmp_path)]) == 0


def test_cli_corrector_verify(tmp_path):
    code = main(["corrector", "verify", "--profile", "asym-quadratic",
                 "--alpha", "2", "--m", "1", "--eps", "1e-2",
                 "--out", str(tmp_path)])
    assert code == 0


def test_cli_stokes_solve(tmp_path):
    code = main(["stokes", "solve", "--profile", "sym-quadratic",
                 "--eps", "1e-2", "--level", "2", "--n1", "65", "--n2", "32",
                 "--csv", "cloud.csv", "--out", str(tmp_path)])
    assert code == 0
    assert (tmp_path / "cloud.csv").exists()


def test_custom_profile_file_sweep(tmp_path):
    doc = {"name": "custom-mix", "R": 0.5, "mu": 1.0, "eps": 1.0,
           "h1": {"poly": [0, 0, 0.75]}, "h2": {"poly": [0, 0, 0.5, 0, 0.5]}}
    path = tmp_path / "profile.json"
    path.write_text(json.dumps(doc))
    rep = run(RunConfig(profile=str(path), alphas=(3,), m_max=1,
                        eps=(1e-2, 3e-3, 1e-3, 3e-4, 1e-4)))
    assert rep.rows and rep.all_passed


def test_config_json_load(tmp_path):
    doc = {"profile": "sym-quadratic", "alphas": [1], "m_max": 1,
           "eps": [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    code = main(["sweep", "rates", "--config", str(path), "--out",
                 str(tmp_path / "rep")])
    assert code == 0
    with pytest.raises(ConfigError):
        RunConfig.from_json({"bogus_field": 1})
