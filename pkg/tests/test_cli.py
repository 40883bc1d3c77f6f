import copy
import csv
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from spinwave import cli, config, models
from spinwave.errors import ConfigError
from spinwave.fitting import model_eta

DEMOS = Path(__file__).resolve().parents[1] / "demos" / "configs"

FREE = json.loads((DEMOS / "reference_free.json").read_text())


def in_trap():
    doc = copy.deepcopy(FREE)
    doc["experiment"]["trap"]["on_during_dark_time"] = True
    del doc["model"]["params"]
    doc["output"]["name"] = "in_trap"
    return doc


def write(tmp_path, doc, name="scenario.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {k: np.array([float(r[k]) for r in rows]) for k in rows[0]}


def one_over_e(t, eta):
    return float(np.interp(-math.exp(-1), -eta, t))


# --- scenario files ----------------------------------------------------------------

def test_reference_configs_parse():
    for path in DEMOS.glob("*.json"):
        assert config.load(path)


def test_unknown_key_names_its_path():
    doc = copy.deepcopy(FREE)
    doc["experiment"]["trap"]["colour"] = "red"
    with pytest.raises(ConfigError, match="experiment/trap"):
        config.parse(doc)
    doc = copy.deepcopy(FREE)
    doc["model"]["params"]["tau"] = 3
    with pytest.raises(ConfigError, match="model/params"):
        config.parse(doc)


def test_time_grid_validation():
    doc = copy.deepcopy(FREE)
    doc["time_grid"] = {"start": 10, "stop": 5, "count": 3}
    with pytest.raises(ConfigError):
        config.parse(doc)
    doc["time_grid"] = {"start": 0, "stop": 0, "count": 1}
    (sc,) = config.parse(doc)
    assert sc.times.tolist() == [0.0]
    assert sc.model.relative(sc.times).tolist() == [1.0]


def test_units_are_applied():
    doc = copy.deepcopy(FREE)
    doc["experiment"]["units"] = {"temperature": "nK", "time": "ms"}
    doc["experiment"]["ensemble"]["temperature"] = 200
    doc["model"]["params"]["tau_offset"] = 0.038
    doc["time_grid"] = {"start": 0, "stop": 0.08, "count": 81}
    (a,) = config.parse(doc)
    (b,) = config.parse(FREE)
    np.testing.assert_allclose(a.times, b.times, rtol=1e-14)
    np.testing.assert_allclose(a.model.eta(a.times), b.model.eta(b.times), rtol=1e-12)


def test_reference_scenarios_decay_times():
    (free,) = config.parse(FREE)
    assert abs(models.decay_time(free.model) - 30e-6) < 2e-6
    (trap,) = config.parse(in_trap())
    assert 11.0e-6 < models.decay_time(trap.model) < 12.5e-6


def test_raman_nath_general_scenario():
    doc = in_trap()
    doc["model"] = {"kind": "raman_nath_general"}
    doc["time_grid"] = {"start": 0, "stop": 30, "count": 4}
    (sc,) = config.parse(doc)
    sag = models.HarmonicSag.from_scales(models_scales(sc))
    np.testing.assert_allclose(sc.model.relative(sc.times), sag.relative(sc.times), rtol=1e-5)


def models_scales(sc):
    from spinwave.physics import derive_scales
    return derive_scales(sc.experiment)


def test_duplicate_batch_names():
    doc = {"schema_version": 1, "batch": [
        {"schema_version": 1, "model": {"kind": "exponential", "params": {"tau": 5}},
         "time_grid": {"start": 0, "stop": 1, "count": 2}, "output": {"name": "a"}}] * 2}
    with pytest.raises(ConfigError, match="distinct"):
        config.parse(doc)


# --- curve ---------------------------------------------------------------------

def test_curve_outputs_and_determinism(tmp_path):
    cfg = write(tmp_path, FREE)
    for out in ("a", "b"):
        assert cli.main(["curve", "--config", str(cfg), "--out", str(tmp_path / out)]) == 0
    a = (tmp_path / "a" / "free_expansion_0p2uK.csv").read_bytes()
    assert a == (tmp_path / "b" / "free_expansion_0p2uK.csv").read_bytes()
    data = read_csv(tmp_path / "a" / "free_expansion_0p2uK.csv")
    assert list(data) == ["t_us", "eta_over_eta0"]
    assert data["eta_over_eta0"][0] == 1.0
    assert abs(one_over_e(data["t_us"], data["eta_over_eta0"]) - 30.0) < 2.0


def test_curve_json_and_coherence(tmp_path):
    batch = DEMOS / "oracle_batch.json"
    assert cli.main(["curve", "--config", str(batch), "--out", str(tmp_path), "--format", "json",
                     "--threads", "3"]) == 0
    doc = json.loads((tmp_path / "recoil_2uK.json").read_text())
    cols = doc["columns"] if "columns" in doc else doc
    assert {"t_us", "eta_over_eta0", "ReC", "ImC"} <= set(cols)
    eta = np.array(cols["eta_over_eta0"])
    C = np.array(cols["ReC"]) + 1j * np.array(cols["ImC"])
    np.testing.assert_allclose(np.abs(C) ** 2, eta, rtol=1e-12)


def test_curve_single_point(tmp_path, capsys):
    doc = copy.deepcopy(FREE)
    doc["time_grid"] = {"start": 0, "stop": 0, "count": 1}
    assert cli.main(["curve", "--config", str(write(tmp_path, doc)), "--out", str(tmp_path)]) == 0
    data = read_csv(tmp_path / "free_expansion_0p2uK.csv")
    assert data["eta_over_eta0"].tolist() == [1.0]


def test_curve_config_errors(tmp_path, capsys):
    doc = copy.deepcopy(FREE)
    doc["experiment"]["trap"]["colour"] = "red"
    assert cli.main(["curve", "--config", str(write(tmp_path, doc))]) == cli.EXIT_CONFIG
    assert "experiment/trap" in capsys.readouterr().err
    bad = tmp_path / "broken.json"
    bad.write_text('{"schema_version": 1,\n "model": }')
    assert cli.main(["curve", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert "line 2" in capsys.readouterr().err
    assert cli.main(["curve", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG


def test_threads_resolution(monkeypatch):
    monkeypatch.setenv("SPINWAVE_THREADS", "4")
    assert cli.resolve_threads(None) == 4
    assert cli.resolve_threads(2) == 2
    monkeypatch.delenv("SPINWAVE_THREADS")
    assert cli.resolve_threads(None) == 1
    with pytest.raises(ConfigError):
        cli.resolve_threads(0)


# --- fit ----------------------------------------------------------------------

def test_fit_exact_gaussian(tmp_path, capsys):
    t = np.linspace(1, 40, 30)
    eta = model_eta("gaussian", t, {"eta0": 0.15, "tau": 12.0})
    data = tmp_path / "decay.csv"
    data.write_text("t_us,eta\n" + "".join(f"{a!r},{b!r}\n" for a, b in zip(t.tolist(), eta.tolist())))
    assert cli.main(["fit", str(data), "--model", "gaussian", "--out", str(tmp_path)]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["params"]["tau"]["value"] == pytest.approx(12e-6, rel=1e-9)
    assert (tmp_path / "fit_decay_gaussian.json").exists()


def test_fit_stretched_synthetic(tmp_path, capsys):
    rng = np.random.default_rng(3)
    t = np.linspace(0.7, 31.5, 45)
    eta = 0.15 * np.exp(-(t / 13.0) ** 2) * (1 + 0.03 * rng.standard_normal(t.size))
    data = tmp_path / "fig2.csv"
    data.write_text("t_us,eta,sigma\n" + "".join(
        f"{a!r},{b!r},{0.03 * b!r}\n" for a, b in zip(t.tolist(), eta.tolist())))
    assert cli.main(["fit", str(data), "--model", "stretched", "--out", str(tmp_path),
                     "--format", "csv"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert abs(result["params"]["p"]["value"] - 2.0) < 0.2
    assert (tmp_path / "fit_fig2_stretched.csv").read_text().startswith("param,value,sigma")


def test_fit_errors(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("t_us,eta\n")
    assert cli.main(["fit", str(empty), "--model", "gaussian"]) == cli.EXIT_FIT
    assert "insufficient points" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("t_us,eta\n1,0.5\n2,abc\n")
    assert cli.main(["fit", str(bad), "--model", "gaussian"]) == cli.EXIT_CONFIG
    assert "row 3" in capsys.readouterr().err


# --- figure -------------------------------------------------------------------

def test_figure_fig3(tmp_path):
    assert cli.main(["figure", "fig3", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "fig3_summary.json").read_text())
    assert 1.23 <= summary["lambda_R_fit_um"] <= 1.25
    assert summary["tau_offset_fit_us"] == pytest.approx(38.0, abs=2.0)
    assert (tmp_path / "fig3_tau_vs_T.csv").exists()


def test_figure_fig4(tmp_path):
    assert cli.main(["figure", "fig4", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "fig4_summary.json").read_text())
    assert summary["free_expansion"]["decay_time_us"] == pytest.approx(30.0, abs=2.0)
    assert 11.5 <= summary["in_trap"]["decay_time_us"] <= 12.5


def test_figure_fig2(tmp_path):
    assert cli.main(["figure", "fig2", "--out", str(tmp_path)]) == 0
    summary = json.loads((tmp_path / "fig2_summary.json").read_text())
    assert abs(summary["stretched_fit_synthetic"]["p"]["value"] - 2.0) < 0.3


# --- oracle -------------------------------------------------------------------

def test_oracle_batch(tmp_path, capsys):
    code = cli.main(["oracle", "--config", str(DEMOS / "oracle_batch.json"), "--out", str(tmp_path),
                     "--threads", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert "no oracle available" in out
    report = json.loads((tmp_path / "recoil_2uK_oracle_report.json").read_text())
    assert report["status"] == "PASS" and report["max_rel_deviation"] < 1e-3
    for name in ("release_bec", "linear_force", "kuhr_window"):
        assert json.loads((tmp_path / f"{name}_oracle_report.json").read_text())["status"] == "PASS"
    assert not (tmp_path / "exponential_oracle_report.json").exists()


def test_oracle_failure_exit_code(tmp_path):
    assert cli.main(["oracle", "--config", str(DEMOS / "oracle_batch.json"), "--out", str(tmp_path),
                     "--tolerance", "1e-14"]) == cli.EXIT_NUMERICAL


def test_oracle_harmonic_sag(tmp_path):
    doc = json.loads((DEMOS / "trap_oracles.json").read_text())
    doc["batch"] = [b for b in doc["batch"] if b["model"]["kind"] == "harmonic_sag"]
    assert cli.main(["oracle", "--config", str(write(tmp_path, doc)), "--out", str(tmp_path)]) == 0


def test_console_script(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "spinwave.cli", "curve", "--config",
                           str(DEMOS / "reference_free.json"), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "free_expansion_0p2uK.csv").exists()
