import json
import subprocess
import sys
from pathlib import Path

import pytest

from ergodev.cli import main
from ergodev.config import load_config
from ergodev.errors import ConfigInvalid


def run_cli(args):
    return main(args)


def test_spectrum_cat_map(tmp_path):
    out = tmp_path / "spec"
    assert run_cli(["spectrum", "--matrix", "[[2,1],[1,1]]", "--out", str(out)]) == 0
    payload = json.loads((out / "spectrum_summary.json").read_text())
    assert payload["lambda"] == pytest.approx(2.618033988749895, abs=1e-9)
    assert payload["h_top"] == pytest.approx(0.9624236501192069, abs=1e-9)
    assert payload["charpoly"] == [1, -3, 1]
    assert "config_hash" in payload
    assert (out / "eigenvalues.csv").exists()


def test_decompose_outputs(tmp_path):
    out = tmp_path / "dec"
    assert run_cli(["decompose", "--preset", "golden", "--tmax", "500",
                    "--out", str(out)]) == 0
    payload = json.loads((out / "decompose_summary.json").read_text())
    assert payload["exact_additivity"] is True
    header = (out / "decomposition.csv").read_text().splitlines()[0]
    assert header.split(",")[0] == "index"


def test_correlate_json(tmp_path):
    out = tmp_path / "corr"
    assert run_cli(["correlate", "--seed", "5", "--out", str(out)]) == 0
    payload = json.loads((out / "correlate_summary.json").read_text())
    assert payload["middle_sum_empty"] is True
    assert len(payload["pairs"]) == 20


def test_deviate_small_and_worker_determinism(tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text("starts = 3\ntmin = 100\ntmax = 100000\ntratio = 1.6\n"
                   "fit_tmin = 1000\n")
    out1 = tmp_path / "w1"
    out2 = tmp_path / "w2"
    assert run_cli(["deviate", "--preset", "golden", "--config", str(cfg),
                    "--out", str(out1), "--workers", "1"]) == 0
    assert run_cli(["deviate", "--preset", "golden", "--config", str(cfg),
                    "--out", str(out2), "--workers", "2"]) == 0
    assert (out1 / "deviations.csv").read_bytes() == (out2 / "deviations.csv").read_bytes()
    assert (out1 / "deviations.svg").exists()


def test_deviate_constant_observable_zero_column(tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text("starts = 2\ntmin = 100\ntmax = 20000\ntratio = 2.0\n"
                   "fit_tmin = 100\nobservable = constant\n")
    out = tmp_path / "const"
    assert run_cli(["deviate", "--preset", "golden", "--config", str(cfg),
                    "--out", str(out)]) == 0
    rows = (out / "deviations.csv").read_text().splitlines()[1:]
    for row in rows:
        assert abs(float(row.split(",")[1])) < 1e-7


def test_exit_code_config_error(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("tratio = 0.5\n")
    assert run_cli(["deviate", "--config", str(bad), "--out", str(tmp_path / "x")]) == 3


def test_exit_code_missing_preset(tmp_path):
    assert run_cli(["deviate", "--preset", "nope", "--out", str(tmp_path / "x")]) == 3


def test_config_flat_and_json(tmp_path):
    flat = tmp_path / "c1"
    flat.write_text("# comment\nstarts = 7\nseed = 3\npreset = golden\n")
    c1 = load_config(flat)
    assert c1["starts"] == 7 and c1["preset"] == "golden"
    js = tmp_path / "c2.json"
    js.write_text(json.dumps({"starts": 7, "seed": 3, "preset": "golden"}))
    c2 = load_config(js)
    assert c1.as_dict() == c2.as_dict()


def test_config_unknown_key(tmp_path):
    f = tmp_path / "c"
    f.write_text("no_such_key = 1\n")
    with pytest.raises(ConfigInvalid):
        load_config(f)


def test_config_t_grid_ratio():
    cfg = load_config(None, {"tmin": 10.0, "tmax": 1000.0, "tratio": 10.0})
    assert cfg.t_grid() == pytest.approx([10.0, 100.0, 1000.0])


def test_explicit_start_points(tmp_path):
    cfg = tmp_path / "cfg"
    cfg.write_text('starts = ["1/7", "2/7"]\ntmin = 100\ntmax = 10000\n'
                   "tratio = 2.0\nfit_tmin = 100\n")
    out = tmp_path / "explicit"
    assert run_cli(["deviate", "--preset", "golden", "--config", str(cfg),
                    "--out", str(out)]) == 0
    payload = json.loads((out / "deviate_summary.json").read_text())
    assert payload["starts"] == 2


def test_cli_entrypoint_subprocess(tmp_path):
    out = tmp_path / "sp"
    res = subprocess.run(
        [sys.executable, "-m", "ergodev.cli", "spectrum",
         "--matrix", "[[2,1],[1,1]]", "--out", str(out)],
        capture_output=True, text=True)
    assert res.returncode == 0
    assert "spectrum: ok" in res.stdout
