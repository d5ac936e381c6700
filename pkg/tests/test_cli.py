import json
import subprocess
import sys
from pathlib import Path

import pytest

from mobile_sampling.cli import SCHEMA_VERSION, run

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def write(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def grid_config(radius=0.1, seed=3):
    cfg = json.loads((CONFIGS / "two_families_ball.json").read_text())
    cfg["spectrum"]["parameters"]["radius"] = radius
    cfg["seed"] = seed
    cfg["budgets"] = {"center_count": 32, "R_grid": [4, 8, 16, 32], "profile_radii": [1e-5, 1e-3, 0.1],
                      "corpus_size": 4}
    return cfg


def test_mean_width_cube3(tmp_path, capsys):
    assert run(["mean-width", "--config", str(CONFIGS / "cube3.json"), "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "mean_width = 3.000000" in out
    assert (tmp_path / "mean_width_report.txt").exists()


def test_certify_exit_codes(tmp_path):
    ok = write(tmp_path, grid_config(0.1))
    assert run(["certify", "--config", str(ok), "--out", str(tmp_path / "a")]) == 0
    report = (tmp_path / "a" / "certify_report.txt").read_text()
    assert "verdict = CERTIFIED" in report
    bad = write(tmp_path, grid_config(1.0), "big.json")
    assert run(["certify", "--config", str(bad), "--out", str(tmp_path / "b")]) == 2


def test_csv_determinism_and_header(tmp_path):
    cfg = write(tmp_path, grid_config())
    for sub in ("a", "b"):
        assert run(["density", "--config", str(cfg), "--out", str(tmp_path / sub)]) == 0
        assert run(["phi-profile", "--config", str(cfg), "--out", str(tmp_path / sub)]) == 0
    for name in ("density.csv", "phi_profile.csv"):
        a = (tmp_path / "a" / name).read_bytes()
        assert a == (tmp_path / "b" / name).read_bytes()
        lines = a.decode().split("\n")
        assert not lines[0].startswith("#") and "," in lines[0]
        assert lines[1].startswith("# tool=mobile-sampling version=")
        assert "seed=3" in lines[1] and "config_sha256=" in lines[1]
        assert b"\r" not in a


def test_seed_override(tmp_path):
    cfg = write(tmp_path, grid_config())
    run(["density", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "99"])
    assert "seed=99" in (tmp_path / "a" / "density.csv").read_text()


@pytest.mark.parametrize("cfg,needle", [
    ({"version": "0", "seed": 1}, "field 'version'"),
    ({"version": SCHEMA_VERSION, "dimension": 2}, "field 'seed'"),
    ({"version": SCHEMA_VERSION, "seed": 1, "dimension": 2,
      "surface": {"type": "sphere", "dimension": 2, "parameters": {"radius": 1}}}, "missing key 'centre'"),
    ({"version": SCHEMA_VERSION, "seed": 1, "dimension": 2}, "field 'surface'"),
])
def test_malformed_configs(tmp_path, capsys, cfg, needle):
    path = write(tmp_path, cfg)
    assert run(["density", "--config", str(path), "--out", str(tmp_path)]) == 1
    assert needle in capsys.readouterr().err


def test_invalid_json_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"version": "1",\n"seed": 1,\n}')
    assert run(["certify", "--config", str(path)]) == 1
    assert "line 3" in capsys.readouterr().err


def test_selftest_via_module(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "mobile_sampling", "selftest", "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "failed = 0" in proc.stdout


def test_remez_and_jensen_csvs(tmp_path):
    cfg = json.loads((CONFIGS / "ronkin_ball2.json").read_text())
    cfg["params"]["functions"] = 3
    path = write(tmp_path, cfg)
    assert run(["remez", "--config", str(path), "--out", str(tmp_path)]) == 0
    assert (tmp_path / "sublevel.csv").read_text().startswith("epsilon,measure,bound\n")
    assert run(["jensen", "--config", str(path), "--out", str(tmp_path)]) == 0
    assert "violations = 0" in (tmp_path / "jensen_report.txt").read_text()


def test_sampling_ratio_cli(tmp_path):
    cfg = grid_config()
    cfg["params"]["p"] = 2
    path = write(tmp_path, cfg)
    assert run(["sampling-ratio", "--config", str(path), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "sampling_ratio.csv").read_text().strip().split("\n")
    assert len(rows) == 2 + 4
