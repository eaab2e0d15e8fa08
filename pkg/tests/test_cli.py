import csv
import json
import subprocess
import sys

import pytest

from fransdcp import cli, experiment
from fransdcp.errors import NumericalInconsistency


def _rows(out):
    with open(out / "results.csv", newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _config(tmp_path, obj):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(obj), encoding="utf-8")
    return str(p)


@pytest.fixture(scope="module")
def validate_fig3(tmp_path_factory):
    out = tmp_path_factory.mktemp("v3")
    code = cli.main(["validate", "--figure", "3", "--seed", "42", "--out", str(out)])
    return code, out


def test_validate_figure_agrees(validate_fig3):
    code, out = validate_fig3
    assert code == 0
    rows = _rows(out)
    assert {r["component"] for r in rows} == {"stp", "step", "sdcp"}
    sdcp_rows = [r for r in rows if r["component"] == "sdcp"]
    assert len(sdcp_rows) == 2 * 3 * 20
    for r in rows:
        a, p, h = float(r["analytic"]), float(r["mc_point"]), float(r["mc_ci99"])
        assert abs(a - p) <= h
    meta = json.loads((out / "meta.json").read_text())
    assert meta["all_within_ci"] is True
    assert meta["seed"] == 42


def test_meta_records_run(validate_fig3):
    meta = json.loads((validate_fig3[1] / "meta.json").read_text())
    for key in ("cycle_convention", "formula_mode", "coupling_mode", "uplink_numerator",
                "thinned_arrivals"):
        assert key in meta["flags"]
    assert meta["kernel_backend"] in ("cython", "python")
    assert meta["warmup_fraction"] == 0.1
    assert set(meta["panels"]) == {"tau=0dB", "tau=3dB"}
    assert {"numpy", "matplotlib", "fransdcp"} <= set(meta["versions"])


def test_reruns_are_byte_identical(tmp_path):
    outs = []
    for i, threads in enumerate(("1", "1", "3")):
        out = tmp_path / f"r{i}"
        assert cli.main(["validate", "--figure", "4", "--seed", "7", "--threads", threads,
                         "--out", str(out)]) == 0
        outs.append((out / "results.csv").read_bytes())
    assert outs[0] == outs[1] == outs[2]


def test_optimize_figure_range(tmp_path):
    assert cli.main(["optimize", "--figure", "7", "--out", str(tmp_path)]) == 0
    betas = [float(r["analytic"]) for r in _rows(tmp_path) if r["component"] == "beta_star"]
    assert len(betas) == 4 * 9
    assert all(0.5 <= b <= 1.0 for b in betas)


def test_below_floor_is_zero(tmp_path):
    cfg = _config(tmp_path, {"sweep": {"variable": "rho", "values": [1e-5, 5e-5]}})
    assert cli.main(["sdcp", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path)
    assert len(rows) == 6
    assert all(float(r["analytic"]) == 0.0 for r in rows)
    assert all(r["mc_point"] == "" and r["mc_ci99"] == "" for r in rows)


@pytest.mark.parametrize("cmd", ["stp", "step", "sweep"])
def test_component_commands(tmp_path, cmd):
    cfg = _config(tmp_path, {"sweep": {"variable": "rho", "values": [3e-3, 4e-3]}})
    assert cli.main([cmd, "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path)
    want = "sdcp" if cmd == "sweep" else cmd
    assert {r["component"] for r in rows} == {want}
    assert all(0.0 <= float(r["analytic"]) <= 1.0 for r in rows)


def test_figure_writes_svg(tmp_path):
    assert cli.main(["figure", "--figure", "8a", "--out", str(tmp_path)]) == 0
    svg = (tmp_path / "plot.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "</svg>" in svg
    first = (tmp_path / "plot.svg").read_bytes()
    assert cli.main(["figure", "--figure", "8a", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "plot.svg").read_bytes() == first


@pytest.mark.parametrize("obj", [{"task": {"compression_ratio": 1.2}},
                                 {"task": {"gamma_ratio": 0.6}},
                                 {"sweep": {"variable": "psi", "values": [50000]}}])
def test_config_errors_exit_2(tmp_path, obj, capsys):
    cfg = _config(tmp_path, obj)
    assert cli.main(["sdcp", "--config", cfg, "--out", str(tmp_path)]) == 2
    assert "config error" in capsys.readouterr().err


def test_malformed_json_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{", encoding="utf-8")
    assert cli.main(["sdcp", "--config", str(p), "--out", str(tmp_path)]) == 2


def test_figure_command_needs_preset(tmp_path):
    assert cli.main(["figure", "--out", str(tmp_path)]) == 2


def test_numerical_failure_exit_3(tmp_path, monkeypatch):
    def boom(cfg, op):
        raise NumericalInconsistency("probability 1.5 outside [0, 1]")
    monkeypatch.setattr(cli, "run_operation", boom)
    assert cli.main(["sdcp", "--out", str(tmp_path)]) == 3


def test_disagreement_exit_1(tmp_path, monkeypatch):
    real = experiment.run_operation

    def skewed(cfg, op):
        rows = real(cfg, op)
        return [r.__class__(**{**r.__dict__, "analytic": 1.0 - r.analytic}) for r in rows]
    monkeypatch.setattr(cli, "run_operation", skewed)
    cfg = _config(tmp_path, {"sweep": {"variable": "rho", "values": [3e-3]},
                             "mc": {"iterations": 2000, "tasks": 20000}})
    assert cli.main(["validate", "--config", cfg, "--out", str(tmp_path)]) == 1
    assert json.loads((tmp_path / "meta.json").read_text())["all_within_ci"] is False


@pytest.mark.parametrize("argv", [["sdcp", "--seed", "-1"], ["sdcp", "--threads", "0"],
                                  ["nope"], ["sdcp", "--figure", "9"]])
def test_bad_arguments_exit_2(argv):
    with pytest.raises(SystemExit) as exc:
        cli.main(argv)
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "fransdcp", "stp", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "results.csv").exists()
