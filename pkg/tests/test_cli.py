import json
import math

import numpy as np
import pytest

from wedgeshock import cli


def run_cli(tmp_path, text, extra_args=(), name="run.cfg"):
    cfg = tmp_path / name
    cfg.write_text(text)
    out = tmp_path / "out"
    code = cli.main(["--config", str(cfg), "--out", str(out), *extra_args])
    return code, out


def test_missing_config_exits_nonzero(tmp_path):
    out = tmp_path / "out"
    code = cli.main(["--config", str(tmp_path / "absent.cfg"), "--out", str(out)])
    assert code == cli.EXIT_CONFIG
    assert not out.exists() or not any(out.iterdir())


def test_unknown_field_reports_path(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "command = polar\nwarp_drive = 9\n")
    assert code == cli.EXIT_CONFIG
    assert "warp_drive" in capsys.readouterr().err


def test_bad_value_reports_field(tmp_path, capsys):
    code, _ = run_cli(tmp_path, "command = polar\ngamma = 0.8\n")
    assert code == cli.EXIT_CONFIG
    assert "gamma" in capsys.readouterr().err


def test_polar_csv_columns_and_reproducibility(tmp_path):
    text = "command = polar\ngamma = 1.4\nq0_minus = 1.3\n"
    code, out = run_cli(tmp_path, text, ("--no-plots",))
    assert code == 0
    blob1 = (out / "polar.csv").read_bytes()
    header, *rows = blob1.decode().strip().splitlines()
    assert header == "v1,v2,q,rho,regime"
    assert len(rows) == 400
    first = rows[0].split(",")
    last = rows[-1].split(",")
    assert first[4] == "strong_transonic"
    assert float(last[1]) == pytest.approx(0.0, abs=1e-9)  # trivial endpoint
    # byte-identical rerun
    code2, out2 = run_cli(tmp_path, text, ("--no-plots",), name="again.cfg")
    assert code2 == 0
    assert (out2 / "polar.csv").read_bytes() == blob1


def test_polar_svg_emitted(tmp_path):
    code, out = run_cli(tmp_path, "command = polar\nalpha_w_deg = 8\n")
    assert code == 0
    svg = (out / "polar.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def test_background_json(tmp_path):
    code, out = run_cli(
        tmp_path,
        "command = background\ngamma = 1.4\nq0_minus = 1.3\nalpha_w_deg = 10\nbranch = strong\n",
        ("--no-plots",),
    )
    assert code == 0
    rec = json.loads((out / "background.json").read_text())
    assert rec["branch"] == "strong"
    assert rec["sigma_s"] < 0
    assert rec["transonic"] is True


def test_spectrum_raw_problem(tmp_path):
    text = "command = spectrum\nomega_star = 1.5707963267948966\nalpha_plus = 1.0\nalpha_minus = 0.0\n"
    code, out = run_cli(tmp_path, text, ("--no-plots",))
    assert code == 0
    lines = (out / "spectrum.csv").read_text().strip().splitlines()
    assert lines[0] == "m,lambda_formula,lambda_determinant,abs_diff"
    assert len(lines) == 8
    for line in lines[1:]:
        parts = line.split(",")
        assert abs(float(parts[3])) < 1e-8


def test_solve_convergence(tmp_path):
    text = (
        "command = solve\nalpha_w_deg = auto\n"
        "t_min = -5\nt_max = 2\nn_t = 48\nn_omega = 16\n"
    )
    code, out = run_cli(tmp_path, text, ("--no-plots",))
    assert code == 0
    lines = (out / "convergence.csv").read_text().strip().splitlines()
    assert lines[0] == "h,max_error,order_estimate"
    assert len(lines) == 4
    last_order = float(lines[-1].split(",")[2])
    assert 1.7 <= last_order <= 2.3


def test_iterate_zero_delta_single_row(tmp_path):
    text = (
        "command = iterate\nalpha_w_deg = auto\ndelta = 0\n"
        "t_min = -6\nt_max = 4\nn_t = 64\nn_omega = 24\n"
    )
    code, out = run_cli(tmp_path, text, ("--no-plots",))
    assert code == 0
    lines = (out / "iteration.csv").read_text().strip().splitlines()
    assert lines[0] == "k,norm_udot,diff_norm,ratio"
    assert len(lines) == 2  # single sweep


def test_iterate_small_run_artifacts(tmp_path):
    text = (
        "command = iterate\nalpha_w_deg = auto\ndelta = 1e-3\n"
        "t_min = -6\nt_max = 4\nn_t = 64\nn_omega = 24\n"
    )
    code, out = run_cli(tmp_path, text)
    assert code == 0
    front = (out / "front.csv").read_text().strip().splitlines()
    assert front[0] == "y2,x1,x2"
    assert len(front) == 65
    assert (out / "iteration.svg").exists()
    assert (out / "front.svg").exists()


def test_iterate_divergence_exit_code(tmp_path):
    text = (
        "command = iterate\nalpha_w_deg = auto\ndelta = 0.5\nmax_iter = 12\n"
        "t_min = -6\nt_max = 4\nn_t = 64\nn_omega = 24\n"
    )
    code, out = run_cli(tmp_path, text, ("--no-plots",))
    assert code == cli.EXIT_NUMERICAL
    # partial CSV artifacts of the failed run remain for inspection
    assert (out / "iteration.csv").exists()


def test_study_table(tmp_path):
    text = (
        "command = study\nalpha_w_deg = auto\ndelta = 4e-3\n"
        "t_min = -6\nt_max = 4\nn_t = 64\nn_omega = 24\n"
    )
    code, out = run_cli(tmp_path, text, ("--no-plots",))
    assert code == 0
    lines = (out / "study.csv").read_text().strip().splitlines()
    assert lines[0] == "delta,K_hat,final_ratio,converged"
    assert len(lines) == 4
    ks = [float(l.split(",")[1]) for l in lines[1:]]
    assert max(ks) / min(ks) < 2.0
    assert all(l.split(",")[3] == "true" for l in lines[1:])


def test_json_config_with_nested_grid(tmp_path):
    cfg = {
        "command": "iterate",
        "alpha_w_deg": "auto",
        "delta": 1e-3,
        "grid": {"t_min": -6, "t_max": 4, "n_t": 64, "n_omega": 24},
    }
    code, out = run_cli(tmp_path, json.dumps(cfg), ("--no-plots",))
    assert code == 0
    assert (out / "iteration.csv").exists()
