"""Tests for the command-line layer: exit codes, CSV/JSON artifacts, figures."""

import json
import shutil
import subprocess
from pathlib import Path

import pytest

from bellsim.bell import Scenario, scenario_bmax
from bellsim.cli import main
from bellsim.fockspace import LossPlacement
from bellsim.sweep import AxisSpec, ConfigError, RunConfig, parse_config

TSIRELSON_CEILING = 2.8285


def read_rows(path):
    lines = Path(path).read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    rows = [l.split(",") for l in lines if l and not l.startswith("#")]
    return comments, rows


def figure_rows(path):
    comments, raw = read_rows(path)
    return comments, [tuple(float(v) for v in row) for row in raw]


# ---------------------------------------------------------------------------
# Exit codes and dispatch
# ---------------------------------------------------------------------------


def test_unknown_command_exits_4(capsys):
    assert main(["frobnicate"]) == 4
    assert "unknown command" in capsys.readouterr().err


def test_no_args_exits_2(capsys):
    assert main([]) == 2
    assert "usage" in capsys.readouterr().err


def test_bad_scenario_args_exit_2(capsys):
    assert main(["threshold", "--family", "ecs", "--alpha", "9"]) == 2
    assert main(["threshold", "--family", "ecs"]) == 2
    assert main(["threshold", "--family", "pol", "--n", "1", "--tol", "0.5"]) == 2
    capsys.readouterr()


def test_unknown_figure_name_exits_2(capsys):
    assert main(["figure", "fig9z"]) == 2
    capsys.readouterr()


# ---------------------------------------------------------------------------
# threshold command
# ---------------------------------------------------------------------------


def test_threshold_json_pol_n1(capsys):
    assert main(["threshold", "--family", "pol", "--n", "1"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["status"] == "found"
    assert abs(record["eta_star"] - 0.8284) < 1e-3
    assert record["tol"] == 1e-4
    assert record["scenario"]["family"] == "polarization"
    assert record["scenario"]["n"] == 1


def test_threshold_json_pol_n2(capsys):
    assert main(["threshold", "--family", "pol", "--n", "2"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert abs(record["eta_star"] - 0.5858) < 1e-3


def test_threshold_no_threshold_is_success(capsys):
    # alpha = 1 with 15% pre-rotation loss never violates; the command still
    # exits 0 and reports the outcome in the status field.
    assert main(["threshold", "--family", "ecs", "--alpha", "1", "--eta1", "0.85"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["status"] == "no_threshold"
    assert record["eta_star"] is None


def test_threshold_ets_scenario_keys(capsys):
    assert main(["threshold", "--family", "ets", "--V", "10", "--d", "5", "--eta1", "0.9"]) == 0
    record = json.loads(capsys.readouterr().out)
    assert record["scenario"]["V"] == 10.0
    assert record["scenario"]["d"] == 5.0
    assert record["status"] == "no_threshold"


def test_console_script_installed():
    exe = shutil.which("bellsim")
    assert exe is not None
    proc = subprocess.run(
        [exe, "threshold", "--family", "pol", "--n", "2"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    record = json.loads(proc.stdout)
    assert abs(record["eta_star"] - 0.5858) < 1e-3


# ---------------------------------------------------------------------------
# figure command
# ---------------------------------------------------------------------------


def test_fig2a_rows_and_reference_points(tmp_path, capsys):
    out = tmp_path / "fig2a.csv"
    assert main(["figure", "fig2a", "--out", str(out), "--no-plot", "--jobs", "1"]) == 0
    capsys.readouterr()
    comments, rows = figure_rows(out)
    assert any(c.startswith("# columns:") for c in comments)
    assert len(rows) == 4 * 251
    table = {(int(n), eta): b for n, eta, b in rows}
    assert abs(table[(1, 1.0)] - 2.8284) < 1e-4
    assert abs(table[(4, 0.356)] - 2.0) < 5e-3
    assert all(b <= TSIRELSON_CEILING for b in table.values())


def test_fig5b_rows_match_library(tmp_path, capsys):
    out = tmp_path / "fig5b.csv"
    assert main(["figure", "fig5b", "--out", str(out), "--no-plot", "--jobs", "1"]) == 0
    capsys.readouterr()
    _, rows = figure_rows(out)
    assert len(rows) == 3 * 101
    table = {(alpha, eta): b for alpha, eta, b in rows}
    probe = scenario_bmax(Scenario("ecs", LossPlacement(0.85, 0.17), alpha=2.0))
    assert abs(table[(2.0, 0.17)] - probe) < 1e-9


def test_fig4a_surface_shape(tmp_path, capsys):
    out = tmp_path / "fig4a.csv"
    assert main(["figure", "fig4a", "--out", str(out), "--no-plot", "--jobs", "1"]) == 0
    capsys.readouterr()
    _, rows = figure_rows(out)
    assert len(rows) == 41 * 41
    assert all(b <= TSIRELSON_CEILING for _, _, b in rows)
    # the surface must contain violating points at small gamma_t
    assert max(b for gt, _, b in rows if gt == 0.0) > 2.0


def test_fig4b_has_three_curves(tmp_path, capsys):
    out = tmp_path / "fig4b.csv"
    assert main(["figure", "fig4b", "--out", str(out), "--no-plot", "--jobs", "1"]) == 0
    capsys.readouterr()
    _, rows = figure_rows(out)
    assert len(rows) == 3 * 101
    curves = {(V, d) for V, d, _, _ in rows}
    assert curves == {(1.001, 5.0), (10.0, 5.0), (10.0, 10.0)}


def test_figure_rerun_is_byte_identical(tmp_path, capsys):
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["figure", "fig3", "--out", str(a), "--no-plot", "--jobs", "1"]) == 0
    assert main(["figure", "fig3", "--out", str(b), "--no-plot", "--jobs", "1"]) == 0
    capsys.readouterr()
    data = a.read_bytes()
    assert data == b.read_bytes()
    assert b"\r" not in data
    assert data.startswith(b"# ")


def test_figure_pool_matches_serial(tmp_path, capsys):
    a = tmp_path / "serial.csv"
    b = tmp_path / "pooled.csv"
    assert main(["figure", "fig3", "--out", str(a), "--no-plot", "--jobs", "1"]) == 0
    assert main(["figure", "fig3", "--out", str(b), "--no-plot", "--jobs", "2"]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_figure_renders_png(tmp_path, capsys):
    out = tmp_path / "fig4b.csv"
    assert main(["figure", "fig4b", "--out", str(out)]) == 0
    capsys.readouterr()
    assert out.with_suffix(".png").exists()


def test_figure_no_plot_suppresses_png(tmp_path, capsys):
    out = tmp_path / "fig3.csv"
    assert main(["figure", "fig3", "--out", str(out), "--no-plot"]) == 0
    capsys.readouterr()
    assert not out.with_suffix(".png").exists()


# ---------------------------------------------------------------------------
# sweep command
# ---------------------------------------------------------------------------


def _write_config(path, body):
    path.write_text(body)
    return str(path)


def test_sweep_grid_product_and_columns(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    cfg = _write_config(tmp_path / "cfg.ini", f"""
[scenario]
family = ecs
alpha = 1.0

[sweep]
axes = alpha, eta2

[axis.alpha]
start = 0.5
stop = 1.0
steps = 2

[axis.eta2]
start = 0.6
stop = 1.0
steps = 3

[output]
path = {out}
""")
    assert main(["sweep", "--config", cfg]) == 0
    capsys.readouterr()
    comments, rows = read_rows(out)
    assert len(rows) == 2 * 3
    cols = [c for c in comments if c.startswith("# columns:")][0]
    assert cols == "# columns: alpha,eta2,b_max,theta_a,theta_b,theta_a_prime,theta_b_prime,engine"
    # grid order: first axis varies slowest
    assert [r[0] for r in rows] == ["0.5"] * 3 + ["1"] * 3
    assert all(r[-1] == "closed_form" for r in rows)
    assert all(float(r[2]) <= TSIRELSON_CEILING for r in rows)
    # swept values agree with a direct library evaluation
    probe = scenario_bmax(Scenario("ecs", LossPlacement(1.0, 1.0), alpha=1.0))
    assert abs(float(rows[-1][2]) - probe) < 1e-6


def test_sweep_rerun_byte_identical(tmp_path, capsys):
    body = """
[scenario]
family = pol
n = 2
eta1 = 0.95

[sweep]
axes = eta2

[axis.eta2]
start = 0.5
stop = 0.9
steps = 3

[output]
path = {}
"""
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    assert main(["sweep", "--config", _write_config(tmp_path / "a.ini", body.format(a))]) == 0
    assert main(["sweep", "--config", _write_config(tmp_path / "b.ini", body.format(b))]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert "wall_time" not in a.read_text()


def test_sweep_timing_column_opt_in(tmp_path, capsys):
    out = tmp_path / "t.csv"
    cfg = _write_config(tmp_path / "t.ini", f"""
[scenario]
family = ecs
alpha = 0.5

[sweep]
axes = eta2

[axis.eta2]
start = 0.8
stop = 1.0
steps = 2

[output]
path = {out}
timing = on
""")
    assert main(["sweep", "--config", cfg]) == 0
    capsys.readouterr()
    comments, rows = read_rows(out)
    assert any("wall_time" in c for c in comments)
    assert all(float(r[-1]) >= 0.0 for r in rows)


def test_sweep_config_errors_exit_2(tmp_path, capsys):
    cases = [
        "[sweep]\naxes = eta2\n",                                      # no scenario
        "[scenario]\nfamily = squeezed\n[sweep]\naxes = eta2\n",       # bad family
        "[scenario]\nfamily = pol\nn = 1\n[sweep]\naxes = eta2\n",     # missing axis section
        ("[scenario]\nfamily = pol\nn = 1\n[sweep]\naxes = eta2\n"
         "[axis.eta2]\nstart = 0\nstop = 1\nsteps = 1\n"),             # steps < 2
        ("[scenario]\nfamily = pol\nn = 1\n[sweep]\naxes = eta2\n"
         "[axis.eta2]\nstart = 0\nstop = 1\nsteps = 5\n"
         "[output]\ntiming = maybe\n"),                                # bad boolean
        ("[scenario]\nfamily = ecs\nalpha = 9\n[sweep]\naxes = eta2\n"
         "[axis.eta2]\nstart = 0\nstop = 1\nsteps = 5\n"),             # alpha out of range
    ]
    for i, body in enumerate(cases):
        cfg = _write_config(tmp_path / f"bad{i}.ini", body)
        assert main(["sweep", "--config", cfg]) == 2, body
    assert main(["sweep", "--config", str(tmp_path / "missing.ini")]) == 2
    capsys.readouterr()


def test_parse_config_round_trip(tmp_path):
    cfg = _write_config(tmp_path / "ok.ini", """
[scenario]
family = ets
V = 10.0
d = 5.0
engine = oracle

[sweep]
axes = eta1

[axis.eta1]
start = 0.9
stop = 1.0
steps = 5

[options]
jobs = 1
refine_top = 4
quadrature_order = 24
""")
    config = parse_config(cfg)
    assert config.scenario["family"] == "ets"
    assert config.grid == (AxisSpec("eta1", 0.9, 1.0, 5),)
    assert config.refine_top == 4
    assert config.quadrature_order == 24
    assert config.timing is False


def test_run_config_guards():
    with pytest.raises(ConfigError):
        RunConfig(scenario={}, grid=(), output_path="x.csv")
    with pytest.raises(ConfigError):
        RunConfig(scenario={}, grid=(AxisSpec("eta2", 0, 1, 3),), output_path="x", quadrature_order=6)
    with pytest.raises(ConfigError):
        AxisSpec("bogus", 0.0, 1.0, 5)
    with pytest.raises(ConfigError):
        AxisSpec("eta2", 0.0, float("inf"), 5)


# ---------------------------------------------------------------------------
# validate command
# ---------------------------------------------------------------------------


def test_validate_passes_with_documented_warn(capsys):
    assert main(["validate"]) == 0
    out = capsys.readouterr().out
    lines = [l for l in out.splitlines() if l.strip()]
    assert len(lines) == 7
    warn = [l for l in lines if l.startswith("WARN")]
    assert len(warn) == 1
    assert "ets-closed-vs-quadrature" in warn[0]
    # the warn line reports both values so the discrepancy is inspectable
    assert "closed=" in warn[0] and "quadrature=" in warn[0]
    assert all(l.startswith(("PASS", "WARN")) for l in lines)


def test_validate_fault_injection_fails_named_check(capsys):
    assert main(["validate", "--corrupt", "erf-identities"]) == 3
    out = capsys.readouterr().out
    assert any(l.startswith("FAIL") and "erf-identities" in l for l in out.splitlines())


def test_validate_unknown_check_exit_2(capsys):
    assert main(["validate", "--corrupt", "no-such-check"]) == 2
    capsys.readouterr()
