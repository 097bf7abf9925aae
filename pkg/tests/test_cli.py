import json
import subprocess
import sys

from densilim.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_density_halfplane(capsys):
    code, out = run_cli(capsys, "density", "--set", "x2>0", "--domain", "true",
                        "--at", "0,0")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["value"] == 0.5
    assert rep["result"]["converged"] is True
    assert rep["config"]["quadrature"]["resolution"] == 128


def test_density_at_set(capsys):
    code, out = run_cli(capsys, "density", "--set", "x1^2+x2^2<1",
                        "--domain", "plane", "--at-set", "unit_circle",
                        "--dim", "2", "--schedule", "0.4,0.5,7,3",
                        "--res", "64")
    rep = json.loads(out)
    assert abs(rep["result"]["value"] - 0.5) <= 1e-2


def test_clarke_abs_hull(capsys):
    code, out = run_cli(capsys, "clarke", "--f", "abs(x1)", "--at", "0",
                        "--dim", "1")
    rep = json.loads(out)
    assert code == 0
    vs = sorted(v[0] for v in rep["result"]["vertices"])
    assert abs(vs[0] + 1.0) <= 1e-3 and abs(vs[-1] - 1.0) <= 1e-3


def test_aplim_s1b(capsys):
    code, out = run_cli(capsys, "aplim", "--f", "1/sqrt(atan2(x2,x1))",
                        "--at", "0,0", "--domain", "unit_disk",
                        "--atan2-range", "0..2pi")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["f_upper"] == "+inf"
    assert abs(rep["result"]["f_lower"] - 0.3989422804014327) <= 2e-2
    assert rep["result"]["ap_limit"] is None
    assert rep["config"]["atan2_range"] == "0..2pi"


def test_representative_step(capsys):
    code, out = run_cli(capsys, "representative", "--f", "if(x1>0, 1, 0)",
                        "--at", "0,0", "--domain", "plane")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["provenance"] == "mean"
    assert abs(rep["result"]["value"] - 0.5) <= 5e-3


def test_jump_subcommand(capsys):
    code, out = run_cli(capsys, "jump", "--f", "if(x1>0, 1, 0)", "--at", "0,0")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["is_jump"] is True
    assert abs(rep["result"]["tilde_f"] - 0.5) <= 1e-3


def test_gauss_green_subcommand(capsys):
    code, out = run_cli(capsys, "gauss-green", "--f", "x1^2 + x2",
                        "--phi", "x2,x1", "--domain", "unit_square",
                        "--res", "256")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["residual"] <= 1e-3


def test_gauss_green_sweep_csv(capsys):
    code, out = run_cli(capsys, "gauss-green", "--f", "1", "--phi", "x1,0",
                        "--domain", "unit_square", "--res", "64",
                        "--sweep", "2", "--csv")
    lines = out.strip().splitlines()
    assert code == 0
    assert lines[0] == "h,residual"
    assert len(lines) == 3


def test_demo_vanishing_subcommand(capsys):
    code, out = run_cli(capsys, "demo-vanishing", "--f", "x1 + 2*x2 + 0.3",
                        "--e1", "demo_cusp_right", "--e2", "demo_cusp_left",
                        "--domain", "plane", "--at", "0,0",
                        "--schedule", "0.5,0.5,8,4", "--res", "512")
    rep = json.loads(out)
    assert code == 0
    assert abs(rep["result"]["value"]) <= 1e-3


def test_aplim_interval_witnesses(capsys):
    code, out = run_cli(capsys, "aplim", "--f", "if(x2>0, 1, 0)",
                        "--at", "0,0", "--domain", "plane", "--interval")
    rep = json.loads(out)
    assert code == 0
    assert rep["result"]["interval"]["lo"] == 0.0
    assert rep["result"]["interval"]["hi"] == 1.0
    assert rep["result"]["interval"]["hi_witness"]


def test_syntax_error_exit_code(capsys):
    code = main(["density", "--set", "max(x1,", "--domain", "true",
                 "--at", "0,0"])
    assert code == 2


def test_non_lipschitz_exit_code(capsys):
    code = main(["clarke", "--f", "sqrt(abs(x1))", "--at", "0", "--dim", "1",
                 "--cap", "100"])
    assert code == 3


def test_precondition_exit_code(capsys):
    code = main(["density", "--set", "x2>0", "--domain", "unit_disk",
                 "--at", "3,3"])
    assert code == 2


def test_nonconvergence_exit_code(capsys):
    code, out = run_cli(capsys, "density",
                        "--set", "if(sin(6*log(sqrt(x1^2+x2^2)))>0, 1, 0) > 0.5",
                        "--domain", "true", "--at", "0,0",
                        "--schedule", "1.0,0.5,14,6")
    rep = json.loads(out)
    assert code == 3
    assert rep["result"]["converged"] is False


def test_seed_env_override(capsys, monkeypatch):
    monkeypatch.setenv("DENSILIM_SEED", "424242")
    _, out = run_cli(capsys, "density", "--set", "x2>0", "--domain", "true",
                     "--at", "0,0")
    assert json.loads(out)["config"]["quadrature"]["seed"] == 424242


def test_thread_count_does_not_change_bytes(capsys):
    _, out1 = run_cli(capsys, "density", "--set", "x2>0", "--domain", "true",
                      "--at", "0,0", "--threads", "1")
    _, out8 = run_cli(capsys, "density", "--set", "x2>0", "--domain", "true",
                      "--at", "0,0", "--threads", "8")
    assert out1 == out8


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "densilim.cli", "density", "--set", "x2>0",
         "--domain", "true", "--at", "0,0"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["result"]["value"] == 0.5
