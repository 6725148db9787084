import subprocess
import sys

import numpy as np
import pytest

from vvteam import trace_io
from vvteam.cli import main
from vvteam.model import FITTING_PARAMS, TESTING_PARAMS
from vvteam.simulator import make_stimulus, simulate

PULSE = [(0.02, 3.0), (0.08, -1.0)]


@pytest.fixture
def files(tmp_path):
    trace_io.write_params(TESTING_PARAMS, tmp_path / "testing.params")
    trace_io.write_segments(PULSE, tmp_path / "pulse.csv")
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def test_validate_pass(files, capsys):
    assert run("validate", "--params", files / "testing.params") == 0
    assert capsys.readouterr().out.strip() == "pass"


def test_validate_violation(files, capsys):
    (files / "bad.params").write_text(
        trace_io.format_params(TESTING_PARAMS).replace("v_h = 1.3999999999999999", "v_h = 2.5"))
    assert run("validate", "--params", files / "bad.params") == 2
    assert "v_th > v_h" in capsys.readouterr().out


def test_validate_unreadable(files, capsys):
    assert run("validate", "--params", files / "missing.params") == 2
    assert "No such file" in capsys.readouterr().err


def test_simulate_pulse(files, capsys):
    out = files / "trace.csv"
    assert run("simulate", "--params", files / "testing.params", "--stimulus", files / "pulse.csv",
               "--out", out) == 0
    summary = capsys.readouterr().out
    t_sw = float(summary.split("switching_time_s=")[1].split()[0])
    assert t_sw == pytest.approx(8.0011e-3, rel=1e-4)
    trace = trace_io.read_trace(out)
    assert len(trace) == 10_000
    assert trace.x.max() == 1.0


def test_simulate_zero_volts(files):
    trace_io.write_segments([(0.01, 0.0)], files / "zero.csv")
    out = files / "trace.csv"
    assert run("simulate", "--params", files / "testing.params", "--stimulus", files / "zero.csv",
               "--out", out) == 0
    assert np.all(trace_io.read_trace(out).i == 0.0)


def test_simulate_missing_stimulus_is_usage_error(files):
    with pytest.raises(SystemExit) as exc:
        run("simulate", "--params", files / "testing.params", "--out", files / "t.csv")
    assert exc.value.code == 1
    assert not (files / "t.csv").exists()


def test_simulate_bad_stimulus_writes_nothing(files):
    (files / "bad.csv").write_text("t,v\n0,1\n")
    out = files / "t.csv"
    assert run("simulate", "--params", files / "testing.params", "--stimulus", files / "bad.csv",
               "--out", out) == 2
    assert not out.exists()


def test_simulate_is_byte_identical(files):
    args = ["simulate", "--params", files / "testing.params", "--stimulus", files / "pulse.csv"]
    assert run(*args, "--out", files / "a.csv") == 0
    assert run(*args, "--out", files / "b.csv") == 0
    assert (files / "a.csv").read_bytes() == (files / "b.csv").read_bytes()


def test_retention_sweep(files):
    out = files / "ret.csv"
    taus = ",".join(f"{i * 0.01:g}" for i in range(1, 11))
    assert run("retention-sweep", "--params", files / "testing.params", "--tau-list", taus,
               "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "tau_s,retention_s"
    rows = np.array([[float(c) for c in line.split(",")] for line in lines[1:]])
    assert rows.shape == (10, 2)
    np.testing.assert_allclose(rows[:, 1] / rows[:, 0], np.log(10) ** 0.2, rtol=1e-4)


def test_retention_single_and_negative(files):
    out = files / "ret.csv"
    assert run("retention-sweep", "--params", files / "testing.params", "--tau-list", "0.05",
               "--out", out) == 0
    assert len(out.read_text().splitlines()) == 2
    assert run("retention-sweep", "--params", files / "testing.params", "--tau-list", "-1",
               "--out", files / "neg.csv") == 1
    assert not (files / "neg.csv").exists()


def test_retention_timeout_marker(files):
    out = files / "ret.csv"
    assert run("retention-sweep", "--params", files / "testing.params", "--tau-list", "0.01,1",
               "--horizon", "0.05", "--out", out) == 2
    lines = out.read_text().splitlines()
    assert lines[2] == "1,error:timeout"


@pytest.fixture
def fit_files(files):
    stim = make_stimulus(PULSE, 10e-6)
    trace_io.write_trace(simulate(FITTING_PARAMS, stim), files / "target.csv")
    trace_io.write_trace(simulate(TESTING_PARAMS, stim), files / "self.csv")
    return files


def fit_args(files, target, out):
    return ["fit", "--params", files / "testing.params", "--stimulus", files / "pulse.csv",
            "--target", files / target, "--out", files / out, "--seed", 11]


def test_fit_reaches_target_error(fit_files, capsys):
    assert run(*fit_args(fit_files, "target.csv", "fit.params")) == 0
    rmse = float(capsys.readouterr().out.split("relative_rmse=")[1].split()[0])
    assert rmse <= 0.045
    fitted = trace_io.read_params(fit_files / "fit.params")
    assert fitted.r_on == TESTING_PARAMS.r_on
    history = (fit_files / "fit.params.history.csv").read_text().splitlines()
    assert history[0] == "iteration,error"


def test_fit_self_target(fit_files, capsys):
    assert run(*fit_args(fit_files, "self.csv", "fit.params")) == 0
    rmse = float(capsys.readouterr().out.split("relative_rmse=")[1].split()[0])
    assert rmse <= 1e-9


def test_fit_deterministic(fit_files):
    assert run(*fit_args(fit_files, "target.csv", "a.params")) == 0
    assert run(*fit_args(fit_files, "target.csv", "b.params")) == 0
    f = fit_files
    assert (f / "a.params").read_bytes() == (f / "b.params").read_bytes()
    assert (f / "a.params.history.csv").read_bytes() == (f / "b.params.history.csv").read_bytes()


def test_fit_misaligned_target(fit_files):
    trace_io.write_segments([(0.05, 3.0)], fit_files / "short.csv")
    args = fit_args(fit_files, "target.csv", "fit.params")
    args[4] = fit_files / "short.csv"
    assert run(*args) == 2
    assert not (fit_files / "fit.params").exists()


def test_fit_unknown_free_parameter(fit_files):
    assert run(*fit_args(fit_files, "target.csv", "fit.params"), "--free", "tau,gamma") == 1


def test_fit_with_bounds_file(fit_files, capsys):
    (fit_files / "bounds.txt").write_text("tau = 1e-3, 10\nbeta = 1, 8\n")
    assert run(*fit_args(fit_files, "target.csv", "fit.params"), "--free", "tau,beta",
               "--bounds", fit_files / "bounds.txt", "--max-iter", 20) == 0
    assert "relative_rmse=" in capsys.readouterr().out


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "vvteam", "validate", "--params",
                           str(files / "testing.params")], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.strip() == "pass"
    proc = subprocess.run([sys.executable, "-m", "vvteam"], capture_output=True, text=True)
    assert proc.returncode == 1
