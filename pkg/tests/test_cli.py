import subprocess
import sys

import pytest

from deabias.cli import main

from conftest import CONFIGS, FIXTURES


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_unknown_subcommand(capsys):
    code, _, err = run(["launch"], capsys)
    assert code == 2 and "usage:" in err


def test_missing_required_flag(capsys):
    code, _, err = run(["classify"], capsys)
    assert code == 2 and "--config" in err


def test_bad_unit_is_usage_error(capsys):
    code, _, err = run(["working-range", "--config", CONFIGS / "mass.cfg", "--von", "5 mm"], capsys)
    assert code == 2 and "not valid for voltage" in err


def test_classify_mass(capsys):
    code, out, _ = run(["classify", "--config", CONFIGS / "mass.cfg"], capsys)
    assert code == 0 and out == "constant\n"


def test_classify_many(capsys, tmp_path):
    cfgs = [CONFIGS / n for n in ("mass.cfg", "linear_spring.cfg", "nonlinear_spring.cfg",
                                  "paper_mre15.cfg", "pm_pm.cfg")]
    argv = ["classify", "--out", tmp_path / "c.csv"]
    for c in cfgs:
        argv += ["--config", c]
    code, out, _ = run(argv, capsys)
    assert code == 0
    assert [line.split(": ")[1] for line in out.splitlines()] == [
        "constant", "decreasing", "increasing", "increasing", "increasing"]
    assert (tmp_path / "c.csv").read_text().startswith("bias,class\n")


def test_working_range_row(capsys):
    code, out, _ = run(["working-range", "--config", CONFIGS / "paper_mre15.cfg", "--von", "5kV"],
                       capsys)
    assert code == 0
    header, _, row = out.splitlines()
    assert "Range (mm)" in header
    assert row.split()[0] == "PM-MRE15" and 0.1 < float(row.split()[4]) < 3.0


def test_model_error_message_verbatim(capsys, tmp_path):
    text = (CONFIGS / "mass.cfg").read_text().replace("capacitance = 2.2 nF\n", "")
    cfg = tmp_path / "broken.cfg"
    cfg.write_text(text)
    code, out, err = run(["classify", "--config", cfg], capsys)
    assert code == 1 and out == ""
    assert err == "missing key 'capacitance' in section [electrical]\n"


def test_snap_through_is_model_error(capsys, tmp_path):
    cfg = tmp_path / "close.cfg"
    cfg.write_text((CONFIGS / "paper_mre40.cfg").read_text().replace("13.8 mm", "13.5 mm"))
    code, _, err = run(["working-range", "--config", cfg], capsys)
    assert code == 1 and "snap-through after" in err


def test_missing_file(capsys):
    code, _, err = run(["classify", "--config", "does-not-exist.cfg"], capsys)
    assert code == 1 and "does-not-exist.cfg" in err


def test_fit_with_repeatability(capsys, tmp_path):
    out = tmp_path / "fit.txt"
    code, _, _ = run(["fit", "--data", FIXTURES / "mre30_series1.csv",
                      "--compare", FIXTURES / "mre30_series2.csv", "--out", out], capsys)
    text = out.read_text()
    assert code == 0 and "consistent = yes" in text and "model = exponential" in text


def test_fit_power_model(capsys):
    code, out, _ = run(["fit", "--data", FIXTURES / "mre15_series1.csv", "--model", "best"], capsys)
    assert code == 0 and "model = exponential" in out


def test_transient_from_schedule_file(capsys, tmp_path):
    sched = tmp_path / "s.csv"
    sched.write_text("t_s,level_V\n0,0\n0.2,2000\n")
    out = tmp_path / "t.csv"
    code, _, _ = run(["transient", "--config", CONFIGS / "paper_mre30.cfg", "--schedule", sched,
                      "--duration", "1 s", "--sample", "0.05", "--out", out], capsys)
    lines = out.read_text().splitlines()
    assert code == 0 and lines[0] == "t_s,u_V,V_V,d_mm,v_mm_s,F_ve_N"
    assert len(lines) == 21 and lines[-1].split(",")[1] == "2000"


def test_jobs_do_not_change_output(capsys, tmp_path):
    argv = ["working-range"]
    for n in ("paper_mre15.cfg", "paper_mre30.cfg", "mass.cfg"):
        argv += ["--config", CONFIGS / n]
    code1, one, _ = run(argv + ["--jobs", "1"], capsys)
    code2, two, _ = run(argv + ["--jobs", "3"], capsys)
    assert code1 == code2 == 0 and one == two


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "deabias.cli", "classify", "--config",
                          str(CONFIGS / "pm_pm.cfg")], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == "increasing\n"
