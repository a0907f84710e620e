import csv
import io
import math
import subprocess
import sys

import pytest

from chshzones.cli import ConfigError, load_config, run_command

ROW2 = "1.97,1.31,1.22,0.83"


def run(capsys, *argv):
    code = run_command(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_kv(text):
    return dict(tok.split("=") for tok in text.split())


def test_classify_text(capsys):
    code, out, _ = run(capsys, "classify", "--alpha", "0.785398", "--angles", ROW2)
    assert code == 0
    kv = parse_kv(out)
    assert float(kv["chsh"]) == pytest.approx(2.22, abs=0.02)
    assert float(kv["chsh_e"]) == pytest.approx(0.15, abs=0.02)
    assert kv["zone"] == "3"


def test_classify_csv_verbose(capsys):
    code, out, _ = run(capsys, "classify", "--angles", ROW2, "--format", "csv", "--verbose",
                       "--class", "2")
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert float(row["chsh"]) == pytest.approx(2.0672, abs=1e-4)
    assert {"s1", "s4", "t11", "t00"} <= set(row)


def test_usage_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run_command(["frobnicate"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        run_command(["classify", "--angles", ROW2, "--bogus"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err
    code, _, err = run(capsys, "classify", "--angles", ROW2, "--alpha", "2.0")
    assert code == 2 and "usage" in err


def test_io_error_exit_1(capsys, tmp_path):
    bad = tmp_path / "missing" / "out.csv"
    code, _, err = run(capsys, "classify", "--angles", ROW2, "--output", str(bad))
    assert code == 1 and str(bad) in err
    code, _, err = run(capsys, "estimate", "--input", str(tmp_path / "nope.csv"))
    assert code == 1 and "nope.csv" in err
    code, _, err = run(capsys, "scan", "--samples", "10", "--emit", "points",
                       "--emit-dir", str(tmp_path / "gone"))
    assert code == 1 and "gone" in err


def test_bad_run_log_exit_1(capsys, tmp_path):
    path = tmp_path / "runs.csv"
    path.write_text("x,y,a,b\n0,2,1,0\n")
    code, _, err = run(capsys, "estimate", "--input", str(path))
    assert code == 1 and "line 2" in err and "field y out of range" in err


def test_scan_byte_identical(capsys):
    argv = ["scan", "--alpha", "0.785398", "--samples", "100", "--seed", "7", "--format", "csv"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
    assert first.splitlines()[0] == "alpha,samples,seed,zone1,zone2,zone3,zone4"


def test_scan_emits_files_and_figures(capsys, tmp_path):
    code, _, _ = run(capsys, "scan", "--samples", "20000", "--emit",
                     "points,zone3_points,correlators_e_violating,correlators_c_violating",
                     "--emit-every", "2", "--emit-dir", str(tmp_path), "--figures")
    assert code == 0
    assert (tmp_path / "points.csv").read_text().startswith("chsh,chsh_e,zone\n")
    assert len((tmp_path / "points.csv").read_text().splitlines()) == 10_001
    for name in ("fig1_zones.png", "fig2_zone3.png", "fig3_correlators_e.png",
                 "fig3_correlators_c.png"):
        assert (tmp_path / name).read_bytes()[:4] == b"\x89PNG"


def test_output_file(capsys, tmp_path):
    out = tmp_path / "o.txt"
    code, stdout, _ = run(capsys, "classes", "--angles", ROW2, "--output", str(out))
    assert code == 0 and stdout == ""
    assert "all_both_contextual=True" in out.read_text()


def test_permute_reports_swap(capsys):
    code, out, _ = run(capsys, "permute", "--angles", "0.40,3.02,2.72,2.38")
    assert code == 0
    assert "zone 2 -> zone 4 relabeling: (X3 X4)" in out


def test_simulate_then_estimate(capsys, tmp_path):
    code, log, _ = run(capsys, "simulate-runs", "--angles", "2.070,1.466,1.372,0.769",
                       "--runs", "20000", "--seed", "3")
    assert code == 0 and "x,y,a,b" in log
    path = tmp_path / "runs.csv"
    path.write_text(log)
    code, out, _ = run(capsys, "estimate", "--input", str(path), "--format", "csv")
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert float(row["chsh"]) == pytest.approx(2.248, abs=0.1)
    assert float(row["jackknife_se"]) >= 0


def test_optimize_and_boundary(capsys):
    code, out, _ = run(capsys, "optimize", "--goal", "max_chsh", "--starts", "8", "--format", "csv")
    assert code == 0
    (row,) = list(csv.DictReader(io.StringIO(out)))
    assert float(row["value"]) == pytest.approx(2 * math.sqrt(2), abs=1e-4)
    code, out, _ = run(capsys, "boundary", "--alpha", "0", "--starts", "4")
    assert code == 0 and "no feasible point" in out


def test_search_triple(capsys):
    code, out, _ = run(capsys, "search-triple", "--mode", "both", "--samples", "1",
                       "--seed-angles", ROW2, "--starts", "1", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[0]["angles"] == "1.9700 1.3100 1.2200 0.8300"


def test_sweep_alpha(capsys):
    code, out, _ = run(capsys, "sweep-alpha", "--alphas", "0,0.785398", "--samples", "1000",
                       "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 2
    assert rows[0]["zone1"] == "1.000000"


@pytest.mark.parametrize("cmd", ["table1", "table3"])
def test_table_commands(capsys, cmd):
    code, out, _ = run(capsys, cmd, "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows
    for r in rows:
        assert float(r["deviation"]) == pytest.approx(abs(float(r["reproduced"]) - float(r["reference"])),
                                                      abs=1e-3)
        tol = 0.01 if cmd == "table1" else 0.02
        assert float(r["deviation"]) <= tol


def test_table2_small(capsys):
    code, out, _ = run(capsys, "table2", "--samples", "200000", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [r["quantity"] for r in rows] == [f"zone{k}_percent" for k in range(1, 5)]
    assert all(float(r["deviation"]) < 0.5 for r in rows)


def test_load_config(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("# comment\nalpha=0.785398\nseed = 4  # trailing\n")
    cfg = load_config(f, {"samples": 10})
    assert (cfg.alpha, cfg.samples, cfg.seed) == (0.785398, 10, 4)
    assert load_config(f, {"seed": 9}).seed == 9


def test_load_config_errors(tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("alpha=2.0\n")
    with pytest.raises(ConfigError):
        load_config(f)
    f.write_text("colour=blue\n")
    with pytest.raises(ConfigError, match="colour"):
        load_config(f)
    f.write_text("samples=many\n")
    with pytest.raises(ConfigError, match="expected int"):
        load_config(f)


def test_load_config_absent_file(tmp_path):
    cfg = load_config(tmp_path / "none.cfg")
    assert cfg.alpha == pytest.approx(math.pi / 4)
    assert cfg.seed == 0 and cfg.format == "text"


def test_config_file_via_cli(capsys, tmp_path):
    f = tmp_path / "c.cfg"
    f.write_text("format=csv\n")
    code, out, _ = run(capsys, "classify", "--config", str(f), "--angles", ROW2)
    assert code == 0 and out.startswith("chsh,chsh_e,zone\n")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chshzones", "--help"], capture_output=True,
                          text=True)
    assert proc.returncode == 0
    for cmd in ("scan", "sweep-alpha", "optimize", "boundary", "classify", "permute", "classes",
                "search-triple", "simulate-runs", "estimate", "table1", "table2", "table3"):
        assert cmd in proc.stdout
