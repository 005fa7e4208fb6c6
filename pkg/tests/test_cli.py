import json
import subprocess
import sys

import numpy as np
import pytest

from uwofdm_lab.cli import main, parse_eps_grid
from uwofdm_lab.genmat import load_generators
from uwofdm_lab.harness import read_csv
from uwofdm_lab.sysmodel import SystemConfig


def test_eps_grid_parser():
    assert parse_eps_grid("0:0.1:0.02") == (0.0, 0.02, 0.04, 0.06, 0.08, 0.1)
    assert parse_eps_grid("0.05,0.1") == (0.05, 0.1)
    with pytest.raises(Exception):
        parse_eps_grid("0:1")


def test_validate_echo(capsys):
    assert main(["validate"]) == 0
    assert json.loads(capsys.readouterr().out)["n_fft"] == 64


def test_validate_reports_violations(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    d = SystemConfig().to_dict()
    d["n_data"] = 33
    path.write_text(json.dumps(d))
    assert main(["validate", "--config", str(path)]) == 2
    assert "N sum mismatch" in capsys.readouterr().err


def test_missing_config_file(capsys):
    assert main(["pilot-table", "--config", "/nonexistent.json"]) != 0
    assert "error" in capsys.readouterr().err


def test_pilot_table_csv(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["pilot-table", "--cardinalities", "2,4", "--out", str(out)]) == 0
    meta, header, rows = read_csv(out.read_text())
    assert header == ["cardinality", "energy", "exponents"]
    assert out.read_text().startswith("# uwofdm-lab v")
    assert [r[0] for r in rows] == ["2", "4"]
    assert abs(float(rows[0][1]) - 5.4633) < 5e-4


def test_pilot_table_guard(capsys):
    assert main(["pilot-table", "--cardinalities", "100"]) == 1
    assert "exceeds" in capsys.readouterr().err


def test_approx_error_cli(tmp_path):
    out = tmp_path / "a.csv"
    assert main(["approx-error", "--uw", "zero", "--eps", "0.1", "--out", str(out)]) == 0
    _, header, rows = read_csv(out.read_text())
    assert header == ["subcarrier", "sigma2_k", "sigma2_delta", "ratio_db"]
    assert len(rows) == 52 and all(r[3] == "inf" for r in rows)


def test_approx_error_custom_uw(tmp_path):
    uw = tmp_path / "uw.txt"
    uw.write_text("\n".join("1,0" if i % 2 else "0,1" for i in range(16)) + "\n")
    out = tmp_path / "a.csv"
    assert main(["approx-error", "--uw", f"custom:{uw}", "--out", str(out)]) == 0
    _, _, rows = read_csv(out.read_text())
    assert all(float(r[2]) > 0 for r in rows)


def test_approx_error_bad_uw(tmp_path, capsys):
    with pytest.raises(SystemExit) as exc:
        main(["approx-error", "--uw", "walsh"])
    assert exc.value.code != 0
    uw = tmp_path / "uw.txt"
    uw.write_text("1,0\n")
    assert main(["approx-error", "--uw", f"custom:{uw}"]) == 1


def test_genmat_export_import(tmp_path, capsys):
    arch = tmp_path / "g.bin"
    assert main(["genmat", "export", "--out", str(arch), "--max-iters", "20"]) == 0
    gens = load_generators(arch, SystemConfig())
    assert gens.G_d.shape == (52, 32)
    capsys.readouterr()
    assert main(["genmat", "import", str(arch)]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["zero_word_residual"] < 1e-10
    assert abs(summary["trace_GdHGd"] - 48) < 1e-9


def test_genmat_export_cp(tmp_path, capsys):
    arch = tmp_path / "cp.bin"
    assert main(["genmat", "export", "--init", "cp", "--out", str(arch)]) == 0
    capsys.readouterr()
    assert main(["genmat", "import", str(arch)]) == 0
    assert json.loads(capsys.readouterr().out)["mode"] == "cp-ofdm"


def test_optimize_gd_trace(tmp_path):
    arch, trace = tmp_path / "g.bin", tmp_path / "c.csv"
    assert main(["optimize-gd", "--init", "random", "--seed", "3", "--max-iters", "30",
                 "--out", str(arch), "--trace", str(trace)]) == 0
    meta, header, rows = read_csv(trace.read_text())
    assert meta["seed"] == "3" and header == ["iteration", "cost"]
    costs = [float(r[1]) for r in rows]
    assert all(b <= a for a, b in zip(costs, costs[1:]))


def test_optimize_gd_requires_out():
    with pytest.raises(SystemExit):
        main(["optimize-gd"])


def test_simulate_and_ici(tmp_path):
    arch = tmp_path / "g.bin"
    assert main(["genmat", "export", "--out", str(arch), "--max-iters", "200"]) == 0
    out = tmp_path / "s.csv"
    argv = ["--genmat", str(arch), "--realizations", "5", "--eps-grid", "0:0.1:0.05", "--seed", "9"]
    assert main(["simulate-cpe", *argv, "--out", str(out)]) == 0
    meta, header, rows = read_csv(out.read_text())
    assert meta["seed"] == "9" and header == ["mode", "eps", "bmse", "n_used", "sem"]
    assert [r[0] for r in rows] == ["uw-ofdm"] * 3 + ["cp-ofdm"] * 3
    again = tmp_path / "s2.csv"
    main(["simulate-cpe", *argv, "--out", str(again)])
    assert again.read_text() == out.read_text()
    out = tmp_path / "i.csv"
    assert main(["ici-sweep", *argv, "--out", str(out)]) == 0
    _, header, rows = read_csv(out.read_text())
    assert header == ["mode", "eps", "sigma2_d_ici", "sigma2_p_ici", "n_used"]
    assert float(rows[0][2]) == 0.0


def test_bad_realizations():
    with pytest.raises(SystemExit):
        main(["simulate-cpe", "--realizations", "0"])


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "uwofdm_lab.cli", "pilot-table", "--cardinalities", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "cardinality,energy,exponents" in r.stdout
    r = subprocess.run([sys.executable, "-m", "uwofdm_lab.cli", "simulate-cpe", "--eps-grid", "0:0.9:0.1",
                        "--realizations", "1", "--init", "perm"], capture_output=True, text=True)
    assert r.returncode != 0 and "eps grid" in r.stderr
