import csv
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from nvpol.cli import EXIT_CONFIG, EXIT_EMPTY, EXIT_IO, EXIT_OK, EXIT_VALIDATION, main, read_header_config
from nvpol.config import RunConfig
from nvpol.dynamics import c_k, read_surface_csv
from nvpol.environment import audit_rows, generate_environment, load_environment, load_table1
from nvpol.errors import ConfigError

RECIPES = Path(__file__).resolve().parents[1] / "recipes"
SMALL = ["--grid-points", "64"]


def read_rows(path):
    with open(path) as fh:
        return list(csv.DictReader(ln for ln in fh if not ln.startswith("#")))


def test_surface_single_spin(tmp_path):
    out = tmp_path / "s.csv"
    args = ["surface", "--n-spins", "1", "--b-gauss", "25", "--out", str(out), *SMALL]
    assert main(args) == EXIT_OK
    s = read_surface_csv(out)
    env = load_table1(1).with_field(25)
    c = c_k(env.spins[0].coupling, env.omega, s.tau_grid[:, None], s.t_grid[None, :])
    assert s.abs.max() == pytest.approx(0.5 * np.abs(c).max(), rel=1e-11)
    assert np.all(s.values[0] == 0)


def test_surface_header_round_trip(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["surface", "--config", str(RECIPES / "fig1b.cfg"), "--out", str(out), *SMALL]) == EXIT_OK
    first = out.read_text().splitlines()[0]
    assert first.startswith("# nvpol ")
    expected = RunConfig.load(RECIPES / "fig1b.cfg").with_overrides(["tau_grid.points=64", "t_grid.points=64"])
    assert read_header_config(out) == expected


def test_csv_fields_carry_twelve_digits(tmp_path):
    out = tmp_path / "s.csv"
    main(["surface", "--n-spins", "3", "--out", str(out), "--grid-points", "9"])
    row = read_rows(out)[40]
    assert all(len(v.lstrip("-").replace(".", "").split("e")[0].lstrip("0")) <= 12 for v in row.values())
    s = read_surface_csv(out)
    assert float(row["abs"]) == pytest.approx(abs(s.values.reshape(-1)[40]), rel=1e-11)


def test_bound_record(tmp_path, capsys):
    assert main(["bound", "--n-spins", "5", "--b-gauss", "100"]) == EXIT_OK
    rec = json.loads(capsys.readouterr().out)
    assert rec["method"] == "time-dependent"
    assert abs(rec["value"] - 0.73) <= 0.05
    assert rec["n_spins"] == 5 and rec["clamped_points"] == 0
    assert rec["omega_rad_per_us"] == pytest.approx(0.1071)


def test_bound_per_tau_curve(tmp_path):
    out, curve = tmp_path / "b.json", tmp_path / "c.csv"
    args = ["bound", "--config", str(RECIPES / "fig2a.cfg"), "--out", str(out), "--curve-out", str(curve), *SMALL]
    assert main(args) == EXIT_OK
    rows = read_rows(curve)
    assert len(rows) == 64 and float(rows[0]["bound"]) == 0.0
    peak = max(float(r["bound"]) for r in rows)
    assert peak == pytest.approx(json.loads(out.read_text())["value"], rel=1e-11)


def test_bound_zero_field_time_dependent_is_empty(capsys):
    assert main(["bound", "--n-spins", "5", "--b-gauss", "0", *SMALL]) == EXIT_EMPTY
    assert "omega" in capsys.readouterr().err


def test_sweep_single_zero(tmp_path):
    out = tmp_path / "p.csv"
    assert main(["sweep-p", "--n-spins", "5", "--p-values", "0", "--out", str(out), *SMALL]) == EXIT_OK
    (row,) = read_rows(out)
    assert float(row["bound"]) == 0.0
    assert list(row) == ["p_actual", "bound", "method", "n", "b_gauss"]


def test_sweep_monotone_and_endpoint(tmp_path):
    out, rec = tmp_path / "p.csv", tmp_path / "b.json"
    assert main(["sweep-p", "--config", str(RECIPES / "fig6a.cfg"), "--out", str(out), *SMALL]) == EXIT_OK
    rows = read_rows(out)
    p = [float(r["p_actual"]) for r in rows]
    b = [float(r["bound"]) for r in rows]
    assert p == pytest.approx([0.1 * k for k in range(11)])
    assert all(y >= x for x, y in zip(b, b[1:]))
    assert main(["bound", "--config", str(RECIPES / "fig3b.cfg"), "--out", str(rec), *SMALL]) == EXIT_OK
    assert b[-1] == pytest.approx(json.loads(rec.read_text())["value"], rel=1e-11)


def test_validate_passes_and_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    args = ["validate", "--max-n", "4", "--cases", "20", "--seed", "42"]
    assert main([*args, "--out", str(a)]) == EXIT_OK
    assert main([*args, "--out", str(b)]) == EXIT_OK
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert text.rstrip().endswith("OK") and "FAIL" not in text


def test_validate_negative_control(capsys):
    assert main(["validate", "--max-n", "3", "--cases", "10", "--corrupt"]) == EXIT_VALIDATION
    assert "FAIL oracle_vs_closed_form" in capsys.readouterr().out


def test_gen_env_round_trip(tmp_path):
    out = tmp_path / "env.json"
    assert main(["gen-env", "--seed", "3", "--n", "7", "--r-max-nm", "1.5", "--out", str(out)]) == EXIT_OK
    env = load_environment(out)
    assert env == generate_environment(3, 7, 0.3, 1.5)
    assert all(r["ok"] for r in audit_rows(env))


def test_file_environment_source(tmp_path):
    env_path, out = tmp_path / "env.json", tmp_path / "b.json"
    main(["gen-env", "--seed", "1", "--n", "4", "--out", str(env_path)])
    source = json.dumps({"source": "file", "path": str(env_path)})
    assert main(["bound", "--set", f"environment={source}", "--out", str(out), *SMALL]) == EXIT_OK
    assert json.loads(out.read_text())["n_spins"] == 4


@pytest.mark.parametrize(
    "args",
    [
        ["bound", "--set", "b_gauss=-3"],
        ["bound", "--set", "environment.source=nowhere"],
        ["bound", "--set", "bogus=1"],
        ["bound", "--set", "tau_grid.points=0"],
        ["bound", "--sin-floor", "1.5"],
        ["surface"],
    ],
)
def test_config_errors_exit_2(args):
    assert main(args) == EXIT_CONFIG


def test_malformed_config_file(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("{not json")
    assert main(["bound", "--config", str(bad)]) == EXIT_CONFIG


def test_missing_config_file_exit_3(tmp_path):
    assert main(["bound", "--config", str(tmp_path / "nope.cfg")]) == EXIT_IO


def test_unwritable_output_exit_3(tmp_path):
    out = tmp_path / "missing" / "s.csv"
    assert main(["surface", "--n-spins", "1", "--out", str(out), *SMALL]) == EXIT_IO


def test_header_without_config(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        read_header_config(p)


def test_every_recipe_parses():
    panels = {1: "abcd", 2: "ab", 3: "abcd", 4: "abcd", 5: "ab", 6: "ab"}
    expected = sorted(f"fig{k}{s}" for k, letters in panels.items() for s in letters)
    assert sorted(p.stem for p in RECIPES.glob("*.cfg")) == expected
    for p in RECIPES.glob("*.cfg"):
        RunConfig.load(p).build_environment()


def test_module_entry_point(tmp_path):
    out = tmp_path / "s.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "nvpol.cli", "surface", "--n-spins", "2", "--grid-points", "5", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert len(read_rows(out)) == 25
