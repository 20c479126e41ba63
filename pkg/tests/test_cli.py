import json
import re
import subprocess
import sys

import numpy as np
import pytest

from efbench import __version__, cli
from efbench.excitation import ExcitationSpec, p0
from efbench.fieldio import manifest_path, read_field_csv, read_table
from efbench.material import builtin_mat1

ERROR_LINE = re.compile(r"^efbench: error: (usage|validation|numerical|io): \S.*$")


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def _error(err):
    lines = err.strip().splitlines()
    assert len(lines) == 1 and ERROR_LINE.match(lines[0]), err
    return lines[0]


def test_material_table_dc_row(capsys):
    code, out, _ = run(capsys, "material", "--name", "mat1", "--table", 0, 1000, 3)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "omega,C_re,C_im,v_re,v_im"
    dc = [float(v) for v in lines[1].split(",")]
    assert dc[0] == 0.0 and abs(dc[1] - 1.080601e-5) < 1e-11 and dc[2] == 0.0
    assert len(lines) == 4


def test_unknown_material_exits_2(capsys):
    code, _, err = run(capsys, "material", "--name", "mat9")
    assert code == 2
    assert "unknown material" in _error(err)


def test_material_file_and_dump(capsys, tmp_path):
    code, text, _ = run(capsys, "material", "--dump")
    assert code == 0
    path = tmp_path / "custom.matl"
    path.write_text(text.replace("name: \"mat1\"", "name: \"custom\""))
    code, out, _ = run(capsys, "material", "--file", path, "--table", 0, 0, 1)
    assert code == 0 and float(out.splitlines()[1].split(",")[1]) == pytest.approx(1.080601e-5,
                                                                                  rel=1e-6)
    bad = tmp_path / "bad.matl"
    bad.write_text("name: x\n")
    code, _, err = run(capsys, "material", "--file", bad)
    assert code == 2 and "missing field" in _error(err)
    code, _, err = run(capsys, "material", "--file", tmp_path / "missing.matl")
    assert code == 2
    _error(err)


def test_dispersion_table(capsys):
    code, out, _ = run(capsys, "dispersion", "--omega", 100, 1e5, 4, "--log")
    assert code == 0
    rows = [list(map(float, r.split(","))) for r in out.splitlines()[1:]]
    assert len(rows) == 4 and all(r[2] < 0 for r in rows)
    code, _, err = run(capsys, "dispersion", "--omega", 0, 1e5, 4, "--log")
    assert code == 2
    _error(err)


def test_excitation(capsys):
    code, out, _ = run(capsys, "excitation", "--sums")
    assert out.splitlines() == ["order 1: 0", "order 3: 0", "order 5: 0", "order 7: -2835"]
    code, out, _ = run(capsys, "excitation", "--fc", 700)
    rows = out.splitlines()
    assert code == 0 and rows[0] == "t,p0" and len(rows) == 65


def test_solve_boundary_receiver_equals_excitation(capsys, tmp_path):
    out = tmp_path / "b.csv"
    code, _, _ = run(capsys, "solve", "--dim", 1, "--receivers", 0, "--duration", 0.003,
                     "--out", out)
    assert code == 0
    field = read_field_csv(out)
    want = p0(ExcitationSpec(700.0), field.times)
    assert np.max(np.abs(field.matrix()[:, 0] - want)) < 1e-9


def test_solve_3d_lossless_half_amplitude(capsys, tmp_path):
    out = tmp_path / "s.csv"
    code, _, _ = run(capsys, "solve", "--dim", 3, "--r0", 0.1, "--receivers", 0.2,
                     "--lossless", "--out", out)
    assert code == 0
    field = read_field_csv(out)
    c = builtin_mat1().c_inf
    want = 0.5 * p0(ExcitationSpec(700.0), field.times - 0.1 / c)
    assert np.max(np.abs(field.matrix()[:, 0] - want)) < 1e-3


def test_receiver_inside_hole(capsys):
    code, _, err = run(capsys, "solve", "--dim", 2, "--r0", 0.1, "--receivers", 0.05)
    assert code == 2
    assert "receiver inside hole" in _error(err)


def test_missing_r0(capsys):
    code, _, err = run(capsys, "solve", "--dim", 3, "--receivers", 0.2)
    assert code == 2 and "--r0" in _error(err)


def test_tdfd_cfl_violation_names_bound(capsys):
    c = builtin_mat1().c_inf
    dx = c / (40 * 700)
    code, _, err = run(capsys, "tdfd", "--receivers", 0.1, "--dt", 0.9 * dx / c)
    assert code == 2
    line = _error(err)
    assert "CFL bound" in line and "0.85" in line


def test_usage_errors(capsys):
    for argv in ([], ["bogus"], ["solve"], ["solve", "--receivers", "x"],
                 ["tdfd", "--receivers", "0.1", "--cfl", "0.5", "--dt", "1e-6"]):
        code, _, err = run(capsys, *argv)
        assert code == 2, argv
        assert _error(err).startswith("efbench: error: usage: ")


def test_plot_script_needs_out(capsys):
    code, _, err = run(capsys, "solve", "--receivers", 0.1, "--plot-script", "p.py")
    assert code == 2 and "--out" in _error(err)


def test_solve_writes_manifest_and_plot_script(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("EFBENCH_OUTPUT_DIR", str(tmp_path))
    code, _, err = run(capsys, "solve", "--receivers", 0.1, 0.25, "--out", "ref.csv",
                       "--plot-script", "plot_ref.py")
    assert code == 0 and "wrote" in err
    csv_path, script = tmp_path / "ref.csv", tmp_path / "plot_ref.py"
    assert csv_path.exists() and script.exists()
    compile(script.read_text(), str(script), "exec")
    assert str(csv_path) in script.read_text()
    manifests = list(tmp_path.glob("*.manifest.json"))
    assert manifests == [manifest_path(csv_path)]
    doc = json.loads(manifests[0].read_text())
    assert doc["command"] == "solve" and doc["version"] == __version__
    assert doc["outputs"] == [str(csv_path), str(script)]
    assert doc["material"]["name"] == "mat1" and len(doc["material"]["sha256"]) == 64
    assert doc["parameters"]["receivers"] == [0.1, 0.25]
    assert doc["diagnostics"]["imag_residue"] < 1e-10
    assert doc["timestamp"]


def test_determinism(capsys, tmp_path):
    outputs = []
    for k in range(2):
        out = tmp_path / f"run{k}.csv"
        assert run(capsys, "solve", "--dim", 2, "--r0", 0.1, "--receivers", 0.2, "--out", out)[0] == 0
        outputs.append(out.read_bytes())
        tout = tmp_path / f"sim{k}.csv"
        assert run(capsys, "tdfd", "--receivers", 0.1, "--duration", 0.004, "--out", tout)[0] == 0
        outputs.append(tout.read_bytes())
    assert outputs[0] == outputs[2] and outputs[1] == outputs[3]


def test_stdout_matches_file(capsys, tmp_path):
    out = tmp_path / "a.csv"
    run(capsys, "solve", "--receivers", 0.1, "--out", out)
    _, text, _ = run(capsys, "solve", "--receivers", 0.1)
    assert text == out.read_text()


def test_cross_check_and_compare_exit_codes(capsys, tmp_path):
    ref, sim = tmp_path / "ref.csv", tmp_path / "sim.csv"
    receivers = [0.1, 0.25, 0.5]
    assert run(capsys, "solve", "--receivers", *receivers, "--out", ref)[0] == 0
    assert run(capsys, "tdfd", "--receivers", *receivers, "--out", sim)[0] == 0
    manifest = json.loads(manifest_path(sim).read_text())
    assert manifest["sim_config"]["cfl"] == pytest.approx(0.5)
    code, out, _ = run(capsys, "compare", ref, sim, "--tol", 0.02, "--report", tmp_path / "r.txt",
                       "--csv", tmp_path / "r.csv")
    assert code == 0 and "PASS" in out
    assert (tmp_path / "r.txt").read_text() == out
    assert read_table(sim).receivers == tuple(receivers)
    assert len((tmp_path / "r.csv").read_text().splitlines()) == 4
    assert manifest_path(tmp_path / "r.txt").exists()
    code, out, _ = run(capsys, "compare", ref, sim, "--tol", 1e-6)
    assert code == 1 and "FAIL" in out
    code, out, _ = run(capsys, "compare", ref, ref, "--tol", 0)
    assert code == 0


def test_compare_errors(capsys, tmp_path):
    a = tmp_path / "a.csv"
    run(capsys, "solve", "--receivers", 0.1, "--out", a)
    b = tmp_path / "b.csv"
    run(capsys, "solve", "--receivers", 0.2, "--out", b)
    code, _, err = run(capsys, "compare", a, b)
    assert code == 2 and "receiver" in _error(err)
    code, _, err = run(capsys, "compare", a, tmp_path / "nope.csv")
    assert code == 2 and _error(err).startswith("efbench: error: io: ")


def test_hidden_specfun_command(capsys):
    code, out, _ = run(capsys, "specfun", "--function", "wronskian", "--modulus", 2, 2, 1,
                       "--arg", 0, 0, 1)
    assert code == 0
    z_re, z_im, f_re, f_im = map(float, out.splitlines()[1].split(","))
    assert (z_re, z_im) == (2.0, 0.0) and f_re == pytest.approx(1 / np.pi, abs=1e-13)
    assert "specfun" not in cli.build_parser().format_help()


def test_console_script():
    proc = subprocess.run([sys.executable, "-m", "efbench.cli", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.strip() == f"efbench {__version__}"
    proc = subprocess.run([sys.executable, "-m", "efbench.cli", "material", "--name", "nope"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert ERROR_LINE.match(proc.stderr.strip())


def test_numerical_failure_exits_3(capsys, tmp_path):
    # specific volume 1 - 1/(1 - i w) vanishes at w = 0
    path = tmp_path / "singular.matl"
    path.write_text("name: singular\ncompressibility:\n  constant: 1\n"
                    "specific_volume:\n  constant: 1\n  real_poles:\n"
                    "    - {residue: -1, pole: 1}\n")
    code, _, err = run(capsys, "dispersion", "--file", path, "--omega", 0, 10, 3)
    assert code == 3
    assert _error(err).startswith("efbench: error: numerical: ")
