import math
import subprocess
import sys

import numpy as np
import pytest

from isoprofile.cli import main
from isoprofile.formats import parse_profile_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def kv(text):
    return dict(line.split("=", 1) for line in text.splitlines() if "=" in line and not line.startswith("#"))


@pytest.fixture
def sphere_csv(tmp_path, capsys):
    path = tmp_path / "sphere.csv"
    assert run(capsys, "model-profile", "--K", "1", "--N", "2", "--grid", "uniform:1:2:201", "-o", str(path))[0] == 0
    return path


def test_model_profile_euclid(capsys):
    code, out, _ = run(capsys, "model-profile", "--K", "0", "--N", "2", "--grid", "uniform:1:2:3")
    assert code == 0
    p = parse_profile_csv(out, "<stdout>")
    np.testing.assert_allclose(p.values, 2 * np.sqrt(np.pi * p.volumes), rtol=1e-14)
    assert out.splitlines()[0] == "v,I"


def test_model_profile_cone(capsys):
    code, out, _ = run(capsys, "model-profile", "--N", "2", "--avr", "0.5", "--grid", "geometric:1e-6:1:50")
    assert code == 0
    p = parse_profile_csv(out, "<stdout>")
    np.testing.assert_allclose(p.values, np.sqrt(2 * np.pi) * np.sqrt(p.volumes), rtol=1e-14)


def test_missing_N_writes_nothing(tmp_path, capsys):
    path = tmp_path / "x.csv"
    code, _, err = run(capsys, "model-profile", "--K", "0", "--grid", "uniform:1:2:3", "-o", str(path))
    assert code == 2 and "--N" in err
    assert not path.exists()


@pytest.mark.parametrize("argv", [
    ["model-profile", "--K", "0", "--N", "2", "--grid", "uniform:1:2"],
    ["model-profile", "--K", "0", "--avr", "1", "--N", "2", "--grid", "uniform:1:2:3"],
    ["model-profile", "--K", "1", "--N", "2", "--grid", "uniform:1:20:3"],
    ["model-profile", "--K", "0", "--N", "2", "--grid", "uniform:1:2:3", "--bogus", "1"],
    ["model-profile", "--K", "0", "--N", "2", "--gri", "uniform:1:2:3"],
    ["tube", "--per0", "1", "--c", "1", "--K", "0", "--N", "2", "--t=-1:1:3"],
    ["tube", "--c", "1", "--K", "0", "--N", "2", "--t", "1"],
    ["constants", "diameter", "--N", "2", "--theta", "1", "--v1", "1", "--vE", "2", "--IvE", "3"],
    ["constants", "nbar", "--V", "1"],
    ["needle", "--family", "sin_k", "--k", "1", "--N", "2", "--a", "0", "--b", "3.14159", "--v", "10"],
    ["needle", "--family", "s_lambda", "--k", "1", "--lambda", "0", "--N", "2", "--a", "0", "--b", "3.14159", "--v", "0.3"],
    ["frobnicate"],
    [],
])
def test_usage_errors_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_space_form_round_trip(tmp_path, capsys):
    for K in (-1.0, 0.0, 1.0):
        for N in (2.0, 3.0, 5.0):
            path = tmp_path / f"p_{K}_{N}.csv"
            grid = "uniform:0.5:1.5:101"
            assert run(capsys, "model-profile", "--K", str(K), "--N", str(N), "--grid", grid, "-o", str(path))[0] == 0
            code, out, _ = run(capsys, "check", "bp", str(path), "--K", str(K), "--N", str(N))
            assert code == 0, (K, N, out[-300:])
            assert run(capsys, "check", "bayle", str(path), "--K", str(K), "--N", str(N))[0] == 0


def test_check_reports(sphere_csv, capsys, tmp_path):
    code, out, _ = run(capsys, "check", "bp", str(sphere_csv), "--K", "1", "--N", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "v\tresidual\tpass"
    assert lines[-1].startswith("# summary: method=central-difference")
    assert "failed=0" in lines[-1]

    const = tmp_path / "const.csv"
    v = np.linspace(1, 2, 101)
    const.write_text("v,I\n" + "".join(f"{float(x)!r},1\n" for x in v))
    code, out, _ = run(capsys, "check", "bp", str(const), "--K", "1", "--N", "2")
    assert code == 1
    rows = [line.split("\t") for line in out.splitlines()[1:] if not line.startswith("#")]
    assert all(float(r[1]) == pytest.approx(-1.0, abs=1e-12) and r[2] == "0" for r in rows)


def test_report_written_even_on_failure(tmp_path, capsys):
    const = tmp_path / "const.csv"
    const.write_text("v,I\n" + "".join(f"{1 + i / 100!r},1\n" for i in range(101)))
    report = tmp_path / "r.tsv"
    code, _, _ = run(capsys, "check", "bp", str(const), "--K", "1", "--N", "2", "-o", str(report))
    assert code == 1 and report.read_text().startswith("v\tresidual\tpass")


def test_plot_data(sphere_csv, capsys):
    code, out, _ = run(capsys, "check", "bp", str(sphere_csv), "--K", "1", "--N", "2", "--format", "plot-data")
    assert code == 0
    assert out.startswith("# series: residual\n")
    body = [line for line in out.splitlines() if line and not line.startswith("#")]
    assert all(len(line.split("\t")) == 2 for line in body)


@pytest.mark.parametrize("content, where", [
    ("v,I\n1,2\n2,x\n3,4\n", ":3:2"),
    ("v,I\n1,2\n3,3\n2,4\n", ":4:1"),
    ("x,y\n1,2\n2,3\n3,4\n", ":1"),
    ("v,I\n1,2\n2,-3\n3,4\n", ":3:2"),
    ("v,I\n1,2\n2\n3,4\n", ":3"),
])
def test_malformed_csv(tmp_path, capsys, content, where):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    code, _, err = run(capsys, "check", "bp", str(path), "--K", "0", "--N", "2")
    assert code == 2
    assert f"bad.csv{where}" in err


def test_missing_file(capsys):
    assert run(capsys, "check", "bp", "/nonexistent.csv", "--K", "0", "--N", "2")[0] == 2


def test_tube_annulus(capsys):
    code, out, _ = run(capsys, "tube", "--per0", "6.2831853", "--c", "1", "--K", "0", "--N", "2", "--t", "0:1:11")
    assert code == 0
    rows = [line.split("\t") for line in out.splitlines()]
    assert rows[0][:3] == ["t", "perimeter_bound", "volume_bound"]
    last = [float(x) for x in rows[-1]]
    assert last[0] == 1.0
    assert last[1] == pytest.approx(4 * math.pi, rel=1e-7)
    assert last[2] == pytest.approx(3 * math.pi, rel=1e-7)
    code, out, _ = run(capsys, "tube", "--per0", "6.2831853", "--c", "1", "--K", "0", "--N", "2", "--t", "1",
                       "--side", "interior")
    assert float(out.splitlines()[-1].split("\t")[2]) == pytest.approx(math.pi, rel=1e-7)


def test_tube_oracle(capsys):
    code, out, _ = run(capsys, "tube", "--oracle", "--K", "1", "--N", "2", "--r", "0.7853982", "--t", "0.7853982")
    assert code == 0
    assert float(out.splitlines()[-1].split("\t")[-1]) <= 1e-10


def test_needle_single_volume(capsys):
    code, out, _ = run(capsys, "needle", "--family", "sin_k", "--k", "1", "--N", "2", "--a", "0", "--b", "3.14159",
                       "--v", "0.3")
    assert code == 0
    rep = kv(out)
    mass = 1 - math.cos(3.14159)
    assert float(rep["value"]) == pytest.approx(math.sqrt(2 * 0.3 - 0.09), abs=mass / 2000)
    assert rep["budget_exceeded"] == "false"


def test_needle_config_file(tmp_path, capsys):
    cfg = tmp_path / "d.cfg"
    cfg.write_text("family=s_lambda\nk=0\nlambda=0\nN=2\na=0\nb=1\n")
    code, out, _ = run(capsys, "needle", "--config", str(cfg), "--v", "0.4", "--n", "200")
    assert code == 0 and float(kv(out)["value"]) == 1.0


def test_needle_profile_feeds_check(tmp_path, capsys):
    prof = tmp_path / "needle.csv"
    code, _, _ = run(capsys, "needle", "--family", "sin_k", "--k", "1", "--N", "2", "--K", "1", "--a", "0",
                     "--b", repr(math.pi), "--profile", "--grid", "uniform:0.1:1.9:19", "-o", str(prof))
    assert code == 0
    assert run(capsys, "check", "bp", str(prof), "--K", "1", "--N", "2")[0] == 0


def test_combine(tmp_path, capsys):
    grid = "uniform:0.5:2:16"
    paths = []
    for name, K in (("a", "0"), ("b", "0")):
        p = tmp_path / f"{name}.csv"
        run(capsys, "model-profile", "--K", K, "--N", "2", "--grid", grid, "-o", str(p))
        paths.append(str(p))
    code, out, _ = run(capsys, "combine", *paths)
    assert code == 0
    rows = [line.split("\t") for line in out.splitlines()[1:]]
    assert len(rows) == 16 and all("+" not in r[2] for r in rows)

    lin = tmp_path / "lin.csv"
    lin.write_text("v,I\n" + "".join(f"{x},{2 * x}\n" for x in (1, 2, 3, 4)))
    code, out, _ = run(capsys, "combine", str(lin), str(lin))
    rows = [line.split("\t") for line in out.splitlines()[1:]]
    assert [float(r[1]) for r in rows] == [2.0, 4.0, 6.0, 8.0]
    assert all("+" not in r[2] for r in rows)


def test_combine_dominance(tmp_path, capsys):
    paths = []
    for name, scale in (("a", 3.0), ("b", 1.0), ("c", 2.0)):
        p = tmp_path / f"{name}.csv"
        p.write_text("v,I\n" + "".join(f"{x},{scale * math.sqrt(x)!r}\n" for x in (1, 2, 3, 4)))
        paths.append(str(p))
    code, out, _ = run(capsys, "combine", *paths)
    rows = [line.split("\t") for line in out.splitlines()[1:]]
    assert all(r[2].startswith("1:") and "+" not in r[2] for r in rows)


def test_combine_incompatible_grids(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("v,I\n1,1\n2,1.5\n3,2\n")
    b.write_text("v,I\n1,1\n2.5,1.5\n3,2\n")
    assert run(capsys, "combine", str(a), str(b))[0] == 2


def test_constants(capsys):
    code, out, _ = run(capsys, "constants", "concavity", "--K", "-1", "--N", "2")
    assert code == 0 and float(kv(out)["C"]) == 1.0
    code, out, _ = run(capsys, "constants", "nbar", "--V", "1", "--eps", "0.5")
    assert kv(out)["nbar"] == "3"
    code, out, _ = run(capsys, "constants", "diameter", "--N", "2", "--theta", "1", "--v1", "1", "--vE", "1e-4",
                       "--IvE", "0.035449")
    rep = kv(out)
    assert rep["branch"] == "isoperimetric"
    # direct substitution: r0 = 1e-4 / (4 * 0.035449 * sqrt(pi)), bound = 1024e-4 / r0
    r0 = 1e-4 / (4 * 0.035449 * math.sqrt(math.pi))
    assert float(rep["diameter_bound"]) == pytest.approx(1024e-4 / r0, rel=1e-12)
    code, out, _ = run(capsys, "constants", "avr", "--N", "2", "--A", "1", "--vE", "1")
    assert float(kv(out)["diameter_bound"]) == pytest.approx(1024 / math.sqrt(math.pi), rel=1e-12)


def test_key_value_checks(sphere_csv, capsys):
    code, out, _ = run(capsys, "check", "subadd", str(sphere_csv), "--eps", "1")
    assert code == 0 and kv(out)["strictly_subadditive"] == "true"


def test_byte_identical_outputs(tmp_path, capsys, sphere_csv):
    commands = [
        ["model-profile", "--K", "-1", "--N", "3", "--grid", "geometric:1e-4:10:40"],
        ["check", "bp", str(sphere_csv), "--K", "1", "--N", "2"],
        ["tube", "--per0", "1", "--c", "0.5", "--K", "-1", "--N", "3", "--t", "0:2:9"],
        ["needle", "--family", "sin_k", "--k", "1", "--N", "2", "--a", "0", "--b", "3", "--v", "0.7", "--n", "500"],
        ["combine", str(sphere_csv), str(sphere_csv)],
    ]
    for argv in commands:
        first = tmp_path / "first.out"
        second = tmp_path / "second.out"
        main(argv + ["-o", str(first)])
        main(argv + ["-o", str(second)])
        capsys.readouterr()
        assert first.read_bytes() == second.read_bytes(), argv


def test_help_lists_subcommands(capsys):
    assert main(["--help"]) == 0
    out = capsys.readouterr().out
    for name in ("model-profile", "check", "tube", "needle", "combine", "constants"):
        assert name in out


def test_console_script():
    res = subprocess.run(
        [sys.executable, "-m", "isoprofile.cli", "constants", "nbar", "--V", "10", "--eps", "1"],
        capture_output=True, text=True, check=False,
    )
    assert res.returncode == 0 and "nbar=11" in res.stdout
