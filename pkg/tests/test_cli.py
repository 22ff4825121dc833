import json
import os
import subprocess
import sys

import numpy as np
import pytest

from gglopt.cli import main
from gglopt.io import format_matrix, read_edges, read_matrix, sha256_file, write_edges, write_matrix


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture
def data(tmp_path):
    out = tmp_path / "data"
    assert run("generate", "-p", 12, "-N", 400, "--edge-prob", 0.2, "--seed", 7, "--out", out) == 0
    return out


def manifest(d):
    return json.loads((d / "manifest.json").read_text())


def test_generate_files(data):
    names = sorted(os.listdir(data))
    assert names == ["S.csv", "covariance.csv", "edges.tsv", "manifest.json", "precision.csv"]
    m = manifest(data)
    assert m["rng"] == "numpy.random.PCG64"
    assert m["seed"] == 7
    assert m["edge_count"] == len(read_edges(data / "edges.tsv"))
    P = read_matrix(data / "precision.csv")
    np.linalg.cholesky(P)


def test_generate_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("generate", "-p", 8, "-N", 50, "--seed", 3, "--out", d) == 0
    for name in ("S.csv", "covariance.csv", "edges.tsv", "precision.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    before = (a / "manifest.json").read_bytes()
    assert run("generate", "-p", 8, "-N", 50, "--seed", 3, "--out", a) == 0
    assert (a / "manifest.json").read_bytes() == before


def test_generate_latent(tmp_path):
    assert run("generate", "-p", 10, "-N", 100, "--latent-confounders", 2, "--seed", 1, "--out", tmp_path) == 0
    L = read_matrix(tmp_path / "lowrank.csv")
    assert np.sum(np.linalg.eigvalsh(L) > 1e-10) == 2


@pytest.mark.parametrize("argv", [
    ["generate", "-p", 5, "-N", 10, "--edge-prob", 1.5, "--seed", 1],
    ["generate", "-p", 1, "-N", 10, "--seed", 1],
    ["generate", "-p", 5, "-N", 10],
    ["generate", "-p", 5, "-N", 10, "--seed", 1, "--bogus"],
    ["nosuchcommand"],
])
def test_invalid_arguments_exit_2(tmp_path, argv):
    assert run(*argv, *(["--out", tmp_path] if argv[0] == "generate" and "--bogus" not in argv else [])) == 2


def test_solve_sgl(data, tmp_path):
    out = tmp_path / "fit"
    assert run("solve", "--family", "sgl", "--input", data / "S.csv", "-N", 400, "--lambda1", 0.05,
               "--out", out) == 0
    m = manifest(out)
    assert m["command"] == "solve"
    assert m["diagnostics"]["converged"] is True
    assert m["inputs"] == {str(data / "S.csv"): sha256_file(data / "S.csv")}
    for name in m["outputs"]:
        assert (out / name).exists()
    assert sorted(m["outputs"]) == ["edges_0.tsv", "theta_0.csv"]
    T = read_matrix(out / "theta_0.csv")
    edges = read_edges(out / "edges_0.tsv")
    assert {(i, j) for i, j, _ in edges} == {(i, j) for i in range(12) for j in range(i + 1, 12) if abs(T[i, j]) > 1e-8}


def test_solve_block_and_admm_agree(data, tmp_path):
    for solver in ("block", "admm"):
        assert run("solve", "--family", "sgl", "--input", data / "S.csv", "-N", 400, "--lambda1", 0.05,
                   "--solver", solver, "--eps-abs", 1e-11, "--eps-rel", 1e-10, "--max-iter", 50000,
                   "--out", tmp_path / solver) == 0
        assert manifest(tmp_path / solver)["solver"] == solver
    np.testing.assert_allclose(read_matrix(tmp_path / "block" / "theta_0.csv"),
                               read_matrix(tmp_path / "admm" / "theta_0.csv"), atol=1e-6)


def test_solve_identity(tmp_path):
    write_matrix(tmp_path / "I.csv", np.eye(4))
    assert run("solve", "--family", "sgl", "--input", tmp_path / "I.csv", "-N", 10, "--lambda1", 0.5,
               "--out", tmp_path) == 0
    np.testing.assert_allclose(read_matrix(tmp_path / "theta_0.csv"), np.eye(4), atol=1e-7)


def test_solve_ggl_two_inputs(tmp_path):
    for k in range(2):
        assert run("generate", "-p", 6, "-N", 100, "--seed", k, "--out", tmp_path / f"g{k}") == 0
    inputs = f"{tmp_path / 'g0' / 'S.csv'},{tmp_path / 'g1' / 'S.csv'}"
    assert run("solve", "--family", "ggl", "--input", inputs, "-N", "100,100", "--lambda1", 0.05,
               "--lambda2", 0.01, "--out", tmp_path / "fit") == 0
    assert (tmp_path / "fit" / "theta_0.csv").exists()
    assert (tmp_path / "fit" / "theta_1.csv").exists()


def test_solve_latent(tmp_path):
    assert run("generate", "-p", 8, "-N", 500, "--latent-confounders", 1, "--seed", 2, "--out", tmp_path) == 0
    assert run("solve", "--family", "sgl", "--latent", "--mu1", 0.1, "--input", tmp_path / "S.csv", "-N", 500,
               "--lambda1", 0.05, "--out", tmp_path / "fit") == 0
    L = read_matrix(tmp_path / "fit" / "lowrank_0.csv")
    assert np.linalg.eigvalsh(L)[0] >= -1e-10


@pytest.mark.parametrize("extra", [
    ["--lambda2", "0.1"],
    ["--mu1", "0.1"],
    ["--latent"],
    ["--solver", "block", "--latent", "--mu1", "0.1"],
    ["-N", "400,400"],
])
def test_solve_incompatible_flags(data, tmp_path, extra):
    argv = ["solve", "--family", "sgl", "--input", data / "S.csv", "-N", 400, "--lambda1", 0.05, "--out", tmp_path]
    assert run(*argv, *extra) == 2


def test_solve_bad_input_files(tmp_path):
    write_matrix(tmp_path / "asym.csv", np.array([[1.0, 0.2], [0.3, 1.0]]))
    assert run("solve", "--family", "sgl", "--input", tmp_path / "asym.csv", "-N", 10, "--lambda1", 0.1,
               "--out", tmp_path) == 2
    assert run("solve", "--family", "sgl", "--input", tmp_path / "missing.csv", "-N", 10, "--lambda1", 0.1,
               "--out", tmp_path) == 2
    (tmp_path / "ragged.csv").write_text("1,0\n0\n")
    assert run("solve", "--family", "sgl", "--input", tmp_path / "ragged.csv", "-N", 10, "--lambda1", 0.1,
               "--out", tmp_path) == 2


def test_solve_not_converged_exit_3(data, tmp_path):
    assert run("solve", "--family", "sgl", "--input", data / "S.csv", "-N", 400, "--lambda1", 0.01,
               "--solver", "admm", "--max-iter", 1, "--out", tmp_path) == 3
    assert manifest(tmp_path)["diagnostics"]["converged"] is False
    assert (tmp_path / "theta_0.csv").exists()


def test_select_report(data, tmp_path):
    assert run("select", "--family", "sgl", "--input", data / "S.csv", "-N", 400, "--gamma", 0.5,
               "--grid-size", 8, "--out", tmp_path) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert len(report["entries"]) == 8
    assert sum(e["best"] for e in report["entries"]) == 1
    m = manifest(tmp_path)
    assert m["gamma"] == 0.5
    assert m["chosen"]["index"] == report["best"]
    assert 0 < report["best"] < 7


def test_select_latent_cross_product(tmp_path):
    for k in range(2):
        assert run("generate", "-p", 6, "-N", 300, "--latent-confounders", 1, "--seed", k,
                   "--out", tmp_path / f"g{k}") == 0
    inputs = f"{tmp_path / 'g0' / 'S.csv'},{tmp_path / 'g1' / 'S.csv'}"
    assert run("select", "--family", "ggl", "--latent", "--mu1-grid", "0.01,0.1", "--input", inputs,
               "-N", "300,300", "--grid-size", 3, "--out", tmp_path / "sel") == 0
    report = json.loads((tmp_path / "sel" / "report.json").read_text())
    assert len(report["entries"]) == 3 * 3 * 2
    assert (tmp_path / "sel" / "lowrank_1.csv").exists()


def test_select_nothing_converges_exit_3(data, tmp_path):
    assert run("select", "--family", "sgl", "--input", data / "S.csv", "-N", 400,
               "--lambda1-grid", "0.02,0.01", "--max-iter", 1, "--out", tmp_path) == 3
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["best"] is None


def test_benchmark_contract(tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert run("benchmark", "--p", "30,40", "--lambda1", "0,0.2", "-N", 300, "--block-size", 5,
               "--seed", 1, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("p,lambda1,tolerance,components")
    rows = [dict(zip(lines[0].split(","), line.split(","))) for line in lines[1:]]
    assert len(rows) == 2 * 2 * 2
    assert all(r["components"] == "1" for r in rows if r["lambda1"] == "0.0")
    assert capsys.readouterr().out == out.read_text()
    assert (tmp_path / "manifest.json").exists()


def test_benchmark_invalid(tmp_path):
    assert run("benchmark", "--p", "1", "--seed", 1) == 2
    assert run("benchmark", "--lambda1", "-0.5", "--seed", 1) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "gglopt", "--version"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("gglopt ")


def test_matrix_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((5, 5)) * 10.0 ** rng.integers(-300, 300, (5, 5))
    A[0, 0] = -0.0
    write_matrix(tmp_path / "A.csv", A)
    B = read_matrix(tmp_path / "A.csv")
    np.testing.assert_array_equal(A, B)
    assert "-0.0" not in format_matrix(A).split(",")[0]


def test_edges_upper_triangle(tmp_path):
    T = np.array([[1.0, 0.5, 0.0], [0.5, 1.0, -1e-9], [0.0, -1e-9, 1.0]])
    write_edges(tmp_path / "e.tsv", T)
    assert read_edges(tmp_path / "e.tsv") == [(0, 1, 0.5)]
