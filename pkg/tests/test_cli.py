import ast
import json
import pathlib
import shutil
import subprocess
from collections import Counter

import numpy as np
import pytest

import roughkit.cli as cli
from roughkit import io as rio
from roughkit.cli import main


def run(args, cwd):
    import os

    old = os.getcwd()
    os.chdir(cwd)
    try:
        return main([str(a) for a in args])
    finally:
        os.chdir(old)


def test_gen_paths_deterministic(tmp_path):
    assert run(["gen-paths", "--kind", "gaussian_walk", "--seed", 7, "--n", 512, "-o", "w.csv"], tmp_path) == 0
    first = (tmp_path / "w.csv").read_bytes()
    assert run(["gen-paths", "--kind", "gaussian_walk", "--seed", 7, "--n", 512, "-o", "w.csv"], tmp_path) == 0
    assert (tmp_path / "w.csv").read_bytes() == first
    assert rio.read_path_csv(tmp_path / "w.csv").n == 512
    man = json.loads((tmp_path / "w.csv.manifest.json").read_text())
    assert man["subcommand"] == "gen-paths" and man["seed"] == 7
    assert {"version", "parameters", "inputs", "argv"} <= set(man)


def test_variation_json(tmp_path, capsys):
    run(["gen-paths", "--kind", "gaussian_walk", "--seed", 7, "--n", 64, "-o", "w.csv"], tmp_path)
    capsys.readouterr()
    assert run(["variation", "--path", "w.csv", "--r", 2], tmp_path) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["value"] > 0 and out["partition"][0] == 0 and out["partition"][-1] == 63
    from roughkit.variation import var_exact

    f = rio.read_path_csv(tmp_path / "w.csv")
    assert out["value"] == var_exact(f.distance_field(), 2.0).value


def test_verify_report(tmp_path):
    assert run(["verify", "--catalog", "nested_norm", "--seeds", 5, "--sizes", "64,128"], tmp_path) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    per = Counter((r["n"], json.dumps(r["params"], sort_keys=True)) for r in rep["records"])
    assert set(per.values()) == {5}
    assert {n for n, _ in per} == {65, 129}
    assert (tmp_path / "report.csv").exists()
    assert (tmp_path / "report.json.manifest.json").exists()


def test_lift_sew_besov_and_rerun(tmp_path):
    run(["gen-paths", "--kind", "trig", "--seed", 1, "--n", 65, "--dim", 2, "-o", "t.csv"], tmp_path)
    assert run(["lift", "--path", "t.csv", "--audit", "-o", "X.json"], tmp_path) == 0
    assert run(["besov", "--path", "t.csv", "--alpha", 0.4, "--p", 4, "--q", 4, "-o", "b.json"], tmp_path) == 0
    b = json.loads((tmp_path / "b.json").read_text())
    assert b["norm"] > 0
    first = (tmp_path / "X.json").read_bytes()
    (tmp_path / "X.json").unlink()
    assert run(["rerun", "X.json.manifest.json"], tmp_path) == 0
    assert (tmp_path / "X.json").read_bytes() == first


def test_sew_germ(tmp_path):
    from roughkit.core import TimeGrid, TwoParamField

    g = TimeGrid.uniform(32, 1.0)
    rio.write_field_json(tmp_path / "A.json", TwoParamField.from_function(g, lambda s, u: u**2 - s**2))
    assert run(["sew", "--germ", "A.json", "-o", "s.json"], tmp_path) == 0
    s = json.loads((tmp_path / "s.json").read_text())
    assert s["converged"] and s["final_delta"] <= 1e-12
    # 32 cells are too few for s (u - s) to settle at 1e-8: a diagnostic failure
    rio.write_field_json(tmp_path / "B.json", TwoParamField.from_function(g, lambda s, u: s * (u - s)))
    assert run(["sew", "--germ", "B.json", "-o", "b.json"], tmp_path) == 2
    assert not json.loads((tmp_path / "b.json").read_text())["converged"]


def test_young_and_rde_solve(tmp_path):
    run(["gen-paths", "--kind", "gaussian_walk", "--seed", 2, "--n", 129, "--scale", 0.01, "-o", "x.csv"], tmp_path)
    assert run(["young-solve", "--phi", "builtin:atan_family", "--X", "x.csv", "--y0", 0, "--r", 1.5,
                "--alpha", 1.0, "-o", "Y.csv", "--log", "log.json"], tmp_path) == 0
    assert rio.read_path_csv(tmp_path / "Y.csv").n == 129
    assert json.loads((tmp_path / "log.json").read_text())["max_contraction"] <= 0.55
    run(["gen-paths", "--kind", "gaussian_walk", "--seed", 2, "--n", 129, "--dim", 2, "--scale", 0.02,
         "-o", "x2.csv"], tmp_path)
    run(["lift", "--path", "x2.csv", "-o", "P.json"], tmp_path)
    assert run(["rde-solve", "--phi", "builtin:rotation", "--rough", "P.json", "--y0", "0.1,0.2",
                "-o", "S.json"], tmp_path) == 0
    out = json.loads((tmp_path / "S.json").read_text())
    assert "log" in out


def test_exit_codes(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 1
    with pytest.raises(SystemExit) as e:
        main(["variation", "--bogus"])
    assert e.value.code == 1
    assert "usage" in capsys.readouterr().err
    run(["gen-paths", "--kind", "gaussian_walk", "--n", 16, "-o", "w.csv"], tmp_path)
    assert run(["variation", "--path", "w.csv", "--r", 0.5], tmp_path) == 1
    assert run(["variation", "--path", "missing.csv", "--r", 2], tmp_path) == 1
    # a driver too rough for one window: the rough solver reports a parameter error
    run(["gen-paths", "--kind", "gaussian_walk", "--n", 65, "--dim", 2, "--scale", 5, "-o", "big.csv"], tmp_path)
    run(["lift", "--path", "big.csv", "-o", "B.json"], tmp_path)
    assert run(["rde-solve", "--phi", "builtin:rotation", "--rough", "B.json", "--y0", "0,0",
                "--single-window", "-o", "o.json"], tmp_path) == 1


def test_diagnostic_exit_code(tmp_path):
    run(["gen-paths", "--kind", "gaussian_walk", "--seed", 2, "--n", 129, "--scale", 0.01, "-o", "x.csv"], tmp_path)
    assert run(["young-solve", "--phi", "builtin:atan_family", "--X", "x.csv", "--y0", 0.5,
                "--max-iter", 1, "--tol", "1e-30", "-o", "Y.csv"], tmp_path) == 2


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("ROUGHKIT_THREADS", "1")
    assert run(["--threads", 1, "gen-paths", "--kind", "zigzag", "--n", 5, "-o", "z.csv"], tmp_path) == 0


def test_cli_module_has_no_math_imports():
    tree = ast.parse(pathlib.Path(cli.__file__).read_text())
    names = set()
    for node in ast.walk(tree):
        if isinstance(node, ast.Import):
            names |= {a.name.split(".")[0] for a in node.names}
        elif isinstance(node, ast.ImportFrom) and node.module and node.level == 0:
            names.add(node.module.split(".")[0])
    assert not names & {"numpy", "scipy", "math", "numba", "cmath", "statistics"}


@pytest.mark.skipif(shutil.which("roughkit") is None, reason="console script not installed")
def test_console_script(tmp_path):
    p = subprocess.run(["roughkit", "gen-paths", "--kind", "zigzag", "--n", "3", "-o", str(tmp_path / "z.csv")],
                       capture_output=True, text=True)
    assert p.returncode == 0, p.stderr
    assert np.allclose(rio.read_path_csv(tmp_path / "z.csv").values[:, 0], [0, 1, 0])
