import json

import numpy as np
import pytest

from jellium import max_modulus_cdf_outside
from jellium.cli import main


def run(argv):
    return main([str(a) for a in argv])


def test_sample_jellium_rows_and_reproducibility(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["sample", "--measure", "uniform_disk", "--n", 50, "--seed", 3, "--out", a]) == 0
    assert run(["sample", "--measure", "uniform_disk", "--n", 50, "--seed", 3, "--out", b]) == 0
    lines = a.read_text().splitlines()
    assert lines[0] == "re,im" and len(lines) == 51
    assert a.read_bytes() == b.read_bytes()
    meta = json.loads((tmp_path / "a.json").read_text())
    assert meta["seed"] == 3 and meta["count"] == 50 and "schema_version" in meta
    assert meta["measure"]["name"] == "uniform_disk"


def test_sample_measure_parameters(tmp_path):
    out = tmp_path / "p.csv"
    assert run(["sample", "--measure", "pareto_tail", "--measure-param", "alpha=1.5",
                "--measure-param", "lam=2", "--n", 10, "--seed", 1, "--out", out]) == 0
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["measure"]["params"] == {"alpha": 1.5, "lam": 2.0}


def test_sample_polynomial_reports_residual(tmp_path):
    out = tmp_path / "z.csv"
    assert run(["sample", "--model", "poly_zeros", "--measure", "fubini_study", "--law",
                "symmetric_bernoulli_complex", "--n", 30, "--seed", 2, "--out", out]) == 0
    meta = json.loads(out.with_suffix(".json").read_text())
    assert meta["residual"]["converged"] and meta["residual"]["backward_error"] < 1e-10
    assert meta["law"] == {"kind": "symmetric_bernoulli_complex"}
    assert len(out.read_text().splitlines()) == 31


def test_sample_campaign(tmp_path):
    out = tmp_path / "c.csv"
    assert run(["sample", "--model", "weyl", "--n", 20, "--seed", 4, "--replicas", 12,
                "--statistic", "max_mod", "--out", out]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "replica,value" and len(lines) == 13
    assert lines[1].startswith("0,")


def test_sample_requires_seed(tmp_path, capsys):
    assert run(["sample", "--measure", "circle", "--n", 5, "--out", tmp_path / "x.csv"]) != 0
    assert "seed" in capsys.readouterr().err


def test_sample_bad_measure_exits_nonzero(tmp_path):
    assert run(["sample", "--measure", "no_such_measure", "--n", 5, "--seed", 1, "--out", tmp_path / "x.csv"]) != 0
    assert run(["sample", "--measure", "circle", "--n", 0, "--seed", 1, "--out", tmp_path / "x.csv"]) != 0


def test_cdf_values(tmp_path):
    out = tmp_path / "F.csv"
    assert run(["cdf", "--kind", "bergman_max_outside", "--R", 1, "--t", "1.5,2,3", "--out", out]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "t,F"
    vals = np.array([[float(x) for x in r.split(",")] for r in rows[1:]])
    assert np.allclose(vals[:, 1], max_modulus_cdf_outside(1.0, vals[:, 0]), rtol=1e-15)
    assert abs(vals[1, 1] - 0.688537537120339715) < 1e-14


def test_cdf_grid_and_exact(tmp_path):
    out = tmp_path / "F.csv"
    assert run(["cdf", "--kind", "exact_max", "--measure", "circle", "--n", 1,
                "--t-min", 1, "--t-max", 3, "--points", 5, "--out", out]) == 0
    vals = np.array([[float(x) for x in r.split(",")] for r in out.read_text().splitlines()[1:]])
    assert vals.shape == (5, 2)
    assert np.allclose(vals[:, 1], 1 - vals[:, 0] ** -2.0 / 2, atol=1e-14)
    assert run(["cdf", "--kind", "bulk_max", "--out", out]) != 0


def test_verify_passing_scenario(tmp_path, capsys):
    out = tmp_path / "g.json"
    assert run(["verify", "--scenario", "ginibre", "--out", out]) == 0
    report = json.loads(out.read_text())
    assert report["pass"] is True and "threshold" in report and "stat" in report
    assert out.with_suffix(".svg").read_text().startswith("<?xml")
    assert "PASS" in capsys.readouterr().out


def test_verify_unknown_scenario(tmp_path):
    assert run(["verify", "--scenario", "nonsense", "--out", tmp_path / "x.json"]) != 0
    assert run(["verify", "--out", tmp_path / "x.json"]) != 0


def test_kernel_diff(tmp_path):
    out, grid = tmp_path / "k.json", tmp_path / "grid.csv"
    assert run(["kernel-diff", "--measure", "circle", "--n", 100, "--reference", "bergman",
                "--out", out, "--grid-out", grid]) == 0
    rep = json.loads(out.read_text())
    assert rep["sup_abs"] < 0.2 * rep["reference_max"]
    assert grid.read_text().splitlines()[0].startswith("z_re,z_im,w_re,w_im")


def test_plot_scatter(tmp_path):
    pts = tmp_path / "p.csv"
    pts.write_text("re,im\n0.1,0.2\n-0.5,0.0\n1.0,-1.0\n")
    svg = tmp_path / "p.svg"
    assert run(["plot", "--points", pts, "--out", svg]) == 0
    text = svg.read_text()
    start = text.index('id="points"')
    assert text[start:].count("<use") >= 3
    svg2 = tmp_path / "p2.svg"
    assert run(["plot", "--points", pts, "--out", svg2]) == 0
    assert svg.read_bytes() == svg2.read_bytes()


def test_plot_histogram_with_reference(tmp_path):
    vals = tmp_path / "v.csv"
    out = tmp_path / "c.csv"
    assert run(["sample", "--model", "jellium", "--measure", "circle", "--n", 10, "--seed", 1,
                "--replicas", 50, "--out", out]) == 0
    svg = tmp_path / "h.svg"
    assert run(["plot", "--values", out, "--reference", "exact_max", "--measure", "circle", "--n", 10,
                "--out", svg]) == 0
    assert svg.stat().st_size > 0
    meta = json.loads(svg.with_suffix(".json").read_text())
    assert meta["bins"] == 40 and meta["curve_points"] == 400 and meta["count"] == 50
    vals.write_text("value\n")
    assert run(["plot", "--out", svg]) != 0


def test_malformed_points_file(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("x,y,z\n1,2,3\n")
    assert run(["plot", "--points", bad, "--out", tmp_path / "o.svg"]) != 0


def test_toml_config(tmp_path):
    cfg = tmp_path / "run.toml"
    out = tmp_path / "cfg.csv"
    cfg.write_text(f'measure = "fubini_study"\nseed = 11\n\n[sample]\nn = 7\nout = "{out.as_posix()}"\n')
    assert run(["sample", "--config", cfg]) == 0
    assert len(out.read_text().splitlines()) == 8
    # command-line flags take precedence
    assert run(["sample", "--config", cfg, "--n", 3]) == 0
    assert len(out.read_text().splitlines()) == 4
    cfg.write_text('seed = 1\n[sample]\nbogus = 3\n')
    assert run(["sample", "--config", cfg]) != 0
