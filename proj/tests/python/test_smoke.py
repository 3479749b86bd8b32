import json
import math

import numpy as np
import pytest

import gpfractal as gf


def test_scale_function_roundtrip():
    f = gf.ScaleFunction("power:H=0.5")
    assert f(0.25) == pytest.approx(0.5)
    assert f.inverse(0.5) == pytest.approx(0.25)
    assert gf.ScaleFunction(f.spec).spec == f.spec
    with pytest.raises(ValueError):
        gf.ScaleFunction("nosuch:H=1")


def test_brownian_covariance_and_paths():
    grid = np.linspace(0.1, 1.0, 16)
    R = gf.covariance("power:H=0.5", grid)
    np.testing.assert_allclose(R, np.minimum.outer(grid, grid), atol=1e-12)
    paths = gf.sample_paths("power:H=0.5", grid, d=2, n_paths=3, seed=7)
    assert paths.shape == (3, 16, 2)
    np.testing.assert_array_equal(paths, gf.sample_paths("power:H=0.5", grid, 2, 3, 7))


def test_dimensions():
    rep = gf.dim_delta("power:H=0.5", [(0.2, 1.0)])
    assert rep["value"] == pytest.approx(2.0, abs=0.05)
    seg = np.linspace(0.0, 1.0, 4096)
    assert gf.box_dimension(seg)["value"] == pytest.approx(1.0, abs=0.05)
    c = gf.cantor("power:H=0.5", 0.5, 6)
    assert len(c["intervals"]) == 64


def test_energy_and_capacity():
    w, e, gap = gf.minimize_energy(np.eye(3))
    np.testing.assert_allclose(w, np.full(3, 1 / 3), atol=1e-9)
    assert e == pytest.approx(1 / 3)
    rep = gf.capacity("power:H=0.5", [(0.2, 1.0)], 1.5, [0.25, 0.125, 0.0625], grid_n=512)
    assert rep["verdict"] == "positive"


def test_conditions():
    v = gf.check_conditions("power:H=0.4")
    assert v["strong"]["verdict"] == "satisfied"
    H = 0.4
    closed = math.sqrt(math.pi / H) * math.erfc(math.sqrt(H * math.log(2)))
    assert gf.integral_ratio("power:H=0.4", 10.0) == pytest.approx(closed, rel=1e-8)


def test_hitting():
    F = {"boxes": [{"lo": [-50, -50], "hi": [50, 50]}]}
    tol = gf.grid_guard("power:H=0.5", [(0.2, 1.0)], 256, 2)
    rep = gf.hit_probability("power:H=0.5", [(0.2, 1.0)], F, 2, tol, 32, 1, grid_n=256)
    assert rep["p_hat"] == 1.0
    with pytest.raises(ValueError, match="grid too coarse"):
        gf.hit_probability("power:H=0.5", [(0.2, 1.0)], F, 2, tol / 2, 32, 1, grid_n=256)


def test_cli_roundtrip(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"gamma": "power:H=0.5", "zeta": 0.5, "depth": 0}))
    code, out, err = gf.run_cli("cantor", "--config", cfg, "--out", tmp_path / "o")
    assert code == 0, err
    assert json.loads((tmp_path / "o" / "cantor.json").read_text())["intervals"] == [[0.0, 1.0]]
    code, _, err = gf.run_cli("simulate", "--config", cfg, "--out", tmp_path / "p")
    assert code == 2
