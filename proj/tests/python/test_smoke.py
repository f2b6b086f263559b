import math

import numpy as np
import pytest

import palmtess


def test_sample_is_deterministic_and_in_window():
    a = palmtess.sample("poisson", {"m": 1.0}, half_side=5.0, seed=3)
    b = palmtess.sample("poisson", {"m": 1.0}, half_side=5.0, seed=3)
    assert a.shape[1] == 2
    assert np.array_equal(a, b)
    assert np.all(np.abs(a) <= 5.0)
    assert 50 < len(a) < 160


def test_hardcore_sample_respects_radius():
    pts = palmtess.sample("matern_hardcore", {"lambda": 2.0, "rhc": 0.3}, half_side=4.0, seed=1)
    d = np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)
    np.fill_diagonal(d, np.inf)
    assert d.min() >= 0.3


def test_lattice_delaunay_degree_four():
    grid = np.array([(i, j) for i in range(-4, 5) for j in range(-4, 5)], dtype=float)
    res = palmtess.delaunay(grid, half_side=4.0)
    centre = [k for k, (x, y) in enumerate(grid) if max(abs(x), abs(y)) <= 2]
    assert all(res["degree"][k] == 4 for k in centre)
    assert len(res["edges"]) == 2 * 9 * 8


def test_poisson_moments():
    r = palmtess.rho_gamma("poisson", {"m": 1.0}, gamma=2, replicates=4000, seed=2)
    assert abs(r["estimate"] - 2.0) <= 4 * r["std_error"]
    v = palmtess.void_probability("poisson", {"m": 1.0}, [0.5], replicates=4000, seed=2)
    p = v["points"][0]
    assert abs(p["frequency"] - math.exp(-1.0)) <= 4 * p["std_error"]


def test_palm_degree_near_six():
    r = palmtess.palm_moment("deg_p", replicates=2000, seed=4)
    assert abs(r["estimate"] - 6.0) <= 4 * r["std_error"]


def test_box_open_empty_ball():
    pts = np.array([[-9.0, -9.0], [9.0, 9.0], [-9.0, 9.0], [9.0, -9.0]])
    r = palmtess.box_open(pts, 10.0, 0, 0, 4.0, 0.5)
    assert r["open"] and r["via"] == "empty_ball"


def test_phi_and_sep():
    rows = palmtess.estimate_phi([0.2, 0.8], 4.0, replicates=20, seed=1)
    assert rows[0]["phi"] <= rows[1]["phi"]
    sep = palmtess.sep_check([0.01], half_side=10.0, replicates=10, seed=1)
    assert sep[0]["subcritical"]


def test_selftest_and_errors(tmp_path):
    assert palmtess.geometry_selftest()["pass"]
    files = palmtess.run_experiment("experiment=moments\nreplicates=50\nseed=1\n", tmp_path)
    assert "moments.csv" in files and (tmp_path / "run_manifest.json").exists()
    with pytest.raises(palmtess.PalmtessError):
        palmtess.sample("matern_hardcore", {"lambda": -1.0, "rhc": 0.1})
    with pytest.raises(palmtess.PalmtessError):
        palmtess.run_experiment("experiment=moments\nbogus=1\n", tmp_path)
