"""Serialization round trips and config parsing."""

import json
import math

import numpy as np
import pytest

import shadowkit as sk
from shadowkit import io


def test_orbit_csv_roundtrip_is_bitexact(tmp_path):
    path = tmp_path / "orbit.csv"
    locs = np.arange(-3, 4)
    x = np.array([[math.pi / (i + 5)] for i in range(7)])
    z = np.array([[math.e / (i + 3)] for i in range(7)])
    io.write_orbit_csv(path, locs, x, z, discrete=True)
    locs2, x2, z2 = io.read_orbit_csv(path)
    assert np.array_equal(locs2, locs.astype(float))
    assert np.array_equal(x2, x)
    assert np.array_equal(z2, z)


def test_pseudo_orbit_csv_read(tmp_path):
    path = tmp_path / "y.csv"
    path.write_text("n,y1\n0,0.25\n1,0.5\n2,1.0\n3,0.125\n4,2.0\n")
    orbit = io.read_pseudo_orbit_csv(path, [0.5], margin=1)
    assert orbit.window.n_lo == 0 and orbit.window.n_hi == 4
    assert orbit.y(2)[0] == 1.0
    assert not orbit.has_first_jet


def test_pseudo_orbit_csv_requires_contiguous_indices(tmp_path):
    path = tmp_path / "y.csv"
    path.write_text("n,y1\n0,0.0\n2,1.0\n")
    with pytest.raises(sk.ConfigError, match="contiguous"):
        io.read_pseudo_orbit_csv(path, [0.5])


def test_pseudo_solution_csv_read_and_guard(tmp_path):
    path = tmp_path / "y.csv"
    ts = np.linspace(-2, 2, 81)
    rows = ["t,y1,yp1"] + [
        f"{t:.17g},{math.sin(t):.17g},{math.cos(t):.17g}" for t in ts
    ]
    path.write_text("\n".join(rows) + "\n")
    orbit = io.read_pseudo_solution_csv(path, [0.5])
    assert orbit.y(0.37)[0] == pytest.approx(math.sin(0.37), abs=1e-6)
    assert orbit.y_prime(-1.2)[0] == pytest.approx(math.cos(-1.2), abs=1e-6)
    with pytest.raises(sk.WindowBoundsError):
        orbit.y(5.0)
    assert not orbit.has_first_jet


def test_parse_params():
    assert io.parse_params("lambda=0.5,eps=0.1", "a=3") == {
        "lambda": "0.5", "eps": "0.1", "a": "3"
    }
    with pytest.raises(sk.ConfigError):
        io.parse_params("lambda")


def test_config_file_parse(tmp_path):
    cfg = tmp_path / "run.ini"
    cfg.write_text(
        "[system]\ngallery = disc-toy\nlambda = 0.25\n"
        "[window]\nn_lo = -40\nn_hi = 40\n"
        "[tolerances]\ntol = 1e-11\n"
        "[run]\nparallel = true\n"
    )
    parsed = io.parse_config_file(cfg)
    assert parsed["system"]["gallery"] == "disc-toy"
    assert parsed["window"]["n_lo"] == "-40"
    assert parsed["tolerances"]["tol"] == "1e-11"
    with pytest.raises(sk.ConfigError):
        io.parse_config_file(tmp_path / "missing.ini")


def test_write_json_handles_numpy(tmp_path):
    path = tmp_path / "x.json"
    io.write_json(path, {"a": np.float64(0.5), "b": np.arange(3), "c": np.int64(2)})
    data = json.loads(path.read_text())
    assert data == {"a": 0.5, "b": [0, 1, 2], "c": 2}
