import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import windregime as wr

SCENARIOS = Path(os.environ.get("WINDREGIME_SCENARIO_DIR", Path(__file__).resolve().parents[2] / "scenarios"))
GRID = {"lat_min": 55.9, "lat_max": 56.1, "lon_min": 2.82, "lon_max": 3.18, "n_lat": 17, "n_lon": 17}


def turbine():
    return wr.default_farm()["turbine"]


def test_power_curve_matches_cubic_ramp():
    t = turbine()
    ci, vr, p = t["cut_in"], t["rated_speed"], t["rated_power"]
    for v in np.linspace(0.0, 30.0, 121):
        if v < ci or v >= t["cut_out"]:
            expected = 0.0
        elif v >= vr:
            expected = p
        else:
            expected = p * (v**3 - ci**3) / (vr**3 - ci**3)
        assert wr.power_curve(v) == pytest.approx(expected, rel=1e-12, abs=1e-9)


def test_fitch_drag_opposes_flow():
    t = turbine()
    area = math.pi * (0.5 * t["rotor_diameter"]) ** 2
    u, v = 6.0, -8.0
    s = math.hypot(u, v)
    fx, fy = wr.fitch_drag(u, v)
    scale = -0.5 * wr.thrust_coefficient(s) * t["air_density"] * area * s
    assert fx == pytest.approx(scale * u, rel=1e-12)
    assert fy == pytest.approx(scale * v, rel=1e-12)
    assert fx * u + fy * v < 0.0


def test_dataset_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    times = [f"2007-01-0{d}T12:00:00Z" for d in range(1, 5)]
    data = rng.normal(size=(4, 2, GRID["n_lat"], GRID["n_lon"])).astype(np.float32)
    ds = wr.Dataset(GRID, times, ["u100", "v100"], data)
    wr.write_dataset(ds, tmp_path / "ds")
    back = wr.read_dataset(tmp_path / "ds" / "manifest.json")
    assert back.times == times
    assert back.channels == ["u100", "v100"]
    assert np.array_equal(back.data, data)


def test_kmeans_recovers_separated_blobs():
    rng = np.random.default_rng(7)
    a = rng.normal(0.0, 0.1, size=(30, 3))
    b = rng.normal(5.0, 0.1, size=(20, 3))
    x = np.vstack([a, b])
    model = wr.kmeans(x, 2, seed=3, n_init=4)
    centroids = sorted(model["centroids"], key=lambda c: c[0])
    assert np.allclose(centroids[0], a.mean(axis=0), atol=1e-12)
    assert np.allclose(centroids[1], b.mean(axis=0), atol=1e-12)
    inertia = sum(((x[i] - np.array(model["centroids"][l])) ** 2).sum() for i, l in enumerate(model["labels"]))
    assert model["inertia"] == pytest.approx(inertia, rel=1e-9)
    assert wr.silhouette(x, model["labels"], 2) > 0.9


def test_transition_matrix_counts():
    times = [f"2007-01-{d:02d}T12:00:00Z" for d in range(1, 7)]
    p = wr.transition_matrix([0, 0, 1, 1, 0, 1], times, 2)
    # 0->0, 0->1, 1->1, 1->0, 0->1
    assert np.allclose(p, [[1 / 3, 2 / 3], [1 / 2, 1 / 2]])


def test_jensen_two_turbines_in_a_row():
    t = turbine()
    d = t["rotor_diameter"]
    farm = {"turbine": t, "farm_center": {"lat": 56.0, "lon": 3.0}, "turbines": [[0.0, 0.0], [7.0 * d, 0.0]]}
    u = np.full((GRID["n_lat"], GRID["n_lon"]), 8.0)
    v = np.zeros_like(u)
    r = wr.jensen_simulate(u, v, GRID, farm, k_wake=0.05, samples_per_cell=2)
    ct = wr.thrust_coefficient(8.0)
    grow = 1.0 + 0.05 * 7.0 * d / (0.5 * d)
    waked = 8.0 * (1.0 - (1.0 - math.sqrt(1.0 - ct)) / grow**2)
    assert r["turbine_speed"][0] == pytest.approx(8.0, rel=1e-6)
    assert r["turbine_speed"][1] == pytest.approx(waked, rel=1e-6)
    assert r["farm_power"] == pytest.approx(wr.power_curve(8.0) + wr.power_curve(waked), rel=1e-6)
    assert r["deficit"].shape == (GRID["n_lat"], GRID["n_lon"])
    assert r["deficit"].min() >= 0.0


def test_rotate_wake_identity_and_bad_center():
    w = np.zeros((GRID["n_lat"], GRID["n_lon"]))
    w[8, 12] = 1.0
    assert np.array_equal(wr.rotate_wake(w, GRID, 0.0, (56.0, 3.0)), w)
    with pytest.raises(wr.WindregimeError):
        wr.rotate_wake(w, GRID, 0.5, (40.0, 3.0))


def test_tiny_pipeline(tmp_path):
    config = json.loads((SCENARIOS / "tiny.json").read_text())
    out = wr.run_pipeline(config, tmp_path, base_dir=SCENARIOS)
    assert out["solver_runs"] == 3
    assert out["oracle_runs"] == 40
    assert out["model"]["k"] == 3
    assert sum(out["model"]["counts"]) == 40
    again = wr.run_pipeline(config, tmp_path / "again", base_dir=SCENARIOS, validate=False)
    assert again["complex"] == out["complex"]


def test_cli_entry_point(tmp_path):
    assert wr.run_cli(["synth", "--config", SCENARIOS / "tiny.json", "--out", tmp_path]) == 0
    assert (tmp_path / "dataset" / "manifest.json").exists()
    assert wr.run_cli(["cluster", "--config", tmp_path / "missing.json"]) == 2
    ds = wr.read_dataset(tmp_path / "dataset" / "manifest.json")
    assert len(ds) == 40
    assert ds.features().shape == (40, 2 * 16 * 16)
