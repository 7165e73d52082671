"""Weather-regime clustering and long-term wind-farm wake aggregation."""

import json
import os
import sys

import numpy as np

from . import _windregime as _core
from ._windregime import (
    CorruptionError,
    DependencyError,
    IoError,
    RangeError,
    ValidationError,
    WindregimeError,
    fitch_drag,
    power_curve,
    thrust_coefficient,
)

__all__ = [
    "CorruptionError",
    "Dataset",
    "DependencyError",
    "IoError",
    "RangeError",
    "ValidationError",
    "WindregimeError",
    "default_farm",
    "elbow",
    "fitch_drag",
    "generate_synthetic",
    "jensen_simulate",
    "kmeans",
    "main",
    "power_curve",
    "read_dataset",
    "rotate_wake",
    "run_cli",
    "run_pipeline",
    "silhouette",
    "thrust_coefficient",
    "transition_matrix",
    "write_dataset",
]


class Dataset:
    """Time-ordered stack of gridded fields, data shaped (time, channel, lat, lon)."""

    def __init__(self, grid, times, channels, data):
        self.grid = dict(grid)
        self.times = list(times)
        self.channels = list(channels)
        self.data = np.asarray(data, dtype=np.float32)

    @classmethod
    def _from_core(cls, parts):
        grid, times, channels, data = parts
        return cls(json.loads(grid), times, channels, data)

    def features(self, channels=("u100", "v100")):
        idx = [self.channels.index(c) for c in channels]
        return self.data[:, idx].reshape(len(self.times), -1).astype(np.float64)

    def __len__(self):
        return len(self.times)


def read_dataset(path):
    return Dataset._from_core(_core.read_dataset(os.fspath(path)))


def write_dataset(ds, path):
    _core.write_dataset(json.dumps(ds.grid), ds.times, ds.channels, ds.data, os.fspath(path))


def generate_synthetic(scenario):
    """Returns (Dataset, true regime labels) for a scenario dict."""
    parts, labels = _core.generate_synthetic(json.dumps(scenario))
    return Dataset._from_core(parts), np.asarray(labels)


def kmeans(x, k, seed=0, n_init=10, max_iter=300, tol=1e-6):
    return json.loads(_core.kmeans(np.asarray(x, dtype=np.float64), k, seed, n_init, max_iter, tol))


def elbow(x, k_values, seed=0, n_init=10):
    return _core.elbow(np.asarray(x, dtype=np.float64), list(k_values), seed, n_init)


def silhouette(x, labels, k):
    return _core.silhouette(np.asarray(x, dtype=np.float64), list(labels), k)


def transition_matrix(labels, times, k):
    return _core.transition_matrix(list(labels), list(times), k)


def default_farm(lat=56.0, lon=3.0):
    return json.loads(_core.default_farm(lat, lon))


def jensen_simulate(u, v, grid, farm, k_wake=0.05, samples_per_cell=8):
    """Returns a dict with the deficit raster, farm power and per-turbine values."""
    deficit, power, tp, ts = _core.jensen_simulate(
        np.asarray(u, dtype=np.float64),
        np.asarray(v, dtype=np.float64),
        json.dumps(grid),
        json.dumps(farm),
        k_wake,
        samples_per_cell,
    )
    return {"deficit": deficit, "farm_power": power, "turbine_power": np.asarray(tp), "turbine_speed": np.asarray(ts)}


def rotate_wake(raster, grid, dtheta, center):
    lat, lon = center
    return _core.rotate_wake(np.asarray(raster, dtype=np.float64), json.dumps(grid), dtheta, lat, lon)


def run_pipeline(config, out_dir, base_dir=".", validate=True):
    """Cluster, simulate and aggregate; config is a dict in the CLI config format."""
    out = _core.run_pipeline(json.dumps(config), os.fspath(base_dir), os.fspath(out_dir), validate)
    return json.loads(out)


def run_cli(args):
    return _core.run_cli([os.fspath(a) for a in args])


def main():
    sys.exit(run_cli(sys.argv[1:]))
