"""File formats: CSV matrices/signals/reports and JSON configs/systems.

Numbers are written in full-precision scientific notation (17 significant
digits) so that every value round-trips exactly.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .errors import ParameterError
from .estimator import Dataset, ImpulseResponseEstimate
from .filters import SystemSpec
from .simulation import ExperimentConfig
from .tuning import GridSpec

FLOAT_FMT = "%.16e"


def fmt(x):
    return FLOAT_FMT % x


def write_matrix_csv(path, M):
    """Row-major CSV, no header."""
    np.savetxt(path, np.atleast_2d(M), fmt=FLOAT_FMT, delimiter=",")


def read_matrix_csv(path):
    return np.atleast_2d(np.loadtxt(path, delimiter=",", ndmin=2))


def write_frequency_response_csv(path, freqs, mag_db):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["normalised_frequency", "magnitude_db"])
        for f, m in zip(freqs, mag_db):
            w.writerow([fmt(f), fmt(m)])


def write_estimate_csv(path, est):
    np.savetxt(path, est.theta[:, None], fmt=FLOAT_FMT)


def read_estimate_csv(path, method="ls"):
    return ImpulseResponseEstimate(np.loadtxt(path, ndmin=1), method)


def _sidecar(path):
    return Path(path).with_suffix(".json")


def write_dataset(path, data):
    """Two-column ``u,y`` CSV plus a JSON sidecar with the metadata."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["u", "y"])
        for u, y in zip(data.u, data.y):
            w.writerow([fmt(u), fmt(y)])
    seed = list(data.seed) if isinstance(data.seed, tuple) else data.seed
    meta = {"N": data.N, "seed": seed, "noise_sigma": data.noise_sigma}
    _sidecar(path).write_text(json.dumps(meta, indent=2))
    return path


def read_dataset(path):
    path = Path(path)
    arr = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if arr.shape[1] != 2:
        raise ParameterError(f"{path}: expected two columns u,y, got {arr.shape[1]}")
    meta = {}
    if _sidecar(path).exists():
        meta = json.loads(_sidecar(path).read_text())
    seed = meta.get("seed")
    seed = tuple(seed) if isinstance(seed, list) else seed
    data = Dataset(arr[:, 0], arr[:, 1], seed=seed, noise_sigma=meta.get("noise_sigma"))
    if "N" in meta and meta["N"] != data.N:
        raise ParameterError(f"{path}: sidecar says N={meta['N']} but file has {data.N} rows")
    return data


def system_to_dict(sys):
    return {
        "name": sys.name,
        "b": [float(x) for x in sys.b],
        "a": [float(x) for x in sys.a],
        "components": [{"gain": g, "spec": system_to_dict(s)} for g, s in sys.components],
    }


def system_from_dict(d):
    comps = [(c["gain"], system_from_dict(c["spec"])) for c in d.get("components", [])]
    if comps:
        return SystemSpec(d["name"], d["b"], d["a"], tuple(comps))
    return SystemSpec(d["name"], d["b"], d.get("a", [1.0]))


def save_system_json(path, sys):
    Path(path).write_text(json.dumps(system_to_dict(sys), indent=2))


def load_system_json(path):
    return system_from_dict(json.loads(Path(path).read_text()))


def config_to_dict(cfg):
    d = {
        "system": cfg.system if isinstance(cfg.system, str) else system_to_dict(cfg.system),
        "N": cfg.N,
        "noise_sigma": cfg.noise_sigma,
        "n": cfg.n,
        "N_val": cfg.N_val,
        "runs": cfg.runs,
        "base_seed": cfg.base_seed,
        "methods": list(cfg.methods),
        "k": cfg.k,
        "sigma_u": cfg.sigma_u,
        "tailored_edges": list(cfg.tailored_edges),
        "refine": cfg.refine,
        "grid": None if cfg.grid is None else cfg.grid.to_dict(),
    }
    if cfg.extra:
        d["extra"] = cfg.extra
    return d


_CONFIG_KEYS = {
    "system", "N", "noise_sigma", "n", "N_val", "runs", "base_seed", "methods",
    "k", "sigma_u", "tailored_edges", "refine", "grid", "extra",
}


def config_from_dict(d):
    unknown = set(d) - _CONFIG_KEYS
    if unknown:
        raise ParameterError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    d = dict(d)
    if isinstance(d.get("system"), dict):
        d["system"] = system_from_dict(d["system"])
    if d.get("grid") is not None:
        d["grid"] = GridSpec.from_dict(d["grid"])
    return ExperimentConfig(**d)


def load_config(path):
    return config_from_dict(json.loads(Path(path).read_text()))


def save_config(path, cfg):
    Path(path).write_text(json.dumps(config_to_dict(cfg), indent=2))


def load_grid_spec(path):
    return GridSpec.from_dict(json.loads(Path(path).read_text()))


def save_tuning_result(path, result):
    Path(path).write_text(json.dumps(result.to_dict(), indent=2))


def read_per_run_csv(path):
    """Rows of ``per_run.csv`` with ``mse_val`` parsed back to float."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["run_index"] = int(r["run_index"])
        r["mse_val"] = float(r["mse_val"])
    return rows
