"""Synthetic data generation, validation metrics and the benchmark systems."""

import zlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .estimator import Dataset, build_regressor
from .filters import BandSpec, SystemSpec, design_cheby1, filter_signal, impulse_response

__all__ = [
    "ExperimentConfig",
    "BENCHMARKS",
    "rng_for",
    "generate_white_gaussian",
    "make_dataset",
    "validation_mse",
    "coefficient_mse",
    "make_benchmark_system",
    "resolve_system",
    "true_impulse_response",
]

BENCHMARKS = ("low", "band1", "band2", "band3", "high", "res1", "res2dom", "res2eq")
RESONANCE = frozenset({"res1", "res2dom", "res2eq"})


def rng_for(seed):
    """Generator for an int seed or a ``(base_seed, run, label)`` stream key.

    String parts of the key are hashed with CRC32 so that every stream is
    fixed by its key alone, independent of generation order.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    parts = seed if isinstance(seed, (tuple, list)) else (seed,)
    words = [zlib.crc32(p.encode()) if isinstance(p, str) else int(p) for p in parts]
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


def generate_white_gaussian(length, seed, sigma=1.0):
    if length < 1:
        raise ParameterError(f"length must be >= 1, got {length}")
    if sigma < 0:
        raise ParameterError(f"sigma must be >= 0, got {sigma}")
    return sigma * rng_for(seed).standard_normal(length)


@dataclass
class ExperimentConfig:
    system: object = "band2"
    N: int = 250
    noise_sigma: float = 0.1
    n: int = 100
    N_val: int = 10000
    runs: int = 100
    base_seed: int = 0
    methods: tuple = ("ls", "tc", "dc", "filter")
    grid: object = None
    k: int = 2
    sigma_u: float = 1.0
    tailored_edges: tuple = ()
    refine: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.methods = tuple(self.methods)
        self.tailored_edges = tuple(self.tailored_edges)
        if self.N < self.n:
            raise ParameterError(f"need N >= n, got N={self.N}, n={self.n}")
        if self.N_val < 1 or self.runs < 1:
            raise ParameterError("N_val and runs must be >= 1")

    @property
    def system_spec(self):
        return resolve_system(self.system)

    @property
    def system_name(self):
        return self.system if isinstance(self.system, str) else self.system.name


def resolve_system(system):
    return make_benchmark_system(system) if isinstance(system, str) else system


def make_dataset(cfg, run_index):
    """Input/noise realisation ``run_index`` of ``cfg`` (zero-IC system output)."""
    u = generate_white_gaussian(cfg.N, (cfg.base_seed, run_index, "input"), cfg.sigma_u)
    e = generate_white_gaussian(cfg.N, (cfg.base_seed, run_index, "noise"), cfg.noise_sigma)
    y = filter_signal(cfg.system_spec, u) + e
    return Dataset(u, y, seed=(cfg.base_seed, run_index), noise_sigma=cfg.noise_sigma)


def validation_mse(est, system, N_val, seed, sigma_u=1.0):
    """MSE between noiseless system and FIR model outputs on fresh white input."""
    u = generate_white_gaussian(N_val, seed, sigma_u)
    y_true = filter_signal(system, u)
    y_hat = build_regressor(u, est.n) @ est.theta
    return float(np.mean((y_true - y_hat) ** 2))


def coefficient_mse(est, g_true, sigma_u=1.0):
    """Expected validation MSE ``sigma_u^2 * sum_k (g_k - ghat_k)^2``.

    ``g_true`` is compared over its full length, so any true coefficients
    beyond the model order count as unmodelled tail energy.
    """
    g = np.asarray(g_true, dtype=float)
    ghat = est.theta
    m = max(g.size, ghat.size)
    diff = np.pad(g, (0, m - g.size)) - np.pad(ghat, (0, m - ghat.size))
    return float(sigma_u**2 * diff @ diff)


def _resonance(band):
    return design_cheby1(2, 1.0, BandSpec("bandpass", band))


def make_benchmark_system(name):
    """One of the eight benchmark systems (see ``BENCHMARKS``)."""
    if name == "low":
        sys = design_cheby1(2, 1.0, BandSpec("lowpass", (0.05,)))
    elif name == "band1":
        sys = design_cheby1(4, 1.0, BandSpec("bandpass", (0.1, 0.15)))
    elif name == "band2":
        sys = design_cheby1(4, 1.0, BandSpec("bandpass", (0.225, 0.275)))
    elif name == "band3":
        sys = design_cheby1(4, 1.0, BandSpec("bandpass", (0.35, 0.4)))
    elif name == "high":
        sys = design_cheby1(2, 1.0, BandSpec("highpass", (0.45,)))
    elif name == "res1":
        sys = _resonance((0.145, 0.15))
    elif name in ("res2dom", "res2eq"):
        g1 = 0.2 if name == "res2dom" else 1.0
        return SystemSpec.sum(name, [(g1, _resonance((0.145, 0.15))), (1.0, _resonance((0.395, 0.4)))])
    else:
        raise KeyError(f"unknown benchmark system {name!r}; choose from {', '.join(BENCHMARKS)}")
    sys.name = name
    return sys


def true_impulse_response(system, length=10000):
    """Long impulse response used as the reference for coefficient metrics."""
    return impulse_response(system, length)
