"""
Identifying a band-pass system with a filter-based penalty
==========================================================

Simulate one data record of the ``band2`` benchmark, estimate the impulse
response by least squares, by a CV-tuned TC kernel and by a CV-tuned
filter penalty, and compare the validation MSE.
"""

import numpy as np

from firreg import ExperimentConfig, make_dataset, validation_mse
from firreg.bench import run_identify
from firreg.tuning import GridSpec

# a reduced grid keeps this script quick; the benchmark default is finer
grid = GridSpec(
    p=[6, 10, 16],
    f1=np.round(np.arange(0.15, 0.3, 0.025), 3),
    f2=np.round(np.arange(0.2, 0.35, 0.025), 3),
    alpha=[0.7, 0.8, 0.9],
    lam=np.logspace(-3, 3, 13),
)
cfg = ExperimentConfig(system="band2", base_seed=1, grid=grid)
data = make_dataset(cfg, 0)
print(f"{data.N} samples, FIR length n = {cfg.n}, noise sigma = {data.noise_sigma}")

for method in ("ls", "tc", "filter"):
    est, info = run_identify(data, method, cfg)
    mse = validation_mse(est, cfg.system_spec, cfg.N_val, (cfg.base_seed, 0, "validation"))
    print(f"{method:>6s}: validation MSE {mse:.3e}  {info.get('hyperparameters', '')}")
