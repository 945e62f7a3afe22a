"""
Kernel matrices and their filter factors
========================================

Build the covariance ``P``, regularisation ``R = P^{-1}`` and banded factor
``F`` (with ``F^T F = R``) of each kernel family, check the algebra and look
at the frequency response of one row of ``F``.
"""

import numpy as np

from firreg import (
    KernelFamily,
    KernelSpec,
    build_covariance,
    build_filter_factor_closed_form,
    build_regularisation_closed_form,
    factorize_rotated,
    row_frequency_response,
)

n = 12
specs = [
    KernelSpec("rw"),
    KernelSpec("corr", rho=0.8),
    KernelSpec("dec", alpha=0.8),
    KernelSpec("tc", alpha=0.8),
    KernelSpec("dc", alpha=0.8, rho=0.6),
]

for spec in specs:
    P = build_covariance(spec, n)
    R = build_regularisation_closed_form(spec, n)
    F = build_filter_factor_closed_form(spec, n)
    # the factor is recovered numerically from R as well
    Fn = factorize_rotated(R, lower=spec.family is KernelFamily.RANDOM_WALK)
    bandwidth = max(abs(i - j) for i, j in zip(*np.nonzero(F)))
    print(f"{spec.family.value:>5s}: ||F'F - R||/||R|| = {np.linalg.norm(F.T @ F - R) / np.linalg.norm(R):.1e}, "
          f"|RP - I| = {np.max(np.abs(R @ P - np.eye(n))):.1e}, "
          f"|F - F_num| = {np.max(np.abs(F - Fn)):.1e}, bandwidth {bandwidth}")

# each row of F acts as a small FIR filter; the TC rows are first differences (high-pass)
F = build_filter_factor_closed_form(KernelSpec("tc", alpha=0.8), n)
freqs, mag = row_frequency_response(F, 5, 9)
print("\nTC row 5 magnitude (dB) from DC to Nyquist:")
for f, m in zip(freqs, mag):
    print(f"  f = {f:.3f}  {m:7.2f}")
