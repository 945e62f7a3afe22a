"""Kernel (prior covariance) matrices, regularisation matrices and filter factors.

All builders use the 1-based index convention of the usual kernel formulas,
i.e. the entry ``M[i-1, j-1]`` holds the value of the formula at ``(i, j)``
with ``i, j = 1..n``. For instance the first diagonal entry of the decay
filter factor is ``alpha**(-1/2)``, not ``1``.

Every covariance ``P`` and regularisation matrix ``R`` is returned as a plain
``(n, n)`` float array. Filter factors ``F`` satisfy ``F.T @ F == R`` (with
``c = sigma2 = 1``); the random-walk factor is lower bidiagonal (rotated
factorisation), the other families are upper banded.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import FactorizationError, ParameterError, SingularityError

__all__ = [
    "KernelFamily",
    "KernelSpec",
    "build_covariance",
    "build_regularisation_closed_form",
    "build_filter_factor_closed_form",
    "factorize_rotated",
    "row_frequency_response",
    "bandwidth",
    "PIVOT_RTOL",
]

# pivot k must exceed PIVOT_RTOL * R[k, k]
PIVOT_RTOL = 1e-12


class KernelFamily(str, Enum):
    RANDOM_WALK = "rw"
    CORRELATION = "corr"
    DECAY = "dec"
    TC = "tc"
    DC = "dc"


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus hyperparameters.

    Only the fields a family needs are read: ``rw`` uses ``sigma2`` (the
    ratio sigma^2 / sigma_e^2, with sigma_e^2 fixed to 1), ``corr`` uses
    ``c, rho, sigma2``, ``dec`` uses ``alpha, sigma2``, ``tc`` uses
    ``c, alpha, sigma2`` (``rho = sqrt(alpha)`` implicitly) and ``dc`` uses
    all four.
    """

    family: KernelFamily
    c: float = 1.0
    rho: float = 0.0
    alpha: float = 1.0
    sigma2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not self.c >= 0:
            raise ParameterError(f"c must be >= 0, got {self.c}")
        if not abs(self.rho) <= 1:
            raise ParameterError(f"|rho| must be <= 1, got {self.rho}")
        if not 0 <= self.alpha <= 1:
            raise ParameterError(f"alpha must lie in [0, 1], got {self.alpha}")
        if not self.sigma2 > 0:
            raise ParameterError(f"sigma2 must be > 0, got {self.sigma2}")

    @property
    def effective_rho(self):
        if self.family is KernelFamily.TC:
            return float(np.sqrt(self.alpha))
        return self.rho


def _index_grid(n):
    if n < 1:
        raise ParameterError(f"model order n must be >= 1, got {n}")
    i = np.arange(1, n + 1, dtype=float)
    return i[:, None], i[None, :]


def build_covariance(spec, n):
    """Prior covariance ``P`` of the impulse response coefficients."""
    I, J = _index_grid(n)
    fam = spec.family
    if fam is KernelFamily.RANDOM_WALK:
        return np.minimum(I, J)
    if fam is KernelFamily.CORRELATION:
        return spec.c * spec.rho ** np.abs(I - J)
    if fam is KernelFamily.DECAY:
        return np.diag(spec.alpha ** np.arange(1, n + 1, dtype=float))
    if fam is KernelFamily.TC:
        return spec.c * np.minimum(spec.alpha**I, spec.alpha**J)
    # DC
    return spec.c * spec.rho ** np.abs(I - J) * spec.alpha ** ((I + J) / 2)


def _tridiag(diag, off):
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def _require_invertible(spec, n):
    fam = spec.family
    if fam in (KernelFamily.CORRELATION, KernelFamily.TC, KernelFamily.DC) and n < 2:
        raise ParameterError(f"{fam.value} closed form needs n >= 2, got {n}")
    if fam is not KernelFamily.RANDOM_WALK and fam is not KernelFamily.DECAY and spec.c == 0:
        raise SingularityError("c = 0 gives a zero covariance matrix")
    if fam in (KernelFamily.DECAY, KernelFamily.TC, KernelFamily.DC) and spec.alpha == 0:
        raise SingularityError("alpha = 0 gives a singular covariance matrix")
    if fam in (KernelFamily.CORRELATION, KernelFamily.DC) and abs(spec.rho) == 1:
        raise SingularityError("|rho| = 1 gives a singular covariance matrix")
    if fam is KernelFamily.TC and spec.alpha == 1:
        raise SingularityError("alpha = 1 gives a singular TC covariance matrix")


def build_regularisation_closed_form(spec, n):
    """Analytic ``R = sigma2 * inv(P)`` for the family of ``spec``."""
    _require_invertible(spec, n)
    fam = spec.family
    if fam is KernelFamily.RANDOM_WALK:
        if n == 1:
            return np.array([[spec.sigma2]])
        diag = np.full(n, 2.0)
        diag[-1] = 1.0
        return spec.sigma2 * _tridiag(diag, -np.ones(n - 1))
    if fam is KernelFamily.DECAY:
        return spec.sigma2 * np.diag(spec.alpha ** -np.arange(1, n + 1, dtype=float))

    rho = spec.effective_rho
    scale = spec.sigma2 / spec.c
    if fam is KernelFamily.CORRELATION:
        diag = np.full(n, 1 + rho**2)
        diag[[0, -1]] = 1.0
        return scale / (1 - rho**2) * _tridiag(diag, np.full(n - 1, -rho))

    # TC and DC share the a_ij pattern; TC has rho**2 == alpha
    a = _tridiag(np.r_[1.0, np.full(n - 2, 1 + rho**2), 1.0], np.full(n - 1, -rho))
    I, J = _index_grid(n)
    return scale * a / (spec.alpha ** ((I + J) / 2) * (1 - rho**2))


def build_filter_factor_closed_form(spec, n):
    """Closed-form filter factor ``F`` with ``F.T @ F = R`` for ``c = sigma2 = 1``."""
    _require_invertible(spec, n)
    fam = spec.family
    if fam is KernelFamily.RANDOM_WALK:
        return np.eye(n) - np.eye(n, k=-1)
    i = np.arange(1, n + 1, dtype=float)
    if fam is KernelFamily.DECAY:
        return np.diag(spec.alpha ** (-i / 2))
    if fam is KernelFamily.CORRELATION:
        rho = spec.rho
        diag = np.full(n, np.sqrt(1 / (1 - rho**2)))
        diag[-1] = 1.0
        # -rho rather than -|rho|, so that negative correlation keeps F.T @ F == R
        sup = np.full(n - 1, -rho / np.sqrt(1 - rho**2))
        return np.diag(diag) + np.diag(sup, 1)

    alpha = spec.alpha
    rho = spec.effective_rho
    diag = np.sqrt(1 / (alpha**i * (1 - rho**2)))
    diag[-1] = np.sqrt(1 / alpha**n)
    if fam is KernelFamily.TC:
        sup = -np.sqrt(1 / (alpha ** i[:-1] * (1 - alpha)))
    else:
        sup = -rho / np.sqrt(alpha ** (i[:-1] + 1) * (1 - rho**2))
    return np.diag(diag) + np.diag(sup, 1)


def _cholesky_upper(R):
    """Upper factor ``U`` with ``U.T @ U = R``; raises on the first bad pivot."""
    n = R.shape[0]
    A = np.array(R, dtype=float, copy=True)
    U = np.zeros_like(A)
    tol = PIVOT_RTOL * np.clip(np.diag(A), 0.0, None)
    for k in range(n):
        pivot = A[k, k]
        if not pivot > tol[k]:
            raise FactorizationError(
                f"matrix is not positive definite: pivot {k} = {pivot:.3e}", k
            )
        d = np.sqrt(pivot)
        U[k, k] = d
        row = A[k, k + 1 :] / d
        U[k, k + 1 :] = row
        A[k + 1 :, k + 1 :] -= np.outer(row, row)
    return U


def factorize_rotated(R, lower=True):
    """Factor a symmetric positive definite ``R`` as ``F.T @ F``.

    With ``lower=True`` the rotated factorisation is used: the row and
    column order of ``R`` is reversed, an upper triangular factor is
    computed and the order is reversed back, which yields a *lower*
    triangular ``F`` (this reproduces the random-walk difference matrix).
    With ``lower=False`` the ordinary upper triangular factor is returned,
    which is the orientation of the correlation, TC and DC filter matrices.

    Raises
    ------
    FactorizationError
        If a pivot is not larger than ``PIVOT_RTOL`` times the matching
        diagonal entry of ``R`` (this accepts strongly graded matrices such as
        decay kernels with small ``alpha``).
        ``err.pivot`` indexes ``R`` in its original order.
    """
    R = np.asarray(R, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ParameterError(f"R must be square, got shape {R.shape}")
    if not lower:
        return _cholesky_upper(R)
    n = R.shape[0]
    try:
        U = _cholesky_upper(R[::-1, ::-1])
    except FactorizationError as err:
        raise FactorizationError(str(err), n - 1 - err.pivot) from None
    return U[::-1, ::-1].copy()


def bandwidth(F, tol=0.0):
    """Largest distance of a nonzero entry from the main diagonal."""
    rows, cols = np.nonzero(np.abs(np.asarray(F)) > tol)
    if rows.size == 0:
        return 0
    return int(np.max(np.abs(cols - rows)))


def row_frequency_response(F, row, n_freq=512):
    """Magnitude response (dB) of one row of a filter matrix.

    The nonzero span of the row (1-based ``row``) is used as FIR coefficients
    ``b_k`` and ``20*log10|sum_k b_k exp(-2j*pi*f*k)|`` is evaluated on
    ``n_freq`` uniformly spaced normalised frequencies in ``[0, 0.5]``.

    Returns
    -------
    freqs, mag_db : ndarray
    """
    F = np.asarray(F, dtype=float)
    if not 1 <= row <= F.shape[0]:
        raise ParameterError(f"row must lie in 1..{F.shape[0]}, got {row}")
    if n_freq < 2:
        raise ParameterError(f"n_freq must be >= 2, got {n_freq}")
    r = F[row - 1]
    nz = np.flatnonzero(r)
    if nz.size == 0:
        raise ParameterError(f"row {row} is all zero; its response is undefined")
    b = r[nz[0] : nz[-1] + 1]
    freqs = np.linspace(0.0, 0.5, n_freq)
    H = np.exp(-2j * np.pi * np.outer(freqs, np.arange(b.size))) @ b
    with np.errstate(divide="ignore"):
        mag_db = 20 * np.log10(np.abs(H))
    return freqs, mag_db
