"""FIR regressor construction and (regularised) least-squares estimators."""

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from .errors import ParameterError, SingularityError

__all__ = [
    "Dataset",
    "ImpulseResponseEstimate",
    "build_regressor",
    "least_squares",
    "regularised_estimate",
    "regularised_estimate_filter",
    "cost_value",
]


@dataclass
class Dataset:
    """Input/output record ``(u, y)`` plus generation metadata."""

    u: np.ndarray
    y: np.ndarray
    seed: object = None
    noise_sigma: float = None

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float).ravel()
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.u.size < 1 or self.u.size != self.y.size:
            raise ParameterError(
                f"u and y must have equal nonzero length, got {self.u.size} and {self.y.size}"
            )

    @property
    def N(self):
        return self.u.size


@dataclass
class ImpulseResponseEstimate:
    """Estimated impulse response ``theta = [g_0, ..., g_{n-1}]``."""

    theta: np.ndarray
    method: str = "ls"
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float).ravel()

    @property
    def n(self):
        return self.theta.size


def build_regressor(u, n):
    """``N x n`` regressor with ``Phi[t, k] = u[t - k]`` and zero initial conditions."""
    u = np.asarray(u, dtype=float).ravel()
    if n < 1:
        raise ParameterError(f"model order n must be >= 1, got {n}")
    if u.size < 1:
        raise ParameterError("input sequence is empty")
    first_row = np.zeros(n)
    first_row[0] = u[0]
    return linalg.toeplitz(u, first_row)


def _check_system(phi, y):
    phi = np.asarray(phi, dtype=float)
    y = np.asarray(y, dtype=float).ravel()
    if phi.ndim != 2 or phi.shape[0] != y.size:
        raise ParameterError(f"regressor shape {phi.shape} does not match {y.size} outputs")
    if not np.any(phi):
        raise SingularityError("regressor is identically zero (all-zero input)")
    return phi, y


def least_squares(phi, y):
    """Ordinary least-squares impulse response estimate."""
    phi, y = _check_system(phi, y)
    N, n = phi.shape
    if N < n:
        raise SingularityError(f"{N} samples cannot determine {n} coefficients")
    Q, Rq = np.linalg.qr(phi)
    d = np.abs(np.diag(Rq))
    deficient = int(np.sum(d <= max(N, n) * np.finfo(float).eps * d.max()))
    if deficient:
        raise SingularityError(f"regressor is rank deficient: {deficient} column(s) dependent")
    theta = linalg.solve_triangular(Rq, Q.T @ y)
    return ImpulseResponseEstimate(theta, "ls")


def regularised_estimate(phi, y, R):
    """Solve ``(Phi^T Phi + R) theta = Phi^T y``."""
    phi, y = _check_system(phi, y)
    R = np.asarray(R, dtype=float)
    n = phi.shape[1]
    if R.shape != (n, n):
        raise ParameterError(f"R must be {n}x{n}, got {R.shape}")
    H = phi.T @ phi + R
    try:
        cf = linalg.cho_factor(H)
    except linalg.LinAlgError:
        raise SingularityError("Phi^T Phi + R is not positive definite") from None
    return ImpulseResponseEstimate(linalg.cho_solve(cf, phi.T @ y), "reg")


def regularised_estimate_filter(phi, y, F, lam):
    """Regularised estimate with ``R = lam * F^T F``.

    Solved as the stacked least-squares problem ``[Phi; sqrt(lam) F] theta
    ~ [y; 0]`` through a QR factorisation, so the normal matrix is never
    formed.
    """
    phi, y = _check_system(phi, y)
    F = np.asarray(F, dtype=float)
    n = phi.shape[1]
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam}")
    if F.ndim != 2 or F.shape[1] != n:
        raise ParameterError(f"F must have {n} columns, got shape {F.shape}")
    A = np.vstack([phi, np.sqrt(lam) * F])
    b = np.concatenate([y, np.zeros(F.shape[0])])
    if A.shape[0] < n:
        raise SingularityError("stacked system has fewer rows than unknowns")
    Q, Rq = np.linalg.qr(A)
    d = np.abs(np.diag(Rq))
    if d.min() <= A.shape[0] * np.finfo(float).eps * d.max():
        raise SingularityError("Phi^T Phi + lam F^T F is singular")
    theta = linalg.solve_triangular(Rq, Q.T @ b)
    return ImpulseResponseEstimate(theta, "filter", {"lambda": float(lam)})


def cost_value(theta, phi, y, F, lam):
    """Penalised cost ``||y - Phi theta||^2 + lam ||F theta||^2``."""
    theta = np.asarray(theta, dtype=float)
    resid = np.asarray(y, dtype=float) - np.asarray(phi) @ theta
    pen = np.asarray(F) @ theta
    return float(resid @ resid + lam * (pen @ pen))
