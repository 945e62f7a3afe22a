"""Cross-validated tuning of the filter hyperparameters and kernel baselines.

The filter hyperparameter vector is ``beta = (p, f1, f2, alpha, lam)``. The
interval ``[f1, f2]`` is always the *stop band* of the regularisation
filter, i.e. the band where the system is assumed to have its energy:

* ``bandstop``: stop ``[f1, f2]`` (band-pass systems);
* ``highpass``: ``f1 = 0``, stop ``[0, f2]`` (low-pass systems);
* ``lowpass``: ``f2 = 0.5``, stop ``[f1, 0.5]`` (high-pass systems);
* ``multibandstop``: explicit stop-band ``edges`` (tailored filters).
"""

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import linalg, optimize

from .errors import FirRegError, ParameterError, SingularityError, TuningError
from .estimator import build_regressor, regularised_estimate_filter
from .filters import BandKind, BandSpec, build_regularisation_filter_matrix, design_fir_windowed
from .kernels import KernelFamily, KernelSpec, build_covariance, build_filter_factor_closed_form

__all__ = [
    "HyperparameterVector",
    "GridSpec",
    "TuningResult",
    "KernelTuningResult",
    "kfold_split",
    "cv_score",
    "grid_search",
    "refine_local",
    "tune_kernel_cv",
    "marginal_likelihood_tune",
    "marginal_likelihood_objective",
    "default_filter_grid",
    "default_lambda_grid",
]

FILTER_KINDS = ("bandstop", "highpass", "lowpass")


@dataclass(frozen=True)
class HyperparameterVector:
    p: int
    f1: float
    f2: float
    alpha: float
    lam: float
    band_kind: str = "bandstop"
    edges: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "band_kind", BandKind(self.band_kind).value)
        object.__setattr__(self, "edges", tuple(float(e) for e in self.edges))
        if self.p < 1:
            raise ParameterError(f"p must be >= 1, got {self.p}")
        if not 0 <= self.f1 < self.f2 <= 0.5:
            raise ParameterError(f"need 0 <= f1 < f2 <= 0.5, got ({self.f1}, {self.f2})")
        if not 0 < self.alpha <= 1:
            raise ParameterError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not self.lam >= 0:
            raise ParameterError(f"lambda must be >= 0, got {self.lam}")
        if self.band_kind == "multibandstop" and not self.edges:
            raise ParameterError("multibandstop needs explicit edges")

    def band(self):
        kind = self.band_kind
        if kind == "bandstop":
            return BandSpec(kind, (self.f1, self.f2))
        if kind == "highpass":
            return BandSpec(kind, (self.f2,))
        if kind == "lowpass":
            return BandSpec(kind, (self.f1,))
        if kind == "multibandstop":
            return BandSpec(kind, self.edges)
        raise ParameterError(f"band kind {kind} cannot describe a regularisation filter")

    def filter_matrix(self, n):
        fir = design_fir_windowed(self.p, self.band())
        return build_regularisation_filter_matrix(fir, n, self.alpha)

    def to_dict(self):
        d = asdict(self)
        d["edges"] = list(self.edges)
        return d

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class GridSpec:
    """Candidate values for each hyperparameter.

    ``f1`` and ``f2`` are combined into stop bands according to
    ``band_kinds``; ``edges`` (if given) fixes a tailored multiband stop
    filter and replaces the frequency scan.
    """

    p: list
    f1: list
    f2: list
    alpha: list
    lam: list
    band_kinds: list = field(default_factory=lambda: list(FILTER_KINDS))
    edges: tuple = ()

    def __post_init__(self):
        # accept any iterables (numpy arrays included); store plain Python numbers
        self.p = [int(v) for v in self.p]
        for name in ("f1", "f2", "alpha", "lam"):
            setattr(self, name, [float(v) for v in getattr(self, name)])
        self.band_kinds = list(self.band_kinds)
        self.edges = tuple(float(v) for v in self.edges)

    def filter_candidates(self):
        """Yield ``(p, f1, f2, alpha, kind)`` for every distinct filter matrix."""
        for kind, p, alpha in itertools.product(self._kinds(), self.p, self.alpha):
            if kind != "lowpass" and p % 2:
                continue  # these designs pass Nyquist and need even order
            for f1, f2 in self._bands(kind):
                yield p, f1, f2, alpha, kind

    def _kinds(self):
        return ["multibandstop"] if self.edges else self.band_kinds

    def _bands(self, kind):
        inner = lambda f: 0 < f < 0.5  # noqa: E731
        if kind == "multibandstop":
            return [(self.edges[0], self.edges[-1])]
        if kind == "highpass":
            return [(0.0, f2) for f2 in self.f2 if inner(f2)]
        if kind == "lowpass":
            return [(f1, 0.5) for f1 in self.f1 if inner(f1)]
        return [(a, b) for a in self.f1 for b in self.f2 if inner(a) and inner(b) and a < b]

    def size(self):
        return sum(1 for _ in self.filter_candidates()) * len(self.lam)

    def to_dict(self):
        d = asdict(self)
        d["edges"] = list(self.edges)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["edges"] = tuple(d.get("edges", ()))
        return cls(**d)


def default_lambda_grid(points_per_decade=2):
    """Log-spaced lambda values on ``[1e-2, 1e4]``."""
    return [float(x) for x in np.logspace(-2, 4, 6 * points_per_decade + 1)]


def default_filter_grid(resonance=False, f_step=0.025, p=(2, 6, 10, 16, 22, 30)):
    """Default filter-penalty grid used by the benchmark.

    Orders span 2..30 and cut-offs cover (0, 0.5); alpha is scanned in
    [0.7, 0.9] (or [0.85, 0.95] for resonance systems).
    """
    f = [float(x) for x in np.round(np.arange(f_step, 0.5, f_step), 10)]
    alpha = [0.85, 0.9, 0.95] if resonance else [0.7, 0.8, 0.9]
    return GridSpec(p=list(p), f1=f, f2=f, alpha=alpha, lam=default_lambda_grid())


@dataclass
class TuningResult:
    best: HyperparameterVector
    cv_mse: float
    trace: list  # [(HyperparameterVector, cv_mse), ...]

    def to_dict(self):
        return {
            "best": self.best.to_dict(),
            "cv_mse": self.cv_mse,
            "trace": [{"beta": b.to_dict(), "cv_mse": s} for b, s in self.trace],
        }


def kfold_split(N, k):
    """Contiguous k-fold partition of ``range(N)``.

    Returns a list of ``(train_idx, val_idx)`` pairs; block sizes differ by
    at most one.
    """
    if k < 2:
        raise ParameterError(f"need k >= 2 folds, got {k}")
    if k > N:
        raise ParameterError(f"cannot split {N} samples into {k} folds")
    blocks = np.array_split(np.arange(N), k)
    return [
        (np.concatenate([b for j, b in enumerate(blocks) if j != i]), blocks[i])
        for i in range(k)
    ]


def _block_system(u, y, blocks, n):
    """Stacked regressor over index blocks, each block with zero initial conditions."""
    phis = [build_regressor(u[b], n) for b in blocks]
    return np.vstack(phis), np.concatenate([y[b] for b in blocks])


@dataclass
class _Fold:
    phi: np.ndarray
    y: np.ndarray
    phi_val: np.ndarray
    y_val: np.ndarray

    def __post_init__(self):
        self.A = self.phi.T @ self.phi
        self.c = self.phi.T @ self.y


def _folds(data, n, k):
    kfold_split(data.N, k)  # validates k
    blocks = np.array_split(np.arange(data.N), k)
    return [
        _Fold(*_block_system(data.u, data.y, [b for j, b in enumerate(blocks) if j != i], n),
              *_block_system(data.u, data.y, [blocks[i]], n))
        for i in range(k)
    ]


def cv_score(beta, data, n, k=2):
    """k-fold cross-validation MSE of the filter-regularised estimate.

    Every fold block gets its own regressor with zero initial conditions
    (adjacent training blocks do not share state); the score is the mean of the per-fold held-out MSEs.
    """
    F = beta.filter_matrix(n)
    scores = []
    for i, fold in enumerate(_folds(data, n, k)):
        try:
            est = regularised_estimate_filter(fold.phi, fold.y, F, beta.lam)
        except FirRegError as err:
            raise type(err)(f"fold {i}: {err}") from err
        resid = fold.y_val - fold.phi_val @ est.theta
        scores.append(np.mean(resid**2))
    return float(np.mean(scores))


def _scan_penalty(B, lams, folds):
    """CV MSE of ``R = lam * B`` for every lam, via batched normal equations.

    The penalties are strongly graded (row scales up to alpha**(-n/2)), so
    each ``A + lam B`` is solved directly rather than through a shared
    eigendecomposition, which loses the small eigenvalues.
    """
    lams = np.asarray(lams, dtype=float)
    total = np.zeros(lams.size)
    for fold in folds:
        M = fold.A + lams[:, None, None] * B
        rhs = np.repeat(fold.c[None, :, None], lams.size, axis=0)
        try:
            theta = np.linalg.solve(M, rhs)[..., 0]
        except np.linalg.LinAlgError:
            theta = np.full((lams.size, fold.c.size), np.nan)
            for j in range(lams.size):
                try:
                    theta[j] = linalg.solve(M[j], fold.c, assume_a="pos")
                except (linalg.LinAlgError, ValueError):
                    pass
        resid = fold.y_val - theta @ fold.phi_val.T
        total += np.mean(resid**2, axis=1)
    return total / len(folds)


def _tie_key(beta, score):
    return (score, beta.lam, beta.p, beta.f2 - beta.f1, beta.f1, beta.alpha, beta.band_kind)


def grid_search(grid, data, n, k=2):
    """Exhaustive k-fold CV grid search over ``grid``.

    Ties in CV MSE are broken in favour of smaller lambda, then smaller
    ``p``, then narrower ``[f1, f2]``.
    """
    if not grid.lam:
        raise ParameterError("grid has no lambda candidates")
    folds = _folds(data, n, k)
    trace = []
    errors = []
    for p, f1, f2, alpha, kind in grid.filter_candidates():
        try:
            proto = HyperparameterVector(p, f1, f2, alpha, 0.0, kind, grid.edges)
            F = proto.filter_matrix(n)
        except FirRegError as err:
            errors.append(err)
            continue
        scores = _scan_penalty(F.T @ F, grid.lam, folds)
        for lam, s in zip(grid.lam, scores):
            trace.append((HyperparameterVector(p, f1, f2, alpha, float(lam), kind, grid.edges), float(s)))
    valid = [(b, s) for b, s in trace if np.isfinite(s)]
    if not valid:
        msg = f"all {len(trace) + len(errors)} grid candidates failed"
        if errors:
            msg += f" (first error: {errors[0]})"
        raise TuningError(msg)
    # failed candidates (NaN score) sort last
    trace.sort(key=lambda t: _tie_key(*t) if np.isfinite(t[1]) else (math.inf,))
    best, score = trace[0]
    return TuningResult(best, score, trace)


def _free_coordinates(beta):
    kind = beta.band_kind
    names = {"bandstop": ["f1", "f2"], "highpass": ["f2"], "lowpass": ["f1"]}.get(kind, [])
    return names + ["alpha", "log_lam"]


def refine_local(start, data=None, n=None, k=2, objective=None, xatol=1e-4, maxiter=200):
    """Derivative-free (Nelder-Mead) refinement of ``start`` with ``p`` frozen.

    The continuous coordinates ``f1``, ``f2``, ``alpha`` and ``log10(lam)``
    (those relevant to the band kind) are optimised. ``objective`` maps a
    ``HyperparameterVector`` to a score and defaults to ``cv_score`` on
    ``data``. The result is never worse than ``start``; its trace lists the
    accepted (strictly improving) evaluations.
    """
    if objective is None:
        if data is None or n is None:
            raise ParameterError("refine_local needs data and n, or an objective")
        objective = lambda b: cv_score(b, data, n, k)  # noqa: E731
    names = _free_coordinates(start)
    base = asdict(start)
    lam_floor = 1e-12

    def unpack(x):
        d = dict(base)
        for name, v in zip(names, x):
            if name == "log_lam":
                d["lam"] = 10.0**v
            else:
                d[name] = float(v)
        return HyperparameterVector(**d)

    def pack(b):
        return np.array([math.log10(max(b.lam, lam_floor)) if nm == "log_lam" else getattr(b, nm) for nm in names])

    best = [start, objective(start)]
    trace = [(start, best[1])]

    def f(x):
        try:
            b = unpack(x)
            s = objective(b)
        except FirRegError:
            return math.inf
        if not np.isfinite(s):
            return math.inf
        if s < best[1]:
            best[:] = [b, s]
            trace.append((b, s))
        return s

    x0 = pack(start)
    # initial simplex steps sized to the coordinate ranges
    steps = np.array([0.5 if nm == "log_lam" else 0.02 for nm in names])
    simplex = np.vstack([x0] + [x0 + np.eye(len(names))[i] * steps[i] for i in range(len(names))])
    optimize.minimize(
        f, x0, method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": xatol, "fatol": 1e-12, "maxiter": maxiter},
    )
    return TuningResult(best[0], best[1], trace)


# -- kernel baselines ----------------------------------------------------------


@dataclass
class KernelTuningResult:
    spec: KernelSpec
    lam: float
    score: float
    trace: list = field(default_factory=list)

    @property
    def regularisation_scale(self):
        """``lam`` equals ``sigma2 / c`` of the equivalent kernel."""
        return self.lam


def tune_kernel_cv(family, data, n, k=2, alphas=None, rhos=None, lams=None):
    """Cross-validated grid search for TC/DC kernel hyperparameters.

    The penalty is ``lam * R(c=1, sigma2=1)``, so ``lam`` plays the role of
    ``sigma2 / c``. The same folds and tie-breaking (smaller ``lam`` first)
    as the filter search are used.
    """
    family = KernelFamily(family)
    if family not in (KernelFamily.TC, KernelFamily.DC):
        raise ParameterError(f"baseline tuning supports tc and dc, got {family.value}")
    alphas = np.linspace(0.5, 0.99, 20) if alphas is None else alphas
    rhos = np.linspace(0.5, 0.99, 20) if rhos is None else rhos
    lams = [float(x) for x in np.logspace(-6, 4, 21)] if lams is None else lams
    folds = _folds(data, n, k)
    trace = []
    for alpha in alphas:
        for rho in rhos if family is KernelFamily.DC else [None]:
            spec = KernelSpec(family, alpha=float(alpha), rho=0.0 if rho is None else float(rho))
            F = build_filter_factor_closed_form(spec, n)
            for lam, s in zip(lams, _scan_penalty(F.T @ F, lams, folds)):
                trace.append((spec, float(lam), float(s)))
    valid = [t for t in trace if np.isfinite(t[2])]
    if not valid:
        raise TuningError(f"all {len(trace)} {family.value} kernel candidates failed")
    spec, lam, score = min(valid, key=lambda t: (t[2], t[1], t[0].alpha, t[0].rho))
    return KernelTuningResult(spec, lam, score, trace)


def _evidence_terms(K, y):
    s, U = linalg.eigh(K)
    return np.clip(s, 0.0, None), U.T @ y


def marginal_likelihood_objective(spec, data, n):
    """``log det(S) + y^T S^{-1} y`` with ``S = Phi P Phi^T + sigma2 I`` (lower is better)."""
    phi = build_regressor(data.u, n)
    s, z = _evidence_terms(phi @ build_covariance(spec, n) @ phi.T, data.y)
    S = s + spec.sigma2
    return float(np.sum(np.log(S)) + np.sum(z**2 / S))


def marginal_likelihood_tune(family, data, n, alphas=None, rhos=None, cs=None, sigma2s=None, refine=True):
    """Empirical-Bayes tuning of a TC or DC kernel.

    Minimises ``log det(S) + y^T S^{-1} y`` with ``S = Phi P Phi^T + sigma2 I``
    over ``(c, alpha[, rho], sigma2)``: a grid scan followed (if ``refine``)
    by a Nelder-Mead polish of ``(log c, log sigma2)`` at the best kernel
    shape. Returns ``(KernelSpec, objective, trace)``.
    """
    family = KernelFamily(family)
    if family not in (KernelFamily.TC, KernelFamily.DC):
        raise ParameterError(f"marginal likelihood tuning supports tc and dc, got {family.value}")
    if n >= data.N:
        raise ParameterError(f"need n < N, got n={n}, N={data.N}")
    alphas = np.linspace(0.5, 0.99, 20) if alphas is None else np.asarray(alphas)
    rhos = np.linspace(-0.99, 0.99, 21) if rhos is None else np.asarray(rhos)
    yvar = float(np.var(data.y)) or 1.0
    cs = np.logspace(-4, 2, 25) if cs is None else np.asarray(cs)
    sigma2s = yvar * np.logspace(-6, 0, 25) if sigma2s is None else np.asarray(sigma2s)
    phi = build_regressor(data.u, n)
    y = data.y

    trace = []
    best = None
    for alpha in alphas:
        for rho in rhos if family is KernelFamily.DC else [None]:
            try:
                shape = KernelSpec(family, alpha=float(alpha), rho=0.0 if rho is None else float(rho))
            except FirRegError as err:
                trace.append((None, math.nan, f"invalid: {err}"))
                continue
            P = build_covariance(shape, n)
            if np.linalg.eigvalsh(P)[0] < -1e-10 * np.abs(P).max():
                trace.append((shape, math.nan, "skipped: P not PSD"))
                continue
            s, z = _evidence_terms(phi @ P @ phi.T, y)
            # objective for every (c, sigma2) pair at once
            S = cs[:, None, None] * s[None, None, :] + sigma2s[None, :, None]
            obj = np.sum(np.log(S), axis=2) + np.sum(z**2 / S, axis=2)
            ic, js = np.unravel_index(np.argmin(obj), obj.shape)
            val = float(obj[ic, js])
            spec = KernelSpec(family, c=float(cs[ic]), alpha=shape.alpha, rho=shape.rho, sigma2=float(sigma2s[js]))
            trace.append((spec, val, "grid"))
            if best is None or val < best[1]:
                best = (spec, val, s, z)
    if best is None:
        raise TuningError("no valid kernel candidate")

    spec, val, s, z = best
    if refine:
        def obj(x):
            S = 10.0 ** x[0] * s + 10.0 ** x[1]
            return float(np.sum(np.log(S)) + np.sum(z**2 / S))

        res = optimize.minimize(obj, [math.log10(spec.c), math.log10(spec.sigma2)], method="Nelder-Mead",
                                options={"xatol": 1e-6, "fatol": 1e-10})
        if res.fun < val:
            spec = KernelSpec(family, c=10.0 ** res.x[0], alpha=spec.alpha, rho=spec.rho, sigma2=10.0 ** res.x[1])
            val = float(res.fun)
            trace.append((spec, val, "refined"))
    return spec, val, trace
