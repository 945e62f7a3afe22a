"""Monte Carlo benchmark harness: identification, paired runs and reports."""

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .errors import FirRegError, ParameterError
from .estimator import build_regressor, least_squares, regularised_estimate, regularised_estimate_filter
from .io import config_to_dict, fmt
from .kernels import build_regularisation_closed_form
from .simulation import RESONANCE, make_dataset, validation_mse
from .tuning import GridSpec, grid_search, default_filter_grid, refine_local, tune_kernel_cv

log = logging.getLogger(__name__)

METHODS = ("ls", "tc", "dc", "filter", "tailored")
CHALLENGERS = ("filter", "tailored")
QUANTILE_METHOD = "linear"

PER_RUN_COLUMNS = ["run_index", "method", "mse_val", "status", "hyperparameters"]
WIN_COLUMNS = ["method", "baseline", "wins", "paired_runs", "win_percent"]
BOX_COLUMNS = ["method", "q1", "median", "q3", "whisker_low", "whisker_high", "outliers"]


def _filter_grid(cfg):
    if cfg.grid is not None:
        return cfg.grid
    return default_filter_grid(resonance=cfg.system_name in RESONANCE)


def run_identify(data, method, cfg):
    """Estimate an impulse response with one method.

    Returns ``(estimate, report)`` where ``report`` holds the tuned
    hyperparameters and the winning CV score (if any).
    """
    if method not in METHODS:
        raise ParameterError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    n, k = cfg.n, cfg.k
    phi = build_regressor(data.u, n)
    report = {"method": method}
    if method == "ls":
        est = least_squares(phi, data.y)
    elif method in ("tc", "dc"):
        res = tune_kernel_cv(method, data, n, k)
        R = res.lam * build_regularisation_closed_form(res.spec, n)
        est = regularised_estimate(phi, data.y, R)
        hyp = {"alpha": res.spec.alpha, "lambda": res.lam}
        if method == "dc":
            hyp["rho"] = res.spec.rho
        report.update(hyperparameters=hyp, cv_mse=res.score)
    else:
        grid = _filter_grid(cfg)
        if method == "tailored":
            if not cfg.tailored_edges:
                raise ParameterError("method 'tailored' needs tailored_edges")
            grid = GridSpec(p=grid.p, f1=[], f2=[], alpha=grid.alpha, lam=grid.lam, edges=cfg.tailored_edges)
        res = grid_search(grid, data, n, k)
        if cfg.refine:
            res = refine_local(res.best, data, n, k)
        beta = res.best
        est = regularised_estimate_filter(phi, data.y, beta.filter_matrix(n), beta.lam)
        report.update(hyperparameters=beta.to_dict(), cv_mse=res.cv_mse)
    est.method = method
    est.hyperparameters = report.get("hyperparameters", {})
    return est, report


@dataclass
class McReport:
    config: dict
    per_run: list  # dicts with PER_RUN_COLUMNS keys, sorted by (run_index, method)
    summary: dict = field(default_factory=dict)
    win_table: list = field(default_factory=list)
    failures: int = 0
    methods: tuple = ()

    def __post_init__(self):
        if not self.summary:
            self.summary = summarise(self.per_run, self.methods)
        if not self.win_table:
            self.win_table = win_table(self.per_run, self.methods)
        self.failures = sum(r["status"] != "ok" for r in self.per_run)


def _values(rows, method):
    return np.array([r["mse_val"] for r in rows if r["method"] == method and math.isfinite(r["mse_val"])])


def summarise(rows, methods):
    out = {}
    for m in methods:
        v = _values(rows, m)
        if v.size == 0:
            out[m] = {"count": 0, "median": math.nan, "q1": math.nan, "q3": math.nan, "min": math.nan, "max": math.nan}
            continue
        q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75], method=QUANTILE_METHOD)
        out[m] = {"count": int(v.size), "median": float(med), "q1": float(q1), "q3": float(q3),
                  "min": float(v.min()), "max": float(v.max())}
    return out


def win_table(rows, methods):
    """Percentage of paired runs in which each challenger has the lower MSE."""
    by_run = {}
    for r in rows:
        by_run.setdefault(r["run_index"], {})[r["method"]] = r["mse_val"]
    table = []
    for m in (c for c in CHALLENGERS if c in methods):
        for base in (b for b in methods if b != m and not (m == "filter" and b == "tailored")):
            pairs = [(v[m], v[base]) for v in by_run.values()
                     if m in v and base in v and math.isfinite(v[m]) and math.isfinite(v[base])]
            wins = sum(a < b for a, b in pairs)
            pct = 100.0 * wins / len(pairs) if pairs else math.nan
            table.append({"method": m, "baseline": base, "wins": wins, "paired_runs": len(pairs), "win_percent": pct})
    return table


def _one_run(cfg, run_index):
    data = make_dataset(cfg, run_index)
    system = cfg.system_spec
    val_seed = (cfg.base_seed, run_index, "validation")
    rows = []
    for method in cfg.methods:
        try:
            est, rep = run_identify(data, method, cfg)
            mse = validation_mse(est, system, cfg.N_val, val_seed, cfg.sigma_u)
            status = "ok"
            hyp = rep.get("hyperparameters", {})
        except FirRegError as err:
            log.warning("run %d, method %s failed: %s", run_index, method, err)
            mse, status, hyp = math.nan, f"failed: {err}", {}
        rows.append({"run_index": run_index, "method": method, "mse_val": mse, "status": status,
                     "hyperparameters": json.dumps(hyp, sort_keys=True)})
    return rows


def run_benchmark(cfg, workers=1, progress=None):
    """Run ``cfg.runs`` paired Monte Carlo runs over ``cfg.methods``.

    Every method of a run sees the same dataset and the same validation
    input. ``workers > 1`` spreads runs over a process pool; the report does
    not depend on scheduling.
    """
    bad = [m for m in cfg.methods if m not in METHODS]
    if bad:
        raise ParameterError(f"unknown method(s): {', '.join(bad)}")
    if "tailored" in cfg.methods and not cfg.tailored_edges:
        raise ParameterError("method 'tailored' needs tailored_edges")
    t0 = time.perf_counter()
    rows = []
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            for part in pool.map(_one_run, [cfg] * cfg.runs, range(cfg.runs)):
                rows.extend(part)
    else:
        for r in range(cfg.runs):
            rows.extend(_one_run(cfg, r))
            if progress:
                progress(r)
    order = {m: i for i, m in enumerate(cfg.methods)}
    rows.sort(key=lambda r: (r["run_index"], order[r["method"]]))
    log.info("benchmark finished in %.1f s", time.perf_counter() - t0)
    return McReport(config_to_dict(cfg), rows, methods=tuple(cfg.methods))


def boxplot_stats(values):
    """Quartiles plus Tukey whiskers (1.5 IQR) and outliers."""
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75], method=QUANTILE_METHOD)
    iqr = q3 - q1
    inside = v[(v >= q1 - 1.5 * iqr) & (v <= q3 + 1.5 * iqr)]
    outliers = v[(v < q1 - 1.5 * iqr) | (v > q3 + 1.5 * iqr)]
    return {"q1": q1, "median": med, "q3": q3, "whisker_low": inside.min(), "whisker_high": inside.max(),
            "outliers": list(outliers)}


def _write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([r[c] for c in columns])


def _num(x):
    return fmt(x) if isinstance(x, float) else x


def _json_safe(obj):
    # NaN is not valid JSON; missing statistics become null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def export_report(report, out_dir):
    """Write ``per_run.csv``, ``summary.json``, ``win_table.csv`` and ``boxplot.csv``."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "per_run.csv", PER_RUN_COLUMNS,
                   [{**r, "mse_val": fmt(r["mse_val"])} for r in report.per_run])
        _write_csv(out / "win_table.csv", WIN_COLUMNS,
                   [{k: _num(v) for k, v in r.items()} for r in report.win_table])
        box = []
        for m in report.methods:
            v = _values(report.per_run, m)
            if v.size:
                s = boxplot_stats(v)
                s["outliers"] = ";".join(fmt(x) for x in s["outliers"])
                box.append({"method": m, **{k: _num(float(x)) if k != "outliers" else x for k, x in s.items()}})
        _write_csv(out / "boxplot.csv", BOX_COLUMNS, box)
        summary = {
            "config": report.config,
            "quantile_method": "linear interpolation between order statistics (type 7)",
            "baselines": "tc/dc are re-implementations tuned by cross-validation",
            "summary": report.summary,
            "win_table": report.win_table,
            "failures": report.failures,
            "generated_at": datetime.now(timezone.utc).isoformat(),
        }
        (out / "summary.json").write_text(json.dumps(_json_safe(summary), indent=2, allow_nan=False))
    except OSError as err:
        raise OSError(f"cannot write report to {out}: {err}") from err
    return [out / f for f in ("per_run.csv", "summary.json", "win_table.csv", "boxplot.csv")]
