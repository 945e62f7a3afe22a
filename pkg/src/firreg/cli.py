"""Command-line entry point: ``firreg {identify,simulate,benchmark,inspect-kernel}``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure (partial
outputs are kept).
"""

import argparse
import json
import logging
import sys
from pathlib import Path

from . import io
from .bench import METHODS, export_report, run_benchmark, run_identify
from .errors import FirRegError, ParameterError
from .kernels import (
    KernelFamily,
    KernelSpec,
    build_covariance,
    build_filter_factor_closed_form,
    build_regularisation_closed_form,
    factorize_rotated,
    row_frequency_response,
)
from .simulation import BENCHMARKS, ExperimentConfig, make_dataset

log = logging.getLogger("firreg")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors: exit code 1, not argparse's 2
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _edges(text):
    try:
        edges = tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad edge list {text!r}") from None
    if len(edges) < 2 or len(edges) % 2:
        raise argparse.ArgumentTypeError("tailored edges come in pairs f1,f2[,f3,f4,...]")
    return edges


def _system(text):
    if text in BENCHMARKS:
        return text
    path = Path(text)
    if path.exists():
        try:
            return io.load_system_json(path)
        except (OSError, ValueError, KeyError, TypeError) as err:
            raise ConfigError(f"cannot load system {path}: {err!r}") from err
    raise ConfigError(f"--system must be one of {', '.join(BENCHMARKS)} or a JSON file, got {text!r}")


def _config(args):
    """Config file (if any) overridden by explicit command-line flags."""
    try:
        base = io.config_to_dict(io.load_config(args.config) if args.config else ExperimentConfig())
    except (OSError, ValueError, KeyError, TypeError) as err:
        raise ConfigError(f"cannot load config {args.config}: {err}") from err
    if getattr(args, "system", None):
        sys_ = _system(args.system)
        base["system"] = sys_ if isinstance(sys_, str) else io.system_to_dict(sys_)
    if getattr(args, "seed", None) is not None:
        base["base_seed"] = args.seed
    if getattr(args, "runs", None) is not None:
        base["runs"] = args.runs
    if getattr(args, "methods", None):
        base["methods"] = args.methods.split(",")
    if getattr(args, "tailored_edges", None):
        base["tailored_edges"] = list(args.tailored_edges)
    try:
        return io.config_from_dict(base)
    except (ParameterError, KeyError, TypeError) as err:
        raise ConfigError(str(err)) from err


def cmd_identify(args):
    cfg = _config(args)
    try:
        data = io.read_dataset(args.data)
    except (OSError, ValueError) as err:
        raise ConfigError(f"cannot read dataset {args.data}: {err}") from err
    method = args.method
    est, report = run_identify(data, method, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    io.write_estimate_csv(out / f"estimate_{method}.csv", est)
    (out / f"identify_{method}.json").write_text(json.dumps(report, indent=2, default=float))
    print(f"{method}: wrote {out / f'estimate_{method}.csv'}")


def cmd_simulate(args):
    cfg = _config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for r in range(cfg.runs):
        io.write_dataset(out / f"run_{r:03d}.csv", make_dataset(cfg, r))
    io.save_config(out / "config.json", cfg)
    print(f"wrote {cfg.runs} dataset(s) to {out}")


def cmd_benchmark(args):
    cfg = _config(args)
    report = run_benchmark(cfg, workers=args.workers, progress=lambda r: log.info("run %d done", r))
    export_report(report, args.out)
    for m, s in report.summary.items():
        print(f"{m:>9s}  median {s['median']:.3e}  q1 {s['q1']:.3e}  q3 {s['q3']:.3e}")
    for w in report.win_table:
        print(f"{w['method']} beats {w['baseline']} in {w['win_percent']:.0f}% of {w['paired_runs']} runs")
    if report.failures:
        print(f"{report.failures} failed identification(s); see per_run.csv", file=sys.stderr)
        return 2
    return 0


def cmd_inspect_kernel(args):
    try:
        spec = KernelSpec(args.family, c=args.c, rho=args.rho, alpha=args.alpha, sigma2=args.sigma2)
    except (ParameterError, ValueError) as err:
        raise ConfigError(str(err)) from err
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    n = args.n
    R = build_regularisation_closed_form(spec, n)
    F = build_filter_factor_closed_form(spec, n)
    io.write_matrix_csv(out / "P.csv", build_covariance(spec, n))
    io.write_matrix_csv(out / "R.csv", R)
    io.write_matrix_csv(out / "F.csv", F)
    lower = spec.family is KernelFamily.RANDOM_WALK
    unit = KernelSpec(spec.family, rho=spec.rho, alpha=spec.alpha)
    io.write_matrix_csv(out / "F_factorized.csv", factorize_rotated(build_regularisation_closed_form(unit, n), lower))
    for row in range(1, n + 1, args.row_step):
        freqs, mag = row_frequency_response(F, row, args.n_freq)
        io.write_frequency_response_csv(out / f"row_{row:03d}_response.csv", freqs, mag)
    print(f"wrote P, R, F and row responses for {spec.family.value} (n={n}) to {out}")


def build_parser():
    ap = _Parser(prog="firreg", description="Filter-based regularised FIR identification")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--seed", type=int, help="base RNG seed")
        p.add_argument("--system", help=f"benchmark name ({', '.join(BENCHMARKS)}) or system JSON")
        p.add_argument("--tailored-edges", type=_edges, help="stop-band edges f1,f2[,f3,f4,...]")
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("identify", help="estimate an impulse response from a dataset CSV")
    common(p)
    p.add_argument("--data", required=True, help="two-column u,y CSV (JSON sidecar optional)")
    p.add_argument("--method", choices=METHODS, default="filter")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("simulate", help="generate benchmark datasets")
    common(p)
    p.add_argument("--runs", type=int)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("benchmark", help="run a Monte Carlo comparison")
    common(p)
    p.add_argument("--runs", type=int)
    p.add_argument("--methods", help=f"comma-separated subset of {','.join(METHODS)}")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("inspect-kernel", help="dump P, R, F and row responses of a kernel")
    p.add_argument("--family", choices=[f.value for f in KernelFamily], required=True)
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--c", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=0.8)
    p.add_argument("--alpha", type=float, default=0.8)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--n-freq", type=int, default=256)
    p.add_argument("--row-step", type=int, default=1)
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_inspect_kernel)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args) or 0
    except (ConfigError, ParameterError) as err:
        print(f"config error: {err}", file=sys.stderr)
        return 1
    except (FirRegError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
