"""
A small Monte Carlo comparison
==============================

Run a few paired Monte Carlo runs on the ``low`` benchmark and write the
per-run table, summary and win table to ``demo_out/``. The command

    firreg benchmark --system low --runs 5 --methods ls,tc,dc,filter --out demo_out

does the same from the shell.
"""

from firreg import ExperimentConfig
from firreg.bench import export_report, run_benchmark

cfg = ExperimentConfig(system="low", runs=5, methods=("ls", "tc", "dc", "filter"))
report = run_benchmark(cfg, progress=lambda r: print(f"run {r} done"))
export_report(report, "demo_out")

for method, s in report.summary.items():
    print(f"{method:>6s}: median {s['median']:.3e} (q1 {s['q1']:.3e}, q3 {s['q3']:.3e})")
for w in report.win_table:
    print(f"{w['method']} beats {w['baseline']} in {w['wins']}/{w['paired_runs']} runs")
