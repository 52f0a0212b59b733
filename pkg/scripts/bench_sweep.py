#!/usr/bin/env python3
"""Sweep a (N, m, n) grid and summarise approximation ratios per algorithm.

    python scripts/bench_sweep.py --trials 20 --out sweep.csv
"""

import argparse
import statistics
import sys
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from coflow_hpn.bench import bench, rows_to_csv
from coflow_hpn.generator import GenParams


@dataclass(frozen=True)
class SweepConfig:
    ports: tuple = (2, 4, 8)
    cores: tuple = (2, 4, 10)
    coflows: tuple = (3, 10)
    density: float = 0.3
    trials: int = 10
    oracle: bool = False
    seed: int = 0


def parse_args(argv=None) -> tuple:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--N", type=int, nargs="+", default=list(SweepConfig.ports))
    p.add_argument("--m", type=int, nargs="+", default=list(SweepConfig.cores))
    p.add_argument("--n", type=int, nargs="+", default=list(SweepConfig.coflows))
    p.add_argument("--density", type=float, default=SweepConfig.density)
    p.add_argument("--trials", type=int, default=SweepConfig.trials)
    p.add_argument("--oracle", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None, help="also write the raw rows as CSV")
    a = p.parse_args(argv)
    cfg = SweepConfig(tuple(a.N), tuple(a.m), tuple(a.n), a.density, a.trials, a.oracle, a.seed)
    return cfg, a.out


def main(argv=None) -> int:
    cfg, out = parse_args(argv)
    grid = [GenParams(N=N, m=m, n=n, density=cfg.density)
            for N in cfg.ports for m in cfg.cores for n in cfg.coflows]
    rows = bench(grid, cfg.trials, oracle=cfg.oracle, base_seed=cfg.seed)
    if out:
        out.write_text(rows_to_csv(rows))

    ratios = defaultdict(list)
    failed = 0
    for r in rows:
        if r.ratio is not None:
            ratios[r.algorithm].append(r.ratio)
        failed += r.status == "FAILED"
    print(f"{'algorithm':16s} {'runs':>5s} {'mean':>7s} {'median':>7s} {'max':>7s}")
    for name, vals in ratios.items():
        print(f"{name:16s} {len(vals):5d} {statistics.fmean(vals):7.3f} "
              f"{statistics.median(vals):7.3f} {max(vals):7.3f}")
    print(f"failed rows: {failed}")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
