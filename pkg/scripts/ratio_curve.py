#!/usr/bin/env python3
"""Print the analytic ratio curves and, optionally, plot 4K + 2*gamma against m.

    python scripts/ratio_curve.py --m-max 1000 --plot curve.png
"""

import argparse
import sys

from coflow_hpn.bench import CURVE_HEADER, CURVE_NOTE, ratio_rows


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m-min", type=int, default=4)
    p.add_argument("--m-max", type=int, default=1000)
    p.add_argument("--plot", default=None, help="PNG path; needs matplotlib")
    a = p.parse_args(argv)

    rows = ratio_rows(a.m_min, a.m_max)
    print(CURVE_NOTE)
    col = CURVE_HEADER.index("4K+2gamma")
    # K steps and powers of two are enough to see the shape
    last_k = None
    for r in rows:
        m, K = r[0], r[2]
        if K != last_k or m & (m - 1) == 0 or m == rows[-1][0]:
            print(f"m={m:5d}  gamma={r[1]:.4f}  K={K}  4K+2gamma={r[col]:.4f}")
            last_k = K

    if a.plot:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot([r[0] for r in rows], [r[col] for r in rows], label="4K + 2 gamma")
        ax.set_xscale("log")
        ax.set_xlabel("number of cores m")
        ax.set_ylabel("approximation ratio")
        ax.legend()
        fig.tight_layout()
        fig.savefig(a.plot, dpi=150)
        print(f"wrote {a.plot}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
