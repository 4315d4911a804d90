"""Walsh baker map at D = 2: degeneracies, single-eigenspace Weyl law and
random-eigenbasis statistics as k grows.

    python scripts/walsh_trends.py [--k 6 8 10 12] [--seed 0]

k = 14 works but takes several minutes and about 2 GB.
"""
import argparse
import time

import numpy as np

from bakerlab.walsh import BoxIndicator, WalshParams, degeneracy_deviation, eigenbasis_statistics, per_eigenspace_weyl


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k", type=int, nargs="+", default=[6, 8, 10, 12])
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    print(f"{'k':>3} {'deg dev':>9} {'weyl dev':>9} {'QUE max':>8} {'KS max':>7} {'sign/N':>7} {'N|psi|_4^4':>10} {'s':>6}")
    for k in a.k:
        t0 = time.perf_counter()
        p = WalshParams(2, k, k // 2)
        wdev = float(np.abs(per_eigenspace_weyl(p, BoxIndicator()) - 0.5).max()) if k <= 12 else float("nan")
        s = eigenbasis_statistics(p, a.seed, check=k <= 12)
        print(f"{k:>3} {degeneracy_deviation(p):>9.6f} {wdev:>9.5f} {s.que_max_dev['q<1/2']:>8.4f} "
              f"{s.ks_max:>7.4f} {s.sign_changes_mean / p.dim:>7.4f} {s.lp_mean['4']:>10.3f} "
              f"{time.perf_counter() - t0:>6.1f}")


if __name__ == "__main__":
    main()
