"""Windowed quantum variance of cos(2 pi q) and the windowed Weyl average against N.

    python scripts/variance_sweep.py [--n 128 256 512 1024 2048] [--start 2.1] [--len 0.9]
"""
import argparse

from bakerlab.baker_bv import BVOperator, spectral_decompose
from bakerlab.selberg import AngleInterval
from bakerlab.spectral import quantum_variance, weyl_count_ratio, windowed_weyl_sum
from bakerlab.torus_quant import Observable


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, nargs="+", default=[128, 256, 512, 1024, 2048])
    ap.add_argument("--start", type=float, default=2.1)
    ap.add_argument("--len", type=float, default=0.9)
    a = ap.parse_args()
    I = AngleInterval(a.start, a.len)
    f = Observable.cos_q(1)
    print(f"{'N':>6} {'weyl ratio':>10} {'average':>10} {'variance':>10}")
    for N in a.n:
        sd = spectral_decompose(BVOperator(N))
        print(f"{N:>6} {weyl_count_ratio(sd, I):>10.4f} {windowed_weyl_sum(sd, I, f).real:>10.5f} "
              f"{quantum_variance(sd, I, f):>10.5f}")


if __name__ == "__main__":
    main()
