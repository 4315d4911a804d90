"""P_00 for the half-circle window [3 pi/2, 5 pi/2) at N = 2^K.

    python scripts/exceptional_sweep.py [--k-min 6] [--k-max 12]
"""
import argparse
import math
import time

from bakerlab.baker_bv import BVOperator, diagonal_weight

BOUND = 0.89182655


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--k-min", type=int, default=6)
    ap.add_argument("--k-max", type=int, default=12)
    a = ap.parse_args()
    print(f"{'K':>3} {'N':>6} {'P00':>10} {'P00 - bound':>12} {'s':>7}")
    for K in range(a.k_min, a.k_max + 1):
        t0 = time.perf_counter()
        v = diagonal_weight(BVOperator(2 ** K), 0, 3 * math.pi / 2, math.pi)
        print(f"{K:>3} {2 ** K:>6} {v:>10.6f} {v - BOUND:>12.6f} {time.perf_counter() - t0:>7.1f}")


if __name__ == "__main__":
    main()
