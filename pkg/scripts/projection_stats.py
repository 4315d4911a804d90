"""Diagonal and off-diagonal statistics of P_[2.1, 3.0) at N = 1000.

Compares the fixed small-N exclusion parameters with the asymptotic schedule,
which at this size excludes every coordinate.

    python scripts/projection_stats.py [--n 1000] [--heatmap out.csv]
"""
import argparse
import warnings

from bakerlab import exclusion_sets as ex
from bakerlab.baker_bv import BVOperator, spectral_decompose
from bakerlab.selberg import AngleInterval
from bakerlab.spectral import dump_heatmap, projection_stats, projector


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--start", type=float, default=2.1)
    ap.add_argument("--len", type=float, default=0.9)
    ap.add_argument("--heatmap", default=None)
    a = ap.parse_args()
    I = AngleInterval(a.start, a.len)
    P = projector(spectral_decompose(BVOperator(a.n)), I)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sched = ex.param_schedule(a.n, a.len)
    for name, prm in (("desk", ex.desk_params(a.n)), ("schedule", sched)):
        r = projection_stats(P, prm)
        print(f"{name:9s} J={prm.J:.2f} delta={prm.delta:.3f} gamma={prm.gamma:.3f} W={prm.W:.1f}")
        print(f"          rank {r.rank}, diagonals used {r.n_diag_used}, mean {r.diag_mean:.5f} "
              f"(target {r.diag_target:.5f}), within band {r.frac_within_band:.3f}")
        print(f"          off-diagonal max outside {r.offdiag_max_outside:.4f}, inside {r.offdiag_max_inside:.4f}")
    if a.heatmap:
        dump_heatmap(P.entries, a.heatmap)


if __name__ == "__main__":
    main()
