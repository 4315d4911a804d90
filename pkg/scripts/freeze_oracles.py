"""Recompute the frozen reference values in tests/oracle_values.json.

Eigenvectors come from numpy's general (nonsymmetric) eigensolver, a route
independent of the package's Hermitian-pencil solver; the statistics are then
formed directly from those eigenvectors.  Takes ~15 minutes on one core.

    python scripts/freeze_oracles.py [--out tests/oracle_values.json]
"""
import argparse
import json
import math
import time
from pathlib import Path

import numpy as np

from bakerlab import exclusion_sets as ex
from bakerlab.baker_bv import BVOperator, diagonal_weight
from bakerlab.random_waves import wave_statistics
from bakerlab.spectral import window_basis
from bakerlab.selberg import AngleInterval
from bakerlab.torus_quant import Observable, weyl_expectations
from bakerlab.walsh import WalshParams, degeneracy_deviation, per_eigenspace_weyl, BoxIndicator

TWO_PI = 2 * np.pi


def eig_oracle(N):
    """Angles in [0, 2pi) and orthonormalized eigenvectors from np.linalg.eig."""
    lam, V = np.linalg.eig(BVOperator(N).matrix())
    th = np.mod(np.angle(lam), TWO_PI)
    order = np.argsort(th)
    th, V = th[order], V[:, order]
    V /= np.linalg.norm(V, axis=0)
    return th, V


def in_window(th, start, length):
    return np.mod(th - start, TWO_PI) < length


def projection_block(th, V):
    N = V.shape[0]
    start, length = 2.1, 0.9
    m = in_window(th, start, length)
    P = V[:, m] @ V[:, m].conj().T
    p = ex.desk_params(N)
    mask = ex.excluded_grid(p, symmetrized=True)
    da = np.diag(mask)
    d = np.real(np.diag(P))[~da]
    target = length / TWO_PI
    absP = np.abs(P)
    off = ~np.eye(N, dtype=bool)
    f = Observable.cos_q(1)
    avg = float(np.sum(weyl_expectations(f, V[:, m]))) * TWO_PI / (N * length)
    mh = in_window(th, start, length / 2)
    avg_half = float(np.sum(weyl_expectations(f, V[:, mh]))) * TWO_PI / (N * length / 2)
    return {
        "N": N, "interval": {"start": start, "length": length},
        "params": p.to_dict(), "rank": int(m.sum()),
        "weyl_ratio": int(m.sum()) * TWO_PI / (N * length),
        "n_diag_used": int(d.size), "diag_target": target,
        "diag_mean": float(d.mean()),
        "frac_within_band": float(np.mean(np.abs(d - target) <= 0.05)),
        "offdiag_max_outside": float(absP[off & ~mask].max()),
        "offdiag_max_inside": float(absP[off & mask].max()),
        "windowed_average_cos2piq": avg, "windowed_average_cos2piq_half": avg_half,
        "thresholds": {"frac_min": 0.8, "band": 0.05, "windowed_average_max": 0.05},
    }


def variance(N, start=2.1, length=0.9):
    th, V = eig_oracle(N)
    m = in_window(th, start, length)
    f = Observable.cos_q(1)
    vals = weyl_expectations(f, V[:, m])
    return float(np.sum(np.abs(vals) ** 2) * TWO_PI / (N * length))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "tests" / "oracle_values.json"))
    a = ap.parse_args()
    out = {}
    t0 = time.time()
    th, V = eig_oracle(1000)
    out["projection_window"] = projection_block(th, V)
    print("projection_window", time.time() - t0, flush=True)
    out["variance"] = {"256": variance(256), "2048": variance(2048)}
    print("variance", time.time() - t0, flush=True)
    th, V = eig_oracle(4096)
    m = in_window(th, 3 * math.pi / 2, math.pi)
    p00 = float(np.sum(np.abs(V[0, m]) ** 2))
    del V
    out["exceptional"] = {
        "N": 4096, "P00_eig": p00,
        "P00_tridiagonal": diagonal_weight(BVOperator(4096), 0, 3 * math.pi / 2, math.pi),
        "asymptotic_bound": 0.89182655, "threshold": 0.85}
    print("exceptional", time.time() - t0, flush=True)
    I = AngleInterval(0.0, 1.0)
    basis = window_basis(BVOperator(4096), I)
    ws = wave_statistics(basis, I, 0, 50)
    out["random_waves"] = {k: ws[k] for k in ("N", "dim_S", "ks_real_mean", "ks_pass_frac",
                                               "sign_changes_mean", "lp", "hist_sign_changes")}
    out["random_waves"]["sup_norm_constant"] = ws["lp"]["inf"] * math.sqrt(4096 * 1.0) / math.sqrt(math.log(4096))
    print("waves", time.time() - t0, flush=True)
    out["walsh"] = {
        "degeneracy_deviation": {str(k): degeneracy_deviation(WalshParams(2, k, k // 2)) for k in (8, 10, 12, 14)},
        "per_eigenspace_weyl_maxdev": {
            str(k): float(np.abs(per_eigenspace_weyl(WalshParams(2, k, k // 2), BoxIndicator()) - 0.5).max())
            for k in (8, 12)},
    }
    print("walsh", time.time() - t0, flush=True)
    Path(a.out).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print("wrote", a.out)


if __name__ == "__main__":
    main()
