"""Command line driver: one subcommand per experiment, JSON/CSV artifacts out.

Every JSON artifact carries a ``meta`` block with the config echo, package
version, seed, wall-clock seconds, a UTC timestamp and a sha256 determinism
hash.  The hash covers everything except ``meta.timestamp`` and
``meta.wall_clock_s``, so identical configs give identical hashes.  CSV
artifacts get the same block in a ``<name>.meta.json`` sidecar.

The thread budget comes from ``--threads`` or the ``BAKERLAB_THREADS``
environment variable and is handed to the BLAS/OpenMP pools before numpy is
imported (it has no effect when the CLI is called from an already running
interpreter).

Exit codes: 0 ok, 2 config error, 3 failed --check, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import math
import os
import sys
import time
from importlib import resources
from pathlib import Path

EXIT_OK, EXIT_CONFIG, EXIT_CHECK, EXIT_NUMERIC = 0, 2, 3, 4
THREADS_ENV = "BAKERLAB_THREADS"
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")
VOLATILE = ("timestamp", "wall_clock_s")


class ConfigError(ValueError):
    pass


# output helpers

def _jsonable(x):
    import numpy as np

    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else None
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    return x


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False)


def load_schema(name: str) -> dict:
    """Shipped JSON schema for an output file, e.g. "weyl_report" or "csv_meta"."""
    return json.loads(resources.files("bakerlab").joinpath("schemas", f"{name}.schema.json").read_text())


def determinism_hash(doc: dict) -> str:
    """sha256 of the document with the volatile meta fields and the hash removed."""
    d = json.loads(json.dumps(doc))
    meta = d.get("meta", {})
    for key in VOLATILE + ("determinism_hash",):
        meta.pop(key, None)
    return hashlib.sha256(_canonical(d).encode()).hexdigest()


class Run:
    """Collects config, timing and written files for one invocation."""

    def __init__(self, cfg: dict):
        from . import __version__

        self.cfg = cfg
        self.version = __version__
        self.t0 = time.perf_counter()
        self.out = Path(cfg["out"])
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = []

    def meta(self) -> dict:
        return {"config": self.cfg, "version": self.version, "seed": self.cfg.get("seed"),
                "wall_clock_s": round(time.perf_counter() - self.t0, 6),
                "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")}

    def write_json(self, name: str, payload: dict) -> Path:
        doc = _jsonable(dict(payload))
        doc["meta"] = self.meta()
        doc["meta"]["determinism_hash"] = determinism_hash(doc)
        path = self.out / name
        path.write_text(_canonical(doc) + "\n")
        self.files.append(str(path))
        return path

    def write_csv(self, name: str, header, rows, payload_extra=None) -> Path:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        text = buf.getvalue()
        path = self.out / name
        path.write_text(text)
        side = {"file": name, "sha256": hashlib.sha256(text.encode()).hexdigest()}
        if payload_extra:
            side.update(payload_extra)
        self.write_json(name + ".meta.json", side)
        self.files.append(str(path))
        return path

    def write_report(self, name: str, payload: dict) -> Path:
        """JSON report, or a flat key,value CSV when --format csv."""
        if self.cfg.get("format") == "csv":
            rows = sorted(_flatten(_jsonable(payload)).items())
            return self.write_csv(name + ".csv", ["key", "value"], rows)
        return self.write_json(name + ".json", payload)


def _flatten(d, prefix=""):
    out = {}
    if isinstance(d, dict):
        for k, v in d.items():
            out.update(_flatten(v, f"{prefix}{k}."))
    elif isinstance(d, list):
        for i, v in enumerate(d):
            out.update(_flatten(v, f"{prefix}{i}."))
    else:
        out[prefix[:-1]] = d
    return out


def _heatmap_rows(A):
    import numpy as np

    A = np.abs(A)
    n, m = A.shape
    for x in range(n):
        row = A[x]
        for y in range(m):
            yield (x, y, f"{row[y]:.12e}")


# validation

def _need(cond, msg):
    if not cond:
        raise ConfigError(msg)


def _interval(start, length):
    from .selberg import TWO_PI, AngleInterval

    _need(length is not None and 0 < length <= TWO_PI,
          f"--len must lie in (0, 2pi], got {length}")
    return AngleInterval(start, length)


def _even_n(n, name="--n"):
    _need(n is not None and n >= 2 and n % 2 == 0, f"{name} must be an even integer >= 2, got {n}")


# subcommands

def cmd_powers(a, run: Run):
    import numpy as np

    from .baker_bv import BVOperator
    from .exclusion_sets import in_classical_set

    _even_n(a.n)
    _need(a.k_max >= 1, "--k-max must be >= 1")
    op = BVOperator(a.n)
    x = np.arange(a.n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    stats = []
    ok = True
    M = np.eye(a.n, dtype=complex)
    for k in range(1, a.k_max + 1):
        M = op.apply(M, 1)
        A = np.abs(M)
        on = in_classical_set(X, Y, k, a.width, a.n)
        on_max = float(A[on].max()) if on.any() else 0.0
        off_max = float(A[~on].max()) if (~on).any() else 0.0
        stats.append({"k": k, "on_max": on_max, "off_max": off_max,
                      "on_mass": float((A[on] ** 2).sum() / a.n)})
        ok &= on_max > off_max or not (~on).any()
        run.write_csv(f"powers_k{k}.csv", ["x", "y", "abs"], _heatmap_rows(A))
    run.write_report("powers_summary", {"N": a.n, "width": a.width, "per_k": stats})
    return ok


def _decompose(n):
    from .baker_bv import BVOperator, spectral_decompose

    return spectral_decompose(BVOperator(n))


def cmd_projection(a, run: Run):
    from . import exclusion_sets as ex
    from .spectral import projection_stats, projector

    _even_n(a.n)
    I = _interval(a.start, a.len)
    sd = _decompose(a.n)
    P = projector(sd, I)
    if a.exclusion == "schedule":
        params = ex.param_schedule(a.n, I.length, a.eps_rule, a.eps)
    else:
        params = ex.desk_params(a.n)
    rep = projection_stats(P, params, band=a.band).to_json()
    rep["empty_window"] = P.rank == 0
    rep["axioms"] = P.axioms()
    run.write_csv("projection_heatmap.csv", ["x", "y", "abs"], _heatmap_rows(P.entries))
    run.write_report("projection_report", rep)
    return (P.rank > 0 and rep["frac_within_band"] >= 0.8
            and rep["offdiag_max_outside"] < rep["offdiag_max_inside"])


def cmd_weyl(a, run: Run):
    from .spectral import weyl_count_ratio, windowed_weyl_sum
    from .torus_quant import Observable

    _even_n(a.n)
    I = _interval(a.start, a.len)
    sd = _decompose(a.n)
    ratio = weyl_count_ratio(sd, I)
    rank = int(I.contains(sd.angles).sum())
    avg = windowed_weyl_sum(sd, I, Observable.cos_q(1)) if rank else float("nan")
    run.write_report("weyl_report", {
        "N": a.n, "interval": I.to_dict(), "rank": rank, "weyl_ratio": ratio,
        "windowed_average_cos2piq": float(avg.real) if rank else None,
        "residual": sd.max_residual})
    return abs(ratio - 1) <= 0.10 and rank > 0 and abs(avg) <= 0.05


def cmd_variance(a, run: Run):
    from .spectral import quantum_variance
    from .torus_quant import Observable

    ns = a.n if isinstance(a.n, list) else [a.n]
    for n in ns:
        _even_n(n)
    I = _interval(a.start, a.len)
    obs = Observable.cos_q(1)
    rows = []
    for n in ns:
        sd = _decompose(n)
        rows.append({"N": n, "rank": int(I.contains(sd.angles).sum()),
                     "variance": quantum_variance(sd, I, obs)})
    run.write_report("variance_report", {"interval": I.to_dict(), "observable": "cos(2 pi q)",
                                         "per_N": rows})
    by_n = sorted(rows, key=lambda r: r["N"])
    return all(b["variance"] < a_["variance"] for a_, b in zip(by_n, by_n[1:]))


def cmd_randomwave(a, run: Run):
    import numpy as np

    from .baker_bv import BVOperator
    from .random_waves import wave_statistics
    from .spectral import window_basis
    from .torus_quant import Observable

    _even_n(a.n)
    I = _interval(a.start, a.len)
    _need(a.samples >= 1, "--samples must be >= 1")
    basis = window_basis(BVOperator(a.n), I)
    _need(basis.shape[1] > 0, "window contains no eigenangles")
    rep = wave_statistics(basis, I, a.seed, a.samples, observable=Observable.cos_q(1))
    run.write_report("wave_stats", rep)
    N = a.n
    h = np.asarray(rep["hist_sign_changes"])
    return (rep["ks_pass_frac"] >= 0.9 and 0.45 * N <= rep["sign_changes_mean"] <= 0.55 * N
            and 0.98 <= rep["lp"]["2"] <= 1.02 and 1.8 <= rep["lp"]["4"] <= 2.2
            and h.size > 0 and bool(np.all(np.abs(h - 1.0 / h.size) <= 0.02)))


def cmd_walsh(a, run: Run):
    import numpy as np

    from .walsh import WalshParams, check_all_counts, degeneracies, eigenbasis_statistics

    _need(a.d is not None and a.d >= 2, "--d must be >= 2")
    _need(a.k is not None and a.k >= 1, "--k must be >= 1")
    ell = a.k // 2 if a.ell is None else a.ell
    _need(0 <= ell <= a.k, f"--ell must lie in [0, {a.k}]")
    p = WalshParams(a.d, a.k, ell)
    _need(p.dim <= 2 ** 16, f"D^k = {p.dim} exceeds the supported 2^16")
    deg = np.real(degeneracies(p))
    rep = {"D": p.D, "k": p.k, "ell": p.ell, "order": p.order, "dim": p.dim,
           "degeneracies": np.rint(deg).astype(int).tolist(),
           "degeneracy_deviation": float(np.max(np.abs(deg * p.order / p.dim - 1)))}
    ok = True
    if p.dim <= 3125:
        res = check_all_counts(p)
        bad = [r for r in res if not r["ok"]]
        rep["count_check"] = "pass" if not bad else "fail: " + "; ".join(
            f"j={r['j']} diag={r['diag']} total={r['total']} neighbors={r['neighbors']}"
            for r in bad)
        ok &= not bad
    else:
        rep["count_check"] = "skipped: dimension above 3125"
    if not a.skip_basis:
        _need(a.band is None or (a.band > 0 and p.dim <= 2 ** 13),
              "--band must be positive and needs D^k <= 8192")
        st = eigenbasis_statistics(p, a.seed, band=a.band)
        if a.band is not None:
            rep.update({"band": a.band, "ks_max_filtered": st.ks_max_filtered,
                        "filtered_fraction": st.filtered_fraction})
        rep.update({"que_max_dev": st.que_max_dev["q<1/2"], "ks_max": st.ks_max,
                    "sign_changes_mean": st.sign_changes_mean, "lp_mean": st.lp_mean,
                    "max_residual": st.max_residual, "max_orthogonality": st.max_orthogonality,
                    "n_vectors": st.n_vectors})
    run.write_report("walsh_report", rep)
    return ok


def cmd_exceptional(a, run: Run):
    from .baker_bv import BVOperator, diagonal_weight

    _need(1 <= a.k_min <= a.k_max <= 13, "need 1 <= --k-min <= --k-max <= 13")
    I = _interval(a.start, a.len)
    rows = []
    for K in range(a.k_min, a.k_max + 1):
        N = 2 ** K
        rows.append({"K": K, "N": N, "P00": diagonal_weight(BVOperator(N), 0, I.start, I.length)})
    run.write_report("exceptional_report", {"interval": I.to_dict(), "asymptotic_bound": 0.89182655,
                                            "per_N": rows})
    at12 = [r["P00"] for r in rows if r["K"] == 12]
    return all(v >= 0.85 for v in at12)


COMMANDS = {
    "powers": cmd_powers, "projection": cmd_projection, "weyl": cmd_weyl,
    "variance": cmd_variance, "randomwave": cmd_randomwave, "walsh": cmd_walsh,
    "exceptional": cmd_exceptional,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="bakerlab",
        description="Quantized baker map experiments. Windows are half-open arcs "
                    "[start, start+len) in radians.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--format", choices=("json", "csv"), default="json",
                        help="report format (heatmaps are always CSV)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help=f"thread budget (default: ${THREADS_ENV} or library default)")
    common.add_argument("--check", action="store_true",
                        help="exit 3 when the run misses its acceptance target")
    win = argparse.ArgumentParser(add_help=False)
    win.add_argument("--start", type=float, default=2.1, help="window start (radians)")
    win.add_argument("--len", type=float, default=0.9, help="window length (radians)")
    sub = ap.add_subparsers(dest="subcommand", required=True)

    s = sub.add_parser("powers", parents=[common], help="|B^k| heatmaps, k = 1..k-max")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--k-max", type=int, default=3)
    s.add_argument("--width", type=float, default=2.0,
                   help="half-width of the classical band |x - 2^k y| <= width")

    s = sub.add_parser("projection", parents=[common, win], help="spectral projector heatmap and stats")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--band", type=float, default=0.05)
    s.add_argument("--exclusion", choices=("desk", "schedule"), default="desk",
                   help="fixed small-N exclusion parameters or the asymptotic schedule")
    s.add_argument("--eps-rule", choices=("power_half", "log_reciprocal", "custom"),
                   default="power_half")
    s.add_argument("--eps", type=float, default=None, help="value for --eps-rule custom")

    s = sub.add_parser("weyl", parents=[common, win], help="eigenangle count in a window")
    s.add_argument("--n", type=int, required=True)

    s = sub.add_parser("variance", parents=[common, win], help="windowed quantum variance of cos(2 pi q)")
    s.add_argument("--n", type=int, nargs="+", required=True)

    s = sub.add_parser("randomwave", parents=[common, win], help="random band-limited wave statistics")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--samples", type=int, default=50)

    s = sub.add_parser("walsh", parents=[common], help="Walsh-quantized baker map report")
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--ell", type=int, default=None, help="default floor(k/2)")
    s.add_argument("--skip-basis", action="store_true", help="skip random eigenbasis statistics")
    s.add_argument("--band", type=float, default=None,
                   help="also report KS over coherent coordinates with |(P_j)_ee order - 1| <= band")

    s = sub.add_parser("exceptional", parents=[common], help="P_00 sweep over N = 2^K")
    s.add_argument("--k-min", type=int, default=8)
    s.add_argument("--k-max", type=int, default=13)
    s.add_argument("--start", type=float, default=3 * math.pi / 2)
    s.add_argument("--len", type=float, default=math.pi)
    return ap


def _set_threads(n):
    if n is None:
        env = os.environ.get(THREADS_ENV)
        if env is None:
            return None
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV} must be an integer, got {env!r}")
    if n < 1:
        raise ConfigError("thread count must be >= 1")
    for var in _THREAD_VARS:
        os.environ[var] = str(n)
    return n


def main(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_CONFIG
    try:
        threads = _set_threads(a.threads)
        cfg = {k: v for k, v in sorted(vars(a).items())}
        cfg["threads"] = threads
        run = Run(cfg)
        from .baker_bv import NumericalFailure

        try:
            ok = COMMANDS[a.subcommand](a, run)
        except NumericalFailure as e:
            print(f"numerical failure: {e}", file=sys.stderr)
            return EXIT_NUMERIC
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    for f in run.files:
        print(f)
    if a.check and not ok:
        print(f"check failed: {a.subcommand}", file=sys.stderr)
        return EXIT_CHECK
    if a.check:
        print(f"check passed: {a.subcommand}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
