"""Random band-limited waves psi = dim^{-1/2} sum_{theta_j in I} g_j v_j.

g_j are iid complex standard normals with E|g|^2 = 1 (real and imaginary parts
iid N(0, 1/2)).  Samples come from numpy's PCG64 generator; sample i of a run
with seed s uses the i-th child of SeedSequence(s), so every sample is
reproducible on its own.  Normals are produced by numpy's ziggurat sampler.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .baker_bv import SpectralData
from .selberg import AngleInterval
from .torus_quant import Observable, weyl_expectations


def complex_normal(rng: np.random.Generator, size) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2)


def window_vectors(sd: SpectralData, I: AngleInterval) -> np.ndarray:
    return sd.vectors[:, I.contains(sd.angles)]


@dataclass
class WaveSample:
    psi: np.ndarray
    window: AngleInterval
    dim_S: int
    seed: int
    index: int = 0


def sample_waves(basis: np.ndarray, I: AngleInterval, seed: int, n: int = 1):
    """n waves from an orthonormal basis (N x d) of the window's spectral subspace.

    Any orthonormal basis of the subspace gives the same law, by unitary
    invariance of the gaussian coefficients.
    """
    d = basis.shape[1]
    if d == 0:
        raise ValueError("window contains no eigenangles")
    children = np.random.SeedSequence(seed).spawn(n)
    out = []
    for i, ss in enumerate(children):
        g = complex_normal(np.random.default_rng(ss), d)
        out.append(WaveSample(basis @ g / np.sqrt(d), I, d, seed, i))
    return out


def sample_wave(sd: SpectralData, I: AngleInterval, seed: int) -> WaveSample:
    return sample_waves(window_vectors(sd, I), I, seed, 1)[0]


def _ks_half_normal(x):
    return float(stats.kstest(x, stats.norm(scale=np.sqrt(0.5)).cdf).statistic)


def value_statistics(w: WaveSample, coords=None):
    """KS distances of sqrt(N) Re psi and sqrt(N) Im psi against N(0, 1/2)."""
    psi = w.psi if coords is None else w.psi[coords]
    N = w.psi.shape[0]
    v = np.sqrt(N) * psi
    return _ks_half_normal(v.real), _ks_half_normal(v.imag)


def lp_norms(w: WaveSample, ps=(2, 4, np.inf)) -> dict:
    a = np.abs(w.psi)
    out = {}
    for p in ps:
        if p <= 0:
            raise ValueError("p must be positive")
        out[p] = float(a.max()) if np.isinf(p) else float(np.sum(a ** p))
    return out


def count_sign_changes(v: np.ndarray) -> int:
    """Cyclic count of adjacent strict sign changes, zero entries skipped."""
    s = np.sign(np.asarray(v, dtype=float))
    s = s[s != 0]
    if s.size < 2:
        return 0
    return int(np.sum(s != np.roll(s, -1)))


def sign_change_positions(v: np.ndarray) -> np.ndarray:
    """Indices x where v(x) and the next nonzero entry (cyclically) differ in sign."""
    v = np.asarray(v, dtype=float)
    idx = np.nonzero(v != 0)[0]
    if idx.size < 2:
        return np.zeros(0, dtype=int)
    s = np.sign(v[idx])
    return idx[s != np.roll(s, -1)]


def sign_changes(w: WaveSample):
    return count_sign_changes(w.psi.real), count_sign_changes(w.psi.imag)


def sign_change_distribution(samples, bins: int = 16) -> np.ndarray:
    """Mean of (2/N) * (counting measure of sign changes of Re psi), binned on [0, 1]."""
    if len(samples) < 20:
        raise ValueError("need at least 20 samples")
    N = samples[0].psi.shape[0]
    hist = np.zeros(bins)
    for w in samples:
        pos = sign_change_positions(w.psi.real) / N
        h, _ = np.histogram(pos, bins=bins, range=(0.0, 1.0))
        hist += h
    return 2.0 * hist / (N * len(samples))


@dataclass
class Autocorrelation:
    moment_m2: float
    moment_m4_x: float
    cross_xy: float
    predicted_m2: float
    predicted_m4_x: float
    predicted_cross: float
    stderr_m2: float
    stderr_m4_x: float
    stderr_cross: float


def autocorrelation(basis: np.ndarray, I: AngleInterval, x: int, y: int, n_samples: int,
                    seed: int) -> Autocorrelation:
    """Monte-Carlo moments at coordinates x, y and their gaussian predictions.

    Only the two rows of the basis are needed: psi(x) = row_x . g / sqrt(d).
    Predictions use E psi(x) conj psi(y) = P_xy / d and the complex Isserlis
    identity E|psi_x|^2 |psi_y|^2 = P_xx P_yy / d^2 + |P_xy|^2 / d^2.
    """
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples")
    N, d = basis.shape
    rows = basis[[x, y]]
    rng = np.random.default_rng(seed)
    G = complex_normal(rng, (d, n_samples))
    vals = rows @ G / np.sqrt(d)
    ax = N * np.abs(vals[0]) ** 2
    ay = N * np.abs(vals[1]) ** 2
    Pxx = float(np.real(np.vdot(rows[0], rows[0])))
    Pyy = float(np.real(np.vdot(rows[1], rows[1])))
    Pxy = complex(np.vdot(rows[1], rows[0]))
    se = lambda a: float(a.std(ddof=1) / np.sqrt(a.size))
    cross = ax * ay
    return Autocorrelation(
        float(ax.mean()), float((ax ** 2).mean()), float(cross.mean()),
        N * Pxx / d, 2 * (N * Pxx / d) ** 2, N ** 2 * (Pxx * Pyy + abs(Pxy) ** 2) / d ** 2,
        se(ax), se(ax ** 2), se(cross))


@dataclass
class ConcentrationReport:
    deviations: np.ndarray
    band: float
    frac_within: float
    quantiles: dict = field(default_factory=dict)


def matrix_element_concentration(basis: np.ndarray, I: AngleInterval, a: Observable,
                                 n_samples: int, seed: int, band: float = 0.1) -> ConcentrationReport:
    if not a.real:
        raise ValueError("observable must be real")
    waves = sample_waves(basis, I, seed, n_samples)
    Psi = np.stack([w.psi for w in waves], axis=1)
    dev = np.real(weyl_expectations(a, Psi)) - np.real(a.mean)
    qs = {str(q): float(np.quantile(np.abs(dev), q)) for q in (0.5, 0.9, 0.95, 0.99)}
    return ConcentrationReport(dev, band, float(np.mean(np.abs(dev) <= band)), qs)


def wave_statistics(basis: np.ndarray, I: AngleInterval, seed: int, n_samples: int,
                    observable: Observable | None = None, ks_threshold: float = 0.05) -> dict:
    """Aggregate report over n_samples waves (wave_stats.json payload)."""
    waves = sample_waves(basis, I, seed, n_samples)
    N = basis.shape[0]
    ks = np.array([value_statistics(w) for w in waves])
    sc = np.array([sign_changes(w)[0] for w in waves])
    lps = [lp_norms(w) for w in waves]
    out = {
        "N": int(N),
        "interval": I.to_dict(),
        "dim_S": int(basis.shape[1]),
        "seeds": {"root": int(seed), "count": int(n_samples)},
        "ks_real_mean": float(ks[:, 0].mean()),
        "ks_imag_mean": float(ks[:, 1].mean()),
        "ks_pass_frac": float(np.mean(ks[:, 0] <= ks_threshold)),
        "sign_changes_mean": float(sc.mean()),
        "lp": {"2": float(np.mean([d[2] for d in lps])),
               "4": float(np.mean([N * d[4] for d in lps])),
               "inf": float(np.mean([d[np.inf] for d in lps]))},
        "hist_sign_changes": sign_change_distribution(waves).tolist() if n_samples >= 20 else [],
        "obs_deviation_quantiles": {},
    }
    if observable is not None:
        Psi = np.stack([w.psi for w in waves], axis=1)
        dev = np.abs(np.real(weyl_expectations(observable, Psi)) - np.real(observable.mean))
        out["obs_deviation_quantiles"] = {str(q): float(np.quantile(dev, q))
                                          for q in (0.5, 0.9, 0.95, 0.99)}
    return out
