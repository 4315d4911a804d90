"""Torus quantization conventions.

Position basis |x>, x in Z/NZ, Planck constant 1/(2 pi N).  The DFT is
(F_N)_{jk} = N^{-1/2} exp(-2 pi i j k / N), phase-space translations are

    T(k1, k2)|x> = exp(-pi i k1 k2 / N) exp(2 pi i k2 (x + k1) / N) |x + k1>,

and an observable with Fourier coefficients
f~(k) = int f(q, p) exp(-2 pi i (q k2 - p k1)) dq dp is quantized as
sum_k f~(k) T(k).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np


@dataclass(frozen=True)
class TorusPoint:
    q: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "q", float(self.q) % 1.0)
        object.__setattr__(self, "p", float(self.p) % 1.0)

    def as_tuple(self):
        return (self.q, self.p)


@dataclass(frozen=True)
class CoherentParams:
    center: TorusPoint
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class Observable:
    """Finite Fourier dictionary (k1, k2) -> f~(k).

    Evaluation uses f(q, p) = sum_k f~(k) exp(2 pi i (q k2 - p k1)).
    """
    coeffs: Mapping[tuple, complex] = field(default_factory=dict)
    real: bool = False

    def __post_init__(self):
        clean = {}
        for k, c in self.coeffs.items():
            k = (int(k[0]), int(k[1]))
            clean[k] = clean.get(k, 0) + complex(c)
        object.__setattr__(self, "coeffs", clean)
        if self.real:
            scale = max([abs(c) for c in clean.values()] + [1.0])
            for k, c in clean.items():
                other = clean.get((-k[0], -k[1]), 0.0)
                if abs(other - np.conj(c)) > 1e-12 * scale:
                    raise ValueError(f"declared real but f~(-k) != conj f~(k) at k={k}")

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): c}, real=np.isreal(c))

    @classmethod
    def cos_q(cls, n=1):
        """cos(2 pi n q)."""
        return cls({(0, n): 0.5, (0, -n): 0.5}, real=True)

    @classmethod
    def cos_p(cls, n=1):
        """cos(2 pi n p)."""
        return cls({(n, 0): 0.5, (-n, 0): 0.5}, real=True)

    @property
    def mean(self) -> complex:
        return self.coeffs.get((0, 0), 0.0)

    @property
    def radius(self) -> int:
        if not self.coeffs:
            return 0
        return max(max(abs(k1), abs(k2)) for k1, k2 in self.coeffs)

    def __call__(self, q, p):
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        out = np.zeros(np.broadcast(q, p).shape, dtype=complex)
        for (k1, k2), c in self.coeffs.items():
            out += c * np.exp(2j * np.pi * (q * k2 - p * k1))
        if self.real:
            return out.real
        return out

    def on_grid(self, M: int) -> np.ndarray:
        """Values at (a/M, b/M), array indexed [a, b] (q first)."""
        if 2 * self.radius >= M:
            raise ValueError(f"grid M={M} too small for radius {self.radius}")
        G = np.zeros((M, M), dtype=complex)
        for (k1, k2), c in self.coeffs.items():
            G[k2 % M, k1 % M] += c
        vals = M * np.fft.fft(np.fft.ifft(G, axis=0), axis=1)
        return vals.real if self.real else vals

    def scaled(self, s):
        return Observable({k: s * c for k, c in self.coeffs.items()},
                          real=self.real and np.isreal(s))


def build_dft(N: int) -> np.ndarray:
    if N < 1:
        raise ValueError("N must be positive")
    j = np.arange(N)
    return np.exp(-2j * np.pi * (np.outer(j, j) % N) / N) / np.sqrt(N)


def dft(v, axis=0):
    return np.fft.fft(v, axis=axis, norm="ortho")


def idft(v, axis=0):
    return np.fft.ifft(v, axis=axis, norm="ortho")


def _translation_phase(k1, k2, N):
    x = np.arange(N)
    # reduce integer arguments before scaling to keep the phases exact
    return np.exp(-1j * np.pi * ((k1 * k2) % (2 * N)) / N
                  + 2j * np.pi * ((k2 * (x + k1)) % N) / N)


def apply_phase_translation(k, v: np.ndarray) -> np.ndarray:
    k1, k2 = int(k[0]), int(k[1])
    v = np.asarray(v)
    N = v.shape[0]
    ph = _translation_phase(k1, k2, N)
    if v.ndim > 1:
        ph = ph.reshape((N,) + (1,) * (v.ndim - 1))
    return np.roll(ph * v, k1, axis=0)


def phase_translation(k, N: int) -> np.ndarray:
    k1, k2 = int(k[0]), int(k[1])
    T = np.zeros((N, N), dtype=complex)
    x = np.arange(N)
    T[(x + k1) % N, x] = _translation_phase(k1, k2, N)
    return T


def weyl_quantize(f: Observable, N: int) -> np.ndarray:
    Op = np.zeros((N, N), dtype=complex)
    x = np.arange(N)
    for (k1, k2), c in f.coeffs.items():
        if c == 0:
            continue
        Op[(x + k1) % N, x] += c * _translation_phase(k1, k2, N)
    if f.real:
        Op = 0.5 * (Op + Op.conj().T)
    return Op


def weyl_diagonal_terms(f: Observable, N: int):
    """Group the Weyl operator by diagonal offset: {k1 mod N: vector}.

    Op[(x + s) % N, x] = terms[s][x].  Cheaper than the dense matrix when the
    observable depends on few k1.
    """
    terms = {}
    for (k1, k2), c in f.coeffs.items():
        s = k1 % N
        terms[s] = terms.get(s, 0) + c * _translation_phase(k1, k2, N)
    return terms


def weyl_expectations(f: Observable, V: np.ndarray) -> np.ndarray:
    """<v_j|Op(f)|v_j> for the columns of V without forming Op."""
    N = V.shape[0]
    out = np.zeros(V.shape[1], dtype=complex)
    for s, d in weyl_diagonal_terms(f, N).items():
        out += np.einsum("xj,xj->j", np.roll(V, -s, axis=0).conj(), d[:, None] * V)
    return out.real if f.real else out


def observable_from_grid(samples, K: int, prune: float = 1e-14) -> Observable:
    """Fourier dictionary on |k1|, |k2| <= K from an M x M grid indexed [q, p]."""
    samples = np.asarray(samples)
    M = samples.shape[0]
    if samples.shape != (M, M):
        raise ValueError("grid must be square")
    if M & (M - 1) or M < 2 * K + 2:
        raise ValueError(f"need M a power of two with M >= 2K+2 (M={M}, K={K})")
    real = np.isrealobj(samples)
    F2 = np.fft.fft(np.fft.ifft(samples, axis=1), axis=0) / M
    ks = np.arange(-K, K + 1)
    block = F2[np.ix_(ks % M, ks % M)]  # [k2, k1]
    cut = prune * max(np.abs(block).max(), 1e-300)
    coeffs = {}
    for i2, k2 in enumerate(ks):
        for i1, k1 in enumerate(ks):
            c = block[i2, i1]
            if abs(c) > cut:
                coeffs[(int(k1), int(k2))] = c
    if real:
        # symmetrize so the real-flag invariant holds exactly
        sym = {}
        for k, c in coeffs.items():
            mk = (-k[0], -k[1])
            sym[k] = 0.5 * (c + np.conj(coeffs.get(mk, 0)))
            sym[mk] = np.conj(sym[k])
        coeffs = sym
    return Observable(coeffs, real=real)


# classical dynamics

def classical_baker(q, p, t: int = 1):
    q = np.asarray(q, dtype=float) % 1.0
    p = np.asarray(p, dtype=float) % 1.0
    for _ in range(abs(int(t))):
        if t > 0:
            b = np.floor(2 * q)
            q, p = 2 * q - b, (p + b) / 2
        else:
            b = np.floor(2 * p)
            q, p = (q + b) / 2, 2 * p - b
    return q, p


class DiscontinuityError(ValueError):
    pass


def theta_phase(x: TorusPoint, k: int, delta: float) -> float:
    """Accumulated cocycle sum_{l<k} Theta(B^l x)."""
    q, p = x.q, x.p
    total = 0.0
    for step in range(k):
        if delta < q < 0.5 - delta:
            pass
        elif 0.5 + delta < q < 1 - delta:
            total += q + (p + 1) / 2
        else:
            raise DiscontinuityError(
                f"iterate {step} has q={q:.6g} within delta={delta} of a discontinuity")
        q, p = classical_baker(q, p, 1)
        q, p = float(q), float(p)
    return total


def coherent_state(c: CoherentParams, N: int, trunc: int = 3,
                   normalize: bool = False) -> np.ndarray:
    if trunc < 1:
        raise ValueError("trunc must be >= 1")
    q0, p0 = c.center.q, c.center.p
    s = c.sigma
    j = np.arange(N)
    psi = np.zeros(N, dtype=complex)
    pref = (2 * N * s) ** 0.25 * np.exp(-1j * np.pi * N * q0 * p0)
    for z in range(-trunc, trunc + 1):
        q = j / N + z
        psi += pref * np.exp(2j * np.pi * N * p0 * q - s * N * np.pi * (q - q0) ** 2)
    psi /= np.sqrt(N)
    if normalize:
        psi /= np.linalg.norm(psi)
    return psi


# smooth cutoffs

def _bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = np.abs(x) < 0.5
    out[m] = np.exp(-1.0 / (1.0 - 4.0 * x[m] ** 2))
    return out


_CDF_CELLS = 2048
_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _gl_integral(lo, hi):
    """Gauss-Legendre integral of the unnormalized bump over [lo, hi] (arrays)."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    half = (hi - lo) / 2
    x = lo[..., None] + half[..., None] * (_GL_X + 1)
    return half * (_bump(x) @ _GL_W)


@lru_cache(maxsize=1)
def _bump_table():
    edges = np.linspace(-0.5, 0.5, _CDF_CELLS + 1)
    cum = np.concatenate([[0.0], np.cumsum(_gl_integral(edges[:-1], edges[1:]))])
    return edges, cum


def _bump_mass():
    return _bump_table()[1][-1]


def bump(x):
    """Unit-mass bump c exp(-1/(1-4x^2)) supported on |x| < 1/2."""
    return _bump(x) / _bump_mass()


def _bump_cdf(t):
    """Tabulated cell integrals plus a Gauss-Legendre partial cell; vectorized."""
    edges, cum = _bump_table()
    t = np.clip(np.asarray(t, dtype=float), -0.5, 0.5)
    i = np.clip(((t + 0.5) * _CDF_CELLS).astype(np.int64), 0, _CDF_CELLS - 1)
    return (cum[i] + _gl_integral(edges[i], t)) / cum[-1]


def mollified_indicator(q, beta: float):
    """Indicator of [3b/2, 1-3b/2] convolved with the bump at scale b, on R/Z.

    Vanishes on [-b, b] and equals 1 on [2b, 1-2b].
    """
    if not 0 < beta < 0.25:
        raise ValueError("beta must lie in (0, 1/4)")
    q = np.asarray(q, dtype=float) % 1.0
    a = 1.5 * beta
    vals = _bump_cdf((q - a) / beta) - _bump_cdf((q - 1 + a) / beta)
    return np.clip(vals, 0.0, 1.0)


def cutoff_observable(beta: float, n: int, K: int = 64, M: int = 512) -> Observable:
    """chi(q, p) = chit(2^n q) chit(p) as a truncated Fourier dictionary."""
    if not 0 < beta < 0.25:
        raise ValueError("beta must lie in (0, 1/4)")
    g = np.arange(M) / M
    cq = mollified_indicator((2 ** n * g) % 1.0, beta)
    cp = mollified_indicator(g, beta)
    return observable_from_grid(np.outer(cq, cp), K)


def compose_with_baker(a: Observable, t: int, K: int = 64, M: int = 512) -> Observable:
    """a o B^{-t} re-expanded on an M x M grid."""
    g = np.arange(M) / M
    Q, P = np.meshgrid(g, g, indexing="ij")
    q, p = classical_baker(Q, P, -t)
    L = M * 2 ** abs(int(t))
    if L <= 4096 and 2 * a.radius < L:
        # B^{-t} maps the M-grid into the L-grid: evaluate there by one FFT
        ia = np.rint(q * L).astype(np.int64) % L
        ib = np.rint(p * L).astype(np.int64) % L
        vals = a.on_grid(L)[ia, ib]
    else:
        vals = a(q, p)
    return observable_from_grid(vals, K)


def ergodic_average_classical(f: Observable, T: int, M: int = 128, seed: int = 0) -> float:
    """L^2 variance of the Birkhoff average (1/T) sum_{t<T} f o B^{-t}.

    Integrated over a jittered M x M grid (one uniform point per cell).  The
    inverse map shifts the binary digits of p into q, so double precision runs
    out of digits after ~50 steps; digits beyond the first 40 of each sample
    are drawn as fresh fair bits, which is exact in distribution for
    Lebesgue-uniform points.
    """
    rng = np.random.default_rng(seed)
    a = np.arange(M)
    Q, P = np.meshgrid(a, a, indexing="ij")
    q = ((Q + rng.random(Q.shape)) / M).ravel()
    p = ((P + rng.random(P.shape)) / M).ravel()
    nd = 53
    keep = 40
    digits = np.empty((q.size, T + nd), dtype=np.uint8)
    frac = p.copy()
    for i in range(keep):
        frac *= 2
        d = np.floor(frac)
        digits[:, i] = d
        frac -= d
    digits[:, keep:] = rng.integers(0, 2, size=(q.size, T + nd - keep))
    weights = 0.5 ** np.arange(1, nd + 1)
    acc = np.zeros(q.size)
    for t in range(T):
        pt = digits[:, t:t + nd] @ weights
        acc += np.real(f(q, pt))
        q = (q + digits[:, t]) / 2
    avg = acc / T
    return float(np.mean(np.abs(avg - np.real(f.mean)) ** 2))
