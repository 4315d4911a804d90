"""Beurling function and Selberg majorant/minorant polynomials of an arc.

Angles live on R/2piZ.  For an arc I = [a, b] and degree D the majorant is the
2pi-periodization of

    g(x) = (B(D (b - x) / 2pi) + B(D (x - a) / 2pi)) / 2,

a trigonometric polynomial of degree < D with mean (|I| + 2pi/D) / 2pi.  The
minorant is 1 minus the majorant of the complementary arc.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.special import polygamma

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class AngleInterval:
    start: float
    length: float

    def __post_init__(self):
        if not 0 < self.length <= TWO_PI:
            raise ValueError("interval length must lie in (0, 2pi]")
        object.__setattr__(self, "start", float(self.start) % TWO_PI)
        object.__setattr__(self, "length", float(self.length))

    def contains(self, theta):
        if self.length >= TWO_PI:
            return np.ones(np.shape(theta), dtype=bool)
        return np.mod(np.asarray(theta) - self.start, TWO_PI) < self.length

    def complement(self) -> "AngleInterval":
        if self.length >= TWO_PI:
            raise ValueError("full circle has empty complement")
        return AngleInterval(self.start + self.length, TWO_PI - self.length)

    def to_dict(self):
        return {"start": self.start, "length": self.length}


# Beurling function

def beurling(z, tol: float = 1e-12):
    """B(z) = (sin pi z / pi)^2 (sum_{n>=0} (z-n)^-2 - sum_{n<0} (z-n)^-2 + 2/z).

    Both lattice sums are trigamma values, sum_{n>=0}(z-n)^-2 = psi1(-z) and
    sum_{n<0}(z-n)^-2 = psi1(1+z); with the reflection formula this gives

        B(z) = 1 + s (2/z - 2 psi1(1+z)),   z > 0,
        B(z) = -1 + s (2/z + 2 psi1(-z)),   z < 0,

    with s = (sin pi z / pi)^2, free of cancellation near the poles.  The
    series tail is summed exactly, so ``tol`` is met at machine precision.
    """
    z = np.asarray(z, dtype=float)
    out = np.ones_like(z)
    s = (np.sin(np.pi * z) / np.pi) ** 2
    pos = z > 0
    neg = z < 0
    zp = z[pos]
    out[pos] = 1.0 + s[pos] * (2.0 / zp - 2.0 * polygamma(1, 1.0 + zp))
    zn = z[neg]
    out[neg] = -1.0 + s[neg] * (2.0 / zn + 2.0 * polygamma(1, -zn))
    return out if out.ndim else float(out)


def beurling_series(z: float, tol: float = 1e-12) -> float:
    """Direct truncated series, M chosen from the tail bound 2/(M - |z|) <= tol.

    Slow (M ~ 2/tol terms); used as an independent check of ``beurling``.
    """
    z = float(z)
    if z == round(z):
        n = int(round(z))
        return float(np.sign(n)) if n != 0 else 1.0
    M = int(np.ceil(2.0 / tol + abs(z))) + 1
    n = np.arange(0, M + 1, dtype=float)
    m = np.arange(1, M + 1, dtype=float)
    tot = np.sum(1.0 / (z - n) ** 2) - np.sum(1.0 / (z + m) ** 2) + 2.0 / z
    return float((np.sin(np.pi * z) / np.pi) ** 2 * tot)


def _remainder_hat(t):
    """Fourier transform of R = B - sgn at frequency t (convention e^{-2 pi i x t}).

    For 0 < |t| < 1: (J(t) - 1)/(pi i t) + 1 - |t| with
    J(t) = pi t (1 - |t|) cot(pi t) + |t|;  R^(0) = 1;  for |t| >= 1 it is
    -1/(pi i t), cancelling the transform of sgn.
    """
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape, dtype=complex)
    a = np.abs(t)
    zero = a == 0
    mid = (a > 0) & (a < 1)
    far = a >= 1
    out[zero] = 1.0
    tm = t[mid]
    J = np.pi * tm * (1 - np.abs(tm)) / np.tan(np.pi * tm) + np.abs(tm)
    out[mid] = (J - 1) / (1j * np.pi * tm) + 1 - np.abs(tm)
    out[far] = -1.0 / (1j * np.pi * t[far])
    return out


def majorant_coefficients(I: AngleInterval, degree: float) -> dict:
    """Fourier coefficients g^(l), |l| <= floor(degree), of the periodized majorant."""
    L = int(np.floor(degree))
    ell = np.arange(-L, L + 1)
    alpha = I.start / TWO_PI
    beta = alpha + I.length / TWO_PI
    e_a = np.exp(-2j * np.pi * ell * alpha)
    e_b = np.exp(-2j * np.pi * ell * beta)
    ind = np.empty(ell.shape, dtype=complex)
    nz = ell != 0
    ind[nz] = (e_a[nz] - e_b[nz]) / (2j * np.pi * ell[nz])
    ind[~nz] = I.length / TWO_PI
    corr = (e_b * _remainder_hat(-ell / degree) + e_a * _remainder_hat(ell / degree)) / (2 * degree)
    c = ind + corr
    # exact band limit: |l| >= degree vanishes identically
    c[np.abs(ell) >= degree] = 0.0
    return {int(l): complex(v) for l, v in zip(ell, c)}


@dataclass(frozen=True)
class SelbergPair:
    degree: float
    interval: AngleInterval
    plus_coeffs: Mapping[int, complex] = field(default_factory=dict)
    minus_coeffs: Mapping[int, complex] = field(default_factory=dict)

    def coeffs(self, side: str):
        return self.plus_coeffs if side in ("+", "plus") else self.minus_coeffs


def selberg_pair(I: AngleInterval, degree: float) -> SelbergPair:
    if degree / TWO_PI < 1:
        raise ValueError(f"degree {degree} too small: need degree/(2 pi) >= 1")
    plus = majorant_coefficients(I, degree)
    if I.length >= TWO_PI:
        minus = {l: 0j for l in plus}
        minus[0] = complex(1 - 1 / degree)
    else:
        comp = majorant_coefficients(I.complement(), degree)
        minus = {l: -c for l, c in comp.items()}
        minus[0] = 1.0 + minus[0]
    return SelbergPair(float(degree), I, plus, minus)


def evaluate_poly(coeffs: Mapping[int, complex], theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    out = np.zeros(theta.shape, dtype=complex)
    for l, c in coeffs.items():
        out += c * np.exp(1j * l * theta)
    return out.real


def periodized_majorant(theta, I: AngleInterval, degree: float, images: int = 2000):
    """Brute-force sum_m g(theta + 2 pi m) over |m| <= images (slow check)."""
    theta = np.asarray(theta, dtype=float)
    a = I.start
    b = a + I.length
    m = np.arange(-images, images + 1)
    x = theta[..., None] + TWO_PI * m
    g = 0.5 * (beurling(degree * (b - x) / TWO_PI) + beurling(degree * (x - a) / TWO_PI))
    return g.sum(axis=-1)


def functional_calculus(coeffs: Mapping[int, complex], powers) -> np.ndarray:
    """sum_l g^(l) B^l for a unitary B.

    ``powers`` is either an object with ``N`` and ``apply(v, power)`` or a
    sequence whose entry l-1 is the dense B^l.  Negative powers use B^{-l} =
    (B^l)^dagger.
    """
    L = max([abs(l) for l in coeffs] + [0])
    if hasattr(powers, "apply"):
        N = powers.N

        def gen():
            P = np.eye(N, dtype=complex)
            for l in range(1, L + 1):
                P = powers.apply(P, 1)
                yield l, P
    else:
        seq = list(powers)
        if len(seq) < L:
            raise ValueError(f"need powers up to {L}, got {len(seq)}")
        N = seq[0].shape[0] if seq else 1

        def gen():
            for l in range(1, L + 1):
                yield l, seq[l - 1]
    F = coeffs.get(0, 0.0) * np.eye(N, dtype=complex)
    for l, P in gen():
        cp = coeffs.get(l, 0.0)
        cm = coeffs.get(-l, 0.0)
        if cp:
            F += cp * P
        if cm:
            F += cm * P.conj().T
    return F


def spectral_route(coeffs, angles, V) -> np.ndarray:
    """U diag(G(theta)) U^dagger."""
    G = evaluate_poly(coeffs, angles)
    return (V * G) @ V.conj().T


@dataclass
class SandwichReport:
    max_lower_violation: float
    max_upper_violation: float
    n_violations: int
    slack: float
    offdiag_cs_ratio_max: float
    offdiag_cs_violations: int

    @property
    def ok(self):
        return self.n_violations == 0


def sandwich_check(F_minus, P, F_plus, slack: float = 1e-8, n_pairs: int = 1000,
                   seed: int = 0) -> SandwichReport:
    dm = np.real(np.diag(F_minus))
    dp = np.real(np.diag(P))
    du = np.real(np.diag(F_plus))
    low = dm - dp
    up = dp - du
    nviol = int(np.sum(low > slack) + np.sum(up > slack))
    N = P.shape[0]
    rng = np.random.default_rng(seed)
    xs = rng.integers(0, N, n_pairs)
    ys = rng.integers(0, N, n_pairs)
    gap = np.clip(du - dp, 0, None)
    lhs = np.abs(F_plus[xs, ys] - P[xs, ys])
    rhs = np.sqrt(gap[xs] * gap[ys])
    ratio = lhs / np.maximum(rhs, 1e-300)
    cs_viol = int(np.sum(lhs > rhs + slack))
    return SandwichReport(float(max(low.max(), 0.0)), float(max(up.max(), 0.0)), nviol, slack,
                          float(np.max(np.where(rhs > 0, ratio, 0.0))), cs_viol)


def dump_coefficients(pair: SelbergPair, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ell", "re", "im", "side"])
        for side, cs in (("plus", pair.plus_coeffs), ("minus", pair.minus_coeffs)):
            for l in sorted(cs):
                c = cs[l]
                w.writerow([l, repr(float(np.real(c))), repr(float(np.imag(c))), side])
