"""Spectral projectors of the quantized baker map and windowed statistics."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg as sla

from . import exclusion_sets as ex
from .baker_bv import BVOperator, SpectralData
from .selberg import TWO_PI, AngleInterval, functional_calculus, majorant_coefficients
from .torus_quant import (CoherentParams, Observable, TorusPoint, classical_baker,
                          coherent_state, theta_phase, weyl_expectations, weyl_quantize)


@dataclass
class ProjectorMatrix:
    entries: np.ndarray
    window: AngleInterval
    rank: int

    def axioms(self):
        P = self.entries
        herm = float(np.abs(P - P.conj().T).max())
        idem = float(np.abs(P @ P - P).max())
        tr = float(np.real(np.trace(P)))
        return {"hermitian": herm, "idempotent": idem, "trace_minus_rank": abs(tr - self.rank)}


def window_mask(sd: SpectralData, I: AngleInterval) -> np.ndarray:
    return I.contains(sd.angles)


def projector(sd: SpectralData, I: AngleInterval) -> ProjectorMatrix:
    m = window_mask(sd, I)
    V = sd.vectors[:, m]
    return ProjectorMatrix(V @ V.conj().T, I, int(m.sum()))


def window_basis(op: BVOperator, I: AngleInterval) -> np.ndarray:
    """Orthonormal basis of the range of P_I without the full spectrum.

    theta in I iff cos(theta - phi) > cos(|I|/2) with phi the arc midpoint, and
    H = (e^{-i phi} B + h.c.)/2 is a function of B, so the H-eigenvectors above
    that level span exactly the range of P_I.  The basis is not an eigenbasis
    of B when several eigenvalues share the window.
    """
    if I.length >= TWO_PI:
        return np.eye(op.N, dtype=complex)
    phi = I.start + I.length / 2
    H = np.exp(-1j * phi) * op.matrix()
    H = 0.5 * (H + H.conj().T)
    c = math.cos(I.length / 2)
    _, V = sla.eigh(H, subset_by_value=(c, np.inf), overwrite_a=True, check_finite=False)
    return V


def q_operator(sd: SpectralData, I: AngleInterval, q: Callable) -> np.ndarray:
    m = window_mask(sd, I)
    V = sd.vectors[:, m]
    w = np.asarray(q(sd.angles[m]), dtype=complex) * np.ones(int(m.sum()))
    return (V * w) @ V.conj().T


def fourier_partial_sum(q: Callable, degree: int, n_samples: int = 4096) -> dict:
    """Fourier coefficients q^(k), |k| <= degree, of a 2pi-periodic function."""
    t = TWO_PI * np.arange(n_samples) / n_samples
    c = np.fft.fft(np.asarray(q(t), dtype=complex) * np.ones(n_samples)) / n_samples
    return {k: complex(c[k % n_samples]) for k in range(-degree, degree + 1)}


def fourier_q_route(op: BVOperator, I: AngleInterval, q: Callable, J: float) -> np.ndarray:
    """(q_{J/2} G^+_{I,J/2})(B) through matrix powers up to degree J.

    q_{J/2} is the Fourier partial sum of q of degree floor(J/2); the product of
    the two trigonometric polynomials is formed by convolving coefficients.
    """
    half = J / 2
    qc = fourier_partial_sum(q, int(math.floor(half)))
    gc = majorant_coefficients(I, half)
    f = {}
    for a, ca in qc.items():
        for b, cb in gc.items():
            f[a + b] = f.get(a + b, 0) + ca * cb
    return functional_calculus(f, op)


def r_heuristic(N: int, eps: float) -> float:
    """N^{-1/12} + exp(-(pi/2) N^{2 eps}); unknown constants set to 1."""
    return N ** (-1.0 / 12.0) + math.exp(-(math.pi / 2) * N ** (2 * eps))


@dataclass
class SpectralReport:
    N: int
    interval: dict
    rank: int
    diag_mean: float
    diag_median: float
    diag_target: float
    frac_within_band: float
    band: float
    n_diag_used: int
    offdiag_max_outside: float
    offdiag_max_inside: float
    weyl_ratio: float
    rate_inv_IJ: float
    r_heuristic: float
    heuristic: bool = True
    params: dict = field(default_factory=dict)
    diag_hist: dict = field(default_factory=dict)

    def to_json(self):
        return asdict(self)


def projection_stats(P: ProjectorMatrix, params: ex.ExclusionParams, band: float = 0.05,
                     bins: int = 32) -> SpectralReport:
    E = P.entries
    N = E.shape[0]
    I = P.window
    target = I.length / TWO_PI
    mask = ex.excluded_grid(params, symmetrized=True)
    da = np.diag(mask).copy()
    d = np.real(np.diag(E))[~da]
    absE = np.abs(E)
    off = ~np.eye(N, dtype=bool)
    outside = off & ~mask
    inside = off & mask
    o_max = float(absE[outside].max()) if outside.any() else 0.0
    i_max = float(absE[inside].max()) if inside.any() else 0.0
    if d.size:
        frac = float(np.mean(np.abs(d - target) <= band))
        dmean, dmed = float(d.mean()), float(np.median(d))
        h, edges = np.histogram(d, bins=bins)
    else:
        frac, dmean, dmed = float("nan"), float("nan"), float("nan")
        h, edges = np.zeros(bins, int), np.linspace(0, 1, bins + 1)
    return SpectralReport(
        N=N, interval=I.to_dict(), rank=P.rank, diag_mean=dmean, diag_median=dmed,
        diag_target=target, frac_within_band=frac, band=band, n_diag_used=int(d.size),
        offdiag_max_outside=o_max, offdiag_max_inside=i_max,
        weyl_ratio=P.rank * TWO_PI / (N * I.length),
        rate_inv_IJ=1.0 / (I.length * max(params.J, 1e-300)),
        r_heuristic=r_heuristic(N, params.epsN), params=params.to_dict(),
        diag_hist={"counts": h.tolist(), "edges": edges.tolist()})


def weyl_count_ratio(sd: SpectralData, I: AngleInterval) -> float:
    return int(window_mask(sd, I).sum()) * TWO_PI / (sd.N * I.length)


def windowed_weyl_sum(sd: SpectralData, I: AngleInterval, f: Observable) -> complex:
    """(2pi/(N|I|)) sum_{theta_j in I} <v_j|Op(f)|v_j> = trace(P Op(f)) 2pi/(N|I|)."""
    m = window_mask(sd, I)
    if not m.any():
        raise ValueError("window contains no eigenangles")
    vals = weyl_expectations(f, sd.vectors[:, m])
    return complex(np.sum(vals)) * TWO_PI / (sd.N * I.length)


def quantum_variance(sd: SpectralData, I: AngleInterval, a: Observable) -> float:
    m = window_mask(sd, I)
    if not m.any():
        raise ValueError("window contains no eigenangles")
    vals = weyl_expectations(a, sd.vectors[:, m])
    dev = np.abs(vals - a.mean) ** 2
    return float(np.sum(dev) * TWO_PI / (sd.N * I.length))


class OutsideGoodRegion(ValueError):
    pass


def coherent_evolution_defect(c: CoherentParams, k: int, N: int, delta: float, gamma: float,
                              trunc: int = 3) -> float:
    """|| B^k Psi_{x,s} - e^{i N pi Theta_k(x)} Psi_{B^k x, s/4^k} ||_2."""
    if k == 0:
        return 0.0
    x = c.center
    if not ex.in_good_region(x.q, x.p, k, delta, gamma):
        raise OutsideGoodRegion(f"center {x.as_tuple()} not in the good region for k={k}")
    th = theta_phase(x, k, delta)
    op = BVOperator(N)
    psi = coherent_state(c, N, trunc, normalize=True)
    lhs = op.apply(psi, k)
    q, p = classical_baker(x.q, x.p, k)
    target = coherent_state(CoherentParams(TorusPoint(float(q), float(p)), c.sigma / 4 ** k),
                            N, trunc, normalize=True)
    return float(np.linalg.norm(lhs - np.exp(1j * N * np.pi * th) * target))


def egorov_defect(a: Observable, t: int, N: int, delta: float, gamma: float,
                  K: int = 128, M: int = 1024, support_tol: float = 1e-3) -> float:
    """Operator norm of B^t Op(a) B^{-t} - Op(a o B^{-t}).

    a o B^{-t} is re-expanded up to frequency K; composing with B^{-t} doubles
    the p-frequencies, so K should be about 2^t times the radius of a.
    """
    from .torus_quant import compose_with_baker

    vals = np.abs(a.on_grid(M))
    if vals.max() > 0:
        g = np.arange(M) / M
        Q, P = np.meshgrid(g, g, indexing="ij")
        supp = vals > support_tol * vals.max()
        good = ex.in_good_region(Q, P, t, delta, gamma)
        if np.any(supp & ~good):
            raise OutsideGoodRegion("observable support leaves the good region")
    else:
        return 0.0
    op = BVOperator(N)
    A = weyl_quantize(a, N)
    lhs = op.apply(op.apply(A.conj().T, t).conj().T, t)   # B^t A B^{-t}
    rhs = weyl_quantize(compose_with_baker(a, t, K, M), N)
    return float(np.linalg.norm(lhs - rhs, 2))


def dump_heatmap(M: np.ndarray, path) -> None:
    N = M.shape[0]
    A = np.abs(M)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "abs"])
        for x in range(N):
            for y in range(A.shape[1]):
                w.writerow([x, y, f"{A[x, y]:.12e}"])
