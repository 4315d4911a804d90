"""Balazs-Voros quantization B_N = F_N^{-1} diag(F_{N/2}, F_{N/2}) and its spectrum."""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .torus_quant import build_dft, dft, idft


class NumericalFailure(RuntimeError):
    """Eigen-residual or orthonormality beyond tolerance."""


@dataclass(frozen=True)
class BVOperator:
    N: int

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError(f"the baker quantization needs N even (N in 2Z), got N={self.N}")

    def _forward(self, v):
        h = self.N // 2
        w = np.empty(v.shape, dtype=complex)
        w[:h] = dft(v[:h], axis=0)
        w[h:] = dft(v[h:], axis=0)
        return idft(w, axis=0)

    def _backward(self, v):
        h = self.N // 2
        w = dft(v, axis=0)
        out = np.empty(v.shape, dtype=complex)
        out[:h] = idft(w[:h], axis=0)
        out[h:] = idft(w[h:], axis=0)
        return out

    def apply(self, v, power: int = 1):
        v = np.asarray(v, dtype=complex)
        if v.shape[0] != self.N:
            raise ValueError("dimension mismatch")
        step = self._forward if power > 0 else self._backward
        for _ in range(abs(int(power))):
            v = step(v)
        return v

    def matrix(self) -> np.ndarray:
        return self.apply(np.eye(self.N, dtype=complex), 1)

    def powers(self, kmax: int):
        """Yield (k, B^k) for k = 1..kmax, each dense."""
        M = np.eye(self.N, dtype=complex)
        for k in range(1, kmax + 1):
            M = self._forward(M)
            yield k, M


def build_bv(N: int) -> BVOperator:
    return BVOperator(int(N))


def bv_dense_formula(N: int) -> np.ndarray:
    """Direct product F_N^{-1} diag(F_{N/2}, F_{N/2}) (reference, O(N^3))."""
    if N % 2:
        raise ValueError("N must be even")
    h = N // 2
    Fh = build_dft(h)
    blk = np.zeros((N, N), dtype=complex)
    blk[:h, :h] = Fh
    blk[h:, h:] = Fh
    return build_dft(N).conj().T @ blk


def apply_bv(op: BVOperator, v, power: int = 1):
    return op.apply(v, power)


def power_matrix(op: BVOperator, k: int) -> np.ndarray:
    if k < 1:
        raise ValueError("k must be positive")
    return op.apply(np.eye(op.N, dtype=complex), k)


def to_momentum_basis(M) -> np.ndarray:
    """F_N M F_N^{-1}."""
    if isinstance(M, BVOperator):
        M = M.matrix()
    return idft(dft(np.asarray(M), axis=0), axis=1)


@dataclass
class SpectralData:
    angles: np.ndarray          # sorted, in [0, 2 pi)
    vectors: np.ndarray         # column j pairs with angles[j]
    max_residual: float = 0.0
    orthonormality: float = 0.0

    @property
    def N(self):
        return self.vectors.shape[0]

    @property
    def eigenvalues(self):
        return np.exp(1j * self.angles)


def _wrap(theta):
    t = np.mod(theta, 2 * np.pi)
    t[t >= 2 * np.pi] = 0.0
    return t


def _orthonormalize_clusters(angles, V, tol=1e-8):
    """QR inside each run of angles closer than tol (circularly)."""
    n = len(angles)
    if n < 2:
        return V
    gaps = np.diff(angles)
    starts = [0] + [i + 1 for i in np.nonzero(gaps > tol)[0]]
    ends = starts[1:] + [n]
    groups = [list(range(s, e)) for s, e in zip(starts, ends)]
    if len(groups) > 1 and (angles[0] + 2 * np.pi - angles[-1]) <= tol:
        groups[0] = groups[-1] + groups[0]
        groups.pop()
    for g in groups:
        if len(g) > 1:
            Q, R = np.linalg.qr(V[:, g])
            ph = np.diag(R) / np.abs(np.diag(R))
            V[:, g] = Q * ph
    return V


def _refine_blocks(V, w, BV, lam, tol):
    """Diagonalize B inside groups of H-eigenvectors whose residual is poor.

    A poor residual means the H-eigenvalue is (nearly) shared by several
    B-eigenvalues, so the column is a mixture; neighbours in the sorted H
    spectrum are pulled in with growing width until every residual is small.
    """
    n = V.shape[1]
    order = np.argsort(w)
    pos = np.empty(n, dtype=int)
    pos[order] = np.arange(n)
    res = np.linalg.norm(BV - V * lam, axis=0)
    for width in (1, 2, 4, 8, 16, 32):
        bad = np.nonzero(res > tol)[0]
        if bad.size == 0:
            break
        mark = np.zeros(n, dtype=bool)
        for i in bad:
            mark[max(0, pos[i] - width):pos[i] + width + 1] = True
        edges = np.diff(np.r_[0, mark.astype(int), 0])
        for lo, hi in zip(np.nonzero(edges == 1)[0], np.nonzero(edges == -1)[0]):
            g = order[lo:hi]
            small = V[:, g].conj().T @ BV[:, g]
            T, Z = sla.schur(small, output="complex")
            V[:, g] = V[:, g] @ Z
            BV[:, g] = BV[:, g] @ Z
            lam[g] = np.diag(T)
        res = np.linalg.norm(BV - V * lam, axis=0)
    return V, BV, lam


def spectral_decompose(op: BVOperator, tol: float = 1e-8, method: str = "pencil",
                       phi: float = 1.0) -> SpectralData:
    """Full eigendecomposition of the unitary B_N.

    method="pencil": Hermitian eigensolve of H = (e^{-i phi} B + e^{i phi} B^dag)/2,
    which shares eigenvectors with B; eigenvalues of B are read off as Rayleigh
    quotients and near-degenerate groups of H are re-diagonalized in B.
    method="schur": complex Schur form of the dense matrix.
    """
    N = op.N
    Bm = op.matrix()
    if method == "schur":
        T, V = sla.schur(Bm, output="complex")
        lam = np.diag(T).copy()
        BV = Bm @ V
    elif method == "pencil":
        H = np.exp(-1j * phi) * Bm
        H = 0.5 * (H + H.conj().T)
        w, V = sla.eigh(H, overwrite_a=True, check_finite=False)
        del H
        BV = op.apply(V, 1)
        lam = np.einsum("ij,ij->j", V.conj(), BV)
        V, BV, lam = _refine_blocks(V, w, BV, lam, tol * 1e-2)
    else:
        raise ValueError(f"unknown method {method!r}")
    del Bm
    lam = lam / np.abs(lam)
    angles = _wrap(np.angle(lam))
    order = np.argsort(angles, kind="stable")
    angles = angles[order]
    V = np.ascontiguousarray(V[:, order])
    V = _orthonormalize_clusters(angles, V, tol)
    BV = op.apply(V, 1)
    res = np.linalg.norm(BV - V * np.exp(1j * angles), axis=0)
    worst = int(np.argmax(res))
    if res[worst] > tol:
        raise NumericalFailure(
            f"eigen-residual {res[worst]:.3e} exceeds {tol:g} at index {worst}")
    G = V.conj().T @ V
    G[np.diag_indices(N)] -= 1
    orth = float(np.abs(G).max())
    del G
    if orth > tol:
        raise NumericalFailure(f"eigenvector orthonormality defect {orth:.3e}")
    return SpectralData(angles, V, float(res[worst]), orth)


def min_gap(sd: SpectralData) -> float:
    a = sd.angles
    if len(a) < 2:
        return 2 * np.pi
    gaps = np.diff(a)
    return float(min(gaps.min(), a[0] + 2 * np.pi - a[-1]))


def diagonal_weight(op: BVOperator, x: int, start: float, length: float) -> float:
    """<x| 1_I(B) |x> for an arc I without eigenvectors.

    With phi the arc midpoint, theta lies in I iff cos(theta - phi) > cos(length/2),
    so 1_I(B) = 1_{(c, 1]}(H) for H = (e^{-i phi} B + h.c.)/2.  The spectral
    measure of |x> under H is read from a Householder tridiagonalization that
    keeps |x> fixed, then from the eigenvectors of the real tridiagonal matrix.
    """
    N = op.N
    if length >= 2 * np.pi:
        return 1.0
    phi = start + length / 2
    c = np.cos(length / 2)
    perm = np.r_[x, np.delete(np.arange(N), x)]
    H = np.exp(-1j * phi) * op.matrix()
    H = 0.5 * (H + H.conj().T)
    H = np.asfortranarray(H[np.ix_(perm, perm)])
    lwork = sla.lapack.zhetrd_lwork(N, lower=1)
    if isinstance(lwork, tuple):
        lwork = lwork[0]
    _, d, e, _, info = sla.lapack.zhetrd(H, lower=1, lwork=int(np.real(lwork)), overwrite_a=1)
    del H
    if info != 0:
        raise NumericalFailure(f"tridiagonalization failed (info={info})")
    vals, vecs = sla.eigh_tridiagonal(d, e)
    weights = vecs[0] ** 2
    return float(weights[vals > c].sum())


# binary dump

_MAGIC = b"BVSD"
_VERSION = 1


def dump_spectral(sd: SpectralData, path) -> None:
    N = sd.N
    with open(path, "wb") as fh:
        fh.write(struct.pack("<4sIQ", _MAGIC, _VERSION, N))
        fh.write(np.asarray(sd.angles, dtype="<f8").tobytes())
        fh.write(np.asarray(sd.vectors, dtype="<c16").tobytes(order="F"))


def load_spectral(path) -> SpectralData:
    with open(path, "rb") as fh:
        magic, version, N = struct.unpack("<4sIQ", fh.read(16))
        if magic != _MAGIC or version != _VERSION:
            raise ValueError("not a BVSD file")
        angles = np.frombuffer(fh.read(8 * N), dtype="<f8").copy()
        vec = np.frombuffer(fh.read(16 * N * N), dtype="<c16").reshape((N, N), order="F")
    return SpectralData(angles, np.array(vec))
