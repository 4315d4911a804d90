"""Walsh quantization of the D-baker map on (C^D)^{tensor k}.

Vectors of length D^k are read as k-fold tensors with the first axis the most
significant dit: x = sum_m eps_m D^{k-m}.  The map acts by

    B(v_1 x ... x v_k) = v_2 x ... x v_k x F_D^dag v_1,

so B^k = (F_D^dag)^{tensor k}, B^{2k} is the dit-wise parity and the order is
4k (2k when D = 2, where the parity is trivial).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .random_waves import count_sign_changes
from .torus_quant import build_dft

NONZERO_THRESHOLD = 1e-8


@dataclass(frozen=True)
class WalshParams:
    D: int
    k: int
    ell: int = 0

    def __post_init__(self):
        if self.D < 2:
            raise ValueError("D must be >= 2")
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 0 <= self.ell <= self.k:
            raise ValueError("ell must lie in [0, k]")

    @property
    def dim(self) -> int:
        return self.D ** self.k

    @property
    def order(self) -> int:
        return 2 * self.k if self.D == 2 else 4 * self.k


def _fdag_power(D: int, n: int) -> np.ndarray:
    F = build_dft(D).conj().T
    return np.linalg.matrix_power(F, n % 4)


def _as_tensor(p: WalshParams, v):
    v = np.asarray(v, dtype=complex)
    batch = v.shape[1:]
    return v.reshape((p.D,) * p.k + batch), batch


def _apply_on_axes(T, M, axes):
    """Apply the D x D matrix M on each listed tensor axis."""
    for ax in axes:
        T = np.moveaxis(np.tensordot(M, T, axes=([1], [ax])), 0, ax)
    return T


def walsh_transform_apply(p: WalshParams, v) -> np.ndarray:
    """W v with W(v_1 x ... x v_k) = F v_k x ... x F v_1."""
    T, batch = _as_tensor(p, v)
    nb = len(batch)
    T = np.transpose(T, tuple(range(p.k - 1, -1, -1)) + tuple(range(p.k, p.k + nb)))
    T = _apply_on_axes(T, build_dft(p.D), range(p.k))
    return np.ascontiguousarray(T).reshape((p.dim,) + batch)


def walsh_transform(p: WalshParams) -> np.ndarray:
    return walsh_transform_apply(p, np.eye(p.dim, dtype=complex))


def walsh_baker_apply(p: WalshParams, v, j: int = 1) -> np.ndarray:
    """(B^Wa)^j v via B^j = B^r o ((F^dag)^q)^{tensor k}, j = q k + r (j reduced mod order)."""
    j = int(j) % p.order
    q, r = divmod(j, p.k)
    T, batch = _as_tensor(p, v)
    nb = len(batch)
    if q % 4:
        T = _apply_on_axes(T, _fdag_power(p.D, q), range(p.k))
    if r:
        T = _apply_on_axes(T, _fdag_power(p.D, 1), range(r))
        perm = tuple(range(r, p.k)) + tuple(range(r)) + tuple(range(p.k, p.k + nb))
        T = np.transpose(T, perm)
    return np.ascontiguousarray(T).reshape((p.dim,) + batch)


def walsh_baker_matrix(p: WalshParams, j: int = 1) -> np.ndarray:
    return walsh_baker_apply(p, np.eye(p.dim, dtype=complex), j)


# coherent states and quantization

def digits(x, D: int, k: int) -> np.ndarray:
    """Dits of x, most significant first; shape (..., k)."""
    x = np.asarray(x, dtype=np.int64)
    out = np.empty(x.shape + (k,), dtype=np.int64)
    for m in range(k - 1, -1, -1):
        out[..., m] = x % D
        x = x // D
    return out


def from_coherent(p: WalshParams, c) -> np.ndarray:
    """sum_eps c_eps |eps' . eps> : coherent coordinates to position coordinates."""
    T, batch = _as_tensor(p, c)
    nb = len(batch)
    k, ell = p.k, p.ell
    perm = tuple(range(ell)) + tuple(range(k - 1, ell - 1, -1)) + tuple(range(k, k + nb))
    T = np.transpose(T, perm)
    T = _apply_on_axes(T, _fdag_power(p.D, 1), range(ell, k))
    return np.ascontiguousarray(T).reshape((p.dim,) + batch)


def to_coherent(p: WalshParams, v) -> np.ndarray:
    """<eps' . eps | v> for all coherent states, indexed by the dit string eps_1..eps_k."""
    T, batch = _as_tensor(p, v)
    nb = len(batch)
    k, ell = p.k, p.ell
    T = _apply_on_axes(T, build_dft(p.D), range(ell, k))
    perm = tuple(range(ell)) + tuple(range(k - 1, ell - 1, -1)) + tuple(range(k, k + nb))
    T = np.transpose(T, perm)
    return np.ascontiguousarray(T).reshape((p.dim,) + batch)


def coherent_basis(p: WalshParams):
    """(C, rects): columns of C are |eps' . eps>, rects[i] = (q0, q1, p0, p1)."""
    C = from_coherent(p, np.eye(p.dim, dtype=complex))
    return C, rectangles(p)


def rectangles(p: WalshParams) -> np.ndarray:
    D, k, ell = p.D, p.k, p.ell
    dg = digits(np.arange(p.dim), D, k).astype(float)
    wq = D ** -np.arange(1, ell + 1, dtype=float)
    wp = D ** -np.arange(1, k - ell + 1, dtype=float)
    q0 = dg[:, :ell] @ wq if ell else np.zeros(p.dim)
    p0 = dg[:, ell:] @ wp if k > ell else np.zeros(p.dim)
    return np.stack([q0, q0 + float(D) ** -ell, p0, p0 + float(D) ** -(k - ell)], axis=1)


@dataclass(frozen=True)
class BoxIndicator:
    """Indicator of [q0, q1) x [p0, p1); rectangle averages are exact."""
    q0: float = 0.0
    q1: float = 0.5
    p0: float = 0.0
    p1: float = 1.0

    def __call__(self, q, p):
        q = np.asarray(q)
        p = np.asarray(p)
        return ((q >= self.q0) & (q < self.q1) & (p >= self.p0) & (p < self.p1)).astype(float)

    def rect_mean(self, rects):
        a0, a1, b0, b1 = rects.T
        oq = np.clip(np.minimum(a1, self.q1) - np.maximum(a0, self.q0), 0, None) / (a1 - a0)
        op = np.clip(np.minimum(b1, self.p1) - np.maximum(b0, self.p0), 0, None) / (b1 - b0)
        return oq * op

    @property
    def mean(self):
        return (self.q1 - self.q0) * (self.p1 - self.p0)


def rect_averages(a, rects, nquad: int = 4) -> np.ndarray:
    """Average of a over each rectangle: exact for BoxIndicator, Gauss-Legendre otherwise."""
    if hasattr(a, "rect_mean"):
        return np.asarray(a.rect_mean(rects), dtype=float)
    x, w = np.polynomial.legendre.leggauss(nquad)
    x = (x + 1) / 2
    w = w / 2
    q0, q1, p0, p1 = rects.T
    Q = q0[:, None, None] + (q1 - q0)[:, None, None] * x[None, :, None]
    P = p0[:, None, None] + (p1 - p0)[:, None, None] * x[None, None, :]
    vals = np.asarray(a(Q, P), dtype=float)
    return np.einsum("rij,i,j->r", vals, w, w)


def walsh_op_diagonal(a, p: WalshParams, nquad: int = 4) -> np.ndarray:
    """Eigenvalues of Op_{k,l}(a) in the coherent basis (rectangle averages of a)."""
    return rect_averages(a, rectangles(p), nquad)


def walsh_op(a, p: WalshParams, nquad: int = 4) -> np.ndarray:
    C = from_coherent(p, np.eye(p.dim, dtype=complex))
    return (C * walsh_op_diagonal(a, p, nquad)) @ C.conj().T


# combinatorics of matrix powers

def eta(k: int, j: int) -> int:
    j4 = j % (4 * k)
    j2 = j % (2 * k)
    if 0 <= j4 <= k or 2 * k <= j4 <= 3 * k:
        return j2
    return 2 * k - j2


@dataclass
class CountPrediction:
    diag: int
    total: int
    magnitude: float
    neighbors: int


def predicted_counts(D: int, k: int, j: int) -> CountPrediction:
    e = eta(k, j)
    j2, j4 = j % (2 * k), j % (4 * k)
    if j2 != 0:
        diag = D ** e
        neigh = D ** e
    elif j4 == 2 * k:
        diag = 1 if D % 2 else 2 ** k
        neigh = 1 if D % 2 else 0
    else:
        diag = D ** k
        neigh = 0
    return CountPrediction(diag, D ** k * D ** e, float(D) ** (-e / 2), neigh)


@dataclass
class CountResult:
    diag_count: int
    offdiag_count: int
    total_count: int
    magnitudes_ok: bool
    max_magnitude_error: float
    neighbor_plus: int
    neighbor_minus: int
    min_nonzero: float
    max_below_threshold: float


def count_nonzero_entries(p: WalshParams, j: int, threshold: float = NONZERO_THRESHOLD,
                          expected_magnitude: float | None = None, C=None) -> CountResult:
    """Brute-force counts from the dense matrix of (B^Wa)^j.

    ``C`` (the coherent basis matrix) may be passed in to reuse it across j.
    """
    if p.dim > 4096:
        raise ValueError("dimension too large for dense counting")
    n = p.dim
    if C is None:
        C = from_coherent(p, np.eye(n, dtype=complex))
    A = np.abs(to_coherent(p, walsh_baker_apply(p, C, j)))
    nz = A > threshold
    diag = int(np.count_nonzero(np.diag(nz)))
    total = int(np.count_nonzero(nz))
    if expected_magnitude is None:
        j2 = j % (2 * p.k)
        expected_magnitude = 1.0 if j2 == 0 else float(p.D) ** (-eta(p.k, j) / 2)
    vals = A[nz]
    err = float(np.abs(vals - expected_magnitude).max()) if total else 0.0
    min_nz = float(vals.min()) if total else 0.0
    below = float(A[~nz].max()) if total < A.size else 0.0
    del A, nz, vals
    x = np.arange(n)
    Am = walsh_baker_apply(p, np.eye(n, dtype=complex), j)
    plus = int(np.count_nonzero(np.abs(Am[(x + 1) % n, x]) > threshold))
    minus = int(np.count_nonzero(np.abs(Am[(x - 1) % n, x]) > threshold))
    del Am
    return CountResult(diag, total - diag, total, err <= 1e-10, err, plus, minus, min_nz, below)


def check_counts(p: WalshParams, j: int, C=None) -> dict:
    """Compare brute-force counts with the closed-form predictions (integer equality).

    At powers with [j]_{2k} = 0 the matrix is the dit-wise parity (or the
    identity), whose nonzero entries have modulus 1.
    """
    pred = predicted_counts(p.D, p.k, j)
    res = count_nonzero_entries(p, j, C=C)
    ok = (res.diag_count == pred.diag and res.total_count == pred.total
          and res.magnitudes_ok and res.neighbor_plus == pred.neighbors
          and res.neighbor_minus == pred.neighbors)
    return {"D": p.D, "k": p.k, "ell": p.ell, "j": j, "ok": bool(ok),
            "diag": (res.diag_count, pred.diag), "total": (res.total_count, pred.total),
            "neighbors": ((res.neighbor_plus, res.neighbor_minus), pred.neighbors),
            "max_magnitude_error": res.max_magnitude_error, "min_nonzero": res.min_nonzero,
            "max_below_threshold": res.max_below_threshold}


def check_all_counts(p: WalshParams) -> list:
    C = from_coherent(p, np.eye(p.dim, dtype=complex))
    return [check_counts(p, j, C) for j in range(1, p.order)]


def linear_system_solution_count(D: int, k: int, s: int, alpha: int, b: int, A) -> int:
    """Number of v in [0, D-1]^k with [alpha v_m + b]_D = v_{[m+s] mod k} for m in A."""
    A = list(A)
    count = 0
    for v in itertools.product(range(D), repeat=k):
        if all((alpha * v[m] + b) % D == v[(m + s) % k] for m in A):
            count += 1
    return count


# exact eigenspace projectors

def trace_fdag_power(D: int, n: int) -> complex:
    return complex(np.trace(_fdag_power(D, n)))


def trace_power(p: WalshParams, m: int) -> complex:
    """trace (B^Wa)^m from the cycle structure of the dit shift.

    With m = q k + r, B^m = (shift by r) o (A_1 x ... x A_k), A_i = (F^dag)^{q+1}
    for i <= r and (F^dag)^q otherwise.  The shift has g = gcd(k, r) cycles,
    each visiting r/g slots of the first kind, so the trace is
    prod over cycles of trace (F^dag)^{sum of exponents}.
    """
    m %= p.order
    q, r = divmod(m, p.k)
    k, D = p.k, p.D
    if r == 0:
        return trace_fdag_power(D, q) ** k
    g = math.gcd(k, r)
    L = k // g
    expo = L * q + r // g
    return trace_fdag_power(D, expo) ** g


def degeneracies(p: WalshParams) -> np.ndarray:
    n = p.order
    tr = np.array([trace_power(p, m) for m in range(n)])
    jj = np.arange(n)
    ph = np.exp(-2j * np.pi * np.outer(jj, np.arange(n)) / n)
    d = (ph @ tr) / n
    return d


def apply_projector(p: WalshParams, jidx: int, V) -> np.ndarray:
    """P_j V = (1/order) sum_m e^{-2 pi i j m / order} B^m V."""
    n = p.order
    V = np.asarray(V, dtype=complex)
    acc = V.copy()
    Y = V
    for m in range(1, n):
        Y = walsh_baker_apply(p, Y, 1)
        acc += np.exp(-2j * np.pi * jidx * m / n) * Y
    return acc / n


def eigenprojectors(p: WalshParams) -> list:
    """Dense P_j for j = 0..order-1 (small dimensions only)."""
    if p.dim > 2048:
        raise ValueError("dense projector family limited to dimension 2048")
    n = p.order
    Ps = [np.zeros((p.dim, p.dim), dtype=complex) for _ in range(n)]
    Bm = np.eye(p.dim, dtype=complex)
    for m in range(n):
        for j in range(n):
            Ps[j] += np.exp(-2j * np.pi * j * m / n) * Bm
        Bm = walsh_baker_apply(p, Bm, 1)
    return [P / n for P in Ps]


def projector_family_defects(p: WalshParams, Ps=None) -> dict:
    Ps = eigenprojectors(p) if Ps is None else Ps
    I = np.eye(p.dim)
    s = float(np.abs(sum(Ps) - I).max())
    orth = 0.0
    idem = 0.0
    for a, Pa in enumerate(Ps):
        idem = max(idem, float(np.abs(Pa @ Pa - Pa).max()))
        for b in range(a + 1, len(Ps)):
            orth = max(orth, float(np.abs(Pa @ Ps[b]).max()))
    traces = [float(np.real(np.trace(P))) for P in Ps]
    return {"sum_minus_identity": s, "max_cross": orth, "max_idempotent": idem,
            "traces": traces}


def degeneracy_deviation(p: WalshParams) -> float:
    d = np.real(degeneracies(p))
    return float(np.max(np.abs(d * p.order / p.dim - 1)))


def return_amplitudes(p: WalshParams) -> np.ndarray:
    """<eps|B^m|eps> for m = 0..order-1 and every coherent state; shape (order, dim)."""
    C = from_coherent(p, np.eye(p.dim, dtype=complex))
    out = np.empty((p.order, p.dim), dtype=complex)
    out[0] = 1.0
    Y = C
    for m in range(1, p.order):
        Y = walsh_baker_apply(p, Y, 1)
        out[m] = np.einsum("ij,ij->j", C.conj(), Y)
    return out


def projector_diagonals_coherent(p: WalshParams, amps=None) -> np.ndarray:
    """<eps|P_j|eps> for all j at once (rows j), a DFT of the return amplitudes over m."""
    amps = return_amplitudes(p) if amps is None else amps
    return np.real(np.fft.fft(amps, axis=0)) / p.order


def projector_diagonal_coherent(p: WalshParams, jidx: int) -> np.ndarray:
    """<eps|P_j|eps> for every coherent state."""
    return projector_diagonals_coherent(p)[jidx % p.order]


def per_eigenspace_weyl(p: WalshParams, a, jidx=None, nquad: int = 4, diags=None):
    """(order / D^k) sum_eps (P_j)_{eps eps} <eps|Op(a)|eps>.

    Returns one value for an integer jidx, or the array over all j when jidx
    is None.  ``diags`` may hold precomputed projector_diagonals_coherent(p).
    """
    diags = projector_diagonals_coherent(p) if diags is None else diags
    vals = p.order / p.dim * (diags @ walsh_op_diagonal(a, p, nquad))
    return vals if jidx is None else float(vals[jidx % p.order])


# Haar random eigenbases

@dataclass
class Eigenspace:
    index: int
    eigenvalue: complex
    basis: np.ndarray


def random_eigenbasis(p: WalshParams, seed: int, spaces=None):
    """Yield an independent Haar-random orthonormal basis of every eigenspace.

    For G an N x d matrix of iid complex normals, P_j G = V Z with V any
    orthonormal basis of the eigenspace and Z = V^dag G a d x d Ginibre matrix;
    its QR factor with positive-diagonal R is V times a Haar unitary.
    """
    n = p.order
    d = np.real(degeneracies(p))
    dims = np.rint(d).astype(int)
    if np.abs(d - dims).max() > 1e-6:
        raise ValueError("eigenspace traces are not integers")
    children = np.random.SeedSequence(seed).spawn(n)
    for j in (range(n) if spaces is None else spaces):
        dj = int(dims[j])
        lam = np.exp(2j * np.pi * j / n)
        if dj == 0:
            yield Eigenspace(j, lam, np.zeros((p.dim, 0), dtype=complex))
            continue
        rng = np.random.default_rng(children[j])
        G = (rng.standard_normal((p.dim, dj)) + 1j * rng.standard_normal((p.dim, dj))) / np.sqrt(2)
        X = apply_projector(p, j, G)
        del G
        Q, R = np.linalg.qr(X)
        dR = np.diag(R)
        if np.abs(dR).min() < 1e-8 * np.abs(dR).max():
            raise ValueError(f"projected gaussian block is rank deficient in eigenspace {j}")
        yield Eigenspace(j, lam, Q * (dR / np.abs(dR)))


def _ks_stats(X):
    """KS distance of each column against N(0, 1/2)."""
    cdf = stats.norm(scale=math.sqrt(0.5)).cdf
    Xs = np.sort(X, axis=0)
    n = X.shape[0]
    F = cdf(Xs)
    i = np.arange(1, n + 1)[:, None]
    return np.maximum((i / n - F).max(axis=0), (F - (i - 1) / n).max(axis=0))


@dataclass
class BasisStats:
    D: int
    k: int
    ell: int
    n_vectors: int = 0
    ks_max: float = 0.0
    que_max_dev: dict = field(default_factory=dict)
    sign_changes_mean: float = 0.0
    lp_mean: dict = field(default_factory=dict)
    max_residual: float = 0.0
    max_orthogonality: float = 0.0
    ks_max_filtered: float | None = None
    filtered_fraction: float | None = None


def eigenbasis_statistics(p: WalshParams, seed: int, observables: dict | None = None,
                          check: bool = True, chunk: int = 256,
                          band: float | None = None) -> BasisStats:
    """Stream a random eigenbasis and reduce the per-vector statistics.

    observables maps a name to a rectangle-integrable function; its Walsh
    quantization is diagonal in the coherent basis, so <psi|Op(a)|psi> =
    sum_eps a_eps |<eps|psi>|^2.

    With ``band`` set, the KS statistic is also computed over the coherent
    coordinates eps of eigenspace j with |(P_j)_{eps eps} order - 1| <= band
    (ks_max_filtered).  This needs the dense coherent projector diagonals.
    """
    if observables is None:
        observables = {"q<1/2": BoxIndicator()}
    weights = {name: walsh_op_diagonal(a, p) for name, a in observables.items()}
    means = {name: float(getattr(a, "mean", np.mean(weights[name]))) for name, a in observables.items()}
    st = BasisStats(p.D, p.k, p.ell, que_max_dev={name: 0.0 for name in observables})
    n = p.dim
    sc_total = 0.0
    lp2 = lp4 = lpinf = 0.0
    if band is not None:
        keep = np.abs(projector_diagonals_coherent(p) * p.order - 1) <= band
        st.ks_max_filtered = 0.0
        st.filtered_fraction = float(keep.mean())
    for es in random_eigenbasis(p, seed):
        U = es.basis
        for c0 in range(0, U.shape[1], chunk):
            V = U[:, c0:c0 + chunk]
            if check:
                r = np.linalg.norm(walsh_baker_apply(p, V, 1) - es.eigenvalue * V, axis=0).max()
                st.max_residual = max(st.max_residual, float(r))
            c = to_coherent(p, V) * math.sqrt(n)
            ks = np.maximum(_ks_stats(c.real), _ks_stats(c.imag))
            st.ks_max = max(st.ks_max, float(ks.max()))
            m = None if band is None else keep[es.index]
            if m is not None and m.sum() > 1:
                ksf = np.maximum(_ks_stats(c.real[m]), _ks_stats(c.imag[m]))
                st.ks_max_filtered = max(st.ks_max_filtered, float(ksf.max()))
            a2 = np.abs(c) ** 2 / n
            for name, w in weights.items():
                dev = np.abs(w @ a2 - means[name]).max()
                st.que_max_dev[name] = max(st.que_max_dev[name], float(dev))
            for col in range(V.shape[1]):
                sc_total += count_sign_changes(V[:, col].real)
            av = np.abs(V)
            lp2 += float(np.sum(av ** 2))
            lp4 += float(np.sum(n * np.sum(av ** 4, axis=0)))
            lpinf += float(np.sum(av.max(axis=0)))
        if check and U.shape[1]:
            G = U.conj().T @ U
            G[np.diag_indices_from(G)] -= 1
            st.max_orthogonality = max(st.max_orthogonality, float(np.abs(G).max()))
        st.n_vectors += U.shape[1]
    st.sign_changes_mean = sc_total / st.n_vectors
    st.lp_mean = {"2": lp2 / st.n_vectors, "4": lp4 / st.n_vectors, "inf": lpinf / st.n_vectors}
    return st
