"""Exclusion sets around discontinuities and around the classical doubling graph.

Coordinates (x, y) index the row x and column y of an N x N matrix.  Every
predicate has a scalar form and a vectorized grid form; the grid forms are what
the spectral statistics use.
"""
from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np

BOUND_CONSTANT = 4.0


@dataclass(frozen=True)
class ExclusionParams:
    N: int
    J: float
    delta: float
    gamma: float
    W: float
    epsN: float

    @property
    def J_int(self) -> int:
        return int(math.ceil(self.J - 1e-12))

    def to_dict(self):
        return asdict(self)


def epsilon_rule(N: int, interval_len: float, eps_rule="power_half", value=None) -> float:
    if interval_len <= 0:
        raise ValueError("interval length must be positive")
    L = interval_len * math.log(N)
    if L <= 1:
        warnings.warn(f"|I| ln N = {L:.3f} <= 1: asymptotic regime not entered", stacklevel=3)
    if eps_rule == "power_half":
        eps = 1.0 / math.sqrt(L)
    elif eps_rule == "log_reciprocal":
        eps = 1.0 / math.log(L) if L > 1 else 1.0
    elif eps_rule == "custom":
        if value is None:
            raise ValueError("custom rule needs a value")
        eps = float(value)
    else:
        raise ValueError(f"unknown eps rule {eps_rule!r}")
    return float(min(max(eps, np.nextafter(0.0, 1.0)), 1.0))


def param_schedule(N: int, interval_len: float, eps_rule="power_half", value=None) -> ExclusionParams:
    eps = epsilon_rule(N, interval_len, eps_rule, value)
    lg = math.log2(N)
    J = lg * eps
    delta = 10 * math.sqrt(lg / N)
    if delta >= 0.5:
        clipped = 0.5 - 1e-9
        warnings.warn(f"delta={delta:.4f} >= 1/2 at N={N}; clipped to {clipped}", stacklevel=2)
        delta = clipped
    gamma = N ** (-1.0 / 3.0)
    W = N ** (0.5 + 2 * eps)
    return ExclusionParams(N=N, J=J, delta=delta, gamma=gamma, W=W, epsN=eps)


def desk_params(N: int, J: int = 3, delta: float = 0.01, gamma: float = 0.02,
                W: float = 5.0) -> ExclusionParams:
    """Fixed small-N exclusion parameters.

    At N ~ 10^3 the asymptotic schedule gives delta ~ 1/2 and W > N, so every
    coordinate is excluded.  These values keep a thin band around the
    discontinuities and the first three doubling graphs; epsN is set so that
    J = epsN log2 N.
    """
    return ExclusionParams(N=N, J=float(J), delta=delta, gamma=gamma, W=W,
                           epsN=J / math.log2(N))


# elementary distances

def dyadic_distance(t, J: float):
    """min_k |t - k / 2^J| over integers k."""
    s = 2.0 ** (-J)
    t = np.asarray(t, dtype=float)
    return np.abs(t - s * np.round(t / s))


def cyclic_distance(a, b, N: int):
    d = np.mod(np.asarray(a) - np.asarray(b), N)
    return np.minimum(d, N - d)


# predicates

def in_discontinuity_set(x, y, p: ExclusionParams):
    N = p.N
    xs = np.asarray(x) / N
    return (dyadic_distance(np.asarray(y) / N, p.J) <= p.delta) | (xs <= p.gamma) | (xs >= 1 - p.gamma)


def in_classical_set(x, y, k: int, W: float, N: int):
    target = (pow(2, k, N) * np.asarray(y, dtype=np.int64)) % N
    return cyclic_distance(x, target, N) <= W


def in_A(x, y, p: ExclusionParams):
    out = np.asarray(in_discontinuity_set(x, y, p))
    for k in range(1, p.J_int + 1):
        out = out | in_classical_set(x, y, k, p.W, p.N)
    return out


def diag_exclusions(p: ExclusionParams) -> np.ndarray:
    x = np.arange(p.N)
    return x[in_A(x, x, p)]


def _in_DA_mask(p: ExclusionParams) -> np.ndarray:
    x = np.arange(p.N)
    return np.asarray(in_A(x, x, p))


def excluded(x, y, p: ExclusionParams, symmetrized: bool = False):
    if not symmetrized:
        return in_A(x, y, p)
    da = _in_DA_mask(p)
    x = np.asarray(x)
    y = np.asarray(y)
    return in_A(x, y, p) | in_A(y, x, p) | da[x] | da[y]


def excluded_grid(p: ExclusionParams, symmetrized: bool = True) -> np.ndarray:
    """Boolean N x N mask, entry [x, y]."""
    x = np.arange(p.N)
    X, Y = np.meshgrid(x, x, indexing="ij")
    A = np.asarray(in_A(X, Y, p))
    if not symmetrized:
        return A
    da = np.diag(A).copy()
    return A | A.T | da[:, None] | da[None, :]


def in_good_region(q, pmom, J: float, delta: float, gamma: float):
    q = np.asarray(q, dtype=float)
    pmom = np.asarray(pmom, dtype=float)
    return (dyadic_distance(q, J) > delta) & (pmom > gamma) & (pmom < 1 - gamma)


# cardinality bounds, constants frozen at BOUND_CONSTANT

def discontinuity_bound(p: ExclusionParams, C: float = BOUND_CONSTANT) -> float:
    return C * (2 ** p.J * p.delta * p.N ** 2 + p.gamma * p.N ** 2)


def diag_bound(p: ExclusionParams, C: float = BOUND_CONSTANT) -> float:
    return C * (p.gamma * p.N + 2 ** p.J * p.delta * p.N + 2 ** p.J * p.W)


def classical_bound(W: float, N: int) -> float:
    return (2 * W + 1) * N


# dumps

def dump_pairs(mask: np.ndarray, p: ExclusionParams, path) -> None:
    xs, ys = np.nonzero(mask)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y"])
        w.writerows(zip(xs.tolist(), ys.tolist()))
    _sidecar(p, path)


def dump_diagonal(xs, p: ExclusionParams, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x"])
        w.writerows([[int(x)] for x in xs])
    _sidecar(p, path)


def _sidecar(p, path):
    with open(str(path) + ".json", "w") as fh:
        json.dump(p.to_dict(), fh, indent=2, sort_keys=True)
