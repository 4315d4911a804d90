import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bakerlab.torus_quant import (CoherentParams, DiscontinuityError, Observable, TorusPoint,
                                  apply_phase_translation, build_dft, classical_baker,
                                  coherent_state, compose_with_baker, cutoff_observable, dft,
                                  ergodic_average_classical, idft, mollified_indicator,
                                  observable_from_grid, phase_translation, theta_phase,
                                  weyl_expectations, weyl_quantize)


def test_dft_small_cases():
    assert np.allclose(build_dft(1), [[1]])
    assert np.allclose(build_dft(2), np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    F = build_dft(4)
    assert np.abs(F.conj().T @ F - np.eye(4)).max() <= 1e-14


@given(st.integers(1, 64), st.integers(0, 2 ** 31))
@settings(max_examples=30, deadline=None)
def test_dft_matches_fft(N, seed):
    v = np.random.default_rng(seed).standard_normal(N) + 0j
    assert np.allclose(build_dft(N) @ v, dft(v), atol=1e-12)
    assert np.allclose(idft(dft(v)), v, atol=1e-12)


def test_phase_translation_examples():
    N = 8
    e = np.eye(N)
    assert np.allclose(apply_phase_translation((1, 0), e[:, 3]), e[:, 4])
    assert np.allclose(apply_phase_translation((0, 1), e[:, 3]), np.exp(2j * np.pi * 3 / N) * e[:, 3])
    out = apply_phase_translation((1, 1), np.eye(2)[:, 1])
    assert np.allclose(out, [-1j, 0])


@given(st.integers(2, 24), st.integers(-30, 30), st.integers(-30, 30),
       st.integers(-30, 30), st.integers(-30, 30))
@settings(max_examples=60, deadline=None)
def test_translation_group_law(N, a1, a2, b1, b2):
    # T(a) T(b) = e^{pi i (a2 b1 - a1 b2)/N} T(a+b)
    Ta, Tb = phase_translation((a1, a2), N), phase_translation((b1, b2), N)
    Tab = phase_translation((a1 + b1, a2 + b2), N)
    ph = np.exp(1j * np.pi * (a2 * b1 - a1 * b2) / N)
    assert np.abs(Ta @ Tb - ph * Tab).max() <= 1e-10
    assert np.abs(Ta.conj().T @ Ta - np.eye(N)).max() <= 1e-12


def test_weyl_examples():
    N = 10
    x = np.arange(N)
    f = Observable({(0, 1): 1})
    assert np.allclose(weyl_quantize(f, N), np.diag(np.exp(2j * np.pi * x / N)))
    assert abs(np.trace(weyl_quantize(f, N)) / N) < 1e-14
    assert np.allclose(weyl_quantize(Observable.constant(2.5), N), 2.5 * np.eye(N))


@given(st.integers(2, 20), st.integers(0, 2 ** 31))
@settings(max_examples=25, deadline=None)
def test_weyl_real_observable_hermitian_and_expectations(N, seed):
    rng = np.random.default_rng(seed)
    c = {}
    for _ in range(4):
        k = tuple(int(v) for v in rng.integers(-3, 4, 2))
        z = complex(rng.standard_normal(), rng.standard_normal())
        c[k] = c.get(k, 0) + z
        mk = (-k[0], -k[1])
        c[mk] = c.get(mk, 0) + np.conj(z) if mk != k else c[k].real
    f = Observable(c, real=True)
    A = weyl_quantize(f, N)
    assert np.abs(A - A.conj().T).max() <= 1e-12
    V = rng.standard_normal((N, 3)) + 1j * rng.standard_normal((N, 3))
    direct = np.einsum("xj,xj->j", V.conj(), A @ V).real
    assert np.allclose(weyl_expectations(f, V), direct, atol=1e-10)


def test_observable_from_grid():
    g = np.arange(64) / 64
    Q, P = np.meshgrid(g, g, indexing="ij")
    c = observable_from_grid(np.full((64, 64), 3.0), 4)
    assert set(c.coeffs) == {(0, 0)} and abs(c.coeffs[(0, 0)] - 3) < 1e-12
    f = observable_from_grid(np.cos(2 * np.pi * Q), 3)
    assert set(f.coeffs) == {(0, 1), (0, -1)}
    assert all(abs(v - 0.5) < 1e-12 for v in f.coeffs.values())


@given(st.integers(0, 2 ** 31))
@settings(max_examples=20, deadline=None)
def test_grid_round_trip(seed):
    rng = np.random.default_rng(seed)
    coeffs = {(int(a), int(b)): complex(*rng.standard_normal(2)) for a, b in rng.integers(-5, 6, (6, 2))}
    f = Observable(coeffs)
    g = observable_from_grid(f.on_grid(32), 5)
    for k, v in f.coeffs.items():
        assert abs(g.coeffs.get(k, 0) - v) <= 1e-12


def test_classical_map_examples():
    assert np.allclose(classical_baker(0.3, 0.3), (0.6, 0.15))
    assert np.allclose(classical_baker(0.7, 0.3), (0.4, 0.65))
    rng = np.random.default_rng(0)
    q, p = rng.random(1000), rng.random(1000)
    q2, p2 = classical_baker(*classical_baker(q, p, 1), -1)
    assert max(np.abs(q2 - q).max(), np.abs(p2 - p).max()) <= 1e-14


def test_theta_phase():
    assert theta_phase(TorusPoint(0.3, 0.3), 1, 0.05) == 0
    assert abs(theta_phase(TorusPoint(0.7, 0.3), 1, 0.05) - 1.35) < 1e-14
    assert abs(theta_phase(TorusPoint(0.3, 0.3), 2, 0.05) - 1.175) < 1e-14
    with pytest.raises(DiscontinuityError):
        theta_phase(TorusPoint(0.49, 0.3), 1, 0.05)


def test_coherent_state_shape():
    psi = coherent_state(CoherentParams(TorusPoint(0.5, 0.0), 1.0), 64)
    a = np.abs(psi)
    assert a.argmax() == 32
    assert a[32] > a[34] > a[36] > a[40]
    assert abs(np.linalg.norm(coherent_state(CoherentParams(TorusPoint(0.2, 0.7)), 64, normalize=True)) - 1) < 1e-14


def test_coherent_state_gaussian_bound():
    # |<y|Psi>| <= C (sigma/N)^{1/4} exp(-pi N sigma d(y/N, q0)^2) with C = 3
    N = 256
    y = np.arange(N)
    for q0 in np.linspace(0, 1, 13):
        for p0 in (0.0, 0.3, 0.8):
            psi = coherent_state(CoherentParams(TorusPoint(q0, p0), 1.0), N, normalize=True)
            d = np.abs((y / N - q0 + 0.5) % 1 - 0.5)
            assert np.all(np.abs(psi) <= 3 * N ** -0.25 * np.exp(-np.pi * N * d ** 2))


def test_mollified_indicator():
    assert abs(mollified_indicator(0.5, 0.1) - 1) < 1e-12
    assert mollified_indicator(0.0, 0.1) == 0
    v = mollified_indicator(np.linspace(0, 1, 10 ** 4), 0.1)
    assert v.min() >= 0 and v.max() <= 1
    assert np.all(mollified_indicator(np.linspace(0.2, 0.8, 50), 0.1) == 1)
    assert np.all(mollified_indicator(np.linspace(-0.1, 0.1, 50), 0.1) == 0)


def test_cutoff_and_composition():
    a = cutoff_observable(0.1, 1)
    assert a.real and abs(a(0.25, 0.5) - 1) < 2e-3
    b = compose_with_baker(a, 1)
    # a o B^{-1} at B(x) equals a(x)
    q, p = classical_baker(0.2, 0.4)
    assert abs(b(q, p) - a(0.2, 0.4)) < 5e-3


def test_ergodic_average():
    assert ergodic_average_classical(Observable.constant(1.0), 4) < 1e-20
    f = Observable.cos_q(1)
    assert abs(ergodic_average_classical(f, 1) - 0.5) < 5e-3
    assert ergodic_average_classical(f, 64) < ergodic_average_classical(f, 8)
