import numpy as np
import pytest
from scipy.integrate import trapezoid
from hypothesis import given, settings
from hypothesis import strategies as st

from bakerlab.baker_bv import BVOperator
from bakerlab.selberg import (TWO_PI, AngleInterval, beurling, beurling_series, dump_coefficients,
                              evaluate_poly, functional_calculus, majorant_coefficients,
                              periodized_majorant, sandwich_check, selberg_pair, spectral_route)
from bakerlab.spectral import projector

from conftest import decomposition


def test_beurling_values():
    assert beurling(0.0) == 1.0
    # limit at 0 from both sides
    assert abs(beurling(1e-6) - 1) < 1e-5 and abs(beurling(-1e-6) - 1) < 1e-5
    for n in (1, 2, 5):
        assert abs(beurling(float(n)) - 1) < 1e-12
        assert abs(beurling(float(-n)) + 1) < 1e-12


@pytest.mark.parametrize("z", [0.3, -0.7, 2.5, -4.1, 11.9])
def test_beurling_closed_form_matches_series(z):
    assert abs(beurling(z) - beurling_series(z, tol=1e-7)) < 1e-6


def test_beurling_majorizes_sign():
    x = np.linspace(-20, 20, 10 ** 4)
    assert np.all(beurling(x) >= np.sign(x) - 1e-12)


def test_beurling_l1_defect():
    # integral of B - sgn equals 1
    x = np.linspace(-2000, 2000, 2_000_001)
    r = beurling(x) - np.sign(x)
    assert abs(trapezoid(r, x) - 1) < 2e-3


def test_constant_term():
    c = majorant_coefficients(AngleInterval(0.4, 0.9), 20)
    assert abs(c[0] - (0.9 + TWO_PI / 20) / TWO_PI) < 1e-12
    assert abs(c[0] - 0.19324) < 1e-5


@given(st.floats(0, TWO_PI), st.floats(0.05, TWO_PI - 0.05), st.integers(7, 60))
@settings(max_examples=25, deadline=None)
def test_sandwich_on_grid(start, length, degree):
    I = AngleInterval(start, length)
    pair = selberg_pair(I, degree)
    th = np.linspace(0, TWO_PI, 10 ** 4, endpoint=False)
    ind = I.contains(th)
    gp = evaluate_poly(pair.plus_coeffs, th)
    gm = evaluate_poly(pair.minus_coeffs, th)
    assert np.all(gm <= ind + 1e-9) and np.all(ind <= gp + 1e-9)
    bound = (length + TWO_PI / degree) / TWO_PI
    assert all(abs(v) <= bound + 1e-12 for v in pair.plus_coeffs.values())
    # L1 defects are at most 2 pi / degree
    assert abs(pair.plus_coeffs[0] - length / TWO_PI) <= 1 / degree + 1e-12
    assert abs(length / TWO_PI - pair.minus_coeffs[0]) <= 1 / degree + 1e-12


def test_closed_form_matches_periodization():
    I = AngleInterval(2.1, 0.9)
    th = np.linspace(0, TWO_PI, 50)
    a = evaluate_poly(majorant_coefficients(I, 12), th)
    b = periodized_majorant(th, I, 12, images=20000)
    assert np.abs(a - b).max() < 1e-6


def test_degree_guard():
    with pytest.raises(ValueError):
        selberg_pair(AngleInterval(0, 1), 5)


def test_functional_calculus_identity():
    op = BVOperator(16)
    assert np.allclose(functional_calculus({0: 2.0}, op), 2 * np.eye(16))
    B = op.matrix()
    assert np.abs(functional_calculus({1: 1.0}, op) - B).max() < 1e-12
    assert np.abs(functional_calculus({1: 1.0}, [B]) - B).max() < 1e-12


def test_full_circle_sandwich():
    N, D = 64, 20
    I = AngleInterval(0, TWO_PI)
    pair = selberg_pair(I, D)
    op = BVOperator(N)
    Fm = functional_calculus(pair.minus_coeffs, op)
    Fp = functional_calculus(pair.plus_coeffs, op)
    assert np.all(np.real(np.diag(Fm)) <= 1 + 1e-12)
    assert np.all(1 <= np.real(np.diag(Fp)) + 1e-12)
    assert np.all(np.real(np.diag(Fp)) <= 1 + TWO_PI / D + 1e-12)


@pytest.mark.parametrize("N", [256, 512])
def test_two_routes_agree(N):
    sd = decomposition(N)
    op = BVOperator(N)
    I = AngleInterval(2.1, 0.9)
    pair = selberg_pair(I, 40)
    for side in ("plus", "minus"):
        c = pair.coeffs(side)
        a = functional_calculus(c, op)
        b = spectral_route(c, sd.angles, sd.vectors)
        assert np.abs(a - b).max() <= 1e-8
    rep = sandwich_check(functional_calculus(pair.minus_coeffs, op), projector(sd, I).entries,
                         functional_calculus(pair.plus_coeffs, op))
    assert rep.ok and rep.offdiag_cs_violations == 0


def test_empty_window_minorant():
    sd = decomposition(256)
    gaps = np.diff(sd.angles)
    i = int(np.argmax(gaps))
    I = AngleInterval(sd.angles[i] + gaps[i] / 4, gaps[i] / 2)
    P = projector(sd, I)
    assert P.rank == 0
    Fm = functional_calculus(selberg_pair(I, 40).minus_coeffs, BVOperator(256))
    assert np.all(np.real(np.diag(Fm)) <= 1e-8)


def test_dump(tmp_path):
    pair = selberg_pair(AngleInterval(1, 1), 8)
    dump_coefficients(pair, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "ell,re,im,side" and len(lines) == 1 + 2 * 17
