import math

import numpy as np
import pytest
from scipy.integrate import simpson
from hypothesis import given, settings, strategies as st

from fraccable.basis import Basis
from fraccable.model import GammaSpec, HurstPair
from fraccable.noise import (
    SheetIncrements, build_factor, coarsen, coarsening_matrix, covariance_matrix, derive_seed,
    increment_covariance_1d, sample_sheet, sample_sheets, spectral_cell_values, splitmix64,
    time_cell_index, wz_forcing_table, wz_spectral_forcing, check_compatible,
)

WHITE = HurstPair(0.5, 0.5)


def test_increment_covariance_examples():
    assert increment_covariance_1d(0.5, 0, 0.3, 0, 0.3) == pytest.approx(0.3)
    assert increment_covariance_1d(0.5, 0, 1, 1, 2) == 0.0
    assert increment_covariance_1d(0.3, 0, 1, 0, 1) == pytest.approx(1.0)
    assert increment_covariance_1d(0.3, 2, 2.5, 2, 2.5) == pytest.approx(0.5**0.6)
    with pytest.raises(ValueError):
        increment_covariance_1d(0.3, 1, 0, 0, 1)
    with pytest.raises(ValueError):
        increment_covariance_1d(0.7, 0, 1, 0, 1)


def test_increment_covariance_from_R():
    # rectangle rule through R_H(x, y) = (|x|^2H + |y|^2H - |x - y|^2H) / 2
    H = 0.3
    R = lambda x, y: 0.5 * (abs(x) ** (2 * H) + abs(y) ** (2 * H) - abs(x - y) ** (2 * H))
    a, b, c, d = 0.1, 0.4, 0.25, 0.9
    direct = R(b, d) - R(b, c) - R(a, d) + R(a, c)
    assert increment_covariance_1d(H, a, b, c, d) == pytest.approx(direct, rel=1e-13)


def test_factor_examples():
    f = build_factor(0.5, np.linspace(0, 1, 5))
    assert f.diagonal
    np.testing.assert_allclose(f.L, math.sqrt(0.25) * np.eye(4), rtol=1e-15)
    f1 = build_factor(0.3, [0.2, 0.7])
    assert f1.L[0, 0] == pytest.approx(0.5**0.3)
    edges = np.linspace(0, 1, 9)
    f3 = build_factor(0.3, edges)
    C = covariance_matrix(0.3, edges)
    assert np.max(np.abs(f3.L @ f3.L.T - C)) <= 1e-10 * np.max(np.abs(C))
    with pytest.raises(ValueError):
        build_factor(0.3, [0.0, 0.5, 0.5])


def test_factor_apply_matches_dense():
    for H in (0.5, 0.2):
        f = build_factor(H, np.linspace(0, 2, 6))
        Z = np.arange(30.0).reshape(5, 6)
        np.testing.assert_allclose(f.apply_left(Z), f.L @ Z, rtol=1e-14)
        np.testing.assert_allclose(f.apply_right_t(Z.T), Z.T @ f.L.T, rtol=1e-14)


def test_splitmix_known_values():
    # reference outputs of SplitMix64 seeded with 0 (state advances by the golden gamma)
    assert splitmix64(0) == 0xE220A8397B1DCDAF
    assert splitmix64(0x9E3779B97F4A7C15) == 0x6E789E6AA1B965F4
    assert derive_seed(5, 0) == 5 ^ 0xE220A8397B1DCDAF


def test_sample_determinism():
    a = sample_sheet(HurstPair(0.3, 0.4), 6, 5, 1.0, 2.0, 123)
    b = sample_sheet(HurstPair(0.3, 0.4), 6, 5, 1.0, 2.0, 123)
    c = sample_sheet(HurstPair(0.3, 0.4), 6, 5, 1.0, 2.0, 124)
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)
    assert a.data.shape == (6, 5) and a.tau_cell == pytest.approx(1 / 6) and a.h_cell == pytest.approx(0.4)


def test_single_cell_white_is_standard_normal_draw():
    from fraccable.noise import make_rng

    s = sample_sheet(WHITE, 1, 1, 1.0, 1.0, 42)
    assert s.data[0, 0] == make_rng(42).standard_normal((1, 1))[0, 0]


def test_batch_matches_individual():
    idx = [0, 3, 7]
    batch = sample_sheets(HurstPair(0.3, 0.5), 4, 4, 1.0, 1.0, 99, idx)
    for row, i in zip(batch.data, idx):
        single = sample_sheet(HurstPair(0.3, 0.5), 4, 4, 1.0, 1.0, derive_seed(99, i))
        assert np.array_equal(row, single.data)


def test_coarsen_examples():
    inc = SheetIncrements(np.array([[1.0, 2.0], [3.0, 4.0]]), 1.0, 1.0, WHITE)
    assert coarsen(inc, 1, 1) is inc
    c = coarsen(inc, 2, 2)
    assert c.data.shape == (1, 1) and c.data[0, 0] == 10.0
    with pytest.raises(ValueError):
        coarsen(inc, 3, 1)


@pytest.mark.parametrize("H", [0.5, 0.3, 0.1])
def test_coarsening_covariance_identity(H):
    fine = covariance_matrix(H, np.linspace(0, 1, 13))
    for f in (2, 3, 4, 6):
        S = coarsening_matrix(12, f)
        coarse = covariance_matrix(H, np.linspace(0, 1, 12 // f + 1))
        assert np.max(np.abs(S @ fine @ S.T - coarse)) <= 1e-12


def test_time_cell_index_left_open():
    # solver grid equal to WZ grid: t_n = t_{i+1} reads cell i = n - 1
    np.testing.assert_array_equal(time_cell_index(np.arange(1, 5), 4, 4), [0, 1, 2, 3])
    # solver twice as fine: steps 1, 2 in cell 0
    np.testing.assert_array_equal(time_cell_index(np.arange(1, 9), 8, 4), [0, 0, 1, 1, 2, 2, 3, 3])
    # solver coarser than WZ cells: step 1 at t = 1/2 is the right end of cell 1
    np.testing.assert_array_equal(time_cell_index([1, 2], 2, 4), [1, 3])
    with pytest.raises(ValueError):
        check_compatible(6, 4)


def test_forcing_gamma_zero():
    inc = sample_sheet(WHITE, 4, 4, 1.0, 1.0, 1)
    out = wz_spectral_forcing(inc, Basis(1.0, 8), GammaSpec("zero"), 2, 0.25)
    assert np.all(out == 0)


def test_forcing_single_cell():
    w = 0.7
    T, l = 2.0, 3.0
    inc = SheetIncrements(np.array([[w]]), T, l, WHITE)
    b = Basis(l, 5)
    g = GammaSpec("poly_t", 1.5)
    out = wz_spectral_forcing(inc, b, g, 1, T)
    expected = 1.5 * T * w / (T * l) * b.cell_integrals(np.array([0.0, l]))[:, 0]
    np.testing.assert_allclose(out, expected, rtol=1e-14)


def test_forcing_vs_dense_quadrature():
    # dense Simpson quadrature (4 x 1024 panels) over each spatial cell of the piecewise-constant field
    inc = sample_sheet(HurstPair(0.3, 0.4), 4, 4, 1.0, 1.0, 7)
    b = Basis(1.0, 8)
    g = GammaSpec("poly_t")
    for n in (1, 2, 4):
        out = wz_spectral_forcing(inc, b, g, n, 0.25)
        ref = np.zeros(8)
        for j in range(4):
            sub = np.linspace(j / 4, (j + 1) / 4, 1025)
            height = inc.data[n - 1, j] / (inc.tau_cell * inc.h_cell) * g(n * 0.25)
            ref += height * simpson(b.synthesis_matrix(sub), x=sub, axis=0)
        np.testing.assert_allclose(out, ref, atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5, 5), st.floats(-5, 5), st.integers(0, 2**32))
def test_forcing_linear_in_increments(a, c, seed):
    h = HurstPair(0.3, 0.5)
    W1 = sample_sheet(h, 4, 8, 1.0, 1.0, seed)
    W2 = sample_sheet(h, 4, 8, 1.0, 1.0, seed + 1)
    comb = SheetIncrements(a * W1.data + c * W2.data, 1.0, 1.0, h)
    b = Basis(1.0, 8)
    g = GammaSpec("sin_t")
    lhs = wz_spectral_forcing(comb, b, g, 2, 0.25)
    rhs = a * wz_spectral_forcing(W1, b, g, 2, 0.25) + c * wz_spectral_forcing(W2, b, g, 2, 0.25)
    scale = max(1.0, np.max(np.abs(lhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-14 * scale * 10


def test_forcing_table_matches_pointwise():
    inc = sample_sheets(WHITE, 4, 8, 1.0, 1.0, 3, range(3))
    b = Basis(1.0, 6)
    g = GammaSpec("poly_t")
    tab = wz_forcing_table(inc, b, g, 8)
    assert tab.shape == (9, 3, 6) and np.all(tab[0] == 0)
    for n in range(1, 9):
        np.testing.assert_allclose(tab[n], wz_spectral_forcing(inc, b, g, n, 1 / 8), rtol=1e-14)


def test_white_sheet_covariance():
    from fraccable.experiments import covariance_study

    rep = covariance_study(WHITE, 4, 4, 4000, seed=11)
    off = ~np.eye(16, dtype=bool)
    assert np.all(rep.analytic[off] == 0)
    np.testing.assert_allclose(np.diag(rep.analytic), 1 / 16)
    assert rep.max_z <= 5


def test_spectral_cell_values_shape():
    inc = sample_sheets(WHITE, 4, 8, 1.0, 1.0, 3, range(2))
    assert spectral_cell_values(inc, Basis(1.0, 5)).shape == (2, 4, 5)
