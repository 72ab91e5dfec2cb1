"""Fractional-Brownian-sheet increments and their Wong-Zakai spectral forcing.

Rectangle increments on a uniform m x m' grid of (0, T] x (0, l] are Gaussian
with separable covariance C_t (x) C_x, where each 1-D factor is the increment
covariance of fractional Brownian motion.  Samples are drawn exactly as
L_t Z L_x^T from the Cholesky factors of the two 1-D matrices.

Random streams use numpy's counter-based Philox generator keyed by a 64-bit
seed.  In Monte-Carlo loops sample i uses the key ``seed ^ splitmix64(i)`` so a
sample never depends on scheduling.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .basis import Basis
from .model import GammaSpec, HurstPair

RNG_NAME = "numpy.random.Philox (4x64, key = seed ^ splitmix64(sample_index))"
_MASK64 = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """The SplitMix64 finaliser (Steele, Lea & Flood)."""
    z = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    return (int(seed) ^ splitmix64(int(index))) & _MASK64


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))


def increment_covariance_1d(H, a, b, c, d):
    """E[(W_b - W_a)(W_d - W_c)] for fractional Brownian motion with Hurst index H."""
    a, b, c, d = (np.asarray(v, dtype=float) for v in (a, b, c, d))
    if np.any(a >= b) or np.any(c >= d):
        raise ValueError("intervals must satisfy a < b and c < d")
    if np.any(a < 0) or np.any(c < 0):
        raise ValueError("intervals must start at or after 0")
    if not 0 < H <= 0.5:
        raise ValueError(f"Hurst index {H} outside (0, 1/2]")
    p = 2.0 * H
    return 0.5 * (np.abs(b - c) ** p + np.abs(a - d) ** p - np.abs(a - c) ** p - np.abs(b - d) ** p)


def covariance_matrix(H, edges) -> np.ndarray:
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1], edges[1:]
    C = increment_covariance_1d(H, lo[:, None], hi[:, None], lo[None, :], hi[None, :])
    return 0.5 * (C + C.T)


@dataclass(frozen=True, eq=False)
class CovFactor:
    L: np.ndarray
    diagonal: bool  # L is diagonal; stored in full but applied by scaling

    @property
    def dim(self) -> int:
        return self.L.shape[0]

    def apply_left(self, Z):
        """L @ Z along axis -2."""
        if self.diagonal:
            return np.diagonal(self.L)[:, None] * Z
        return self.L @ Z

    def apply_right_t(self, Z):
        """Z @ L.T along the last axis."""
        if self.diagonal:
            return Z * np.diagonal(self.L)
        return Z @ self.L.T


def build_factor(H: float, edges) -> CovFactor:
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0) or edges[0] < 0:
        raise ValueError("edges must be strictly increasing and start at or after 0")
    C = covariance_matrix(H, edges)
    diag = np.diag(C)
    off = C - np.diag(diag)
    if np.max(np.abs(off), initial=0.0) <= 1e-14 * np.max(diag):
        return CovFactor(np.diag(np.sqrt(diag)), True)
    jitter = 0.0
    for attempt in range(4):
        try:
            L = np.linalg.cholesky(C + jitter * np.eye(C.shape[0]))
            return CovFactor(L, False)
        except np.linalg.LinAlgError:
            jitter = 1e-12 * np.trace(C) / C.shape[0] * (10.0**attempt)
    raise np.linalg.LinAlgError(f"increment covariance for H={H} is not positive definite")


@lru_cache(maxsize=16)
def _cached_factor(H: float, n_cells: int, extent: float) -> CovFactor:
    return build_factor(H, np.linspace(0.0, extent, n_cells + 1))


@dataclass(frozen=True, eq=False)
class SheetIncrements:
    data: np.ndarray  # (m, m'); optionally (batch, m, m')
    horizon: float
    length: float
    hurst: HurstPair
    seed: int | None = None

    @property
    def m(self) -> int:
        return self.data.shape[-2]

    @property
    def m_space(self) -> int:
        return self.data.shape[-1]

    @property
    def tau_cell(self) -> float:
        return self.horizon / self.m

    @property
    def h_cell(self) -> float:
        return self.length / self.m_space

    @property
    def batched(self) -> bool:
        return self.data.ndim == 3


def sheet_factors(hurst: HurstPair, m: int, m_space: int, horizon: float, length: float):
    return (_cached_factor(float(hurst.h2), int(m), float(horizon)),
            _cached_factor(float(hurst.h1), int(m_space), float(length)))


def sample_sheet(hurst: HurstPair, m: int, m_space: int, horizon: float, length: float,
                 rng_seed: int) -> SheetIncrements:
    Lt, Lx = sheet_factors(hurst, m, m_space, horizon, length)
    Z = make_rng(rng_seed).standard_normal((m, m_space))
    data = Lx.apply_right_t(Lt.apply_left(Z))
    return SheetIncrements(data, horizon, length, hurst, int(rng_seed))


def sample_sheets(hurst: HurstPair, m: int, m_space: int, horizon: float, length: float,
                  seed: int, indices) -> SheetIncrements:
    """Stack of independent sheets, sample i keyed by ``derive_seed(seed, i)``."""
    Lt, Lx = sheet_factors(hurst, m, m_space, horizon, length)
    Z = np.stack([make_rng(derive_seed(seed, i)).standard_normal((m, m_space)) for i in indices])
    data = Lx.apply_right_t(Lt.apply_left(Z))
    return SheetIncrements(data, horizon, length, hurst, int(seed))


def coarsen(inc: SheetIncrements, factor_t: int, factor_x: int) -> SheetIncrements:
    """Block-sum the increments into cells factor_t (time) by factor_x (space) times larger."""
    m, mx = inc.m, inc.m_space
    if factor_t < 1 or factor_x < 1 or m % factor_t or mx % factor_x:
        raise ValueError(f"factors ({factor_t}, {factor_x}) must divide the grid ({m}, {mx})")
    if factor_t == 1 and factor_x == 1:
        return inc
    lead = inc.data.shape[:-2]
    blocks = inc.data.reshape(*lead, m // factor_t, factor_t, mx // factor_x, factor_x)
    return SheetIncrements(blocks.sum(axis=(-3, -1)), inc.horizon, inc.length, inc.hurst, inc.seed)


def coarsening_matrix(n_fine: int, factor: int) -> np.ndarray:
    S = np.zeros((n_fine // factor, n_fine))
    for i in range(n_fine // factor):
        S[i, i * factor : (i + 1) * factor] = 1.0
    return S


def time_cell_index(n, n_steps: int, m: int):
    """WZ time cell containing t_n = n T / n_steps; cells are (t_i, t_{i+1}], so t_n = t_{i+1} reads cell i."""
    n = np.asarray(n)
    return (n * m + n_steps - 1) // n_steps - 1


def check_compatible(n_steps: int, m: int) -> None:
    if n_steps % m and m % n_steps:
        raise ValueError(f"solver steps {n_steps} and WZ time cells {m}: one must divide the other")


def spectral_cell_values(inc: SheetIncrements, basis: Basis) -> np.ndarray:
    """sum_j (dW_ij / (tau h)) int_{D_j} e_k, for every WZ time cell i: shape (..., m, N)."""
    edges = np.linspace(0.0, inc.length, inc.m_space + 1)
    ci = basis.cell_integrals(edges)  # (N, m')
    return (inc.data @ ci.T) / (inc.tau_cell * inc.h_cell)


def wz_spectral_forcing(inc: SheetIncrements, basis: Basis, gamma: GammaSpec, n: int,
                        solver_tau: float) -> np.ndarray:
    """P_N of gamma(t_n) times the Wong-Zakai field at t_n."""
    if basis.length != inc.length:
        raise ValueError("basis and sheet lengths differ")
    n_steps = round(inc.horizon / solver_tau)
    if abs(n_steps * solver_tau - inc.horizon) > 1e-12 * inc.horizon:
        raise ValueError("solver_tau must divide the horizon")
    check_compatible(n_steps, inc.m)
    if not 1 <= n <= n_steps:
        raise ValueError(f"step {n} outside 1..{n_steps}")
    i = int(time_cell_index(n, n_steps, inc.m))
    row = spectral_cell_values(inc, basis)[..., i, :]
    return float(gamma(n * solver_tau)) * row


def wz_forcing_table(inc: SheetIncrements, basis: Basis, gamma: GammaSpec, n_steps: int) -> np.ndarray:
    """Forcing at every step: shape (n_steps + 1, [batch,] N); row 0 is zero."""
    if basis.length != inc.length:
        raise ValueError("basis and sheet lengths differ")
    check_compatible(n_steps, inc.m)
    vals = spectral_cell_values(inc, basis)  # (..., m, N)
    steps = np.arange(1, n_steps + 1)
    g = gamma(steps * (inc.horizon / n_steps))
    rows = np.moveaxis(vals, -2, 0)[time_cell_index(steps, n_steps, inc.m)]  # (n_steps, ..., N)
    out = np.zeros((n_steps + 1,) + rows.shape[1:])
    out[1:] = g.reshape((-1,) + (1,) * (rows.ndim - 1)) * rows
    return out
