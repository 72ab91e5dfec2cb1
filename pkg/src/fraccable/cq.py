"""Backward-Euler convolution quadrature.

The weights d_i of order ``gamma`` are the Taylor coefficients of
((1 - zeta) / tau)^gamma.  gamma in (0, 1) discretises a Riemann-Liouville
derivative, gamma in (-1, 0) a fractional integral.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np


@dataclass(frozen=True, eq=False)
class CQWeights:
    gamma: float
    tau: float
    d: np.ndarray

    @property
    def n(self) -> int:
        return self.d.size


@lru_cache(maxsize=128)
def _weights_cached(gamma: float, tau: float, n: int) -> np.ndarray:
    i = np.arange(1, n, dtype=float)
    ratios = np.empty(n)
    ratios[0] = tau ** (-gamma)
    ratios[1:] = (i - 1 - gamma) / i
    d = np.cumprod(ratios)
    d.setflags(write=False)
    return d


def weights(gamma: float, tau: float, n: int) -> CQWeights:
    """First n weights via d_0 = tau^-gamma, d_i = d_{i-1} (i - 1 - gamma) / i.

    |gamma| = 1 is accepted for testing (the polynomial cases).
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if not -1.0 <= gamma <= 1.0:
        raise ValueError(f"CQ exponent {gamma} outside [-1, 1]")
    return CQWeights(float(gamma), float(tau), _weights_cached(float(gamma), float(tau), int(n)))


def apply_history(w: CQWeights, history, upto: int):
    """sum_{i=0}^{n-1} d_i v(t_{n-i}) with n = ``upto``.

    ``history[j - 1]`` holds v(t_j); v(t_0) is never used.
    """
    history = np.asarray(history, dtype=float)
    n = int(upto)
    if n < 1:
        raise ValueError("upto must be >= 1")
    if n > history.shape[0]:
        raise ValueError(f"upto={n} exceeds history length {history.shape[0]}")
    if n > w.n:
        raise ValueError(f"upto={n} exceeds the {w.n} available weights")
    # rows v(t_n), v(t_{n-1}), ..., v(t_1) pair with d_0 .. d_{n-1}
    return np.tensordot(w.d[:n], history[n - 1 :: -1][:n], axes=(0, 0))


def checksum_partial_sums(w: CQWeights) -> float:
    """tau^gamma * sum of all weights: the n-term partial sum of the binomial series of (1-1)^gamma."""
    return float(np.sum(w.d) * w.tau**w.gamma)
