"""Gauss rules from the Golub-Welsch eigenvalue formulation.

Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix of the
orthogonal-polynomial family.  Weights are mu_0 times the squared first
eigenvector components, except that they are recomputed as Christoffel
numbers 1 / sum_j p_j(x)^2 from the orthonormal three-term recurrence; the
eigenvector form only has absolute accuracy and underflows to 0 in the tail.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gamma as gamma_fn


def golub_welsch(diag, offdiag, mu0, christoffel: bool = True):
    diag = np.asarray(diag, float)
    offdiag = np.asarray(offdiag, float)
    nodes, vecs = eigh_tridiagonal(diag, offdiag)
    if not christoffel:
        return nodes, mu0 * vecs[0, :] ** 2
    return nodes, christoffel_weights(nodes, diag, offdiag, mu0)


def christoffel_weights(x, diag, offdiag, mu0):
    """1 / sum_{j<n} p_j(x)^2 for the orthonormal polynomials of the Jacobi matrix."""
    x = np.asarray(x, float)
    p_prev = np.zeros_like(x)
    p = np.full_like(x, 1.0 / np.sqrt(mu0))
    acc = p * p
    log_scale = np.zeros_like(x)  # acc, p, p_prev are stored divided by exp(log_scale)
    for j in range(1, diag.size):
        b_prev = offdiag[j - 2] if j > 1 else 0.0
        p_prev, p = p, ((x - diag[j - 1]) * p - b_prev * p_prev) / offdiag[j - 1]
        acc += p * p
        big = np.abs(p) > 1e100
        if np.any(big):
            p[big] *= 1e-100
            p_prev[big] *= 1e-100
            acc[big] *= 1e-200
            log_scale[big] += 200 * np.log(10.0)
    return np.exp(-np.log(acc) - log_scale)


@lru_cache(maxsize=64)
def gauss_laguerre(n: int, a: float = 0.0):
    """n-point rule for the weight x^a e^{-x} on (0, inf), a > -1.

    Weights sum to Gamma(a + 1).
    """
    if n < 1:
        raise ValueError("need at least one node")
    if a <= -1:
        raise ValueError("Laguerre parameter must exceed -1")
    i = np.arange(n, dtype=float)
    diag = 2 * i + a + 1
    off = np.sqrt(np.arange(1, n) * (np.arange(1, n) + a))
    x, w = golub_welsch(diag, off, gamma_fn(a + 1))
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=16)
def gauss_legendre(n: int):
    """n-point rule on [-1, 1] for the unit weight."""
    if n < 1:
        raise ValueError("need at least one node")
    k = np.arange(1, n, dtype=float)
    off = k / np.sqrt(4 * k * k - 1)
    x, w = golub_welsch(np.zeros(n), off, 2.0)
    # symmetrise to remove eigen-solver asymmetry
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w
