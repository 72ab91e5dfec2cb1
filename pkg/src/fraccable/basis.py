"""Dirichlet-Laplacian eigenpairs on (0, l) and the coefficient-space tools built on them.

The eigenfunctions are e_k(x) = sqrt(2/l) sin(k pi x / l) with eigenvalues
rho_k = (k pi / l)^2, k = 1, 2, ...  Coefficient vectors are indexed from 0,
so ``coeffs[k - 1]`` is the coefficient of e_k.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np


def eigenvalue(k, l):
    k = np.asarray(k)
    if np.any(k < 1):
        raise ValueError(f"mode index must be >= 1, got {k}")
    if l <= 0:
        raise ValueError(f"domain length must be positive, got {l}")
    return (k * np.pi / l) ** 2


def eigenfunction(k, l, x):
    """Value of e_k at x; exactly zero at both endpoints."""
    x = np.asarray(x, dtype=float)
    if np.any(x < 0) or np.any(x > l):
        raise ValueError(f"x must lie in [0, {l}]")
    if np.any(np.asarray(k) < 1):
        raise ValueError("mode index must be >= 1")
    val = np.sqrt(2.0 / l) * np.sin(k * np.pi * x / l)
    return np.where((x == 0) | (x == l), 0.0, val)


def cell_integral(k, l, a, b):
    """Integral of e_k over [a, b], in closed form."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any(a >= b):
        raise ValueError("cell_integral needs a < b")
    if np.any(a < 0) or np.any(b > l):
        raise ValueError(f"cell must lie inside [0, {l}]")
    k = np.asarray(k)
    w = k * np.pi / l
    return np.sqrt(2.0 / l) / w * (np.cos(w * a) - np.cos(w * b))


def discrete_norm_sq(v, basis, q):
    """sum_k rho_k^q v_k^2 over the last axis of ``v``."""
    if q < 0:
        raise ValueError("norm order must be non-negative")
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != basis.n_modes:
        raise ValueError(f"coefficient vector has {v.shape[-1]} entries, basis has {basis.n_modes}")
    if q == 0:
        return np.sum(v * v, axis=-1)
    return np.sum(basis.eigenvalues**q * v * v, axis=-1)


@dataclass(frozen=True)
class Basis:
    length: float
    n_modes: int

    def __post_init__(self):
        if self.length <= 0:
            raise ValueError("domain length must be positive")
        if int(self.n_modes) != self.n_modes or self.n_modes < 1:
            raise ValueError("n_modes must be a positive integer")

    @cached_property
    def modes(self) -> np.ndarray:
        return np.arange(1, self.n_modes + 1)

    @cached_property
    def eigenvalues(self) -> np.ndarray:
        return eigenvalue(self.modes, self.length)

    def frac_eigenvalues(self, s: float) -> np.ndarray:
        """rho_k^s, the diagonal of the spectral fractional Laplacian."""
        return self.eigenvalues**s

    def grid(self, n_pts: int) -> np.ndarray:
        return np.linspace(0.0, self.length, n_pts)

    def synthesis_matrix(self, xs) -> np.ndarray:
        """Matrix E with E[j, k-1] = e_k(x_j)."""
        xs = np.asarray(xs, dtype=float)
        return eigenfunction(self.modes[None, :], self.length, xs[:, None])

    def cell_integrals(self, edges) -> np.ndarray:
        """Matrix of shape (N, len(edges)-1); entry (k-1, j) is the integral of e_k over cell j."""
        edges = np.asarray(edges, dtype=float)
        return cell_integral(self.modes[:, None], self.length, edges[None, :-1], edges[None, 1:])

    def evaluate(self, coeffs, xs) -> np.ndarray:
        """sum_k coeffs_k e_k(x) at each x (last axis of coeffs holds the modes)."""
        return np.asarray(coeffs, dtype=float) @ self.synthesis_matrix(xs).T

    def project(self, fvals) -> np.ndarray:
        return project_function(fvals, self)


def project_function(fvals, basis: Basis) -> np.ndarray:
    """Trapezoid approximation of (phi, e_k), k = 1..N, from equispaced samples on [0, l].

    The samples include both endpoints; the last axis of ``fvals`` runs over the grid.
    At least 4N points are required.
    """
    fvals = np.asarray(fvals, dtype=float)
    q = fvals.shape[-1]
    if q < 4 * basis.n_modes:
        raise ValueError(f"projection needs at least {4 * basis.n_modes} grid points, got {q}")
    xs = basis.grid(q)
    wts = np.full(q, basis.length / (q - 1))
    wts[0] *= 0.5
    wts[-1] *= 0.5
    return (fvals * wts) @ basis.synthesis_matrix(xs)
