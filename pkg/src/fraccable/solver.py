"""Spectral Galerkin in space, backward-Euler convolution quadrature in time.

In the sine basis the scheme decouples mode by mode (apart from a non-diagonal f):

    (u^n - u^{n-1}) / tau + lam sum_{i=0}^{n-1} d_i^{(1-beta)} u^{n-i}
        + mu rho_k^s sum_{i=0}^{n-1} d_i^{(1-alpha)} u^{n-i} = f_k(u^{n-1}) + g_k^n,

with u^0 = 0.  The i = 0 terms are implicit, so each step is an explicit
division by D_k = 1/tau + lam d_0^{(1-beta)} + mu rho_k^s d_0^{(1-alpha)}.

History sums are evaluated in blocks: contributions from rows older than the
current block are one matrix product per block, the rest is accumulated step
by step.  Leading axes beyond the mode axis (e.g. Monte-Carlo samples) are
carried along as independent columns.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import Basis
from .cq import CQWeights, weights as cq_weights
from .kernel import relaxation_values
from .model import Discretization, ModelParams, eval_f, require_valid
from .noise import SheetIncrements, check_compatible, wz_forcing_table

BLOCK = 64


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class SpectralTrajectory:
    basis: Basis
    tau: float
    coeffs: np.ndarray  # (n_recorded, [batch,] N)
    steps: np.ndarray  # step index of each recorded row

    @property
    def times(self) -> np.ndarray:
        return self.steps * self.tau

    def row(self, n: int) -> np.ndarray:
        hit = np.flatnonzero(self.steps == n)
        if hit.size == 0:
            raise IndexError(f"step {n} was not recorded")
        return self.coeffs[hit[0]]

    @property
    def final(self) -> np.ndarray:
        return self.coeffs[-1]


@dataclass(frozen=True, eq=False)
class StepDenominators:
    tau: float
    lam: float
    mu_rho: np.ndarray  # mu * rho_k^s
    values: np.ndarray  # D_k


def step_denominators(params: ModelParams, basis: Basis, tau: float,
                      wb: CQWeights | None = None, wa: CQWeights | None = None) -> StepDenominators:
    wb = wb or cq_weights(1 - params.beta, tau, 1)
    wa = wa or cq_weights(1 - params.alpha, tau, 1)
    mu_rho = params.mu * basis.frac_eigenvalues(params.s)
    D = 1.0 / tau + params.lam * wb.d[0] + mu_rho * wa.d[0]
    return StepDenominators(tau, params.lam, mu_rho, D)


def step(coeffs, n: int, weights_beta: CQWeights, weights_alpha: CQWeights,
         den: StepDenominators, forcing_n, f_of_prev) -> np.ndarray:
    """Row n of the scheme from rows 0..n-1 of ``coeffs`` (row 0 is never read by the sums)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if n < 1 or coeffs.shape[0] < n:
        raise ValueError(f"step {n} needs rows 0..{n - 1}")
    hist = coeffs[n - 1 : 0 : -1]  # u^{n-1}, ..., u^1 paired with d_1, ..., d_{n-1}
    hb = np.tensordot(weights_beta.d[1:n], hist, axes=(0, 0))
    ha = np.tensordot(weights_alpha.d[1:n], hist, axes=(0, 0))
    rhs = coeffs[n - 1] / den.tau - den.lam * hb - den.mu_rho * ha + f_of_prev + forcing_n
    out = rhs / den.values
    _check_finite(out, n)
    return out


def _check_finite(row, n):
    if not np.all(np.isfinite(row)):
        bad = np.argwhere(~np.isfinite(np.atleast_1d(row)))[0]
        raise SolverError(f"non-finite value in mode {int(bad[-1]) + 1} at step {n}")


def march(den: StepDenominators, db: np.ndarray, da: np.ndarray, forcing: np.ndarray,
          f_apply=None, block: int = BLOCK) -> np.ndarray:
    """All rows u^0..u^n of the scheme for forcing rows g^0..g^n, shape (n+1, ..., N)."""
    n_steps = forcing.shape[0] - 1
    shape = forcing.shape[1:]
    if db.size < n_steps or da.size < n_steps:
        raise ValueError("not enough CQ weights for the requested steps")
    width = int(np.prod(shape))
    G = forcing.reshape(n_steps + 1, width)
    mu_rho = np.broadcast_to(den.mu_rho, shape).ravel()
    D = np.broadcast_to(den.values, shape).ravel()
    inv_tau = 1.0 / den.tau
    lam = den.lam
    U = np.zeros((n_steps + 1, width))
    for n0 in range(1, n_steps + 1, block):
        n1 = min(n0 + block, n_steps + 1)
        b = n1 - n0
        if n0 > 1:
            idx = np.arange(n0, n1)[:, None] - np.arange(1, n0)[None, :]
            far = np.concatenate([db[idx], da[idx]]) @ U[1:n0]
        else:
            far = np.zeros((2 * b, width))
        for n in range(n0, n1):
            r = n - n0
            hb, ha = far[r], far[b + r]
            if r:
                near = np.stack([db[r:0:-1], da[r:0:-1]]) @ U[n0:n]
                hb = hb + near[0]
                ha = ha + near[1]
            rhs = U[n - 1] * inv_tau - lam * hb - mu_rho * ha + G[n]
            if f_apply is not None:
                rhs = rhs + f_apply(U[n - 1].reshape(shape)).ravel()
            U[n] = rhs / D
            _check_finite(U[n].reshape(shape), n)
    return U.reshape((n_steps + 1,) + shape)


def run(params: ModelParams, disc: Discretization, noise: SheetIncrements | None = None,
        record_every: int = 1, forcing=None) -> SpectralTrajectory:
    """Advance the fully discrete scheme over n = 1..n_steps from zero initial data.

    ``noise`` supplies the Wong-Zakai forcing (a batched sheet gives a batched
    trajectory).  ``forcing`` adds a deterministic spectral source: an array of
    shape (n_steps + 1, N) or a callable t -> coefficient vector.
    """
    require_valid(params)
    basis = Basis(params.length, disc.n_modes)
    n_steps = disc.n_steps
    tau = params.horizon / n_steps
    wb = cq_weights(1 - params.beta, tau, n_steps)
    wa = cq_weights(1 - params.alpha, tau, n_steps)
    den = step_denominators(params, basis, tau, wb, wa)

    if noise is not None:
        if noise.m != disc.wz_time or noise.m_space != disc.wz_space:
            raise ValueError(
                f"sheet grid ({noise.m}, {noise.m_space}) does not match the discretization "
                f"({disc.wz_time}, {disc.wz_space})"
            )
        if noise.horizon != params.horizon or noise.length != params.length:
            raise ValueError("sheet domain does not match the model domain")
        check_compatible(n_steps, noise.m)
        G = wz_forcing_table(noise, basis, params.gamma, n_steps)
    else:
        G = np.zeros((n_steps + 1, disc.n_modes))
    if forcing is not None:
        if callable(forcing):
            t = tau * np.arange(n_steps + 1)
            det = np.array([np.asarray(forcing(ti), dtype=float) for ti in t])
            det[0] = 0.0
        else:
            det = np.asarray(forcing, dtype=float)
        if det.shape[0] != n_steps + 1 or det.shape[-1] != disc.n_modes:
            raise ValueError("deterministic forcing has the wrong shape")
        G = G + (det if G.ndim == det.ndim else det[:, None, :])

    spec = params.nonlinearity
    f_apply = None
    if spec.kind != "zero":
        f_apply = lambda u: eval_f(spec, u, basis)

    U = march(den, wb.d, wa.d, G, f_apply)
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    steps = np.arange(0, n_steps + 1, record_every)
    if steps[-1] != n_steps:
        steps = np.append(steps, n_steps)
    return SpectralTrajectory(basis, tau, U[steps], steps)


def linear_reference(params: ModelParams, basis: Basis, g_coeffs, times, noise=None,
                     method: str = "panel") -> np.ndarray:
    """u_k(t) g_k for each requested time: the deterministic linear solution with data g."""
    if params.nonlinearity.kind != "zero":
        raise ValueError("linear_reference requires f = 0")
    if noise is not None:
        raise ValueError("linear_reference is for the noise-free problem")
    g = np.asarray(g_coeffs, dtype=float)
    if g.shape[-1] != basis.n_modes:
        raise ValueError("data coefficients do not match the basis")
    mu_rho = params.mu * basis.frac_eigenvalues(params.s)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    out = np.empty((times.size, basis.n_modes))
    for i, t in enumerate(times):
        out[i] = relaxation_values(t, mu_rho, params.alpha, params.beta, params.lam, method) * g
    return out


def evaluate_field(traj: SpectralTrajectory, n: int, xs) -> np.ndarray:
    xs = np.asarray(xs, dtype=float)
    if np.any(xs < 0) or np.any(xs > traj.basis.length):
        raise ValueError("evaluation points outside the domain")
    return traj.basis.evaluate(traj.row(n), xs)
