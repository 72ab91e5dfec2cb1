"""Per-mode relaxation functions u_k(t).

u_k solves  u' + lam d^{1-beta} u + mu rho_k^s d^{1-alpha} u = 0,  u(0) = 1,
and has the real-axis representation

    u_k(t) = (1/pi) int_0^inf e^{-rt} r^{alpha-1} K_k(r) dr,

    K_k(r) = (lam r^{alpha-beta} sin(beta pi) + mu rho_k^s sin(alpha pi)) / (a(r)^2 + b(r)^2),
    a(r) = r^alpha cos(alpha pi) + lam r^{alpha-beta} cos((alpha-beta) pi) + mu rho_k^s,
    b(r) = r^alpha sin(alpha pi) + lam r^{alpha-beta} sin((alpha-beta) pi).

Two quadratures are provided.  ``panel`` (default) is composite Gauss-Legendre
in log r on a fixed lattice, with an analytic correction for the piece below
the lattice; it resolves the peak of K near r^alpha ~ mu rho^s |sec(alpha pi)|.
``laguerre`` substitutes r = x/t and uses generalized Gauss-Laguerre nodes for
the weight x^{alpha-1} e^{-x}; it is cheap but loses accuracy when
mu rho^s = O(1) and alpha is near 1.

An independent check is the Volterra form u = 1 - lam I^beta u - mu rho^s I^alpha u
discretised with backward-Euler convolution quadrature (``volterra_oracle``).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .basis import Basis
from .cq import weights as cq_weights
from .quadrature import gauss_laguerre, gauss_legendre

T_ZERO = 1e-12
LARGE_RHO = 1e12

PANEL_WIDTH = 0.5
PANEL_NODES = 12
_LOW_CUT = math.log(1e-17)
_HIGH_CUT = 60.0
_MODE_CHUNK = 1024


@dataclass(frozen=True)
class KernelEvaluator:
    alpha: float
    beta: float
    lam: float
    mu: float
    rho_s: float  # rho_k^s for the mode
    method: str = "panel"
    n_q: int = 96
    _lag: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0 < self.beta <= self.alpha < 1):
            raise ValueError("need 0 < beta <= alpha < 1")
        if self.lam < 0 or self.mu <= 0 or self.rho_s <= 0:
            raise ValueError("need lam >= 0, mu > 0, rho_s > 0")
        if self.method not in ("panel", "laguerre"):
            raise ValueError(f"unknown quadrature method {self.method!r}")
        if self.n_q < 16:
            raise ValueError("n_q must be at least 16")
        object.__setattr__(self, "_lag", gauss_laguerre(int(self.n_q), self.alpha - 1.0))

    @classmethod
    def for_mode(cls, params, basis: Basis, k: int, **kw):
        rho_s = float(basis.eigenvalues[k - 1] ** params.s)
        return cls(params.alpha, params.beta, params.lam, params.mu, rho_s, **kw)

    @property
    def nodes(self) -> np.ndarray:
        return self._lag[0]

    @property
    def weights(self) -> np.ndarray:
        return self._lag[1]

    @property
    def mu_rho(self) -> float:
        return self.mu * self.rho_s

    def K(self, r):
        return integrand_K(r, self)

    def u(self, t):
        return eval_u(t, self)


def _K(r, alpha, beta, lam, mu_rho):
    """K on broadcast arrays; r > 0 assumed."""
    ra = r**alpha
    rab = lam * r ** (alpha - beta)
    pa, pab = alpha * math.pi, (alpha - beta) * math.pi
    a = ra * math.cos(pa) + rab * math.cos(pab) + mu_rho
    b = ra * math.sin(pa) + rab * math.sin(pab)
    return (rab * math.sin(beta * math.pi) + mu_rho * math.sin(pa)) / (a * a + b * b)


def integrand_K(r, ev: KernelEvaluator):
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("K is defined for r > 0 only")
    return _K(r, ev.alpha, ev.beta, ev.lam, ev.mu_rho)


def _panel_rule(t: float, alpha: float):
    """Nodes r and weights (including the Jacobian r^alpha) of the log-lattice rule."""
    x_lo = _LOW_CUT / alpha - math.log(max(1.0 / t, 1.0))
    x_hi = math.log(_HIGH_CUT / t)
    j_lo = math.floor(x_lo / PANEL_WIDTH)
    j_hi = math.ceil(x_hi / PANEL_WIDTH)
    starts = PANEL_WIDTH * np.arange(j_lo, j_hi)
    g, gw = gauss_legendre(PANEL_NODES)
    half = 0.5 * PANEL_WIDTH
    x = ((starts + half)[:, None] + half * g[None, :]).ravel()
    r = np.exp(x)
    w = np.tile(half * gw, starts.size) * np.exp(-r * t) * r**alpha
    return r, w, math.exp(PANEL_WIDTH * j_lo)


def relaxation_values(t: float, mu_rho, alpha: float, beta: float, lam: float,
                      method: str = "panel", n_q: int = 96) -> np.ndarray:
    """u(t) for each entry of ``mu_rho`` (the products mu * rho_k^s)."""
    mu_rho = np.atleast_1d(np.asarray(mu_rho, dtype=float))
    t = float(t)
    if t < 0:
        raise ValueError("t must be non-negative")
    if t < T_ZERO:
        return np.ones_like(mu_rho)
    out = np.empty_like(mu_rho)
    if method == "laguerre":
        x, w = gauss_laguerre(int(n_q), alpha - 1.0)
        r = x / t
        scale = t ** (-alpha) / math.pi
        for lo in range(0, mu_rho.size, _MODE_CHUNK):
            m = mu_rho[lo : lo + _MODE_CHUNK, None]
            out[lo : lo + _MODE_CHUNK] = scale * (_K(r[None, :], alpha, beta, lam, m) @ w)
    else:
        r, w, r_low = _panel_rule(t, alpha)
        tail = r_low**alpha / alpha
        for lo in range(0, mu_rho.size, _MODE_CHUNK):
            m = mu_rho[lo : lo + _MODE_CHUNK, None]
            body = _K(r[None, :], alpha, beta, lam, m) @ w
            out[lo : lo + _MODE_CHUNK] = (body + tail * _K(r_low, alpha, beta, lam, m[:, 0])) / math.pi
    if np.any(mu_rho > LARGE_RHO):
        warnings.warn("mu*rho^s above 1e12: relaxation values clamped to [0, 1]", RuntimeWarning,
                      stacklevel=2)
    return np.clip(out, 0.0, 1.0)


def eval_u(t, ev: KernelEvaluator):
    """u_k(t) for scalar or array t; u(0) = 1 exactly."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    vals = np.array([
        relaxation_values(ti, ev.mu_rho, ev.alpha, ev.beta, ev.lam, ev.method, ev.n_q)[0]
        for ti in t_arr.ravel()
    ])
    return float(vals[0]) if t_arr.ndim == 0 else vals.reshape(t_arr.shape)


def _volterra_coeffs(ev: KernelEvaluator, tau: float, n: int) -> np.ndarray:
    c = ev.mu_rho * cq_weights(-ev.alpha, tau, n + 1).d
    if ev.lam:
        c = c + ev.lam * cq_weights(-ev.beta, tau, n + 1).d
    return c


def _march(c: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve v_n + sum_{j=1}^{n} c_{n-j} v_j = rhs_n for n >= 1 with v_0 = 0."""
    n = rhs.size - 1
    v = np.zeros(n + 1)
    inv = 1.0 / (1.0 + c[0])
    for j in range(1, n + 1):
        v[j] = (rhs[j] - np.dot(c[j - 1 : 0 : -1], v[1:j])) * inv
    return v


def _relaxation_cq(ev: KernelEvaluator, tau: float, n: int) -> np.ndarray:
    # march w = u - 1 so that I^eta[1] = t^eta / Gamma(1 + eta) is taken exactly
    t = tau * np.arange(n + 1)
    rhs = -ev.mu_rho * t**ev.alpha / math.gamma(1 + ev.alpha)
    if ev.lam:
        rhs -= ev.lam * t**ev.beta / math.gamma(1 + ev.beta)
    return 1.0 + _march(_volterra_coeffs(ev, tau, n), rhs)


def volterra_oracle(ev: KernelEvaluator, tau_fine: float, n: int, richardson: bool = True):
    """u(t_j), t_j = j * tau_fine, j = 0..n, from the Volterra form via BE convolution quadrature.

    With ``richardson`` the result is 2 u_{tau/2} - u_tau, cancelling the
    first-order term of the backward-Euler error.
    """
    if not tau_fine > 0 or n < 1:
        raise ValueError("need tau_fine > 0 and n >= 1")
    if 1.0 / tau_fine <= ev.lam + ev.mu_rho:
        raise ValueError("tau_fine too large: need 1/tau > lam + mu rho^s")
    coarse = _relaxation_cq(ev, tau_fine, n)
    if not richardson:
        return coarse
    fine = _relaxation_cq(ev, 0.5 * tau_fine, 2 * n)
    return 2.0 * fine[::2] - coarse


def forced_volterra(ev: KernelEvaluator, tau: float, source) -> np.ndarray:
    """Zero-initial-data forced mode problem in Volterra form.

    Solves v_n + sum_{j=1}^n c_{n-j} v_j = tau sum_{j=1}^n F_j, the integrated
    counterpart of the derivative-form scheme with the same BE symbol.
    ``source[j]`` is F(t_j); ``source[0]`` is ignored.
    """
    source = np.asarray(source, dtype=float)
    n = source.size - 1
    rhs = np.zeros(n + 1)
    rhs[1:] = tau * np.cumsum(source[1:])
    return _march(_volterra_coeffs(ev, tau, n), rhs)


def mittag_leffler_series(alpha: float, z: float, tol: float = 1e-17, max_terms: int = 10_000):
    """E_alpha(z) by its power series; accurate for |z| <= 1."""
    total, n = 0.0, 0
    while n < max_terms:
        term = z**n / math.gamma(alpha * n + 1)
        total += term
        if abs(term) < tol * max(1.0, abs(total)) and n > 2:
            break
        n += 1
    return total


@dataclass(frozen=True, eq=False)
class KernelTable:
    times: np.ndarray
    modes: np.ndarray
    rho: np.ndarray
    values: np.ndarray  # (len(modes), len(times))


def kernel_table(params, basis: Basis, times, modes=None, method: str = "panel") -> KernelTable:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) < 0):
        raise ValueError("times must be a sorted 1-D sequence")
    if np.any(times < 0) or np.any(times > params.horizon):
        raise ValueError(f"times must lie in [0, {params.horizon}]")
    modes = basis.modes if modes is None else np.asarray(modes, dtype=int)
    if np.any(modes < 1) or np.any(modes > basis.n_modes):
        raise ValueError("mode index outside the basis")
    rho = basis.eigenvalues[modes - 1]
    mu_rho = params.mu * rho**params.s
    values = np.empty((modes.size, times.size))
    for i, t in enumerate(times):
        values[:, i] = relaxation_values(t, mu_rho, params.alpha, params.beta, params.lam, method)
    return KernelTable(times=times, modes=modes, rho=rho, values=values)
