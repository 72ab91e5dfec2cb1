"""Problem data for the stochastic time-space fractional cable equation.

    du/dt + lam d^{1-beta} u + mu d^{1-alpha} A^s u = f(u) + gamma(t) xi,  on (0, l) x (0, T]

with homogeneous Dirichlet conditions and fractional-Brownian-sheet noise xi.
The nonlinearity and the noise modulation come from small closed registries so
that their Lipschitz constants are known.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .basis import Basis

WELL_POSED_MARGIN = 1e-9

GAMMA_KINDS = ("poly_t", "sin_t", "zero")
NONLINEARITY_KINDS = ("zero", "linear", "bounded_sin")


@dataclass(frozen=True)
class HurstPair:
    h1: float  # space
    h2: float  # time

    def __post_init__(self):
        for name in ("h1", "h2"):
            h = getattr(self, name)
            if not (0.0 < h <= 0.5):
                raise ValueError(f"Hurst index {name}={h} outside (0, 1/2]")


@dataclass(frozen=True)
class GammaSpec:
    kind: str = "poly_t"
    scale: float = 1.0

    def __post_init__(self):
        if self.kind not in GAMMA_KINDS:
            raise ValueError(f"unknown gamma kind {self.kind!r}; expected one of {GAMMA_KINDS}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "poly_t":
            return self.scale * t
        if self.kind == "sin_t":
            return self.scale * np.sin(t)
        return np.zeros_like(t)

    def derivative(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "poly_t":
            return np.full_like(t, self.scale)
        if self.kind == "sin_t":
            return self.scale * np.cos(t)
        return np.zeros_like(t)


@dataclass(frozen=True)
class NonlinearitySpec:
    kind: str = "zero"
    scale: float = 0.0
    lipschitz: float | None = None

    def __post_init__(self):
        if self.kind not in NONLINEARITY_KINDS:
            raise ValueError(
                f"unknown nonlinearity kind {self.kind!r}; expected one of {NONLINEARITY_KINDS}"
            )
        declared = abs(self.scale) if self.kind != "zero" else 0.0
        if self.lipschitz is None:
            object.__setattr__(self, "lipschitz", declared)
        elif self.lipschitz < declared:
            raise ValueError(
                f"declared Lipschitz constant {self.lipschitz} below |scale| = {declared}"
            )

    @property
    def is_diagonal(self) -> bool:
        return self.kind in ("zero", "linear")


@dataclass(frozen=True)
class ModelParams:
    alpha: float = 0.5
    beta: float = 0.5
    s: float = 0.8
    lam: float = 1.0
    mu: float = 1.0
    length: float = 1.0
    horizon: float = 1.0
    hurst: HurstPair = field(default_factory=lambda: HurstPair(0.5, 0.5))
    gamma: GammaSpec = field(default_factory=GammaSpec)
    nonlinearity: NonlinearitySpec = field(default_factory=NonlinearitySpec)

    @property
    def well_posedness_margin(self) -> float:
        """2 s H2 / alpha + H1 - 1; must be positive."""
        return 2 * self.s * self.hurst.h2 / self.alpha + self.hurst.h1 - 1


@dataclass(frozen=True)
class Discretization:
    n_modes: int
    n_steps: int
    wz_time: int
    wz_space: int

    def __post_init__(self):
        for name in ("n_modes", "n_steps", "wz_time", "wz_space"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v}")

    def tau(self, horizon: float) -> float:
        return horizon / self.n_steps


@dataclass(frozen=True)
class ValidationReport:
    checks: dict
    messages: tuple

    @property
    def ok(self) -> bool:
        return all(self.checks.values())

    def __bool__(self):
        return self.ok


def validate(params: ModelParams) -> ValidationReport:
    p = params
    checks = {
        "alpha_in_(0,1)": 0.0 < p.alpha < 1.0,
        "beta_in_(0,1)": 0.0 < p.beta < 1.0,
        "beta_le_alpha": p.beta <= p.alpha,
        "s_in_(0,1)": 0.0 < p.s < 1.0,
        "lambda_nonneg": p.lam >= 0.0,
        "mu_positive": p.mu > 0.0,
        "length_positive": p.length > 0.0,
        "horizon_positive": p.horizon > 0.0,
    }
    margin = p.well_posedness_margin if p.alpha > 0 else -math.inf
    checks["well_posed"] = margin > WELL_POSED_MARGIN
    messages = tuple(name for name, passed in checks.items() if not passed)
    if not checks["well_posed"]:
        messages = messages[:-1] + (f"well_posed: 2 s H2/alpha + H1 - 1 = {margin:.6g} <= 0",)
    return ValidationReport(checks=checks, messages=messages)


def require_valid(params: ModelParams) -> None:
    report = validate(params)
    if not report.ok:
        raise ValueError("invalid model parameters: " + "; ".join(report.messages))


def eval_gamma(spec: GammaSpec, t, horizon: float):
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > horizon):
        raise ValueError(f"t outside [0, {horizon}]")
    out = spec(t_arr)
    return float(out) if out.ndim == 0 else out


@lru_cache(maxsize=32)
def _sin_grid(basis: Basis):
    q = 4 * basis.n_modes
    xs = basis.grid(q)
    synth = basis.synthesis_matrix(xs)  # (q, N)
    wts = np.full(q, basis.length / (q - 1))
    wts[0] *= 0.5
    wts[-1] *= 0.5
    return synth, synth * wts[:, None]


def eval_f(spec: NonlinearitySpec, u, basis: Basis | None = None):
    """Spectral coefficients of f(u) for coefficients ``u`` (modes on the last axis).

    ``bounded_sin`` is evaluated pseudo-spectrally: synthesis on 4N equispaced
    points, sin applied pointwise, trapezoid re-projection.
    """
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError("non-finite coefficients passed to the nonlinearity")
    if spec.kind == "zero":
        return np.zeros_like(u)
    if spec.kind == "linear":
        return spec.scale * u
    if basis is None:
        basis = Basis(1.0, u.shape[-1])
    if basis.n_modes != u.shape[-1]:
        raise ValueError("basis size does not match coefficient vector")
    synth, proj = _sin_grid(basis)
    return spec.scale * (np.sin(u @ synth.T) @ proj)
