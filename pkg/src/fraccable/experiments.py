"""Monte-Carlo strong-error studies and numerical property checks.

Strong errors are measured by self-convergence: each sample draws one sheet
on the reference Wong-Zakai grid, the reference solution is computed on the
finest discretization, and every ladder level is driven by the block-summed
(coarsened) version of the same sheet.  Errors are discrete L2 coefficient
norms at a single time.

Samples are processed in fixed-size chunks; ``threads`` only decides how many
chunks run at once, so reports are identical for any thread count.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .basis import Basis
from .kernel import KernelEvaluator, relaxation_values, volterra_oracle
from .model import Discretization, HurstPair, ModelParams, require_valid
from .noise import (
    coarsening_matrix,
    covariance_matrix,
    derive_seed,
    make_rng,
    sample_sheets,
    coarsen,
    sheet_factors,
)
from .solver import linear_reference, run

STUDY_KINDS = ("temporal", "wz_mesh", "spatial_modes", "deterministic")


@dataclass(frozen=True)
class StudySpec:
    params: ModelParams
    reference: Discretization
    ladder: tuple
    n_samples: int = 200
    seed: int = 0
    error_time: float | None = None
    study_kind: str = "temporal"
    sigma: float = 0.0  # spatial regularity index for wz_mesh space coarsening
    batch: int = 25  # samples per chunk; part of the result's identity

    def __post_init__(self):
        if self.study_kind not in STUDY_KINDS:
            raise ValueError(f"unknown study kind {self.study_kind!r}")
        if self.n_samples < 1 or self.batch < 1:
            raise ValueError("n_samples and batch must be >= 1")
        object.__setattr__(self, "ladder", tuple(self.ladder))
        if len(self.ladder) == 0:
            raise ValueError("empty ladder")
        ref = self.reference
        for lvl in self.ladder:
            if (ref.n_steps % lvl.n_steps or ref.wz_time % lvl.wz_time
                    or ref.wz_space % lvl.wz_space or lvl.n_modes > ref.n_modes):
                raise ValueError(f"ladder level {lvl} does not divide the reference {ref}")

    @property
    def time(self) -> float:
        return self.params.horizon if self.error_time is None else self.error_time


@dataclass(eq=False)
class RateReport:
    kind: str
    meshes: np.ndarray
    rms_errors: np.ndarray
    stderr: np.ndarray
    slope: float
    slope_stderr: float
    theoretical: float
    degenerate: bool = False
    sq_errors: np.ndarray = field(default=None, repr=False)  # (M, levels)

    @property
    def mse_slope(self) -> float:
        return 2.0 * self.slope

    @property
    def theoretical_mse(self) -> float:
        return 2.0 * self.theoretical

    def within(self, low_tol: float, high_tol: float, squared: bool = False) -> bool:
        slope = self.mse_slope if squared else self.slope
        theory = self.theoretical_mse if squared else self.theoretical
        return (not self.degenerate) and theory - low_tol <= slope <= theory + high_tol


def fit_rate(errors, meshes):
    """Least-squares slope of log(error) against log(mesh) and its standard error."""
    errors = np.asarray(errors, dtype=float)
    meshes = np.asarray(meshes, dtype=float)
    if errors.size < 3 or errors.size != meshes.size:
        raise ValueError("need at least three (mesh, error) pairs")
    if np.any(errors <= 0) or np.any(meshes <= 0):
        raise ValueError("errors and meshes must be positive")
    x, y = np.log(meshes), np.log(errors)
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    dof = x.size - 2
    stderr = math.sqrt(max(float(resid @ resid), 0.0) / dof / sxx) if dof > 0 else 0.0
    return slope, stderr


def theoretical_exponent(spec: StudySpec) -> float:
    p = spec.params
    h1, h2 = p.hurst.h1, p.hurst.h2
    kind = spec.study_kind
    if kind == "temporal":
        return h2 + p.alpha * (h1 - 1) / (2 * p.s)
    if kind == "wz_mesh":
        if _wz_coarsens_time(spec):
            return (2 * h2 - p.alpha / (2 * p.s)) / 2
        return (2 * spec.sigma + 2 * h1 - 1) / 2
    if kind == "spatial_modes":
        return -2 * p.s * min(h2 / p.alpha, 1.0)
    return 1.0


def _wz_coarsens_time(spec: StudySpec) -> bool:
    return any(lvl.wz_time != spec.reference.wz_time for lvl in spec.ladder)


def _mesh(spec: StudySpec, lvl: Discretization) -> float:
    p = spec.params
    if spec.study_kind in ("temporal", "deterministic"):
        return p.horizon / lvl.n_steps
    if spec.study_kind == "spatial_modes":
        return float(lvl.n_modes)
    if _wz_coarsens_time(spec):
        return p.horizon / lvl.wz_time
    return p.length / lvl.wz_space


def _step_at(disc: Discretization, horizon: float, t: float) -> int:
    n = round(t / horizon * disc.n_steps)
    if n < 1 or abs(n * horizon / disc.n_steps - t) > 1e-9 * horizon:
        raise ValueError(f"error time {t} is not a step of the {disc.n_steps}-step grid")
    return n


def _solution_at(params, disc, noise, t, forcing=None):
    n = _step_at(disc, params.horizon, t)
    sub = replace(disc, n_steps=n)
    p = replace(params, horizon=n * params.horizon / disc.n_steps)
    if noise is not None and n != disc.n_steps:
        raise ValueError("error_time before T is only supported for noise-free studies")
    return run(p, sub, noise, record_every=n, forcing=forcing).final


def _pad(u, n_modes):
    if u.shape[-1] == n_modes:
        return u
    out = np.zeros(u.shape[:-1] + (n_modes,))
    out[..., : u.shape[-1]] = u
    return out


def _deterministic_forcing(n_modes):
    return lambda t: np.full(n_modes, math.exp(-t))


def _chunk_errors(spec: StudySpec, indices) -> np.ndarray:
    p, ref = spec.params, spec.reference
    t = spec.time
    if spec.study_kind == "deterministic":
        u_ref = _solution_at(p, ref, None, t, _deterministic_forcing(ref.n_modes))
        rows = []
        for lvl in spec.ladder:
            u = _solution_at(p, lvl, None, t, _deterministic_forcing(lvl.n_modes))
            rows.append(np.sum((_pad(u, ref.n_modes) - u_ref) ** 2, axis=-1))
        return np.tile(np.array(rows), (len(indices), 1))
    sheet = sample_sheets(p.hurst, ref.wz_time, ref.wz_space, p.horizon, p.length,
                          spec.seed, indices)
    u_ref = _solution_at(p, ref, sheet, t)
    out = np.empty((len(indices), len(spec.ladder)))
    for j, lvl in enumerate(spec.ladder):
        coarse = coarsen(sheet, ref.wz_time // lvl.wz_time, ref.wz_space // lvl.wz_space)
        u = u_ref if lvl == ref else _solution_at(p, lvl, coarse, t)
        out[:, j] = np.sum((_pad(u, ref.n_modes) - u_ref) ** 2, axis=-1)
    return out


def run_study(spec: StudySpec, threads: int = 1) -> RateReport:
    require_valid(spec.params)
    M = spec.n_samples if spec.study_kind != "deterministic" else 1
    chunks = [list(range(lo, min(lo + spec.batch, M))) for lo in range(0, M, spec.batch)]
    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _chunk_errors(spec, c), chunks))
    else:
        parts = [_chunk_errors(spec, c) for c in chunks]
    sq = np.concatenate(parts, axis=0)
    return _report(spec, sq)


def _report(spec: StudySpec, sq: np.ndarray) -> RateReport:
    M = sq.shape[0]
    msq = sq.mean(axis=0)
    rms = np.sqrt(msq)
    if M > 1:
        se_msq = sq.std(axis=0, ddof=1) / math.sqrt(M)
        se = np.divide(se_msq, 2 * rms, out=np.zeros_like(rms), where=rms > 0)
    else:
        se = np.zeros_like(rms)
    meshes = np.array([_mesh(spec, lvl) for lvl in spec.ladder])
    fit_mask = np.array([lvl != spec.reference for lvl in spec.ladder])
    slope, slope_se, degenerate = math.nan, math.nan, True
    if fit_mask.sum() >= 3 and np.all(rms[fit_mask] > 0):
        slope, slope_se = fit_rate(rms[fit_mask], meshes[fit_mask])
        degenerate = False
    return RateReport(spec.study_kind, meshes, rms, se, slope, slope_se,
                      theoretical_exponent(spec), degenerate, sq)


def strong_error_temporal(spec: StudySpec, threads: int = 1) -> RateReport:
    if spec.study_kind != "temporal":
        raise ValueError("strong_error_temporal needs a temporal study")
    return run_study(spec, threads)


def strong_error_wz(spec: StudySpec, threads: int = 1) -> RateReport:
    if spec.study_kind != "wz_mesh":
        raise ValueError("strong_error_wz needs a wz_mesh study")
    for lvl in spec.ladder:
        if lvl.n_steps != spec.reference.n_steps or lvl.n_modes != spec.reference.n_modes:
            raise ValueError("wz_mesh studies keep the solver grid at reference fineness")
    return run_study(spec, threads)


def spectral_error_study(spec: StudySpec, threads: int = 1) -> RateReport:
    if spec.study_kind != "spatial_modes":
        raise ValueError("spectral_error_study needs a spatial_modes study")
    return run_study(spec, threads)


def deterministic_temporal_study(spec: StudySpec) -> RateReport:
    if spec.study_kind != "deterministic":
        raise ValueError("deterministic_temporal_study needs a deterministic study")
    return run_study(spec)


def temporal_spec(params, n_modes, ref_steps, ladder_steps, wz_space, **kw) -> StudySpec:
    """Solver step and WZ time cell refined together."""
    ref = Discretization(n_modes, ref_steps, ref_steps, wz_space)
    ladder = [Discretization(n_modes, n, n, wz_space) for n in ladder_steps]
    return StudySpec(params, ref, ladder, study_kind="temporal", **kw)


def wz_time_spec(params, n_modes, n_steps, ladder_cells, wz_space, **kw) -> StudySpec:
    """Solver grid fixed at n_steps; only the WZ time cells coarsen."""
    ref = Discretization(n_modes, n_steps, n_steps, wz_space)
    ladder = [Discretization(n_modes, n_steps, m, wz_space) for m in ladder_cells]
    return StudySpec(params, ref, ladder, study_kind="wz_mesh", **kw)


def bootstrap_monotonicity(report: RateReport, n_boot: int = 200, seed: int = 0) -> float:
    """Fraction of bootstrap resamples whose RMS errors grow from finest to coarsest level."""
    sq = report.sq_errors
    order = np.argsort(report.meshes)
    if report.kind == "spatial_modes":
        order = order[::-1]
    rng = make_rng(seed)
    M = sq.shape[0]
    hits = 0
    for _ in range(n_boot):
        rms = np.sqrt(sq[rng.integers(0, M, M)].mean(axis=0))[order]
        hits += bool(np.all(np.diff(rms) > 0))
    return hits / n_boot


# --- noise covariance ------------------------------------------------------------------


@dataclass(eq=False)
class CovarianceReport:
    empirical: np.ndarray
    analytic: np.ndarray
    stderr: np.ndarray
    max_z: float
    coarsening_error: float
    n_samples: int

    @property
    def passed(self) -> bool:
        return self.max_z <= 5.0 and self.coarsening_error <= 1e-12


def covariance_study(hurst: HurstPair, m: int, m_space: int, M: int, seed: int,
                     horizon: float = 1.0, length: float = 1.0, batch: int = 2000) -> CovarianceReport:
    if m * m_space > 64:
        raise ValueError("covariance_study is meant for grids of at most 8 x 8 cells")
    ct = covariance_matrix(hurst.h2, np.linspace(0, horizon, m + 1))
    cx = covariance_matrix(hurst.h1, np.linspace(0, length, m_space + 1))
    analytic = np.kron(ct, cx)
    acc = np.zeros_like(analytic)
    for lo in range(0, M, batch):
        idx = range(lo, min(lo + batch, M))
        X = sample_sheets(hurst, m, m_space, horizon, length, seed, idx).data.reshape(len(idx), -1)
        acc += X.T @ X
    emp = acc / M
    d = np.diag(analytic)
    se = np.sqrt((np.outer(d, d) + analytic**2) / M)
    z = np.abs(emp - analytic) / se
    coarse_err = max(coarsening_identity_error(hurst.h2, m, horizon),
                     coarsening_identity_error(hurst.h1, m_space, length))
    return CovarianceReport(emp, analytic, se, float(z.max()), coarse_err, M)


def coarsening_identity_error(H: float, m: int, extent: float = 1.0) -> float:
    """max |S C_fine S^T - C_coarse| over every factor dividing m (exact, no sampling)."""
    fine = covariance_matrix(H, np.linspace(0, extent, m + 1))
    worst = 0.0
    for f in range(2, m + 1):
        if m % f:
            continue
        S = coarsening_matrix(m, f)
        coarse = covariance_matrix(H, np.linspace(0, extent, m // f + 1))
        worst = max(worst, float(np.max(np.abs(S @ fine @ S.T - coarse))))
    return worst


# --- relaxation kernel checks ----------------------------------------------------------


@dataclass(eq=False)
class PropertyReport:
    checks: dict  # name -> (passed, margin)

    @property
    def passed(self) -> bool:
        return all(ok for ok, _ in self.checks.values())


def kernel_property_suite(params: ModelParams, k_max: int = 64, t_grid=None) -> PropertyReport:
    """Bounds, monotonicity/convexity, k-uniform upper/lower bounds and the difference bound."""
    basis = Basis(params.length, k_max)
    rho_s = basis.frac_eigenvalues(params.s)
    mu_rho = params.mu * rho_s
    a, b, lam = params.alpha, params.beta, params.lam

    def table(ts):
        return np.column_stack([relaxation_values(t, mu_rho, a, b, lam) for t in ts])

    checks = {}
    ts = np.linspace(0.0, 2.0, 33) if t_grid is None else np.asarray(t_grid, dtype=float)
    U = table(ts)
    zero_ok = bool(np.all(U[:, ts == 0] == 1.0))
    checks["bounds"] = (bool(U.min() > 0 and U.max() <= 1.0) and zero_ok, float(U.min()))

    tm = np.linspace(0.05, 2.0, 65)
    Um = table(tm)
    d1 = np.diff(Um, axis=1)
    d2 = np.diff(Um, n=2, axis=1)
    checks["monotone"] = (bool(d1.max() <= 1e-10), float(d1.max()))
    checks["convex"] = (bool(d2.min() >= -1e-10), float(d2.min()))

    upper = (U * (1 + lam * ts**b + rho_s[:, None] * ts**a)).max(axis=1)
    up_ratio = upper.max() / upper[: min(8, k_max)].max()
    checks["upper_k_uniform"] = (bool(up_ratio <= 1.5), float(up_ratio))
    lower = (rho_s[:, None] * U * np.exp(ts)).min(axis=1)
    low_ratio = lower.min() / lower[0]
    checks["lower_k_uniform"] = (bool(lower.min() > 0 and low_ratio >= 0.1), float(low_ratio))

    td = np.linspace(0.5, 2.0, 16)
    h = td / 4
    diff = np.abs(table(td) - table(td - h)) * (td - h) / h
    per_k = diff.max(axis=1)
    C = per_k[0]
    checks["difference_bound"] = (bool(per_k.max() <= 2 * C), float(per_k.max() / C))
    return PropertyReport(checks)


ORACLE_GRID = dict(alphas=(0.4, 0.6, 0.9), lams=(0.0, 1.0), mu_rhos=(1.0, 100.0),
                   times=(0.1, 1.0, 2.0))


def kernel_oracle_agreement(tau: float = 2.0**-14, alphas=ORACLE_GRID["alphas"],
                            lams=ORACLE_GRID["lams"], mu_rhos=ORACLE_GRID["mu_rhos"],
                            times=ORACLE_GRID["times"]):
    """Rows (alpha, beta, lam, mu_rho, t_j, quadrature, oracle, rel_err) over beta <= alpha.

    Each parameter set runs one oracle march up to max(times); values are
    compared at the grid time t_j nearest each requested t.
    """
    rows = []
    n = round(max(times) / tau)
    for a in alphas:
        for b in alphas:
            if b > a:
                continue
            for lam in lams:
                for mr in mu_rhos:
                    ev = KernelEvaluator(a, b, lam, 1.0, mr)
                    u = volterra_oracle(ev, tau, n)
                    for t in times:
                        j = round(t / tau)
                        q = ev.u(j * tau)
                        rows.append((a, b, lam, mr, j * tau, q, u[j], abs(q - u[j]) / abs(u[j])))
    return rows


@dataclass(eq=False)
class DecayReport:
    modes: np.ndarray
    tail_errors: np.ndarray
    slope: float
    slope_stderr: float
    bound: float  # -2s + 0.25

    @property
    def passed(self) -> bool:
        return self.slope <= self.bound


def spectral_operator_decay(params: ModelParams, t: float = 0.5, data_exponent: float = 0.6,
                            modes=(8, 16, 32, 64, 128), k_ref: int = 16384) -> DecayReport:
    """Tail norm ||S(t) g - S_N(t) P_N g|| for data g_k = k^-data_exponent, against N."""
    basis = Basis(params.length, k_ref)
    g = basis.modes.astype(float) ** (-data_exponent)
    u = linear_reference(replace(params, nonlinearity=type(params.nonlinearity)()), basis, g, [t])[0]
    tail_sq = np.cumsum((u * u)[::-1])[::-1]  # tail_sq[N] = sum_{k > N} u_k^2
    modes = np.asarray(modes)
    errs = np.sqrt(tail_sq[modes])
    slope, se = fit_rate(errs, modes)
    return DecayReport(modes, errs, slope, se, -2 * params.s + 0.25)
