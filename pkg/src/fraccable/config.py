"""Strict line-oriented ``key = value`` configuration.

Every key has a type and a range; unknown, duplicate, malformed or missing
keys raise ``ConfigError`` carrying the line number.  Enums are
case-insensitive, lists are comma-separated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .experiments import StudySpec
from .model import Discretization, GammaSpec, HurstPair, ModelParams, NonlinearitySpec

SUBCOMMANDS = ("simulate", "kernel-table", "noise-check", "convergence")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = f"line {line}: " if line is not None else ""
        what = f"{key}: " if key is not None else ""
        super().__init__(f"{where}{what}{message}")
        self.line = line
        self.key = key


@dataclass(frozen=True)
class Key:
    kind: str  # real | int | enum | bool | reals | ints
    check: object = None  # predicate on the parsed value (each element for lists)
    rule: str = ""
    choices: tuple = ()


def _open01(x):
    return 0.0 < x < 1.0


SCHEMA = {
    # model
    "alpha": Key("real", _open01, "0 < alpha < 1"),
    "beta": Key("real", _open01, "0 < beta < 1"),
    "s": Key("real", _open01, "0 < s < 1"),
    "lam": Key("real", lambda x: x >= 0, "lam >= 0"),
    "mu": Key("real", lambda x: x > 0, "mu > 0"),
    "length": Key("real", lambda x: x > 0, "length > 0"),
    "horizon": Key("real", lambda x: x > 0, "horizon > 0"),
    "hurst_h1": Key("real", lambda x: 0 < x <= 0.5, "0 < H1 <= 1/2"),
    "hurst_h2": Key("real", lambda x: 0 < x <= 0.5, "0 < H2 <= 1/2"),
    "gamma": Key("enum", choices=("poly_t", "sin_t", "zero")),
    "gamma_scale": Key("real"),
    "nonlinearity": Key("enum", choices=("zero", "linear", "bounded_sin")),
    "f_scale": Key("real"),
    "seed": Key("int", lambda x: 0 <= x < 2**64, "0 <= seed < 2^64"),
    # discretization
    "n_modes": Key("int", lambda x: x >= 1, "n_modes >= 1"),
    "n_steps": Key("int", lambda x: x >= 1, "n_steps >= 1"),
    "wz_time": Key("int", lambda x: x >= 1, "wz_time >= 1"),
    "wz_space": Key("int", lambda x: x >= 1, "wz_space >= 1"),
    # simulate
    "record_every": Key("int", lambda x: x >= 1, "record_every >= 1"),
    "field_points": Key("int", lambda x: x == 0 or x >= 2, "field_points = 0 or >= 2"),
    # kernel-table
    "kernel_times": Key("reals", lambda x: x >= 0, "times >= 0"),
    "kernel_modes": Key("ints", lambda x: x >= 1, "modes >= 1"),
    "kernel_method": Key("enum", choices=("panel", "laguerre")),
    # noise-check
    "noise_m": Key("int", lambda x: 1 <= x <= 8, "1 <= noise_m <= 8"),
    "noise_m_space": Key("int", lambda x: 1 <= x <= 8, "1 <= noise_m_space <= 8"),
    "noise_samples": Key("int", lambda x: x >= 2, "noise_samples >= 2"),
    # convergence
    "study_kind": Key("enum", choices=("temporal", "wz_mesh", "spatial_modes", "deterministic")),
    "wz_coarsen": Key("enum", choices=("time", "space")),
    "ladder": Key("ints", lambda x: x >= 1, "ladder entries >= 1"),
    "n_samples": Key("int", lambda x: x >= 1, "n_samples >= 1"),
    "batch": Key("int", lambda x: x >= 1, "batch >= 1"),
    "error_time": Key("real", lambda x: x > 0, "error_time > 0"),
    "sigma": Key("real", lambda x: x >= 0, "sigma >= 0"),
    "tolerance_low": Key("real", lambda x: x >= 0, "tolerance_low >= 0"),
    "tolerance_high": Key("real", lambda x: x >= 0, "tolerance_high >= 0"),
    "squared": Key("bool"),
}

DEFAULTS = {
    "length": 1.0, "horizon": 1.0, "hurst_h1": 0.5, "hurst_h2": 0.5,
    "gamma": "poly_t", "gamma_scale": 1.0, "nonlinearity": "zero", "f_scale": 0.0, "seed": 0,
    "record_every": 1, "field_points": 17, "kernel_method": "panel",
    "wz_coarsen": "time", "batch": 25, "sigma": 0.0,
    "tolerance_low": 0.25, "tolerance_high": 0.35, "squared": False,
}

_MODEL_REQUIRED = ("alpha", "beta", "s", "lam", "mu")
REQUIRED = {
    "simulate": _MODEL_REQUIRED + ("n_modes", "n_steps"),
    "kernel-table": _MODEL_REQUIRED + ("n_modes", "kernel_times"),
    "noise-check": ("noise_m", "noise_m_space", "noise_samples"),
    "convergence": _MODEL_REQUIRED + ("study_kind", "n_modes", "n_steps", "ladder", "n_samples"),
}


@dataclass
class RunConfig:
    values: dict
    subcommand: str | None = None
    out: str | None = None
    lines: dict = field(default_factory=dict, compare=False)  # key -> source line number
    raw: dict = field(default_factory=dict, compare=False)  # key -> value text as written

    def get(self, key):
        if key in self.values:
            return self.values[key]
        if key in DEFAULTS:
            return DEFAULTS[key]
        raise ConfigError("missing required key", key=key)

    @property
    def seed(self) -> int:
        return self.get("seed")


def _parse_scalar(kind, text, key):
    if kind == "real":
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("not a finite number")
        return v
    if kind == "int":
        return int(text, 10)
    if kind == "bool":
        low = text.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ValueError("expected true or false")
    raise AssertionError(kind)


def parse_value(key: str, text: str, line: int | None = None):
    spec = SCHEMA.get(key)
    if spec is None:
        raise ConfigError("unknown key", line, key)
    text = text.strip()
    if not text:
        raise ConfigError("empty value", line, key)
    try:
        if spec.kind == "enum":
            value = text.lower()
            if value not in spec.choices:
                raise ValueError(f"expected one of {', '.join(spec.choices)}")
            return value
        if spec.kind in ("reals", "ints"):
            elem = "real" if spec.kind == "reals" else "int"
            value = tuple(_parse_scalar(elem, part.strip(), key) for part in text.split(","))
            items = value
        else:
            value = _parse_scalar(spec.kind, text, key)
            items = (value,)
    except ValueError as exc:
        raise ConfigError(f"malformed value {text!r} ({exc})", line, key) from None
    if spec.check is not None and not all(spec.check(v) for v in items):
        raise ConfigError(f"value {text!r} out of range ({spec.rule})", line, key)
    return value


def parse_config(text: str, subcommand: str | None = None) -> RunConfig:
    values, lines, raw = {}, {}, {}
    for lineno, source in enumerate(text.splitlines(), start=1):
        body = source.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno)
        key, _, val = body.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError("missing key before '='", lineno)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", lineno, key)
        values[key] = parse_value(key, val, lineno)
        lines[key] = lineno
        raw[key] = val.strip()
    cfg = RunConfig(values, subcommand, lines=lines, raw=raw)
    if subcommand is not None:
        check_required(cfg, subcommand)
    return cfg


def check_required(cfg: RunConfig, subcommand: str) -> None:
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    missing = [k for k in REQUIRED[subcommand] if k not in cfg.values]
    if missing:
        raise ConfigError(f"missing required key(s) for {subcommand}: {', '.join(missing)}")


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)  # shortest text that round-trips
    if isinstance(value, tuple):
        return ", ".join(format_value(v) for v in value)
    return str(value)


def echo_items(cfg: RunConfig) -> list:
    """(key, text) pairs in schema order, using the source text where there is one."""
    return [(k, cfg.raw.get(k, format_value(cfg.values[k]))) for k in SCHEMA if k in cfg.values]


def emit_config(cfg: RunConfig) -> str:
    order = [k for k in SCHEMA if k in cfg.values]
    return "".join(f"{k} = {format_value(cfg.values[k])}\n" for k in order)


def _model_from(cfg: RunConfig) -> ModelParams:
    try:
        return ModelParams(
            alpha=cfg.get("alpha"), beta=cfg.get("beta"), s=cfg.get("s"),
            lam=cfg.get("lam"), mu=cfg.get("mu"),
            length=cfg.get("length"), horizon=cfg.get("horizon"),
            hurst=HurstPair(cfg.get("hurst_h1"), cfg.get("hurst_h2")),
            gamma=GammaSpec(cfg.get("gamma"), cfg.get("gamma_scale")),
            nonlinearity=NonlinearitySpec(cfg.get("nonlinearity"), cfg.get("f_scale")),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def build_params(cfg: RunConfig) -> ModelParams:
    from .model import validate

    params = _model_from(cfg)
    report = validate(params)
    if not report.ok:
        raise ConfigError("invalid model parameters: " + "; ".join(report.messages))
    return params


def build_discretization(cfg: RunConfig) -> Discretization:
    n_modes, n_steps = cfg.get("n_modes"), cfg.get("n_steps")
    wz_time = cfg.values.get("wz_time", n_steps)
    wz_space = cfg.values.get("wz_space", 2 * n_modes)
    return Discretization(n_modes, n_steps, wz_time, wz_space)


def build_study(cfg: RunConfig) -> StudySpec:
    params = build_params(cfg)
    ref = build_discretization(cfg)
    kind = cfg.get("study_kind")
    ladder = cfg.get("ladder")
    if kind in ("temporal", "deterministic"):
        if ref.wz_time != ref.n_steps:
            raise ConfigError("temporal studies refine the WZ time cells with the step: "
                              "wz_time must equal n_steps", cfg.lines.get("wz_time"), "wz_time")
        levels = [Discretization(ref.n_modes, n, n, ref.wz_space) for n in ladder]
    elif kind == "wz_mesh":
        if cfg.get("wz_coarsen") == "time":
            levels = [Discretization(ref.n_modes, ref.n_steps, m, ref.wz_space) for m in ladder]
        else:
            levels = [Discretization(ref.n_modes, ref.n_steps, ref.wz_time, m) for m in ladder]
    else:
        levels = [Discretization(n, ref.n_steps, ref.wz_time, ref.wz_space) for n in ladder]
    try:
        return StudySpec(params, ref, tuple(levels), n_samples=cfg.get("n_samples"),
                         seed=cfg.seed, error_time=cfg.values.get("error_time"),
                         study_kind=kind, sigma=cfg.get("sigma"), batch=cfg.get("batch"))
    except ValueError as exc:
        raise ConfigError(str(exc), cfg.lines.get("ladder"), "ladder") from None
