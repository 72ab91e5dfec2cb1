import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fraccable.basis import Basis
from fraccable.model import (
    Discretization, GammaSpec, HurstPair, ModelParams, NonlinearitySpec,
    eval_f, eval_gamma, require_valid, validate,
)


def test_validate_default_passes():
    p = ModelParams(alpha=0.5, beta=0.5, s=0.8, hurst=HurstPair(0.5, 0.5))
    rep = validate(p)
    assert rep.ok
    assert p.well_posedness_margin == pytest.approx(1.1)


def test_validate_beta_above_alpha_fails():
    rep = validate(ModelParams(alpha=0.9, beta=0.95))
    assert not rep.ok
    assert not rep.checks["beta_le_alpha"]


def test_validate_ill_posed_fails():
    p = ModelParams(alpha=0.9, beta=0.5, s=0.1, hurst=HurstPair(0.1, 0.1))
    rep = validate(p)
    assert not rep.checks["well_posed"]
    with pytest.raises(ValueError, match="well_posed"):
        require_valid(p)


def test_validate_is_pure():
    p = ModelParams(alpha=0.7, beta=0.3)
    assert validate(p) == validate(p)


@pytest.mark.parametrize("h", [0.0, -0.1, 0.51, 0.7])
def test_hurst_range(h):
    with pytest.raises(ValueError):
        HurstPair(h, 0.5)
    with pytest.raises(ValueError):
        HurstPair(0.5, h)


def test_eval_gamma_examples():
    assert eval_gamma(GammaSpec("poly_t", 1.0), 0.0, 1.0) == 0.0
    assert eval_gamma(GammaSpec("poly_t", 2.0), 0.5, 1.0) == 1.0
    assert eval_gamma(GammaSpec("zero"), 0.7, 1.0) == 0.0
    with pytest.raises(ValueError):
        eval_gamma(GammaSpec(), 1.5, 1.0)
    with pytest.raises(ValueError):
        eval_gamma(GammaSpec(), -0.1, 1.0)


@pytest.mark.parametrize("kind", ["poly_t", "sin_t", "zero"])
def test_gamma_vanishes_at_zero(kind):
    assert GammaSpec(kind, 3.7)(0.0) == 0.0


def test_gamma_derivative():
    g = GammaSpec("sin_t", 2.0)
    t = 0.3
    h = 1e-6
    assert float(g.derivative(t)) == pytest.approx((g(t + h) - g(t - h)) / (2 * h), rel=1e-8)


def test_eval_f_examples():
    u = np.array([1.0, 0.0, 0.0, 0.0])
    assert np.array_equal(eval_f(NonlinearitySpec("zero"), u), np.zeros(4))
    assert np.array_equal(eval_f(NonlinearitySpec("linear", 1.0), u), u)
    assert np.array_equal(eval_f(NonlinearitySpec("bounded_sin", 1.0), np.zeros(4)), np.zeros(4))
    with pytest.raises(ValueError):
        eval_f(NonlinearitySpec("linear", 1.0), np.array([np.nan, 0.0]))


def test_bounded_sin_small_amplitude_is_nearly_linear():
    basis = Basis(1.0, 8)
    u = 1e-4 * np.arange(1, 9) / 8
    out = eval_f(NonlinearitySpec("bounded_sin", 1.0), u, basis)
    np.testing.assert_allclose(out, u, atol=1e-11)


def test_declared_lipschitz_floor():
    assert NonlinearitySpec("linear", -2.0).lipschitz == 2.0
    with pytest.raises(ValueError):
        NonlinearitySpec("bounded_sin", 2.0, lipschitz=1.0)
    with pytest.raises(ValueError):
        NonlinearitySpec("cubic", 1.0)


vec = st.integers(1, 64).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-10, 10), min_size=n, max_size=n),
        st.lists(st.floats(-10, 10), min_size=n, max_size=n),
    )
)


@settings(max_examples=60, deadline=None)
@given(vec, st.sampled_from(["zero", "linear", "bounded_sin"]), st.floats(-3, 3))
def test_lipschitz_property(uv, kind, scale):
    u, v = (np.array(x) for x in uv)
    spec = NonlinearitySpec(kind, scale)
    basis = Basis(1.0, u.size)
    lhs = np.linalg.norm(eval_f(spec, u, basis) - eval_f(spec, v, basis))
    rhs = spec.lipschitz * np.linalg.norm(u - v)
    assert lhs <= rhs * (1 + 1e-12) + 1e-300


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=64), st.floats(-3, 3))
def test_linear_growth_property(u, scale):
    u = np.array(u)
    for kind in ("zero", "linear", "bounded_sin"):
        spec = NonlinearitySpec(kind, scale)
        fu = eval_f(spec, u, Basis(1.0, u.size))
        assert np.linalg.norm(fu) <= spec.lipschitz * (1 + np.linalg.norm(u)) * (1 + 1e-12)


def test_discretization_rejects_nonpositive():
    with pytest.raises(ValueError):
        Discretization(0, 4, 4, 4)
    assert Discretization(4, 8, 8, 8).tau(2.0) == 0.25
