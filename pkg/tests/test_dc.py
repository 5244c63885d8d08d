import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dcfair import ConvexFn, DCFn, hinge_surrogate, linearize_minus, max_constraint, mu_shift
from dcfair.dc import SurrogateKind, estimate_lipschitz, hinge_parts, quadratic_surrogate, sigmoid_surrogate


def _quad(c):
    c = np.asarray(c, dtype=float)
    return ConvexFn(lambda v: float(np.sum((v - c) ** 2)), lambda v: 2 * (v - c))


def _absf():
    return ConvexFn(lambda v: float(np.abs(v).sum()), lambda v: np.sign(v))


def test_hinge_surrogate_clamp_identity_grid():
    for x in np.linspace(-3, 3, 1201):
        val, sp, sm, _, _ = hinge_surrogate(x)
        assert val == min(max(x + 0.5, 0.0), 1.0)
        assert sp - sm == val


def test_hinge_kinks_take_right_derivative():
    assert hinge_surrogate(-0.5)[3] == 1.0
    assert hinge_surrogate(0.5)[4] == 1.0
    assert hinge_surrogate(-0.5 - 1e-12)[3] == 0.0


def test_sigmoid_and_quadratic_derivatives():
    x = np.linspace(-4, 4, 17)
    s, ds = sigmoid_surrogate(x)
    assert np.allclose(s, 1 / (1 + np.exp(-x)))
    h = 1e-6
    assert np.allclose(ds, (sigmoid_surrogate(x + h)[0] - sigmoid_surrogate(x - h)[0]) / (2 * h), rtol=1e-6)
    q, dq = quadratic_surrogate(x)
    assert np.allclose(q, 0.5 * (1 + x) ** 2) and np.allclose(dq, 1 + x)


def test_surrogate_parse():
    assert SurrogateKind.parse("hinge-window") is SurrogateKind.HINGE
    with pytest.raises(ValueError):
        SurrogateKind.parse("tanh")


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3), st.floats(0, 2))
def test_mu_shift_keeps_difference(v, rho):
    v = np.array(v)
    f = DCFn(_quad([1, 0, -1]), _absf())
    g = mu_shift(f.plus, f.minus, rho)
    assert abs(g.value(v) - f.value(v)) <= 1e-9 * (1 + abs(f.value(v)))
    assert g.mu == rho


def test_mu_shift_rejects_negative():
    with pytest.raises(ValueError):
        mu_shift(_absf(), _absf(), -1.0)


def test_linearize_minus_touches_and_majorizes():
    rng = np.random.default_rng(0)
    f = DCFn(_quad([0.5, -0.5]), _absf())
    a = np.array([0.3, -2.0])
    g = linearize_minus(f, a)
    assert abs(g.value(a) - f.value(a)) < 1e-12
    for _ in range(200):
        u = rng.standard_normal(2) * 3
        assert g.value(u) >= f.value(u) - 1e-12
    assert np.allclose(g.subgrad(a), f.plus.subgrad(a) - f.minus.subgrad(a))


def test_max_constraint_ties_lowest_index():
    fs = [ConvexFn.constant(1.0, 2), ConvexFn.constant(3.0, 2), ConvexFn.constant(3.0, 2)]
    val, g, i = max_constraint(fs, np.zeros(2))
    assert (val, i) == (3.0, 1)
    with pytest.raises(ValueError):
        max_constraint([], np.zeros(2))


def test_max_constraint_dc_subgradient():
    f = DCFn(_quad([1.0, 1.0]), _absf())
    val, g, i = max_constraint([f], np.array([2.0, -1.0]))
    assert np.allclose(g, 2 * np.array([1.0, -2.0]) - np.array([1.0, -1.0]))


def test_estimate_lipschitz_linear():
    a = np.array([3.0, 4.0])
    f = ConvexFn(lambda v: float(a @ v), lambda v: a)
    assert estimate_lipschitz(f, np.zeros(2)) == pytest.approx(10.0)


def test_hinge_parts_vectorized_matches_scalar():
    x = np.linspace(-2, 2, 41)
    sp, sm, dp, dm = hinge_parts(x)
    for i, xi in enumerate(x):
        _, a, b, c, d = hinge_surrogate(xi)
        assert (sp[i], sm[i], dp[i], dm[i]) == (a, b, c, d)
