import numpy as np
import pytest

import oracles as O
from dcfair import (ConvexFn, DCFn, Interval, PGrid, auc_objective, baseline_constraints, build_problem,
                    erm_objective, pauc_objective, pdp_constraints, regularized_objective,
                    wpdp_constraints)
from dcfair.problems import InfeasibleStartError, feasible_start, pauc_window, sigmoid_weak_convexity

IV = Interval(0.1, 0.7)


def _points(size, n=5, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    return [rng.standard_normal(size) * scale for _ in range(n)]


def test_interval_validation_and_parse():
    assert Interval.parse("[0.2, 0.5]") == Interval(0.2, 0.5)
    with pytest.raises(ValueError):
        Interval(0.5, 0.5)
    with pytest.raises(ValueError):
        Interval(-0.1, 0.5)


def test_pgrid_midpoints_by_hand():
    g = PGrid.equally_spaced(Interval(0.0, 1.0), 0.1, 10)
    # cells of [0, 0.9): midpoints 0.045, 0.135, ...
    assert g.values[0] == pytest.approx(0.045)
    assert g.values[-1] == pytest.approx(0.855)
    assert len(g) == 10
    g.check(Interval(0.0, 1.0), 0.1)
    with pytest.raises(ValueError):
        PGrid((0.2, 0.1))
    with pytest.raises(ValueError):
        PGrid((0.1, 0.95)).check(Interval(0.0, 1.0), 0.1)


def test_pauc_window_guard():
    assert pauc_window(10, Interval(0.3, 0.7)) == (3, 7)
    assert pauc_window(3, Interval(0.0, 1.0 / 3.0)) == (0, 1)


@pytest.mark.parametrize("loss", ["logistic", "hinge", "quadratic"])
def test_erm_identity(small_data, loss):
    f = erm_objective(small_data, loss, rho=0.01)
    for v in _points(2 * small_data.d + 2):
        assert f.value(v) == pytest.approx(O.erm(small_data, loss, v), abs=1e-10)


@pytest.mark.parametrize("loss", ["hinge", "logistic", "quadratic"])
def test_auc_and_pauc_identity(small_data, loss):
    f = auc_objective(small_data, loss)
    fp = pauc_objective(small_data, Interval(0.1, 0.45), loss)
    for v in _points(2 * small_data.d + 2, seed=1):
        assert f.value(v) == pytest.approx(O.auc(small_data, loss, v), abs=1e-10)
        assert fp.value(v) == pytest.approx(O.pauc(small_data, 0.1, 0.45, loss, v), abs=1e-10)


@pytest.mark.parametrize("kind", ["hinge", "sigmoid"])
def test_pdp_identity_and_order(three_group_data, kind):
    d = three_group_data
    grid = PGrid.equally_spaced(IV, 0.2, 4)
    cons, layout, _ = pdp_constraints(d, IV, 0.2, grid, kind)
    assert layout.theta_len == 4 and len(cons) == 4 * 3 * 2
    assert cons[0].label.startswith("pdp-lower") and cons[1].label.startswith("pdp-upper")
    for v in _points(layout.size, seed=2):
        want = O.pdp(d, IV.alpha, IV.beta, 0.2, grid.values, kind, v)
        got = [c.value(v) for c in cons]
        assert np.allclose(got, want, atol=1e-10, rtol=0)
        assert np.allclose(cons.block.values(v), got, atol=1e-12, rtol=0)


@pytest.mark.parametrize("kind", ["hinge", "sigmoid"])
def test_wpdp_identity(three_group_data, kind):
    d = three_group_data
    cons, _ = wpdp_constraints(d, IV, 0.1, 0.2, kind)
    assert len(cons) == 6
    for v in _points(2 * d.d + 2, seed=3, scale=0.5):
        assert np.allclose([c.value(v) for c in cons], O.wpdp(d, IV.alpha, IV.beta, 0.1, 0.2, kind, v),
                           atol=1e-10, rtol=0)


@pytest.mark.parametrize("family", ["group-auc", "inter-group", "intra-group"])
def test_baseline_identity(small_data, family):
    cons = baseline_constraints(small_data, family, 0.05)
    for v in _points(2 * small_data.d + 2, seed=4):
        assert np.allclose([c.value(v) for c in cons], O.baseline(small_data, family, 0.05, v),
                           atol=1e-10, rtol=0)


@pytest.mark.parametrize("kind", ["pdp", "wpdp"])
def test_regularized_identity(small_data, kind):
    grid = PGrid.equally_spaced(IV, 0.0, 5)
    f, layout = regularized_objective(small_data, kind, 0.7, IV, pgrid=grid, theta_hat=0.1)
    for v in _points(layout.size, seed=5):
        want = O.regularized(small_data, kind, 0.7, IV.alpha, IV.beta, grid.values, 0.1, "hinge", "logistic", v)
        assert f.value(v) == pytest.approx(want, abs=1e-10)


def _midpoint_convex(fn, pts, rng, tol=1e-10):
    for _ in range(60):
        a, b = pts[rng.integers(len(pts))], pts[rng.integers(len(pts))]
        t = rng.random()
        assert fn.value(t * a + (1 - t) * b) <= t * fn.value(a) + (1 - t) * fn.value(b) + tol


@pytest.mark.parametrize("kind", ["hinge", "sigmoid"])
def test_pdp_parts_are_convex(small_data, kind):
    grid = PGrid.equally_spaced(IV, 0.2, 3)
    cons, layout, _ = pdp_constraints(small_data, IV, 0.2, grid, kind, rho=0.0)
    rng = np.random.default_rng(6)
    pts = _points(layout.size, n=30, seed=7, scale=2.0)
    for c in cons:
        _midpoint_convex(c.plus, pts, rng)
        _midpoint_convex(c.minus, pts, rng)


def test_sigmoid_wpdp_parts_are_convex(small_data):
    cons, extra = wpdp_constraints(small_data, IV, 0.1, 0.0, "sigmoid", rho=0.0)
    assert extra["rho_weak_convexity"] > 0
    rng = np.random.default_rng(8)
    pts = _points(2 * small_data.d + 2, n=30, seed=9, scale=2.0)
    for c in cons:
        _midpoint_convex(c.plus, pts, rng)
        _midpoint_convex(c.minus, pts, rng)


def test_weak_convexity_bound_formula():
    phi = np.array([[1.0, 0.0], [1.0, 2.0]])
    # second moment [[1,1],[1,2]] has top eigenvalue (3 + sqrt 5)/2
    want = (3 + np.sqrt(5)) / 2 / (6 * np.sqrt(3))
    assert sigmoid_weak_convexity(phi, False) == pytest.approx(want)


def test_strong_convexity_reported(small_data):
    p = build_problem(small_data, "pdp", interval=IV, kappa=0.2, rho=0.01, surrogate="sigmoid")
    assert p.mu == pytest.approx(0.01)
    assert p.meta["rho_weak_convexity"] > 0


@pytest.mark.parametrize("family,kw", [
    ("pdp", {"surrogate": "hinge"}), ("pdp", {"surrogate": "sigmoid"}),
    ("wpdp", {"surrogate": "hinge"}), ("wpdp", {"surrogate": "sigmoid"}),
    ("group-auc", {}), ("inter-group", {}), ("intra-group", {}), ("unconstrained", {})])
def test_feasible_start(small_data, family, kw):
    p = build_problem(small_data, family, interval=IV, kappa=0.1, **kw)
    assert p.max_violation(p.start.packed) <= 0.0 or family == "unconstrained"


def test_pdp_kappa_zero_rejected(small_data):
    with pytest.raises(ValueError, match="kappa = 0"):
        build_problem(small_data, "pdp", interval=IV, kappa=0.0)


def test_infeasible_start_detected(small_data):
    layout = build_problem(small_data, "unconstrained").layout
    bad = DCFn(ConvexFn.constant(1.0, layout.size), ConvexFn.constant(0.0, layout.size), "bad")
    with pytest.raises(InfeasibleStartError, match="bad"):
        feasible_start(layout, "group-auc", [bad])


def test_unknown_names(small_data):
    with pytest.raises(ValueError):
        build_problem(small_data, "nope")
    with pytest.raises(ValueError):
        erm_objective(small_data, "squared-hinge")
    with pytest.raises(ValueError):
        pdp_constraints(small_data, IV, 0.1, PGrid.equally_spaced(IV, 0.1), "quadratic")


def test_smooth_subgradients_match_finite_differences(small_data):
    d = small_data
    grid = PGrid.equally_spaced(IV, 0.2, 3)
    cons, layout, _ = pdp_constraints(d, IV, 0.2, grid, "sigmoid")
    f0 = erm_objective(d, "logistic")
    for v in _points(layout.size, n=5, seed=10):
        for c in cons[:6]:
            g = c.plus.subgrad(v) - c.minus.subgrad(v)
            assert O.relative_error(g, O.central_difference(c.value, v)) <= 1e-4
        w = v[:layout.model_len]
        g = f0.plus.subgrad(w) - f0.minus.subgrad(w)
        assert O.relative_error(g, O.central_difference(f0.value, w)) <= 1e-4
