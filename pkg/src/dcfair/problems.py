"""DC problem builders: objectives, fairness constraints, feasible starts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.special import expit, logit

from . import _kernels
from .data import Dataset
from .dc import (DEFAULT_RHO, ConvexFn, DCFn, SurrogateKind, half_sq_norm, hinge_parts,
                 mu_shift)
from .scoring import DecisionVector, FeasibleDomain, Layout, featurize_matrix

__all__ = [
    "Interval",
    "PGrid",
    "DCProblem",
    "ConstraintList",
    "InfeasibleStartError",
    "LOSSES",
    "CONSTRAINT_FAMILIES",
    "erm_objective",
    "auc_objective",
    "pauc_objective",
    "pdp_constraints",
    "wpdp_constraints",
    "baseline_constraints",
    "regularized_objective",
    "sigmoid_weak_convexity",
    "feasible_start",
    "build_problem",
]

LOSSES = ("logistic", "hinge", "quadratic")
CONSTRAINT_FAMILIES = ("pdp", "wpdp", "group-auc", "inter-group", "intra-group", "unconstrained")

# sup |sigma''| of the logistic function
_SIGMOID_CURV = 1.0 / (6.0 * math.sqrt(3.0))
_FLOAT_SLACK = 1e-9


class InfeasibleStartError(RuntimeError):
    """The constructed starting point violates a constraint (a builder bug)."""


@dataclass(frozen=True)
class Interval:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < self.beta <= 1.0):
            raise ValueError(f"interval needs 0 <= alpha < beta <= 1, got [{self.alpha}, {self.beta}]")

    @property
    def width(self) -> float:
        return self.beta - self.alpha

    @classmethod
    def parse(cls, text: str) -> "Interval":
        a, b = (float(t) for t in str(text).strip("[]() ").split(","))
        return cls(a, b)


@dataclass(frozen=True)
class PGrid:
    """Finite set of rank levels p inside [alpha, beta - kappa*(beta-alpha))."""

    values: tuple[float, ...]

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        if not v:
            raise ValueError("empty p-grid")
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("p-grid must be strictly increasing")
        object.__setattr__(self, "values", v)

    @classmethod
    def equally_spaced(cls, interval: Interval, kappa: float, count: int = 10) -> "PGrid":
        """Midpoints of ``count`` equal cells of [alpha, beta - kappa*(beta-alpha))."""
        top = interval.beta - kappa * interval.width
        if not top > interval.alpha:
            raise ValueError("p-grid range is empty for this kappa")
        step = (top - interval.alpha) / count
        return cls(tuple(interval.alpha + (j - 0.5) * step for j in range(1, count + 1)))

    def check(self, interval: Interval, kappa: float) -> None:
        top = interval.beta - kappa * interval.width
        if self.values[0] < interval.alpha or self.values[-1] >= top:
            raise ValueError(f"p-grid must lie in [{interval.alpha}, {top})")

    def __len__(self):
        return len(self.values)


@dataclass(eq=False)
class DCProblem:
    objective: DCFn
    constraints: list
    domain: FeasibleDomain
    layout: Layout
    start: DecisionVector
    meta: dict = field(default_factory=dict)

    def max_violation(self, v) -> float:
        if not self.constraints:
            return -math.inf
        return max(c.value(v) for c in self.constraints)

    @property
    def mu(self) -> float:
        parts = [self.objective, *self.constraints]
        return min(f.mu for f in parts)


# ---------------------------------------------------------------------------
# shared score evaluation
# ---------------------------------------------------------------------------

class _Scores:
    """Per-row features and a one-entry cache of the scores at the last query."""

    def __init__(self, phi: np.ndarray):
        self.phi = np.ascontiguousarray(phi)
        self.D = phi.shape[1]
        self._key = None
        self._h = None

    def __call__(self, v) -> np.ndarray:
        w = np.asarray(v, dtype=np.float64)[:self.D]
        if self._key is None or not np.array_equal(w, self._key):
            self._key = w.copy()
            self._h = self.phi @ w
        return self._h


def _group_scores(data: Dataset) -> list[_Scores]:
    phi = featurize_matrix(data.features, data.groups)
    return [_Scores(phi[data.groups == k]) for k in range(1, data.n_groups + 1)]


def _check_rho(rho: float) -> None:
    if not rho >= 0:
        raise ValueError("rho must be nonnegative")


def _check_kappa(kappa: float) -> None:
    if not 0.0 <= kappa <= 1.0:
        raise ValueError(f"kappa must lie in [0,1], got {kappa}")


# ---------------------------------------------------------------------------
# objectives
# ---------------------------------------------------------------------------

def _pointwise_loss(loss: str, m: np.ndarray, y: np.ndarray, h: np.ndarray):
    """Per-row loss and derivative wrt the score."""
    if loss == "logistic":
        return np.logaddexp(0.0, -m), -y * expit(-m)
    if loss == "hinge":
        return np.maximum(1.0 - m, 0.0), np.where(m < 1.0, -y, 0.0)
    if loss == "quadratic":
        r = h - y
        return 0.5 * r * r, r
    raise ValueError(f"unknown loss {loss!r}; expected one of {LOSSES}")


def _pad(g_w: np.ndarray, size: int) -> np.ndarray:
    if g_w.size == size:
        return g_w
    out = np.zeros(size)
    out[:g_w.size] = g_w
    return out


def _erm_convex(data: Dataset, loss: str) -> ConvexFn:
    if loss not in LOSSES:
        raise ValueError(f"unknown loss {loss!r}; expected one of {LOSSES}")
    phi = featurize_matrix(data.features, data.groups)
    y = data.labels
    n, D = phi.shape

    def both(v):
        v = np.asarray(v, dtype=np.float64)
        h = phi @ v[:D]
        vals, dl = _pointwise_loss(loss, y * h, y, h)
        return float(vals.mean()), _pad(phi.T @ dl / n, v.size)

    return ConvexFn(lambda v: both(v)[0], lambda v: both(v)[1], both=both)


def erm_objective(data: Dataset, loss: str = "logistic", rho: float = DEFAULT_RHO) -> DCFn:
    """Average pointwise loss, split as (loss + rho/2|u|^2) - rho/2|u|^2."""
    _check_rho(rho)
    base = _erm_convex(data, loss)
    return mu_shift(base, ConvexFn(lambda v: 0.0, lambda v: np.zeros(np.size(v))), rho,
                    label=f"erm-{loss}")


_PAIR_CODES = {"hinge": _kernels.LOSS_HINGE, "logistic": _kernels.LOSS_LOGISTIC,
               "quadratic": _kernels.LOSS_QUADRATIC}


def _pair_setup(data: Dataset, loss: str):
    if loss not in _PAIR_CODES:
        raise ValueError(f"unknown pairwise loss {loss!r}")
    phi = featurize_matrix(data.features, data.groups)
    pos = data.labels > 0
    if pos.all() or not pos.any():
        raise ValueError("pairwise objectives need both classes")
    return np.ascontiguousarray(phi[pos]), np.ascontiguousarray(phi[~pos]), _PAIR_CODES[loss]


class _TopNegatives:
    """Sum of pairwise losses over the top-``count`` negatives by current score."""

    def __init__(self, phi_p, phi_n, code, count, scale):
        self.phi_p, self.phi_n, self.code = phi_p, phi_n, code
        self.count, self.scale = count, scale
        self.D = phi_p.shape[1]

    def _selected(self, hn):
        mask = np.zeros(hn.size, dtype=np.bool_)
        # descending by score, ties to the lowest index
        mask[np.argsort(-hn, kind="stable")[:self.count]] = True
        return mask

    def both(self, v):
        v = np.asarray(v, dtype=np.float64)
        w = v[:self.D]
        hp, hn = self.phi_p @ w, self.phi_n @ w
        sel = self._selected(hn)
        loss, rows, cols = _kernels.pairwise(hp, hn, self.code, sel)
        val = float(loss[sel].sum()) * self.scale
        g = (self.phi_p.T @ rows - self.phi_n.T @ cols) * self.scale
        return val, _pad(g, v.size)

    def fn(self) -> ConvexFn:
        if self.count == 0:
            return ConvexFn(lambda v: 0.0, lambda v: np.zeros(np.size(v)))
        return ConvexFn(lambda v: self.both(v)[0], lambda v: self.both(v)[1], both=self.both)


def auc_objective(data: Dataset, loss: str = "hinge", rho: float = DEFAULT_RHO) -> DCFn:
    """Mean pairwise loss l(h(x+) - h(x-)) over all positive/negative pairs."""
    _check_rho(rho)
    phi_p, phi_n, code = _pair_setup(data, loss)
    top = _TopNegatives(phi_p, phi_n, code, phi_n.shape[0], 1.0 / (phi_p.shape[0] * phi_n.shape[0]))
    zero = ConvexFn(lambda v: 0.0, lambda v: np.zeros(np.size(v)))
    return mu_shift(top.fn(), zero, rho, label=f"auc-{loss}")


def pauc_window(n_neg: int, interval: Interval) -> tuple[int, int]:
    """(ceil(alpha n-), ceil(beta n-)) with a guard against float round-up."""
    return (math.ceil(interval.alpha * n_neg - _FLOAT_SLACK),
            math.ceil(interval.beta * n_neg - _FLOAT_SLACK))


def pauc_objective(data: Dataset, interval: Interval, loss: str = "hinge",
                   rho: float = DEFAULT_RHO) -> DCFn:
    """Pairwise loss restricted to negatives ranked in the interval, as top-beta minus top-alpha."""
    _check_rho(rho)
    phi_p, phi_n, code = _pair_setup(data, loss)
    n_a, n_b = pauc_window(phi_n.shape[0], interval)
    if n_b <= n_a:
        raise ValueError("partial AUC window contains no negatives")
    scale = 1.0 / (phi_p.shape[0] * (n_b - n_a))
    plus = _TopNegatives(phi_p, phi_n, code, n_b, scale).fn()
    minus = _TopNegatives(phi_p, phi_n, code, n_a, scale).fn()
    return mu_shift(plus, minus, rho, label=f"pauc-{loss}")


# ---------------------------------------------------------------------------
# pDP constraints over (w, theta)
# ---------------------------------------------------------------------------

class _HingeWindow:
    """Group means of sigma+/sigma-(h - theta_j) for every theta in the packed vector."""

    def __init__(self, scores: _Scores, theta_offset: int, theta_len: int):
        self.s = scores
        self.off = theta_offset
        self.m = theta_len
        self._key = None
        self._sums = None

    def sums(self, v):
        v = np.asarray(v, dtype=np.float64)
        h = self.s(v)
        th = v[self.off:self.off + self.m]
        if self._key is None or self._key[0] is not h or not np.array_equal(th, self._key[1]):
            self._sums = _kernels.hinge_sums(h, np.ascontiguousarray(th))
            self._key = (h, th.copy())
        return self._sums

    def grad(self, v, j: int, which: str) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        h = self.s(v)
        x = h - v[self.off + j]
        slope = (x >= -0.5) if which == "plus" else (x >= 0.5)
        slope = slope.astype(np.float64)
        g = np.zeros(v.size)
        n = h.size
        g[:self.s.D] = self.s.phi.T @ slope / n
        g[self.off + j] = -slope.sum() / n
        return g


class ConstraintList(list):
    """A list of DCFn that can also report all plus/minus values in one call."""

    def __init__(self, items, block=None):
        super().__init__(items)
        self.block = block


class _PdpBlock:
    """Vectorized plus/minus values of every pDP constraint, in list order."""

    def __init__(self, windows, grid: PGrid, slack: float, shift: float, kind: str):
        self.windows = windows
        self.p = np.asarray(grid.values)[:, None]
        self.slack = slack
        self.shift = shift
        self.kind = kind

    def _parts(self, v):
        v = np.asarray(v, dtype=np.float64)
        q = 0.5 * self.shift * float(np.dot(v, v))
        if self.kind == "hinge":
            sums = [w.sums(v) for w in self.windows]
            sp = np.stack([a for a, _ in sums], axis=1)  # (m, G)
            sm = np.stack([b for _, b in sums], axis=1)
            plus = np.stack((sm, sp), axis=2)
            minus = np.stack((sp - self.p, sm + (self.p + self.slack)), axis=2)
        else:
            a = np.stack([w.means(v) for w in self.windows], axis=1)
            plus = np.stack((np.zeros_like(a), a), axis=2)
            minus = np.stack((a - self.p, np.broadcast_to(self.p + self.slack, a.shape)), axis=2)
        return plus.ravel() + q, minus.ravel() + q

    def plus_values(self, v) -> np.ndarray:
        return self._parts(v)[0]

    def minus_values(self, v) -> np.ndarray:
        return self._parts(v)[1]

    def values(self, v) -> np.ndarray:
        plus, minus = self._parts(v)
        return plus - minus


def _affine_shift(f_val, f_grad, const: float) -> ConvexFn:
    def both(v):
        return f_val(v) + const, f_grad(v)
    return ConvexFn(lambda v: f_val(v) + const, f_grad, both=both)


def _hinge_pdp(groups: list[_Scores], D: int, grid: PGrid, slack: float, rho: float) -> list[DCFn]:
    m = len(grid)
    windows = [_HingeWindow(s, D, m) for s in groups]
    out = []
    for j, p in enumerate(grid.values):
        for k, win in enumerate(windows):
            def sp(v, win=win, j=j):
                return win.sums(v)[0][j]

            def sm(v, win=win, j=j):
                return win.sums(v)[1][j]

            def gp(v, win=win, j=j):
                return win.grad(v, j, "plus")

            def gm(v, win=win, j=j):
                return win.grad(v, j, "minus")

            lower = mu_shift(_affine_shift(sm, gm, 0.0), _affine_shift(sp, gp, -p), rho,
                             label=f"pdp-lower[p={p:.6g},k={k + 1}]")
            upper = mu_shift(_affine_shift(sp, gp, 0.0), _affine_shift(sm, gm, p + slack), rho,
                             label=f"pdp-upper[p={p:.6g},k={k + 1}]")
            out += [lower, upper]
    return ConstraintList(out, _PdpBlock(windows, grid, slack, rho, "hinge"))


class _SigmoidWindow:
    def __init__(self, scores: _Scores, theta_offset: int, theta_len: int):
        self.s = scores
        self.off = theta_offset
        self.m = theta_len
        self._key = None
        self._means = None

    def means(self, v):
        v = np.asarray(v, dtype=np.float64)
        h = self.s(v)
        th = v[self.off:self.off + self.m]
        if self._key is None or self._key[0] is not h or not np.array_equal(th, self._key[1]):
            self._means = expit(h[:, None] - th[None, :]).mean(axis=0)
            self._key = (h, th.copy())
        return self._means

    def grad(self, v, j: int) -> np.ndarray:
        v = np.asarray(v, dtype=np.float64)
        h = self.s(v)
        s = expit(h - v[self.off + j])
        ds = s * (1.0 - s)
        g = np.zeros(v.size)
        g[:self.s.D] = self.s.phi.T @ ds / h.size
        g[self.off + j] = -ds.mean()
        return g


def sigmoid_weak_convexity(phi: np.ndarray, with_theta: bool) -> float:
    """Bound on the weak-convexity modulus of mean sigma(<a_i, u>) over rows a_i.

    Rows are the score features, extended by -1 in a theta coordinate when
    ``with_theta``. The Hessian is mean sigma'' a a^T, so |sigma''| <= 1/(6 sqrt 3)
    times the top eigenvalue of the second-moment matrix bounds it.
    """
    a = phi
    if with_theta:
        a = np.hstack((phi, -np.ones((phi.shape[0], 1))))
    second = a.T @ a / a.shape[0]
    return _SIGMOID_CURV * float(np.linalg.eigvalsh(second)[-1])


def _sigmoid_pdp(groups: list[_Scores], D: int, grid: PGrid, slack: float,
                 rho: float) -> tuple[list[DCFn], float]:
    m = len(grid)
    windows = [_SigmoidWindow(s, D, m) for s in groups]
    rho_wc = max(sigmoid_weak_convexity(s.phi, True) for s in groups)
    shift = rho + rho_wc
    zero = ConvexFn(lambda v: 0.0, lambda v: np.zeros(np.size(v)))
    out = []
    for j, p in enumerate(grid.values):
        for k, win in enumerate(windows):
            def a(v, win=win, j=j):
                return win.means(v)[j]

            def ga(v, win=win, j=j):
                return win.grad(v, j)

            lower = mu_shift(zero, _affine_shift(a, ga, -p), shift, label=f"pdp-lower[p={p:.6g},k={k + 1}]")
            upper = mu_shift(_affine_shift(a, ga, 0.0),
                             ConvexFn(lambda v, c=p + slack: c, lambda v: np.zeros(np.size(v))), shift,
                             label=f"pdp-upper[p={p:.6g},k={k + 1}]")
            # the sigmoid pieces are only weakly convex; the extra shift restores
            # convexity and leaves modulus rho
            lower.minus.mu = rho
            upper.plus.mu = rho
            out += [lower, upper]
    return ConstraintList(out, _PdpBlock(windows, grid, slack, shift, "sigmoid")), rho_wc


def pdp_constraints(data: Dataset, interval: Interval, kappa: float, pgrid: PGrid,
                    surrogate="hinge", rho: float = DEFAULT_RHO) -> tuple[list[DCFn], Layout, dict]:
    """Two constraints per (p, group): surrogate mass at theta_p within [p, p + kappa*width].

    Order: for each p, for each group, (lower, upper). Returns the constraints,
    the (w, theta) layout and extra meta (the sigmoid weak-convexity shift).
    """
    _check_kappa(kappa)
    _check_rho(rho)
    pgrid.check(interval, kappa)
    kind = SurrogateKind.parse(surrogate)
    groups = _group_scores(data)
    D = groups[0].D
    slack = kappa * interval.width
    extra = {}
    if kind is SurrogateKind.HINGE:
        cons = _hinge_pdp(groups, D, pgrid, slack, rho)
    elif kind is SurrogateKind.SIGMOID:
        cons, rho_wc = _sigmoid_pdp(groups, D, pgrid, slack, rho)
        extra["rho_weak_convexity"] = rho_wc
    else:
        raise ValueError("pDP constraints support the hinge and sigmoid surrogates")
    return cons, Layout(D, len(pgrid)), extra


# ---------------------------------------------------------------------------
# weak pDP constraints (fixed threshold)
# ---------------------------------------------------------------------------

class _FixedHinge:
    """S+ and S- group means at a fixed threshold, with gradients."""

    def __init__(self, scores: _Scores, theta_hat: float):
        self.s = scores
        self.t = float(theta_hat)

    def parts(self, v):
        h = self.s(v)
        sp, sm, dp, dm = hinge_parts(h - self.t)
        return sp.mean(), sm.mean(), dp, dm

    def grad(self, v, slope):
        g = np.zeros(np.size(v))
        g[:self.s.D] = self.s.phi.T @ slope / slope.size
        return g


def _max_piece(a_val, a_grad, b_val, b_grad):
    """max{a, b}; ties pick the first argument."""
    return (a_val, a_grad) if a_val >= b_val else (b_val, b_grad)


def _hinge_wpdp_pair(gk: _FixedHinge, gl: _FixedHinge, interval: Interval, slack: float,
                     rho: float, label: str) -> DCFn:
    al, be = interval.alpha, interval.beta

    def piece(g: _FixedHinge, v, c: float, with_splus: bool):
        sp, sm, dp, dm = g.parts(v)
        # max{S- + c, S+}: both as group means
        if sm + c >= sp:
            val, slope = sm + c, dm
        else:
            val, slope = sp, dp
        if with_splus:
            val, slope = val + sp, slope + dp
        return val, slope

    def plus_both(v):
        v1, s1 = piece(gk, v, al, True)
        v2, s2 = piece(gl, v, be, True)
        return v1 + v2, gk.grad(v, s1) + gl.grad(v, s2)

    def minus_both(v):
        v1, s1 = piece(gl, v, al, True)
        v2, s2 = piece(gk, v, be, True)
        return v1 + v2 + slack, gl.grad(v, s1) + gk.grad(v, s2)

    plus = ConvexFn(lambda v: plus_both(v)[0], lambda v: plus_both(v)[1], both=plus_both)
    minus = ConvexFn(lambda v: minus_both(v)[0], lambda v: minus_both(v)[1], both=minus_both)
    return mu_shift(plus, minus, rho, label=label)


class _FixedSigmoid:
    def __init__(self, scores: _Scores, theta_hat: float):
        self.s = scores
        self.t = float(theta_hat)

    def mean_and_grad(self, v):
        h = self.s(v)
        s = expit(h - self.t)
        g = np.zeros(np.size(v))
        g[:self.s.D] = self.s.phi.T @ (s * (1.0 - s)) / h.size
        return float(s.mean()), g


def _sigmoid_wpdp_pair(gk: _FixedSigmoid, gl: _FixedSigmoid, interval: Interval, slack: float,
                       shift: float, rho: float, label: str) -> DCFn:
    al, be = interval.alpha, interval.beta

    def neg_min(g, v, c):
        a, ga = g.mean_and_grad(v)
        # max{-a, -c}, first argument on ties
        return (-a, -ga) if -a >= -c else (-c, np.zeros_like(ga))

    def plus_both(v):
        v1, g1 = neg_min(gk, v, al)
        v2, g2 = neg_min(gl, v, be)
        return v1 + v2, g1 + g2

    def minus_both(v):
        v1, g1 = neg_min(gk, v, be)
        v2, g2 = neg_min(gl, v, al)
        return v1 + v2 + slack, g1 + g2

    plus = ConvexFn(lambda v: plus_both(v)[0], lambda v: plus_both(v)[1], both=plus_both)
    minus = ConvexFn(lambda v: minus_both(v)[0], lambda v: minus_both(v)[1], both=minus_both)
    f = mu_shift(plus, minus, shift, label=label)
    f.plus.mu = rho
    f.minus.mu = rho
    return f


def wpdp_constraints(data: Dataset, interval: Interval, kappa: float, theta_hat: float = 0.0,
                     surrogate="hinge", rho: float = DEFAULT_RHO) -> tuple[list[DCFn], dict]:
    """One constraint per ordered group pair (k, k'), k != k'."""
    _check_kappa(kappa)
    _check_rho(rho)
    kind = SurrogateKind.parse(surrogate)
    groups = _group_scores(data)
    slack = kappa * interval.width
    G = len(groups)
    out, extra = [], {}
    if kind is SurrogateKind.HINGE:
        hs = [_FixedHinge(s, theta_hat) for s in groups]
        for k in range(G):
            for l in range(G):
                if k != l:
                    out.append(_hinge_wpdp_pair(hs[k], hs[l], interval, slack, rho,
                                                f"wpdp[{k + 1},{l + 1}]"))
    elif kind is SurrogateKind.SIGMOID:
        ss = [_FixedSigmoid(s, theta_hat) for s in groups]
        wc = [sigmoid_weak_convexity(s.phi, False) for s in groups]
        for k in range(G):
            for l in range(G):
                if k != l:
                    out.append(_sigmoid_wpdp_pair(ss[k], ss[l], interval, slack, rho + wc[k] + wc[l], rho,
                                                  f"wpdp[{k + 1},{l + 1}]"))
        extra["rho_weak_convexity"] = max(wc[k] + wc[l] for k in range(G) for l in range(G) if k != l)
    else:
        raise ValueError("weak pDP constraints support the hinge and sigmoid surrogates")
    return out, extra


# ---------------------------------------------------------------------------
# baseline AUC-type fairness constraints (quadratic surrogate)
# ---------------------------------------------------------------------------

class _PairQuad:
    """mean over i in A, j in B of (1 + h_i - h_j)^2 / 2, in closed form from moments."""

    def __init__(self, phi_a: np.ndarray, phi_b: np.ndarray):
        if phi_a.shape[0] == 0 or phi_b.shape[0] == 0:
            raise ValueError("baseline constraint needs nonempty subgroups")
        ma, mb = phi_a.mean(axis=0), phi_b.mean(axis=0)
        sa = phi_a.T @ phi_a / phi_a.shape[0]
        sb = phi_b.T @ phi_b / phi_b.shape[0]
        self.lin = ma - mb
        self.Q = sa + sb - np.outer(ma, mb) - np.outer(mb, ma)
        self.D = ma.size

    def both(self, v):
        w = np.asarray(v, dtype=np.float64)[:self.D]
        Qw = self.Q @ w
        val = 0.5 * (1.0 + 2.0 * float(self.lin @ w) + float(w @ Qw))
        return val, _pad(self.lin + Qw, np.size(v))


def baseline_constraints(data: Dataset, family: str, kappa: float,
                         rho: float = DEFAULT_RHO) -> list[DCFn]:
    """group-auc, inter-group or intra-group pairwise fairness, one per ordered pair."""
    _check_rho(rho)
    if not kappa >= 0:
        raise ValueError("kappa must be nonnegative")
    phi = featurize_matrix(data.features, data.groups)
    G = data.n_groups
    sub = {}
    for k in range(1, G + 1):
        ink = data.groups == k
        sub[k] = phi[ink]
        sub[k, "+"] = phi[ink & (data.labels > 0)]
        sub[k, "-"] = phi[ink & (data.labels < 0)]

    def need(key):
        if sub[key].shape[0] == 0:
            raise ValueError(f"{family} constraint needs a nonempty subgroup {key}")
        return sub[key]

    out = []
    for k in range(1, G + 1):
        for l in range(1, G + 1):
            if k == l:
                continue
            if family == "group-auc":
                terms, const = [_PairQuad(sub[k], sub[l])], -0.5 - kappa
            elif family == "inter-group":
                terms = [_PairQuad(need((k, "+")), need((l, "-"))),
                         _PairQuad(need((k, "-")), need((l, "+")))]
                const = -1.0 - kappa
            elif family == "intra-group":
                terms = [_PairQuad(need((k, "+")), need((k, "-"))),
                         _PairQuad(need((l, "-")), need((l, "+")))]
                const = -1.0 - kappa
            else:
                raise ValueError(f"unknown baseline family {family!r}")

            def both(v, terms=terms, const=const):
                vals = [t.both(v) for t in terms]
                return sum(a for a, _ in vals) + const, sum(g for _, g in vals)

            plus = ConvexFn(lambda v, b=both: b(v)[0], lambda v, b=both: b(v)[1], both=both)
            zero = ConvexFn(lambda v: 0.0, lambda v: np.zeros(np.size(v)))
            out.append(mu_shift(plus, zero, rho, label=f"{family}[{k},{l}]"))
    return out


# ---------------------------------------------------------------------------
# penalty (regularized) objectives
# ---------------------------------------------------------------------------

def _abs_sub(x: float) -> float:
    return 0.0 if x == 0.0 else math.copysign(1.0, x)


def regularized_objective(data: Dataset, kind: str, lam: float, interval: Interval,
                          pgrid: PGrid | None = None, theta_hat: float = 0.0, surrogate="hinge",
                          loss: str = "logistic", rho: float = DEFAULT_RHO) -> tuple[DCFn, Layout]:
    """Loss plus a fairness penalty, as one nonsmooth function.

    pdp: f0 + (2 lam / width) * max over (p, k) of |mean sigma(h - theta_p) - p|.
    wpdp: f0 + (lam / width) * max over pairs of |X_k - X_k'| with
    X_k = min(a_k, beta) - min(a_k, alpha), a_k = mean sigma(h - theta_hat).
    The penalty is not convex; the returned pair stores it inside ``plus`` so
    that plus - minus is the penalized objective, for subgradient descent only.
    """
    if not lam >= 0:
        raise ValueError("lambda must be nonnegative")
    sk = SurrogateKind.parse(surrogate)
    if sk is SurrogateKind.QUADRATIC:
        raise ValueError("penalties use the hinge or sigmoid surrogate")
    f0 = erm_objective(data, loss, rho)
    groups = _group_scores(data)
    D = groups[0].D
    width = interval.width

    def sig(x):
        if sk is SurrogateKind.HINGE:
            sp, sm, dp, dm = hinge_parts(x)
            return sp - sm, dp - dm
        s = expit(x)
        return s, s * (1.0 - s)

    if kind == "pdp":
        if pgrid is None:
            pgrid = PGrid.equally_spaced(interval, 0.0)
        ps = pgrid.values
        layout = Layout(D, len(ps))
        scale = 2.0 * lam / width

        def penalty(v):
            v = np.asarray(v, dtype=np.float64)
            best, arg = -1.0, None
            for j, p in enumerate(ps):
                for k, s in enumerate(groups):
                    val, _ = sig(s(v) - v[D + j])
                    r = float(val.mean()) - p
                    if abs(r) > best:
                        best, arg = abs(r), (j, k, r)
            j, k, r = arg
            g = np.zeros(v.size)
            sgn = _abs_sub(r)
            if sgn != 0.0 and scale != 0.0:
                s = groups[k]
                _, dv = sig(s(v) - v[D + j])
                g[:D] = s.phi.T @ dv / dv.size
                g[D + j] = -dv.mean()
                g *= scale * sgn
            return scale * best, g
    elif kind == "wpdp":
        layout = Layout(D, 0)
        scale = lam / width
        al, be = interval.alpha, interval.beta

        def xk(s, v):
            val, dv = sig(s(v) - theta_hat)
            a = float(val.mean())
            ga = np.zeros(np.size(v))
            ga[:D] = s.phi.T @ dv / dv.size
            # min{a, c} picks a on ties
            x = (a if a <= be else be) - (a if a <= al else al)
            gx = ga * ((1.0 if a <= be else 0.0) - (1.0 if a <= al else 0.0))
            return x, gx

        def penalty(v):
            xs = [xk(s, v) for s in groups]
            best, arg = -1.0, None
            for k in range(len(groups)):
                for l in range(len(groups)):
                    if k != l:
                        r = xs[k][0] - xs[l][0]
                        if abs(r) > best:
                            best, arg = abs(r), (k, l, r)
            k, l, r = arg
            g = scale * _abs_sub(r) * (xs[k][1] - xs[l][1])
            return scale * best, g
    else:
        raise ValueError(f"unknown penalty kind {kind!r}")

    def both(v):
        a, ga = f0.plus.value_subgrad(v)
        b, gb = penalty(v)
        return a + b, ga + gb

    plus = ConvexFn(lambda v: both(v)[0], lambda v: both(v)[1], mu=0.0, both=both)
    obj = DCFn(plus, f0.minus, label=f"regularized-{kind}")
    return obj, layout


# ---------------------------------------------------------------------------
# starting point and assembly
# ---------------------------------------------------------------------------

def feasible_start(layout: Layout, family: str, constraints: Sequence[DCFn] = (),
                   interval: Interval | None = None, kappa: float = 0.0,
                   pgrid: PGrid | None = None, surrogate="hinge") -> DecisionVector:
    """Zero model plus thresholds that put every group's mass mid-way in its band."""
    v = np.zeros(layout.size)
    if family == "pdp":
        if kappa <= 0:
            raise ValueError("kappa = 0 with pDP constraints leaves no strictly feasible start")
        mid = np.asarray(pgrid.values) + 0.5 * kappa * interval.width
        if SurrogateKind.parse(surrogate) is SurrogateKind.HINGE:
            v[layout.model_len:] = 0.5 - mid
        else:
            v[layout.model_len:] = -logit(mid)
    for i, c in enumerate(constraints):
        val = c.value(v)
        if not val <= 0.0:
            raise InfeasibleStartError(f"start violates constraint {i} ({c.label}): value {val!r}")
    return DecisionVector(v, layout)


def build_problem(data: Dataset, family: str = "pdp", *, objective: str = "erm",
                  loss: str = "logistic", interval: Interval | None = None, kappa: float = 0.1,
                  theta_hat: float = 0.0, surrogate="hinge", rho: float = DEFAULT_RHO,
                  pgrid_size: int = 10, domain: FeasibleDomain | None = None) -> DCProblem:
    """Objective plus one constraint family, with a verified feasible start."""
    domain = domain or FeasibleDomain()
    interval = interval or Interval(0.0, 1.0)
    if objective == "erm":
        f0 = erm_objective(data, loss, rho)
    elif objective == "auc":
        f0 = auc_objective(data, loss, rho)
    elif objective == "pauc":
        f0 = pauc_objective(data, interval, loss, rho)
    else:
        raise ValueError(f"unknown objective {objective!r}")
    D = 2 * data.d + 2
    meta = {"family": family, "kappa": kappa, "interval": [interval.alpha, interval.beta],
            "theta_hat": theta_hat, "surrogate": SurrogateKind.parse(surrogate).value,
            "rho": rho, "objective": objective, "loss": loss}
    pgrid = None
    if family == "pdp":
        pgrid = PGrid.equally_spaced(interval, kappa, pgrid_size)
        cons, layout, extra = pdp_constraints(data, interval, kappa, pgrid, surrogate, rho)
        meta["pgrid"] = list(pgrid.values)
        meta.update(extra)
    elif family == "wpdp":
        cons, extra = wpdp_constraints(data, interval, kappa, theta_hat, surrogate, rho)
        layout = Layout(D, 0)
        meta.update(extra)
    elif family in ("group-auc", "inter-group", "intra-group"):
        cons = baseline_constraints(data, family, kappa, rho)
        layout = Layout(D, 0)
        meta["surrogate"] = SurrogateKind.QUADRATIC.value
    elif family == "unconstrained":
        cons, layout = [], Layout(D, 0)
    else:
        raise ValueError(f"unknown constraint family {family!r}")
    start = feasible_start(layout, family, cons, interval, kappa, pgrid, surrogate)
    return DCProblem(f0, cons, domain, layout, start, meta)
