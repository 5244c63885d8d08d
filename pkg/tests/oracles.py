"""Direct-expression oracles written from the defining formulas with plain loops.

They share no code with the package beyond the Dataset container.
"""
import math

import numpy as np


def feats(x, g):
    return np.concatenate(([1.0], x, [float(g)], float(g) * np.asarray(x)))


def scores(data, v):
    D = 2 * data.d + 2
    return np.array([feats(data.features[i], data.groups[i]) @ v[:D] for i in range(data.n)])


def sigma(kind, x):
    if kind == "hinge":
        return min(max(x + 0.5, 0.0), 1.0)
    if kind == "sigmoid":
        return 1.0 / (1.0 + math.exp(-x)) if x >= 0 else math.exp(x) / (1.0 + math.exp(x))
    return 0.5 * (1.0 + x) ** 2


def point_loss(loss, y, h):
    m = y * h
    if loss == "logistic":
        return math.log1p(math.exp(-m)) if m > 0 else -m + math.log1p(math.exp(m))
    if loss == "hinge":
        return max(0.0, 1.0 - m)
    return 0.5 * (h - y) ** 2


def pair_loss(loss, x):
    if loss == "hinge":
        return max(0.0, 1.0 - x)
    if loss == "logistic":
        return math.log1p(math.exp(-x)) if x > 0 else -x + math.log1p(math.exp(x))
    return 0.5 * (1.0 - x) ** 2


def erm(data, loss, v):
    h = scores(data, v)
    return sum(point_loss(loss, data.labels[i], h[i]) for i in range(data.n)) / data.n


def auc(data, loss, v):
    h = scores(data, v)
    pos = [h[i] for i in range(data.n) if data.labels[i] > 0]
    neg = [h[i] for i in range(data.n) if data.labels[i] < 0]
    return sum(pair_loss(loss, a - b) for a in pos for b in neg) / (len(pos) * len(neg))


def pauc(data, alpha, beta, loss, v):
    h = scores(data, v)
    pos = [h[i] for i in range(data.n) if data.labels[i] > 0]
    neg = [(h[i], i) for i in range(data.n) if data.labels[i] < 0]
    nn = len(neg)
    n_a = math.ceil(alpha * nn - 1e-9)
    n_b = math.ceil(beta * nn - 1e-9)
    ranked = sorted(neg, key=lambda t: (-t[0], t[1]))
    window = [s for s, _ in ranked[n_a:n_b]]
    return sum(pair_loss(loss, a - b) for a in pos for b in window) / (len(pos) * (n_b - n_a))


def group_scores(data, v):
    h = scores(data, v)
    return {k: [h[i] for i in range(data.n) if data.groups[i] == k] for k in range(1, data.n_groups + 1)}


def pdp(data, alpha, beta, kappa, pgrid, kind, v):
    """[(lower, upper) for p in grid for k in groups] flattened in that order."""
    D = 2 * data.d + 2
    hs = group_scores(data, v)
    slack = kappa * (beta - alpha)
    out = []
    for j, p in enumerate(pgrid):
        for k in range(1, data.n_groups + 1):
            a = sum(sigma(kind, x - v[D + j]) for x in hs[k]) / len(hs[k])
            out += [p - a, a - p - slack]
    return out


def _trunc(a, alpha, beta):
    return min(a, beta) - min(a, alpha)


def wpdp(data, alpha, beta, kappa, theta_hat, kind, v):
    hs = group_scores(data, v)
    G = data.n_groups
    xs = {k: _trunc(sum(sigma(kind, x - theta_hat) for x in hs[k]) / len(hs[k]), alpha, beta)
          for k in hs}
    return [xs[k] - xs[l] - kappa * (beta - alpha)
            for k in range(1, G + 1) for l in range(1, G + 1) if k != l]


def _pairmean(A, B):
    return sum(0.5 * (1.0 + a - b) ** 2 for a in A for b in B) / (len(A) * len(B))


def baseline(data, family, kappa, v):
    h = scores(data, v)
    G = data.n_groups

    def sel(k, sign=0):
        return [h[i] for i in range(data.n) if data.groups[i] == k and (sign == 0 or data.labels[i] * sign > 0)]

    out = []
    for k in range(1, G + 1):
        for l in range(1, G + 1):
            if k == l:
                continue
            if family == "group-auc":
                out.append(_pairmean(sel(k), sel(l)) - 0.5 - kappa)
            elif family == "inter-group":
                out.append(_pairmean(sel(k, 1), sel(l, -1)) + _pairmean(sel(k, -1), sel(l, 1)) - 1.0 - kappa)
            else:
                out.append(_pairmean(sel(k, 1), sel(k, -1)) + _pairmean(sel(l, -1), sel(l, 1)) - 1.0 - kappa)
    return out


def regularized(data, kind, lam, alpha, beta, pgrid, theta_hat, surrogate, loss, v):
    f0 = erm(data, loss, v)
    hs = group_scores(data, v)
    D = 2 * data.d + 2
    width = beta - alpha
    if kind == "pdp":
        pen = max(abs(sum(sigma(surrogate, x - v[D + j]) for x in hs[k]) / len(hs[k]) - p)
                  for j, p in enumerate(pgrid) for k in hs)
        return f0 + 2.0 * lam / width * pen
    xs = {k: _trunc(sum(sigma(surrogate, x - theta_hat) for x in hs[k]) / len(hs[k]), alpha, beta) for k in hs}
    pen = max(abs(xs[k] - xs[l]) for k in xs for l in xs if k != l)
    return f0 + lam / width * pen


def central_difference(f, v, h=1e-6):
    g = np.zeros(v.size)
    for i in range(v.size):
        e = np.zeros(v.size)
        e[i] = h
        g[i] = (f(v + e) - f(v - e)) / (2 * h)
    return g


def relative_error(g, ref, floor=1e-12):
    # floor only guards the 0/0 case
    scale = max(np.linalg.norm(ref), np.linalg.norm(g), floor)
    return float(np.linalg.norm(g - ref) / scale)
