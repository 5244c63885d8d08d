"""Hot inner loops.

Every kernel exists twice: a loop version compiled with ``numba.njit`` and a
vectorized numpy version. Which one the public names point at is decided once
at import time by the ``DCFAIR_NUMBA`` environment variable (``0`` forces the
numpy path). Both versions are importable directly for testing and
benchmarking.
"""
import os

import numpy as np

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("DCFAIR_NUMBA", "1").strip() not in ("0", "false", "no")

# pairwise loss codes shared by both paths
LOSS_HINGE = 0
LOSS_LOGISTIC = 1
LOSS_QUADRATIC = 2


def _njit(func):
    if not _HAVE_NUMBA:  # pragma: no cover
        return func
    return numba.njit(cache=True)(func)


# ---------------------------------------------------------------------------
# two-sample KS statistic on descending-sorted samples
# ---------------------------------------------------------------------------

def _ks_desc_py(a, b):
    # walk both lists from the top; equal values are consumed together so the
    # difference is only read at thresholds where both CCDFs are defined
    na = a.shape[0]
    nb = b.shape[0]
    i = 0
    j = 0
    best = 0.0
    while i < na or j < nb:
        if j >= nb or (i < na and a[i] > b[j]):
            v = a[i]
        else:
            v = b[j]
        while i < na and a[i] == v:
            i += 1
        while j < nb and b[j] == v:
            j += 1
        d = abs(i / na - j / nb)
        if d > best:
            best = d
    return best


ks_desc_numba = _njit(_ks_desc_py)


def ks_desc_numpy(a, b):
    thresholds = np.concatenate((a, b))
    asc_a = a[::-1]
    asc_b = b[::-1]
    fa = (a.shape[0] - np.searchsorted(asc_a, thresholds, side="left")) / a.shape[0]
    fb = (b.shape[0] - np.searchsorted(asc_b, thresholds, side="left")) / b.shape[0]
    # side="left" counts values >= t, i.e. the CCDF just below each threshold
    return float(np.max(np.abs(fa - fb)))


# ---------------------------------------------------------------------------
# hinge-window sums: mean over a group of sigma+/sigma- at every threshold
# ---------------------------------------------------------------------------

def _hinge_sums_py(h, thetas):
    n = h.shape[0]
    m = thetas.shape[0]
    splus = np.zeros(m)
    sminus = np.zeros(m)
    for j in range(m):
        t = thetas[j]
        sp = 0.0
        sm = 0.0
        for i in range(n):
            x = h[i] - t
            if x > -0.5:
                sp += x + 0.5
            if x > 0.5:
                sm += x - 0.5
        splus[j] = sp / n
        sminus[j] = sm / n
    return splus, sminus


hinge_sums_numba = _njit(_hinge_sums_py)


def hinge_sums_numpy(h, thetas):
    x = h[:, None] - thetas[None, :]
    splus = np.maximum(x + 0.5, 0.0).mean(axis=0)
    sminus = np.maximum(x - 0.5, 0.0).mean(axis=0)
    return splus, sminus


# ---------------------------------------------------------------------------
# pairwise losses l(hp_i - hn_j): per-negative loss sums and derivative sums
# ---------------------------------------------------------------------------

def _pair_loss(x, kind):
    if kind == LOSS_HINGE:
        return max(1.0 - x, 0.0)
    if kind == LOSS_LOGISTIC:
        if x > 0:
            return np.log1p(np.exp(-x))
        return -x + np.log1p(np.exp(x))
    d = 1.0 - x
    return 0.5 * d * d


def _pair_dloss(x, kind):
    if kind == LOSS_HINGE:
        # right derivative at the kink, consistent with the surrogates
        return -1.0 if x < 1.0 else 0.0
    if kind == LOSS_LOGISTIC:
        if x > 0:
            e = np.exp(-x)
            return -e / (1.0 + e)
        return -1.0 / (1.0 + np.exp(x))
    return x - 1.0


def _pairwise_py(hp, hn, kind, selected):
    """Returns (loss_per_negative, dloss_row_sums, dloss_col_sums).

    Row/column derivative sums only include negatives with ``selected[j]``.
    """
    npos = hp.shape[0]
    nneg = hn.shape[0]
    loss = np.zeros(nneg)
    rows = np.zeros(npos)
    cols = np.zeros(nneg)
    for j in range(nneg):
        s = 0.0
        c = 0.0
        sel = selected[j]
        for i in range(npos):
            x = hp[i] - hn[j]
            s += _pair_loss(x, kind)
            if sel:
                g = _pair_dloss(x, kind)
                c += g
                rows[i] += g
        loss[j] = s
        cols[j] = c
    return loss, rows, cols


if _HAVE_NUMBA:
    _pair_loss = _njit(_pair_loss)
    _pair_dloss = _njit(_pair_dloss)
pairwise_numba = _njit(_pairwise_py)


def pairwise_numpy(hp, hn, kind, selected):
    x = hp[:, None] - hn[None, :]
    if kind == LOSS_HINGE:
        loss = np.maximum(1.0 - x, 0.0)
        dl = np.where(x < 1.0, -1.0, 0.0)
    elif kind == LOSS_LOGISTIC:
        loss = np.logaddexp(0.0, -x)
        dl = -0.5 * (1.0 - np.tanh(0.5 * x))
    else:
        loss = 0.5 * (1.0 - x) ** 2
        dl = x - 1.0
    dl = dl * selected[None, :]
    return loss.sum(axis=0), dl.sum(axis=1), dl.sum(axis=0)


if USE_NUMBA:
    ks_desc = ks_desc_numba
    hinge_sums = hinge_sums_numba
    pairwise = pairwise_numba
else:
    ks_desc = ks_desc_numpy
    hinge_sums = hinge_sums_numpy
    pairwise = pairwise_numpy
