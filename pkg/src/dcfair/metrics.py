"""Exact empirical fairness metrics, accuracy and interval selection."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .data import Dataset
from .problems import Interval
from .scoring import LayoutError, featurize_matrix

__all__ = [
    "MetricError",
    "ScoredGroupSample",
    "FairnessReport",
    "empirical_ccdf",
    "rank_window",
    "dp_metric",
    "pdp_metric",
    "wpdp_metric",
    "wdp_metric",
    "accuracy",
    "model_scores",
    "IntervalChoice",
    "select_interval",
    "fairness_report",
]

_FLOAT_SLACK = 1e-9


class MetricError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ScoredGroupSample:
    """Scores of every group, each sorted in descending order."""

    per_group: dict

    @classmethod
    def from_scores(cls, scores, groups) -> "ScoredGroupSample":
        scores = np.asarray(scores, dtype=np.float64)
        groups = np.asarray(groups)
        out = {}
        for k in np.unique(groups):
            out[int(k)] = np.ascontiguousarray(np.sort(scores[groups == k])[::-1])
        return cls(out)

    def __getitem__(self, k) -> np.ndarray:
        try:
            s = self.per_group[k]
        except KeyError:
            raise MetricError(f"group {k} has no scores") from None
        if s.size == 0:
            raise MetricError(f"group {k} has no scores")
        return s

    @property
    def groups(self) -> list:
        return sorted(self.per_group)


def empirical_ccdf(sample_desc, theta: float) -> float:
    """Fraction of the sample strictly above theta."""
    s = np.asarray(sample_desc, dtype=np.float64)
    if s.size == 0:
        raise MetricError("empty sample")
    asc = s[::-1]
    return (s.size - int(np.searchsorted(asc, theta, side="right"))) / s.size


def rank_window(sample_desc: np.ndarray, interval: Interval) -> np.ndarray:
    """Descending positions i (1-based) with floor(alpha n) < i <= floor(beta n)."""
    n = sample_desc.size
    lo = math.floor(interval.alpha * n + _FLOAT_SLACK)
    hi = math.floor(interval.beta * n + _FLOAT_SLACK)
    if hi <= lo:
        raise MetricError(f"rank window of [{interval.alpha}, {interval.beta}) is empty for n={n}")
    return sample_desc[lo:hi]


def dp_metric(samples: ScoredGroupSample, k, k2) -> float:
    """sup over theta of |CCDF_k - CCDF_k'|: the two-sample KS statistic."""
    return float(_kernels.ks_desc(samples[k], samples[k2]))


def pdp_metric(samples: ScoredGroupSample, k, k2, interval: Interval) -> float:
    """KS statistic between the two groups' rank-windowed scores."""
    a = np.ascontiguousarray(rank_window(samples[k], interval))
    b = np.ascontiguousarray(rank_window(samples[k2], interval))
    return float(_kernels.ks_desc(a, b))


def _truncated(p: float, interval: Interval) -> float:
    return min(p, interval.beta) - min(p, interval.alpha)


def wpdp_metric(samples: ScoredGroupSample, k, k2, interval: Interval, theta_hat: float) -> float:
    pk = empirical_ccdf(samples[k], theta_hat)
    pl = empirical_ccdf(samples[k2], theta_hat)
    return abs(_truncated(pk, interval) - _truncated(pl, interval)) / interval.width


def wdp_metric(samples: ScoredGroupSample, k, k2, theta_hat: float) -> float:
    return abs(empirical_ccdf(samples[k], theta_hat) - empirical_ccdf(samples[k2], theta_hat))


def model_scores(weights, data: Dataset) -> np.ndarray:
    w = np.asarray(weights, dtype=np.float64)
    D = 2 * data.d + 2
    if w.size < D:
        raise LayoutError(f"model has {w.size} weights, data needs {D} (d={data.d})")
    return featurize_matrix(data.features, data.groups) @ w[:D]


def accuracy(weights, data: Dataset, theta_hat: float = 0.0) -> float:
    """Share of rows where (h > theta_hat) matches the label sign."""
    h = model_scores(weights, data)
    pred = np.where(h > theta_hat, 1.0, -1.0)
    return float(np.mean(pred == data.labels))


@dataclass
class FairnessReport:
    pairs: list
    max: dict
    accuracy: float
    interval: tuple
    theta_hat: float

    def to_json(self) -> dict:
        return {"pairs": self.pairs, "max": self.max, "accuracy": self.accuracy,
                "interval": list(self.interval), "theta_hat": self.theta_hat}


def fairness_report(weights, data: Dataset, interval: Interval, theta_hat: float = 0.0) -> FairnessReport:
    h = model_scores(weights, data)
    samples = ScoredGroupSample.from_scores(h, data.groups)
    ks = samples.groups
    pairs = []
    for k in ks:
        for l in ks:
            if k == l:
                continue
            pairs.append({"k": k, "k'": l,
                          "dp": dp_metric(samples, k, l),
                          "wdp": wdp_metric(samples, k, l, theta_hat),
                          "pdp": pdp_metric(samples, k, l, interval),
                          "wpdp": wpdp_metric(samples, k, l, interval, theta_hat)})
    mx = {m: max(p[m] for p in pairs) for m in ("dp", "wdp", "pdp", "wpdp")}
    pred = np.where(h > theta_hat, 1.0, -1.0)
    return FairnessReport(pairs, mx, float(np.mean(pred == data.labels)),
                          (interval.alpha, interval.beta), float(theta_hat))


@dataclass
class IntervalChoice:
    interval: Interval
    pooled_rate: float
    candidates: list = field(default_factory=list)  # (alpha, beta, max pdp)


def select_interval(data: Dataset, weights, theta_hat: float = 0.0, window_width: float = 0.25,
                    grid_step: float = 0.05) -> IntervalChoice:
    """Among grid intervals of the given width covering the pooled positive
    rate, pick the one where the model's max pDP is largest (smallest start on ties)."""
    if not 0 < window_width <= 1:
        raise MetricError("window width must lie in (0, 1]")
    if not grid_step > 0:
        raise MetricError("grid step must be positive")
    h = model_scores(weights, data)
    p = float(np.mean(h > theta_hat))
    samples = ScoredGroupSample.from_scores(h, data.groups)
    ks = samples.groups
    rows = []
    j = 0
    while True:
        a = round(j * grid_step, 12)
        b = round(a + window_width, 12)
        if b > 1.0 + 1e-12:
            break
        b = min(b, 1.0)
        if a <= p <= b:
            iv = Interval(a, b)
            val = max(pdp_metric(samples, k, l, iv) for k in ks for l in ks if k < l)
            rows.append((a, b, val))
        j += 1
    if not rows:
        raise MetricError(f"no candidate interval of width {window_width} covers p={p:.4g}")
    best = rows[0]
    for r in rows[1:]:
        if r[2] > best[2]:
            best = r
    return IntervalChoice(Interval(best[0], best[1]), p, rows)
