"""Linear score model with group cross terms and the packed (w, theta) vector."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "LayoutError",
    "Layout",
    "DecisionVector",
    "LinearCrossModel",
    "FeasibleDomain",
    "featurize",
    "featurize_matrix",
    "score",
    "pack",
    "unpack",
    "project",
    "save_model",
    "load_model",
]


class LayoutError(ValueError):
    """Dimension or layout mismatch between vectors, models and data."""


@dataclass(frozen=True)
class Layout:
    model_len: int
    theta_len: int = 0

    @property
    def size(self) -> int:
        return self.model_len + self.theta_len

    @property
    def d(self) -> int:
        return (self.model_len - 2) // 2


@dataclass(frozen=True, eq=False)
class DecisionVector:
    packed: np.ndarray
    layout: Layout

    def __post_init__(self):
        v = np.asarray(self.packed, dtype=np.float64)
        if v.shape != (self.layout.size,):
            raise LayoutError(f"packed length {v.size} does not match layout size {self.layout.size}")
        object.__setattr__(self, "packed", v)

    @property
    def weights(self) -> np.ndarray:
        return self.packed[:self.layout.model_len]

    @property
    def thetas(self) -> np.ndarray:
        return self.packed[self.layout.model_len:]


@dataclass(frozen=True, eq=False)
class LinearCrossModel:
    """h_w(x, g) = <w, (1, x, g, g*x)>."""

    d: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (2 * self.d + 2,):
            raise LayoutError(f"weights must have length 2d+2={2 * self.d + 2}, got {w.size}")
        if not np.all(np.isfinite(w)):
            raise LayoutError("weights must be finite")
        object.__setattr__(self, "weights", w)

    @classmethod
    def zeros(cls, d: int) -> "LinearCrossModel":
        return cls(d, np.zeros(2 * d + 2))

    def scores(self, features: np.ndarray, groups: np.ndarray) -> np.ndarray:
        return featurize_matrix(features, groups) @ self.weights


@dataclass(frozen=True)
class FeasibleDomain:
    kind: str = "all"  # "all" | "ball" | "box"
    radius: float | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        if self.kind == "ball":
            if self.radius is None or not self.radius > 0:
                raise ValueError("ball radius must be positive")
        elif self.kind == "box":
            if self.lower is None or self.upper is None:
                raise ValueError("box needs lower and upper bounds")
            lo = np.asarray(self.lower, dtype=np.float64)
            hi = np.asarray(self.upper, dtype=np.float64)
            if lo.shape != hi.shape or np.any(lo > hi):
                raise ValueError("box bounds must satisfy lower <= upper componentwise")
            object.__setattr__(self, "lower", lo)
            object.__setattr__(self, "upper", hi)
        elif self.kind != "all":
            raise ValueError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def ball(cls, radius: float) -> "FeasibleDomain":
        return cls("ball", radius=radius)

    @classmethod
    def box(cls, lower, upper) -> "FeasibleDomain":
        return cls("box", lower=lower, upper=upper)


def featurize(x, group) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.ndim != 1:
        raise LayoutError("x must be a vector")
    g = float(group)
    return np.concatenate(([1.0], x, [g], g * x))


def featurize_matrix(features: np.ndarray, groups: np.ndarray) -> np.ndarray:
    """Row-wise featurize: n x (2d+2)."""
    x = np.asarray(features, dtype=np.float64)
    g = np.asarray(groups, dtype=np.float64)[:, None]
    if x.ndim != 2 or g.shape[0] != x.shape[0]:
        raise LayoutError("features must be n x d with one group id per row")
    ones = np.ones_like(g)
    return np.hstack((ones, x, g, g * x))


def score(model: LinearCrossModel, x, group) -> float:
    phi = featurize(x, group)
    if phi.size != model.weights.size:
        raise LayoutError(f"input has d={(phi.size - 2) // 2}, model expects d={model.d}")
    return float(phi @ model.weights)


def pack(weights, thetas=()) -> DecisionVector:
    w = np.asarray(weights, dtype=np.float64).ravel()
    t = np.asarray(thetas, dtype=np.float64).ravel()
    return DecisionVector(np.concatenate((w, t)), Layout(w.size, t.size))


def unpack(v: DecisionVector) -> tuple[np.ndarray, np.ndarray]:
    if v.packed.size != v.layout.size:
        raise LayoutError("packed length does not match layout")
    return v.weights.copy(), v.thetas.copy()


def project(domain: FeasibleDomain, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if domain.kind == "all":
        return v
    if domain.kind == "ball":
        nrm = np.linalg.norm(v)
        return v if nrm <= domain.radius else v * (domain.radius / nrm)
    return np.clip(v, domain.lower, domain.upper)


def save_model(path, v: DecisionVector) -> None:
    """JSON {d, layout, packed} with 17 significant digits per float."""
    packed = ", ".join(f"{x:.17g}" for x in v.packed)
    text = ('{"d": %d, "layout": {"model_len": %d, "theta_len": %d}, "packed": [%s]}\n'
            % (v.layout.d, v.layout.model_len, v.layout.theta_len, packed))
    Path(path).write_text(text)


def load_model(path) -> DecisionVector:
    try:
        obj = json.loads(Path(path).read_text())
        layout = Layout(int(obj["layout"]["model_len"]), int(obj["layout"]["theta_len"]))
        d = int(obj["d"])
        packed = np.array(obj["packed"], dtype=np.float64)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise LayoutError(f"{path}: cannot parse model file ({exc})") from None
    if layout.model_len != 2 * d + 2:
        raise LayoutError(f"{path}: model_len {layout.model_len} inconsistent with d={d}")
    return DecisionVector(packed, layout)
