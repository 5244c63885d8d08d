"""Convex oracles, surrogates and difference-of-convex pairs."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import expit

__all__ = [
    "SurrogateKind",
    "ConvexFn",
    "DCFn",
    "hinge_surrogate",
    "hinge_parts",
    "sigmoid_surrogate",
    "quadratic_surrogate",
    "half_sq_norm",
    "mu_shift",
    "linearize_minus",
    "max_constraint",
    "estimate_lipschitz",
    "DEFAULT_RHO",
]

DEFAULT_RHO = 1e-3


class SurrogateKind(str, enum.Enum):
    HINGE = "hinge"
    SIGMOID = "sigmoid"
    QUADRATIC = "quadratic"

    @classmethod
    def parse(cls, name) -> "SurrogateKind":
        if isinstance(name, cls):
            return name
        aliases = {"hinge-window": "hinge", "quadratic-pairwise": "quadratic"}
        try:
            return cls(aliases.get(str(name), str(name)))
        except ValueError:
            raise ValueError(f"unknown surrogate {name!r}") from None


class ConvexFn:
    """Value and subgradient oracle of a convex function.

    ``both`` may be supplied when value and subgradient share work; otherwise
    it is assembled from the two separate oracles.
    """

    __slots__ = ("_value", "_subgrad", "_both", "mu", "lipschitz")

    def __init__(self, value: Callable, subgrad: Callable, mu: float = 0.0,
                 lipschitz: float | None = None, both: Callable | None = None):
        self._value = value
        self._subgrad = subgrad
        self._both = both
        self.mu = float(mu)
        self.lipschitz = lipschitz

    def value(self, v) -> float:
        return float(self._value(v))

    def subgrad(self, v) -> np.ndarray:
        return np.asarray(self._subgrad(v), dtype=np.float64)

    def value_subgrad(self, v) -> tuple[float, np.ndarray]:
        if self._both is not None:
            f, g = self._both(v)
            return float(f), np.asarray(g, dtype=np.float64)
        return self.value(v), self.subgrad(v)

    __call__ = value

    @classmethod
    def constant(cls, c: float, dim: int) -> "ConvexFn":
        z = np.zeros(dim)
        return cls(lambda v: c, lambda v: z, 0.0, 0.0)


@dataclass(frozen=True)
class DCFn:
    """f = plus - minus with both parts convex."""

    plus: ConvexFn
    minus: ConvexFn
    label: str = ""

    def value(self, v) -> float:
        return self.plus.value(v) - self.minus.value(v)

    __call__ = value

    @property
    def mu(self) -> float:
        return min(self.plus.mu, self.minus.mu)


# ---------------------------------------------------------------------------
# surrogates
# ---------------------------------------------------------------------------

def hinge_parts(x):
    """Vectorized (sigma+, sigma-, slope+, slope-) of the hinge window."""
    x = np.asarray(x, dtype=np.float64)
    sp = np.maximum(x + 0.5, 0.0)
    sm = np.maximum(x - 0.5, 0.0)
    # right derivative at each kink
    dp = (x >= -0.5).astype(np.float64)
    dm = (x >= 0.5).astype(np.float64)
    return sp, sm, dp, dm


def hinge_surrogate(x: float) -> tuple[float, float, float, float, float]:
    """(value, sigma+, sigma-, slope+, slope-) with value = clamp(x+0.5, 0, 1)."""
    sp, sm, dp, dm = (float(a) for a in hinge_parts(x))
    return sp - sm, sp, sm, dp, dm


def sigmoid_surrogate(x):
    s = expit(x)
    return s, s * (1.0 - s)


def quadratic_surrogate(x):
    """sigma(x) = (1+x)^2 / 2 and its derivative."""
    x = np.asarray(x, dtype=np.float64)
    return 0.5 * (1.0 + x) ** 2, 1.0 + x


# ---------------------------------------------------------------------------
# DC pair construction
# ---------------------------------------------------------------------------

def half_sq_norm(rho: float) -> ConvexFn:
    """(rho/2)||u||^2 over the full vector."""
    return ConvexFn(lambda v: 0.5 * rho * float(np.dot(v, v)),
                    lambda v: rho * np.asarray(v, dtype=np.float64),
                    mu=rho,
                    both=lambda v: (0.5 * rho * float(np.dot(v, v)), rho * np.asarray(v, dtype=np.float64)))


def _add_quadratic(f: ConvexFn, rho: float) -> ConvexFn:
    if rho == 0.0:
        return f

    def both(v):
        val, g = f.value_subgrad(v)
        v = np.asarray(v, dtype=np.float64)
        return val + 0.5 * rho * float(np.dot(v, v)), g + rho * v

    return ConvexFn(lambda v: f.value(v) + 0.5 * rho * float(np.dot(v, v)),
                    lambda v: f.subgrad(v) + rho * np.asarray(v, dtype=np.float64),
                    mu=f.mu + rho, lipschitz=None, both=both)


def mu_shift(f_plus: ConvexFn, f_minus: ConvexFn, rho: float = DEFAULT_RHO, label: str = "") -> DCFn:
    """Add (rho/2)||u||^2 to both parts; the difference is unchanged."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    return DCFn(_add_quadratic(f_plus, rho), _add_quadratic(f_minus, rho), label)


def linearize_minus(f: DCFn, anchor) -> ConvexFn:
    """Convex majorant plus(v) - [minus(a) + <s, v - a>] touching f at a."""
    a = np.array(anchor, dtype=np.float64)
    m_a, s = f.minus.value_subgrad(a)
    c = m_a - float(s @ a)

    def value(v):
        return f.plus.value(v) - (c + float(s @ v))

    def subgrad(v):
        return f.plus.subgrad(v) - s

    def both(v):
        pv, pg = f.plus.value_subgrad(v)
        return pv - (c + float(s @ v)), pg - s

    return ConvexFn(value, subgrad, mu=f.plus.mu, both=both)


def max_constraint(constraints: Sequence, v) -> tuple[float, np.ndarray, int]:
    """Max of the constraint values, a subgradient of the maximizer, its index.

    Ties go to the lowest index. Works on ConvexFn or DCFn lists (for DCFn the
    subgradient is plus' - minus' of the active piece).
    """
    if len(constraints) == 0:
        raise ValueError("max_constraint needs at least one constraint")
    vals = [c.value(v) for c in constraints]
    i = int(np.argmax(vals))  # first maximizer
    c = constraints[i]
    if isinstance(c, DCFn):
        g = c.plus.subgrad(v) - c.minus.subgrad(v)
    else:
        g = c.subgrad(v)
    return float(vals[i]), g, i


def estimate_lipschitz(fn, center, radius: float = 10.0, n_points: int = 256, seed: int = 0) -> float:
    """2 x the largest subgradient norm over random points in a ball around center."""
    rng = np.random.default_rng(seed)
    center = np.asarray(center, dtype=np.float64)
    dim = center.size
    best = 0.0
    for _ in range(n_points):
        u = rng.standard_normal(dim)
        u *= radius * rng.random() ** (1.0 / dim) / max(np.linalg.norm(u), 1e-300)
        if isinstance(fn, DCFn):
            gs = (fn.plus.subgrad(center + u), fn.minus.subgrad(center + u))
        else:
            gs = (fn.subgrad(center + u),)
        best = max(best, *(float(np.linalg.norm(g)) for g in gs))
    return 2.0 * best
