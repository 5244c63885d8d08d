"""Switching subgradient, inexact DC algorithm and related solvers.

Oracle accounting: ``oracle_count`` counts subgradient evaluations. Every
inner SSG iteration computes exactly one (of the objective or of the active
constraint), and each IDCA linearization adds one per DC function
(objective plus m constraints). Function-value evaluations are tracked
separately in ``value_evals``: each SSG iteration scans all m constraints and,
on objective steps, evaluates the objective once.
"""
from __future__ import annotations

import csv
import logging
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .dc import ConvexFn, DCFn, linearize_minus
from .problems import DCProblem
from .scoring import DecisionVector, FeasibleDomain, project

__all__ = [
    "SolverError",
    "PreconditionError",
    "NoFeasibleIterateError",
    "SSGConfig",
    "SSGInfo",
    "IDCASchedule",
    "SolveTrace",
    "ssg",
    "idca",
    "theoretical_schedule",
    "ssg_direct",
    "subgradient_descent",
]

log = logging.getLogger("dcfair.solvers")

REPORT_TOL = 1e-6
EARLY_STOP_TOL = 1e-8


class SolverError(RuntimeError):
    pass


class PreconditionError(SolverError):
    """The starting point is not nearly feasible for the subproblem."""


class NoFeasibleIterateError(SolverError):
    """No iterate met the near-feasibility test."""


@dataclass(frozen=True)
class SSGConfig:
    epsilon: float
    T: int

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if int(self.T) < 1:
            raise ValueError("T must be at least 1")


@dataclass
class SSGInfo:
    iterations: int = 0
    objective_steps: int = 0
    oracle_count: int = 0
    value_evals: int = 0
    best_t: int = -1
    best_value: float = math.inf
    stopped_at_stationary: bool = False


def _check_finite(v, what, where):
    if not np.all(np.isfinite(v)):
        raise FloatingPointError(f"non-finite {what} at {where}")


def ssg(objective: ConvexFn, constraints: Sequence[ConvexFn], domain: FeasibleDomain, v0,
        config: SSGConfig, values=None) -> tuple[np.ndarray, SSGInfo]:
    """Switching subgradient method.

    Nearly feasible points (max constraint <= eps) take an objective step of
    length eps/|g0|^2 and join the candidate set; others take a Polyak-type
    step on the active constraint. Returns the candidate with the smallest
    objective (earliest on ties).

    ``values``, when given, maps v to the vector of all constraint values and
    replaces the one-by-one scan.
    """
    eps = float(config.epsilon)
    v = np.array(v0, dtype=np.float64)
    info = SSGInfo()
    best_v = None
    m = len(constraints)
    for t in range(int(config.T)):
        if m:
            vals = values(v) if values is not None else [c.value(v) for c in constraints]
            i = int(np.argmax(vals))
            gval = float(vals[i])
            info.value_evals += m
            _check_finite(gval, "constraint value", f"inner iteration {t}")
        else:
            gval = -math.inf
        if t == 0 and not gval <= eps:
            raise PreconditionError(f"start violates constraints by {gval!r} > epsilon {eps!r}")
        info.iterations += 1
        info.oracle_count += 1
        if gval <= eps:
            f0, g0 = objective.value_subgrad(v)
            info.value_evals += 1
            _check_finite(f0, "objective value", f"inner iteration {t}")
            info.objective_steps += 1
            if f0 < info.best_value:
                info.best_value, info.best_t, best_v = f0, t, v
            nrm2 = float(g0 @ g0)
            if nrm2 == 0.0:
                # zero subgradient: v minimizes the objective, so nothing in
                # the candidate set can beat it
                info.stopped_at_stationary = True
                return v, info
            v = project(domain, v - (eps / nrm2) * g0)
        else:
            g = constraints[i].subgrad(v)
            nrm2 = float(g @ g)
            if nrm2 == 0.0:
                raise SolverError(f"constraint {i} is above epsilon at its own minimum; subproblem infeasible")
            v = project(domain, v - (gval / nrm2) * g)
        _check_finite(v, "iterate", f"inner iteration {t}")
    return best_v, info


# ---------------------------------------------------------------------------
# schedules
# ---------------------------------------------------------------------------

@dataclass
class IDCASchedule:
    """Outer iterations K, per-iteration precision and inner iteration counts.

    ``epsilon`` and ``T`` may be constants or per-iteration lists; ``T`` may
    also be "theoretical", which needs ``constants`` M and mu and uses
    T_k = ceil(M^2/(eps_k mu) * ln(4 M^2 / (mu eps_k))).
    """

    K: int
    epsilon: float | Sequence[float]
    T: int | Sequence[int] | str
    constants: dict = field(default_factory=dict)

    def __post_init__(self):
        if int(self.K) < 0:
            raise ValueError("K must be nonnegative")
        eps = [self.epsilon] if np.isscalar(self.epsilon) else list(self.epsilon)
        if any(not e > 0 for e in eps):
            raise ValueError("epsilon_k must be positive")
        if isinstance(self.T, str):
            if self.T != "theoretical":
                raise ValueError(f"unknown T mode {self.T!r}")
            if not {"M", "mu"} <= set(self.constants):
                raise ValueError("theoretical T needs constants M and mu")

    def epsilon_at(self, k: int) -> float:
        if np.isscalar(self.epsilon):
            return float(self.epsilon)
        return float(self.epsilon[k])

    def T_at(self, k: int) -> int:
        if isinstance(self.T, str):
            return theoretical_inner_iterations(self.constants["M"], self.constants["mu"],
                                                self.epsilon_at(k))
        if np.isscalar(self.T):
            return int(self.T)
        return int(self.T[k])


def _exact(x) -> Fraction:
    # decimal reading of the shortest float repr, so 0.1 means one tenth
    return Fraction(repr(float(x))) if not isinstance(x, (int, Fraction)) else Fraction(x)


def theoretical_inner_iterations(M: float, mu: float, eps_k: float) -> int:
    ratio = M * M / (eps_k * mu)
    return int(math.ceil(ratio * math.log(4.0 * M * M / (mu * eps_k))))


def theoretical_schedule(M: float, mu: float, nu: float, eps_target: float,
                         f0_at_start: float, f_lb: float) -> IDCASchedule:
    """K and eps_k from the complexity bound; T_k from the 2M/mu distance bound."""
    if min(M, mu, nu, eps_target) <= 0:
        raise ValueError("M, mu, nu and epsilon must be positive")
    if f0_at_start < f_lb:
        raise ValueError("f0 at the start lies below its lower bound")
    M_, mu_, nu_, e_ = (_exact(x) for x in (M, mu, nu, eps_target))
    gap = _exact(f0_at_start) - _exact(f_lb)
    c = max(Fraction(1), 4 * M_ ** 2, 8 * M_ ** 4 / (mu_ * nu_))
    K_exact = c * gap / (mu_ * e_ ** 2)
    K = max(1, math.ceil(K_exact))
    eps_k = float(mu_ / 8 * min(Fraction(1), 1 / (4 * M_ ** 2), mu_ * nu_ / (8 * M_ ** 4)) * e_ ** 2)
    T_k = theoretical_inner_iterations(M, mu, eps_k)
    return IDCASchedule(K=K, epsilon=eps_k, T=T_k,
                        constants={"M": M, "mu": mu, "nu": nu, "f_lb": f_lb,
                                   "Lambda": 2 * M / math.sqrt(2 * mu * nu)})


# ---------------------------------------------------------------------------
# traces
# ---------------------------------------------------------------------------

@dataclass
class SolveTrace:
    iterates: list = field(default_factory=list)
    objective_values: list = field(default_factory=list)
    max_infeasibility: list = field(default_factory=list)
    oracle_counts: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    value_evals: int = 0
    best_index: int = -1
    feasible: bool = True
    early_stop: int | None = None
    inner_bound: list = field(default_factory=list)  # g(w^{k+1}) per outer step
    path: list = field(default_factory=list)  # per-step objective (subgradient descent)

    @property
    def oracle_count(self) -> int:
        return self.oracle_counts[-1] if self.oracle_counts else 0

    @property
    def wall_time(self) -> float:
        return self.seconds[-1] if self.seconds else 0.0

    def record(self, v, obj, infeas, oracles, secs):
        self.iterates.append(np.array(v, dtype=np.float64))
        self.objective_values.append(float(obj))
        self.max_infeasibility.append(float(infeas))
        self.oracle_counts.append(int(oracles))
        self.seconds.append(float(secs))

    def to_csv(self, path, timing: bool = True) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["outer_k", "objective", "max_infeas", "oracle_count", "seconds"])
            for k in range(len(self.objective_values)):
                w.writerow([k, f"{self.objective_values[k]:.10g}", f"{self.max_infeasibility[k]:.10g}",
                            self.oracle_counts[k], f"{self.seconds[k] if timing else 0.0:.10g}"])


def _max_dc(constraints, v) -> float:
    block = getattr(constraints, "block", None)
    if block is not None and len(constraints):
        return float(np.max(block.values(v)))
    return max((c.value(v) for c in constraints), default=-math.inf)


def _linearized_values(constraints, anchor):
    """Vectorized values of all linearized constraints, if the list supports it."""
    block = getattr(constraints, "block", None)
    if block is None or not len(constraints):
        return None
    a = np.asarray(anchor, dtype=np.float64)
    S = np.stack([c.minus.subgrad(a) for c in constraints])
    offset = block.minus_values(a) - S @ a

    def values(v):
        return block.plus_values(v) - (S @ v + offset)

    return values


def _check_majorization(sub, constraints, center, rng, n_points=100):
    for _ in range(n_points):
        u = center + rng.standard_normal(center.size)
        for i, (g, f) in enumerate(zip(sub, constraints)):
            if g.value(u) < f.value(u) - 1e-10:
                raise SolverError(f"linearized constraint {i} fails to majorize at a sample point")


# ---------------------------------------------------------------------------
# IDCA
# ---------------------------------------------------------------------------

def idca(problem: DCProblem, schedule: IDCASchedule, start=None, report_tol: float = REPORT_TOL,
         early_stop_tol: float = EARLY_STOP_TOL, check_majorization: bool = False,
         callback=None) -> tuple[np.ndarray, SolveTrace]:
    """Inexact DCA: linearize every minus part at w^k, solve the convex
    subproblem by SSG(eps_k, T_k) from w^k, repeat K times.

    The trace records the true DC objective and max constraint at every outer
    iterate (index 0 is the start). ``trace.best_index`` points at the
    smallest-objective iterate with max constraint <= ``report_tol``; when
    none qualifies it points at the last iterate and ``trace.feasible`` is
    False.
    """
    t0 = time.perf_counter()
    w = np.array(problem.start.packed if start is None else start, dtype=np.float64)
    obj, cons = problem.objective, problem.constraints
    trace = SolveTrace()
    oracles = 0
    trace.record(w, obj.value(w), _max_dc(cons, w), 0, 0.0)
    rng = np.random.default_rng(0)
    for k in range(int(schedule.K)):
        eps_k, T_k = schedule.epsilon_at(k), schedule.T_at(k)
        g0 = linearize_minus(obj, w)
        gs = [linearize_minus(c, w) for c in cons]
        oracles += 1 + len(cons)
        values = _linearized_values(cons, w)
        if check_majorization:
            _check_majorization(gs, cons, w, rng)
        try:
            w_new, info = ssg(g0, gs, problem.domain, w, SSGConfig(eps_k, T_k), values)
        except PreconditionError as exc:
            raise PreconditionError(f"outer iteration {k}: {exc}") from None
        oracles += info.oracle_count
        trace.value_evals += info.value_evals
        trace.inner_bound.append(max((g.value(w_new) for g in gs), default=-math.inf))
        step = float(np.linalg.norm(w_new - w))
        w = w_new
        trace.record(w, obj.value(w), _max_dc(cons, w), oracles, time.perf_counter() - t0)
        log.debug("outer %d: objective %.6g, max constraint %.3g, step %.3g",
                  k, trace.objective_values[-1], trace.max_infeasibility[-1], step)
        if callback is not None:
            callback(k, w, trace)
        if step <= early_stop_tol:
            trace.early_stop = k
            break
    ok = [i for i, g in enumerate(trace.max_infeasibility) if g <= report_tol]
    if ok:
        trace.best_index = min(ok, key=lambda i: (trace.objective_values[i], i))
        trace.feasible = True
    else:
        trace.best_index = len(trace.iterates) - 1
        trace.feasible = False
    return w, trace


# ---------------------------------------------------------------------------
# SSG applied directly to the DC problem
# ---------------------------------------------------------------------------

def _dc_subgrad(f: DCFn, v):
    vp, gp = f.plus.value_subgrad(v)
    vm, gm = f.minus.value_subgrad(v)
    return vp - vm, gp - gm


def ssg_direct(problem: DCProblem, policy: str = "static", T: int = 1000, epsilon: float = 1e-3,
               c: float = 1.0, start=None) -> tuple[np.ndarray, SolveTrace]:
    """Switching subgradient steps on the DC functions themselves (a heuristic).

    policy "static": eps_t = epsilon; "diminishing": eps_t = c/(t+1). The
    returned iterate is the smallest-objective candidate whose max constraint
    is also within the final tolerance eps_T; if there is none,
    NoFeasibleIterateError is raised rather than returning an infeasible point.
    """
    if policy == "static":
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")

        def eps_at(t):
            return epsilon
    elif policy == "diminishing":
        if not c > 0:
            raise ValueError("c must be positive")

        def eps_at(t):
            return c / (t + 1)
    else:
        raise ValueError(f"unknown policy {policy!r}")
    t0 = time.perf_counter()
    obj, cons = problem.objective, problem.constraints
    v = np.array(problem.start.packed if start is None else start, dtype=np.float64)
    if _max_dc(cons, v) > eps_at(0):
        raise PreconditionError("start violates constraints beyond eps_0")
    eps_final = eps_at(int(T))
    block = getattr(cons, "block", None)
    trace = SolveTrace()
    best = (math.inf, -1, None)
    oracles = 0
    m = len(cons)
    for t in range(int(T)):
        eps_t = eps_at(t)
        if m:
            vals = block.values(v) if block is not None else [f.value(v) for f in cons]
            i = int(np.argmax(vals))
            fmax = float(vals[i])
        else:
            fmax = -math.inf
        trace.value_evals += m
        oracles += 1
        if fmax <= eps_t:
            f0, g0 = _dc_subgrad(obj, v)
            trace.value_evals += 1
            if fmax <= eps_final and f0 < best[0]:
                best = (f0, t, v)
            nrm2 = float(g0 @ g0)
            if nrm2 == 0.0:
                break
            v = project(problem.domain, v - (eps_t / nrm2) * g0)
        else:
            _, g = _dc_subgrad(cons[i], v)
            nrm2 = float(g @ g)
            if nrm2 == 0.0:
                break
            v = project(problem.domain, v - (fmax / nrm2) * g)
        _check_finite(v, "iterate", f"iteration {t}")
    if best[2] is None:
        raise NoFeasibleIterateError(f"no nearly-feasible iterate within eps_T={eps_final:.3g} after {T} iterations")
    w = best[2]
    trace.record(w, obj.value(w), _max_dc(cons, w), oracles, time.perf_counter() - t0)
    trace.best_index = 0
    trace.feasible = True
    return w, trace


# ---------------------------------------------------------------------------
# plain projected subgradient descent
# ---------------------------------------------------------------------------

def subgradient_descent(objective, v0, step_size: float, steps: int,
                        domain: FeasibleDomain | None = None) -> tuple[np.ndarray, SolveTrace]:
    """v <- Proj(v - step * g), returning the last iterate.

    ``trace.path`` holds the objective at every visited point (index 0 is v0).
    """
    if not step_size > 0:
        raise ValueError("step size must be positive")
    domain = domain or FeasibleDomain()
    t0 = time.perf_counter()
    v = np.array(v0, dtype=np.float64)
    trace = SolveTrace()

    def evaluate(u):
        if isinstance(objective, DCFn):
            return _dc_subgrad(objective, u)
        return objective.value_subgrad(u)

    for t in range(int(steps)):
        f, g = evaluate(v)
        _check_finite(f, "objective value", f"step {t}")
        trace.path.append(float(f))
        v = project(domain, v - step_size * g)
        _check_finite(v, "iterate", f"step {t}")
    f_last = objective.value(v)
    trace.path.append(float(f_last))
    trace.record(v, f_last, -math.inf, int(steps), time.perf_counter() - t0)
    trace.best_index = 0
    return v, trace
