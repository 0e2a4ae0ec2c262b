"""Datasets, losses, regret accounting and the exact regret decomposition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar


class StablabError(ValueError):
    """Base class for contract violations raised by this package."""


class InvalidDataPoint(StablabError):
    pass


class UnsupportedObjective(StablabError):
    pass


@dataclass(frozen=True)
class Dataset:
    """An ordered, immutable sequence of data points.

    Indices are 0-based: ``delete(i)`` removes ``points[i]``.
    """

    points: tuple = ()

    def __post_init__(self):
        if not isinstance(self.points, tuple):
            object.__setattr__(self, "points", tuple(self.points))

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self) -> Iterator[Any]:
        return iter(self.points)

    def __getitem__(self, i):
        return self.points[i]

    @property
    def m(self) -> int:
        return len(self.points)

    def prefix(self, i: int) -> "Dataset":
        if not 0 <= i <= len(self.points):
            raise IndexError(f"prefix length {i} out of range")
        return Dataset(self.points[:i])

    def delete(self, i: int) -> "Dataset":
        if not 0 <= i < len(self.points):
            raise IndexError(f"index {i} out of range")
        return Dataset(self.points[:i] + self.points[i + 1:])

    def replace(self, i: int, z) -> "Dataset":
        if not 0 <= i < len(self.points):
            raise IndexError(f"index {i} out of range")
        return Dataset(self.points[:i] + (z,) + self.points[i + 1:])

    def insert(self, i: int, z) -> "Dataset":
        return Dataset(self.points[:i] + (z,) + self.points[i:])

    def append(self, z) -> "Dataset":
        return Dataset(self.points + (z,))


@dataclass(frozen=True)
class LossFunctional:
    """f(h, z) together with the constants the bounds are stated in."""

    eval: Callable[[Any, Any], float]
    regret_bound: float
    lipschitz: Optional[float] = None
    strong_convexity: Optional[float] = None
    diameter: Optional[float] = None
    dim: int = 1

    def __call__(self, h, z) -> float:
        return self.eval(h, z)


@dataclass
class RegretLedger:
    per_round_loss: np.ndarray
    cumulative_loss: float
    best_in_hindsight: float
    best_hypothesis: Any
    regret: float
    average_regret: float
    points: Dataset
    hypotheses: Optional[list] = None
    hindsight_curve: Optional[np.ndarray] = None

    @property
    def m(self) -> int:
        return len(self.per_round_loss)

    @property
    def cumulative_curve(self) -> np.ndarray:
        return np.cumsum(self.per_round_loss)

    @property
    def regret_curve(self) -> np.ndarray:
        """R_t for t = 1..m; needs ``hindsight_curve``."""
        if self.hindsight_curve is None:
            raise StablabError("ledger was built without a hindsight curve")
        return self.cumulative_curve - self.hindsight_curve

    @property
    def average_regret_curve(self) -> np.ndarray:
        return self.regret_curve / np.arange(1, self.m + 1)


@dataclass(frozen=True)
class DecompositionReport:
    stability_term: float
    aerm_term: float
    drift_term: float
    regret: float

    @property
    def total(self) -> float:
        return math.fsum((self.stability_term, self.aerm_term, self.drift_term))

    @property
    def residual(self) -> float:
        return self.total - self.regret


def empirical_risk(S, h, f) -> float:
    """(1/m) sum_i f(h, z_i)."""
    if len(S) == 0:
        raise StablabError("undefined empirical risk: empty dataset")
    return math.fsum(f(h, z) for z in S) / len(S)


def minimize_1d(fun: Callable[[float], float], lo: float, hi: float,
                xatol: float = 1e-10) -> float:
    """Minimize a convex function on [lo, hi]; endpoints are checked explicitly."""
    res = minimize_scalar(fun, bounds=(lo, hi), method="bounded",
                          options={"xatol": xatol, "maxiter": 500})
    best, val = float(res.x), fun(float(res.x))
    for x in (lo, hi):
        v = fun(x)
        if v < val:
            best, val = x, v
    return best


def best_in_hindsight(S, f, problem) -> tuple:
    """Best fixed hypothesis for ``S`` and its total (not averaged) loss."""
    if problem.has_exact_erm:
        h = problem.erm(S)
    elif problem.kind == "interval":
        pts = list(S)
        h = minimize_1d(lambda x: math.fsum(f(x, z) for z in pts),
                        problem.lo, problem.hi)
    elif problem.kind == "finite":
        totals = [math.fsum(f(h, z) for z in S) for h in problem.hypotheses]
        h = problem.hypotheses[int(np.argmin(totals))]
    else:
        raise StablabError(f"no hindsight oracle for problem {problem.name!r}")
    return h, math.fsum(f(h, z) for z in S)


class FixedSequence:
    """A source that replays a fixed list of points, ignoring the learner."""

    def __init__(self, points: Sequence):
        self.points = Dataset(tuple(points))

    def first_state(self):
        return 0

    def step(self, state, hypothesis, learner):
        if state >= len(self.points):
            raise StablabError("fixed sequence exhausted")
        return self.points[state], state + 1


def sample_sequence(problem, m: int, rng: np.random.Generator) -> FixedSequence:
    return FixedSequence(problem.sample_points(rng, m))


def run_online(learner, source, m: int, problem=None, f=None,
               track_hindsight: bool = False) -> RegretLedger:
    """Play ``m`` rounds: h_i = A(S_{i-1}), z_i from the source, record f(h_i, z_i).

    Randomized learners record their expected loss.
    """
    if m < 1:
        raise StablabError("need at least one round")
    problem = problem if problem is not None else learner.problem
    f = f if f is not None else problem.loss
    if isinstance(source, FixedSequence) and hasattr(learner, "replay"):
        pts = source.points.prefix(m)
        for z in pts:
            problem.validate(z)
        losses = np.asarray(learner.replay(pts), dtype=np.float64)
        hyps = None
    else:
        run = learner.start()
        state = source.first_state()
        pts_list, hyps, losses = [], [], np.empty(m, dtype=np.float64)
        for i in range(m):
            h = run.hypothesis
            z, state = source.step(state, h, learner)
            problem.validate(z)
            losses[i] = learner.loss(h, z)
            hyps.append(h)
            pts_list.append(z)
            run.observe(z)
        pts = Dataset(tuple(pts_list))
    best_h, best = best_in_hindsight(pts, f, problem)
    cum = math.fsum(losses)
    regret = cum - best
    curve = problem.prefix_hindsight(pts) if track_hindsight else None
    return RegretLedger(
        per_round_loss=losses,
        cumulative_loss=cum,
        best_in_hindsight=best,
        best_hypothesis=best_h,
        regret=regret,
        average_regret=regret / m,
        points=pts,
        hypotheses=hyps,
        hindsight_curve=curve,
    )


def _loss_row(learner, h, pts) -> np.ndarray:
    return np.asarray(learner.losses(h, pts), dtype=np.float64)


def decompose_regret(learner, sequence, problem=None, f=None) -> DecompositionReport:
    """Split R_m into online-stability, AERM and drift terms.

    stability = sum_i [f(A(S_{i-1}), z_i) - f(A(S_i), z_i)]
    aerm      = sum_i f(A(S_m), z_i) - min_h sum_i f(h, z_i)
    drift     = sum_{i<m} sum_{j<=i} [f(A(S_i), z_j) - f(A(S_{i+1}), z_j)]
    """
    problem = problem if problem is not None else learner.problem
    f = f if f is not None else problem.loss
    S = sequence if isinstance(sequence, Dataset) else Dataset(tuple(sequence))
    m = len(S)
    if m < 1:
        raise StablabError("need at least one round")
    fits = learner.prefix_fits(S)  # A(S_0), ..., A(S_m)
    rows = [_loss_row(learner, h, S.points) for h in fits]  # rows[i][j] = f(A(S_i), z_{j+1})
    played = [rows[i][i] for i in range(m)]
    after = [rows[i + 1][i] for i in range(m)]
    _, best = best_in_hindsight(S, f, problem)
    stability = math.fsum(played) - math.fsum(after)
    aerm = math.fsum(rows[m]) - best
    drift_parts = []
    for i in range(1, m):
        drift_parts.append(math.fsum(rows[i][:i]))
        drift_parts.append(-math.fsum(rows[i + 1][:i]))
    drift = math.fsum(drift_parts)
    regret = math.fsum(played) - best
    return DecompositionReport(stability, aerm, drift, regret)
