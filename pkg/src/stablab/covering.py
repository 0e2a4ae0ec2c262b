"""Epsilon-covers of a hypothesis class and Hedge run over a cover."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .core import StablabError
from .learners import Hedge
from .problems import IRRATIONAL_SQRT2, RATIONAL_ONE, IntervalProblem, Problem
from .stability import hedge_regret_values

DEFAULT_EXPERT_CAP = 1_000_000
# guards ceil() against K*(hi-lo)/(2 eps) landing a rounding error above an integer
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class Cover:
    members: tuple
    epsilon: float

    def __len__(self) -> int:
        return len(self.members)


def inverse_sqrt_eps(m: int) -> float:
    return 1.0 / math.sqrt(max(1, m))


def inverse_eps(m: int) -> float:
    return 1.0 / max(1, m)


@dataclass(frozen=True)
class CoveringSpec:
    """An epsilon schedule together with the horizon it is used at."""

    horizon: int
    eps_schedule: Callable[[int], float] = inverse_sqrt_eps
    builder: Optional[Callable[[float], Cover]] = field(default=None, compare=False)

    @property
    def epsilon(self) -> float:
        return self.eps_schedule(self.horizon)

    def sizes(self, ms: Sequence[int]) -> np.ndarray:
        if self.builder is None:
            raise StablabError("covering spec has no cover builder")
        return np.array([len(self.builder(self.eps_schedule(m))) for m in ms])

    def is_subexponential(self, ms: Sequence[int], ratio: float = 0.1) -> bool:
        """log|C(eps_m)| <= ratio * m at every probed m."""
        return bool(np.all(np.log(self.sizes(ms)) <= ratio * np.asarray(ms)))


def grid_size(lo: float, hi: float, K: float, eps: float) -> int:
    return max(1, math.ceil(K * (hi - lo) / (2.0 * eps) - _CEIL_SLACK))


def grid_cover(lo: float, hi: float, K: float, eps: float) -> Cover:
    """Cell centres of a uniform grid with spacing at most 2 eps / K."""
    if not hi > lo:
        raise StablabError("need hi > lo")
    if not (K > 0 and eps > 0):
        raise StablabError("need K > 0 and eps > 0")
    n = grid_size(lo, hi, K, eps)
    step = (hi - lo) / n
    return Cover(tuple(lo + (k + 0.5) * step for k in range(n)), float(eps))


def grid_cover_nd(bounds: Sequence[tuple], K: float, eps: float,
                  cap: int = DEFAULT_EXPERT_CAP) -> Cover:
    """Product grid for a K-Lipschitz (Euclidean) loss on a box of dimension <= 3."""
    d = len(bounds)
    if not 1 <= d <= 3:
        raise StablabError("grid covers support dimensions 1 to 3")
    # a centre is within sqrt(d) * step/2 of every point of its cell
    axis_eps = eps / math.sqrt(d)
    axes = [grid_cover(lo, hi, K, axis_eps).members for lo, hi in bounds]
    size = math.prod(len(a) for a in axes)
    if size > cap:
        raise StablabError(f"cover too large: {size} members exceeds cap {cap}")
    return Cover(tuple(itertools.product(*axes)), float(eps))


def rationality_cover() -> Cover:
    return Cover((RATIONAL_ONE, IRRATIONAL_SQRT2), 0.0)


@dataclass(frozen=True)
class CoverReport:
    passed: bool
    worst_gap: float
    epsilon: float
    n_probes: int
    witness: Optional[tuple] = None  # (h', z) attaining worst_gap

    @property
    def slack(self) -> float:
        return self.epsilon - self.worst_gap


def verify_cover(cover: Cover, problem: Problem, n_probes: int = 10_000, seed=0,
                 probes: Optional[Sequence[tuple]] = None, tol: float = 1e-12) -> CoverReport:
    """Check min_{h in C} |f(h, z) - f(h', z)| <= eps on sampled (h', z) pairs.

    ``probes`` overrides sampling with explicit (h', z) pairs.
    """
    if probes is None:
        rng = np.random.default_rng(seed)
        hs = problem.sample_hypotheses(rng, n_probes)
        zs = problem.sample_points(rng, n_probes)
        probes = list(zip(hs, zs))
    if not probes:
        raise StablabError("no probes")
    if isinstance(problem, IntervalProblem):
        members = np.asarray(cover.members, dtype=np.float64)
        hp = np.array([p[0] for p in probes], dtype=np.float64)
        zp = np.array([p[1] for p in probes], dtype=np.float64)
        target = problem._vec_loss(hp, zp)
        gaps = np.abs(problem._vec_loss(members[None, :], zp[:, None]) - target[:, None])
        best = gaps.min(axis=1)
    else:
        best = np.array([min(abs(problem.loss(h, z) - problem.loss(hp, z))
                             for h in cover.members) for hp, z in probes])
    k = int(np.argmax(best))
    worst = float(best[k])
    return CoverReport(worst <= cover.epsilon + tol, worst, cover.epsilon, len(probes),
                       tuple(probes[k]))


def cover_for(problem: Problem, eps: float, K: Optional[float] = None,
              cap: int = DEFAULT_EXPERT_CAP) -> Cover:
    if problem.kind == "finite":
        return Cover(tuple(problem.hypotheses), 0.0)
    if problem.kind == "tagged":
        return rationality_cover()
    if isinstance(problem, IntervalProblem):
        K = K if K is not None else problem.lipschitz
        if K is None:
            raise StablabError(f"problem {problem.name!r} declares no Lipschitz constant")
        n = grid_size(problem.lo, problem.hi, K, eps)
        if n > cap:
            raise StablabError(f"cover too large: {n} members exceeds cap {cap}")
        return grid_cover(problem.lo, problem.hi, K, eps)
    raise StablabError(f"no cover construction for problem {problem.name!r}")


def hedge_over_cover(problem: Problem, m: int, eps_m: Optional[float] = None,
                     K: Optional[float] = None, cap: int = DEFAULT_EXPERT_CAP) -> Hedge:
    """Hedge with the default schedule over the members of an eps_m-cover.

    The returned learner carries ``cover`` and ``bound(t)``, the composed
    average-regret guarantee.
    """
    eps_m = inverse_sqrt_eps(m) if eps_m is None else eps_m
    cover = cover_for(problem, eps_m, K, cap)
    learner = Hedge(problem, experts=cover.members)
    learner.cover = cover
    B, d = problem.regret_bound, len(cover)

    def bound(t):
        if d < 2:
            return np.full(np.shape(t), cover.epsilon)
        return hedge_regret_values(B, d, t) + cover.epsilon

    learner.bound = bound
    return learner
