"""Learner families: ERM/FTL, RERM/FTRL, surrogate-loss minimizers and Hedge."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import numpy as np
from scipy.special import xlogy

from . import kernels
from .core import Dataset, StablabError, UnsupportedObjective, minimize_1d
from .problems import Absolute1D, Problem


# ---------------------------------------------------------------------------
# Regularizer and lambda schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RegularizerSchedule:
    """A family r_0, r_1, ... of regularizers with range bounds rho_i.

    ``weights``/``center`` are set for the quadratic family
    r_i(h) = weights(i) * (h - center)^2, which unlocks closed-form solvers.
    """

    term: Callable[[int], Callable[[Any], float]]
    rho: Callable[[int], float]
    nu: Optional[Callable[[int], float]] = None
    lipschitz: Optional[Callable[[int], float]] = None
    weights: Optional[Callable[[int], float]] = None
    center: float = 0.0
    is_zero: bool = False
    convex: bool = True

    def value(self, n: int, h) -> float:
        """r_0(h) + ... + r_n(h)."""
        return math.fsum(self.term(i)(h) for i in range(n + 1))

    def weight_total(self, n: int) -> float:
        return math.fsum(self.weights(i) for i in range(n + 1))

    def rho_sequence(self, n: int) -> np.ndarray:
        return np.array([self.rho(i) for i in range(n + 1)])


def zero_schedule() -> RegularizerSchedule:
    return RegularizerSchedule(
        term=lambda i: (lambda h: 0.0),
        rho=lambda i: 0.0,
        nu=lambda i: 0.0,
        lipschitz=lambda i: 0.0,
        weights=lambda i: 0.0,
        is_zero=True,
    )


def quadratic_schedule(lam: Callable[[int], float], lo: float, hi: float,
                       center: float = 0.0) -> RegularizerSchedule:
    """r_i(h) = lam(i) * (h - center)^2 on [lo, hi]."""
    near = min(max(center, lo), hi)
    span_max = max((lo - center) ** 2, (hi - center) ** 2)
    span = span_max - (near - center) ** 2
    reach = max(abs(lo - center), abs(hi - center))
    return RegularizerSchedule(
        term=lambda i: (lambda h, w=lam(i): w * (h - center) ** 2),
        rho=lambda i: lam(i) * span,
        nu=lambda i: 2.0 * lam(i),
        lipschitz=lambda i: 2.0 * lam(i) * reach,
        weights=lam,
        center=center,
    )


def inverse_sqrt(c: float = 1.0) -> Callable[[int], float]:
    """i -> c / sqrt(max(1, i))."""
    return lambda i: c / math.sqrt(max(1, i))


def check_rho(schedule: RegularizerSchedule, hypotheses: Sequence, i: int) -> bool:
    """Spot-check sup |r_i(h) - r_i(h')| <= rho_i over the given hypotheses."""
    vals = [schedule.term(i)(h) for h in hypotheses]
    return max(vals) - min(vals) <= schedule.rho(i) + 1e-12


@dataclass(frozen=True)
class LambdaSchedule:
    """Regularization constants lambda_t for Hedge; eta_t = 1 / sum_{j<=t} lambda_j."""

    lam: Callable[[int], float]
    name: str = "custom"
    _cum: list = field(default_factory=list, init=False, repr=False, compare=False)

    def _extend(self, n: int) -> None:
        cum = self._cum
        while len(cum) < n:
            prev = cum[-1] if cum else 0.0
            cum.append(prev + self.lam(len(cum)))

    def lambdas(self, n: int) -> np.ndarray:
        """lambda_0 .. lambda_{n-1}."""
        return np.array([self.lam(t) for t in range(n)], dtype=np.float64)

    def etas(self, n: int) -> np.ndarray:
        """eta_0 .. eta_{n-1}."""
        self._extend(n)
        return 1.0 / np.array(self._cum[:n], dtype=np.float64)

    def eta(self, t: int) -> float:
        self._extend(t + 1)
        return 1.0 / self._cum[t]


def default_lambda_schedule(B: float, d: int) -> LambdaSchedule:
    """lambda_t = B * sqrt(1 / (8 ln(d) max(1, t)))."""
    if d < 2:
        raise StablabError("degenerate expert set: need d >= 2")
    if not B > 0:
        raise StablabError("B must be positive")
    log_d = math.log(d)
    return LambdaSchedule(lambda t: B * math.sqrt(1.0 / (8.0 * log_d * max(1, t))),
                          name="theorem")


def scaled_lambda_schedule(c: float) -> LambdaSchedule:
    """lambda_t = c / sqrt(max(1, t))."""
    return LambdaSchedule(inverse_sqrt(c), name=f"c={c!r}")


def fixed_eta_schedule(eta: float) -> LambdaSchedule:
    """Classic fixed-eta Hedge: lambda_0 = 1/eta, lambda_t = 0 afterwards."""
    return LambdaSchedule(lambda t: 1.0 / eta if t == 0 else 0.0, name=f"eta={eta!r}")


# ---------------------------------------------------------------------------
# Selection rules
# ---------------------------------------------------------------------------


def erm_select(S, problem: Problem):
    return problem.erm(tuple(S))


def rerm_select(S, problem: Problem, reg: RegularizerSchedule):
    """argmin r_0(h) + sum_{i=1}^m [f(h, z_i) + r_i(h)]."""
    pts = tuple(S)
    n = len(pts)
    if reg.is_zero:
        return problem.erm(pts)
    if reg.weights is not None:
        h = problem.regularized_erm(pts, reg.weight_total(n), reg.center)
        if h is not None:
            return h

    def objective(h):
        return math.fsum(problem.losses(h, pts)) + reg.value(n, h)

    return _minimize(objective, problem, convex=reg.convex)


def _minimize(objective, problem: Problem, convex: bool = True):
    if problem.kind == "finite":
        vals = [objective(h) for h in problem.hypotheses]
        return problem.hypotheses[int(np.argmin(vals))]
    if problem.kind == "interval" and convex and getattr(problem, "convex_loss", True):
        return minimize_1d(objective, problem.lo, problem.hi)
    raise UnsupportedObjective(f"unsupported objective on {problem.name!r}")


@dataclass(frozen=True)
class Surrogate:
    """Linear surrogate l(h) = value + slope * (h - anchor) built at ``anchor``."""

    anchor: Any
    value: float
    slope: float

    def __call__(self, h) -> float:
        return self.value + self.slope * (h - self.anchor)

    @property
    def intercept(self) -> float:
        return self.value - self.slope * self.anchor


def linearize(problem: Problem, h_anchor, z) -> Surrogate:
    """First-order surrogate of f(., z) at ``h_anchor`` (subgradient 0 at kinks)."""
    g = problem.gradient(h_anchor, z)
    return Surrogate(anchor=h_anchor, value=problem.loss(h_anchor, z), slope=float(g))


def surrogate_dominates(s: Surrogate, problem: Problem, z, hypotheses) -> float:
    """Largest violation of f(a,z) - f(h,z) <= l(a) - l(h) over ``hypotheses``."""
    a = s.anchor
    fa, la = problem.loss(a, z), s(a)
    return max((fa - problem.loss(h, z)) - (la - s(h)) for h in hypotheses)


def rslm_select(surrogates: Sequence, reg: RegularizerSchedule, problem: Problem,
                anchors: Optional[Sequence] = None):
    """argmin r_0(h) + sum_i [l_i(h) + r_i(h)] over the problem's hypothesis space.

    ``anchors`` switches the quadratic regularizers to r_i(h) =
    w_i (h - anchors[i])^2 (proximal, history-dependent form).
    """
    n = len(surrogates)
    linear = all(isinstance(s, Surrogate) for s in surrogates)
    if linear and reg.weights is not None and problem.kind == "interval":
        ws = [reg.weights(i) for i in range(n + 1)]
        centers = list(anchors) if anchors is not None else [reg.center] * (n + 1)
        lam = math.fsum(ws)
        g = math.fsum(s.slope for s in surrogates)
        if lam > 0:
            target = math.fsum(w * c for w, c in zip(ws, centers)) / lam - g / (2.0 * lam)
            return problem.clip(target)
        return problem.lo if g >= 0 else problem.hi

    if anchors is not None:
        ws = [reg.weights(i) for i in range(n + 1)]

        def reg_value(h):
            return math.fsum(w * (h - c) ** 2 for w, c in zip(ws, anchors))
    else:
        def reg_value(h):
            return reg.value(n, h)

    def objective(h):
        return math.fsum(s(h) for s in surrogates) + reg_value(h)

    return _minimize(objective, problem, convex=reg.convex)


# ---------------------------------------------------------------------------
# Hedge as a randomized RERM
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpertDistribution:
    weights: np.ndarray

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        if w.ndim != 1 or len(w) == 0 or np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise StablabError("expert weights must be a non-negative vector summing to 1")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @property
    def d(self) -> int:
        return len(self.weights)

    def expected(self, expert_losses) -> float:
        return float(np.dot(self.weights, expert_losses))


def hedge_select(cumulative_losses, t: int, sched: LambdaSchedule) -> ExpertDistribution:
    """theta_k ∝ exp(-eta_t C_k), computed with a max-shift."""
    C = np.asarray(cumulative_losses, dtype=np.float64)
    if C.size == 0:
        raise StablabError("empty expert set")
    return ExpertDistribution(_softmin(C, sched.eta(t)))


def _softmin(C: np.ndarray, eta: float) -> np.ndarray:
    w = np.exp(-eta * (C - C.min(axis=-1, keepdims=True)))
    return w / w.sum(axis=-1, keepdims=True)


def kl_to_uniform(theta) -> float:
    """KL(theta || uniform) in nats, with 0 log 0 = 0."""
    w = theta.weights if isinstance(theta, ExpertDistribution) else np.asarray(theta, float)
    return float(xlogy(w, w.size * w).sum())


def hedge_rerm_objective(theta, loss_table, sched: LambdaSchedule, t: int) -> float:
    """sum_{i<=t} E_theta f(., z_i) + (sum_{j<=t} lambda_j) KL(theta || U).

    ``loss_table`` is d x m (row k holds expert k's losses).
    """
    w = theta.weights if isinstance(theta, ExpertDistribution) else np.asarray(theta, float)
    table = np.asarray(loss_table, dtype=np.float64)
    if t > table.shape[1]:
        raise StablabError("t exceeds the number of rounds in the table")
    expected = math.fsum(w @ table[:, :t]) if t else 0.0
    return expected + math.fsum(sched.lambdas(t + 1)) * kl_to_uniform(w)


# ---------------------------------------------------------------------------
# Learners
# ---------------------------------------------------------------------------


class _RefitRun:
    """Online run that refits on the growing prefix."""

    def __init__(self, learner):
        self.learner = learner
        self.points = []
        self._h = learner.fit(())

    @property
    def hypothesis(self):
        return self._h

    def observe(self, z):
        self.points.append(z)
        self._h = self.learner.fit(tuple(self.points))


class Learner:
    """A batch algorithm A used online as h_i = A(S_{i-1})."""

    name = "learner"
    randomized = False
    symmetric = True

    def __init__(self, problem: Problem):
        self.problem = problem

    def __repr__(self):
        return f"{type(self).__name__}({self.problem!r})"

    def fit(self, S):
        raise NotImplementedError

    def __call__(self, S):
        return self.fit(tuple(S))

    def loss(self, h, z) -> float:
        return self.problem.loss(h, z)

    def losses(self, h, points) -> np.ndarray:
        return self.problem.losses(h, points)

    def fit_loo(self, S) -> list:
        """A(S^{\\i}) for every index i."""
        pts = tuple(S)
        return [self.fit(pts[:i] + pts[i + 1:]) for i in range(len(pts))]

    def prefix_fits(self, S) -> list:
        """A(S_0), A(S_1), ..., A(S_m)."""
        pts = tuple(S)
        return [self.fit(pts[:i]) for i in range(len(pts) + 1)]

    def start(self):
        return _RefitRun(self)


class ConstantLearner(Learner):
    name = "constant"

    def __init__(self, problem: Problem, hypothesis=None):
        super().__init__(problem)
        self.hypothesis = problem.default_hypothesis if hypothesis is None else hypothesis

    def fit(self, S):
        return self.hypothesis


class FTL(Learner):
    """Follow-the-leader: exact ERM on the prefix."""

    name = "ftl"

    def fit(self, S):
        return self.problem.erm(tuple(S))

    def fit_loo(self, S):
        return self.problem.erm_loo(tuple(S))


class FTRL(Learner):
    """Follow-the-regularized-leader: RERM on the prefix with r_0..r_n."""

    name = "ftrl"

    def __init__(self, problem: Problem, schedule: RegularizerSchedule):
        super().__init__(problem)
        self.schedule = schedule

    def fit(self, S):
        return rerm_select(S, self.problem, self.schedule)

    def fit_loo(self, S):
        pts = tuple(S)
        n = len(pts)
        sched = self.schedule
        if (isinstance(self.problem, Absolute1D) and sched.weights is not None
                and n > 0 and not sched.is_zero):
            lam = sched.weight_total(n - 1)
            if lam > 0:
                return list(kernels.abs_reg_loo(np.asarray(pts, dtype=np.float64), lam,
                                                sched.center, self.problem.lo,
                                                self.problem.hi))
        return super().fit_loo(pts)


class _RSLMRun:
    def __init__(self, learner):
        self.learner = learner
        self.surrogates = []
        self.anchors = []
        self._h = learner._select([], [])

    @property
    def hypothesis(self):
        return self._h

    def observe(self, z):
        self.anchors.append(self._h)
        self.surrogates.append(linearize(self.learner.problem, self._h, z))
        self._h = self.learner._select(self.surrogates, self.anchors)


class RSLM(Learner):
    """Regularized surrogate-loss minimizer on linearized losses.

    Surrogates are built at the learner's own past choices, so the output
    depends on the order of the data. With ``proximal=True`` the quadratic
    regularizer r_i is centred on the round-i choice instead of a fixed point.
    """

    name = "rslm"
    symmetric = False

    def __init__(self, problem: Problem, schedule: RegularizerSchedule, proximal=False):
        super().__init__(problem)
        self.schedule = schedule
        self.proximal = proximal

    def _select(self, surrogates, anchors):
        centers = None
        if self.proximal:
            centers = [self.schedule.center] + list(anchors)
        return rslm_select(surrogates, self.schedule, self.problem, anchors=centers)

    def prefix_fits(self, S):
        run = _RSLMRun(self)
        out = [run.hypothesis]
        for z in S:
            run.observe(z)
            out.append(run.hypothesis)
        return out

    def surrogates(self, S) -> list:
        run = _RSLMRun(self)
        for z in S:
            run.observe(z)
        return run.surrogates

    def fit(self, S):
        return self.prefix_fits(S)[-1]

    def start(self):
        return _RSLMRun(self)


class _HedgeRun:
    def __init__(self, learner):
        self.learner = learner
        self.cum = np.zeros(learner.d)
        self.t = 0

    @property
    def hypothesis(self):
        return hedge_select(self.cum, self.t, self.learner.schedule)

    def observe(self, z):
        self.cum = self.cum + self.learner.expert_losses(z)
        self.t += 1


class Hedge(Learner):
    """Hedge / weighted majority over a finite list of experts.

    Experts are hypotheses of ``problem``; the hypothesis played is an
    :class:`ExpertDistribution` and losses are expectations under it.
    """

    name = "hedge"
    randomized = True

    def __init__(self, problem: Problem, experts: Optional[Sequence] = None,
                 schedule: Optional[LambdaSchedule] = None):
        super().__init__(problem)
        if experts is None:
            experts = problem.hypotheses
        self.experts = tuple(experts)
        self.d = len(self.experts)
        if self.d == 0:
            raise StablabError("empty expert set")
        if schedule is None:
            schedule = (default_lambda_schedule(problem.regret_bound, self.d)
                        if self.d >= 2 else fixed_eta_schedule(1.0))
        self.schedule = schedule

    def expert_losses(self, z) -> np.ndarray:
        return self.problem.expert_losses(self.experts, z)

    def loss_table(self, points) -> np.ndarray:
        """m x d matrix of expert losses."""
        if len(points) == 0:
            return np.zeros((0, self.d))
        return np.vstack([self.expert_losses(z) for z in points])

    def fit(self, S):
        pts = tuple(S)
        cum = self.loss_table(pts).sum(axis=0) if pts else np.zeros(self.d)
        return hedge_select(cum, len(pts), self.schedule)

    def loss(self, h, z):
        return h.expected(self.expert_losses(z))

    def losses(self, h, points):
        return self.loss_table(points) @ h.weights

    def fit_loo(self, S):
        pts = tuple(S)
        n = len(pts)
        if n == 0:
            return []
        table = self.loss_table(pts)
        cum = table.sum(axis=0)
        eta = self.schedule.eta(n - 1)
        thetas = _softmin(cum[None, :] - table, eta)
        return [ExpertDistribution(row) for row in thetas]

    def prefix_fits(self, S):
        table = self.loss_table(tuple(S))
        m = table.shape[0]
        etas = self.schedule.etas(m + 1)
        cum = np.vstack([np.zeros((1, self.d)), np.cumsum(table, axis=0)])
        return [ExpertDistribution(_softmin(cum[t], etas[t])) for t in range(m + 1)]

    def replay(self, S) -> np.ndarray:
        """Expected per-round losses on a fixed sequence (compiled kernel)."""
        table = self.loss_table(tuple(S))
        return kernels.hedge_expected_losses(table, self.schedule.etas(table.shape[0]))

    def start(self):
        return _HedgeRun(self)


def ftl(problem: Problem) -> FTL:
    return FTL(problem)


def ftrl(problem: Problem, reg: RegularizerSchedule) -> FTRL:
    return FTRL(problem, reg)
