"""Adversarial sequences and pathological learners for the binary and threshold games."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .core import Dataset, StablabError
from .learners import ExpertDistribution, FTL, Learner, inverse_sqrt
from .problems import RandomizedBinary, ThresholdClass

FLOAT_ROUND_CAP = 48


# ---------------------------------------------------------------------------
# Binary game
# ---------------------------------------------------------------------------


def matching_pennies_next(h_prev) -> int:
    """z = 1 - h for a deterministic {0, 1} learner."""
    if h_prev not in (0, 1) or isinstance(h_prev, bool):
        raise StablabError(f"matching pennies needs a binary hypothesis, got {h_prev!r}")
    return 1 - int(h_prev)


def rounded_pennies_next(p_prev: float) -> int:
    """z = round(1 - p), with the tie 1/2 rounded up to 1."""
    if not 0.0 <= p_prev <= 1.0:
        raise StablabError(f"p must lie in [0, 1], got {p_prev!r}")
    return 1 if 1.0 - p_prev >= 0.5 else 0


def tracking_adversary_next(p_prev: float) -> int:
    if p_prev == 0.5:
        return 1
    if p_prev == 1.0:
        return 0
    if p_prev == 0.0:
        raise StablabError("unreachable state: interval RERM played p = 0")
    raise StablabError(f"interval RERM only plays 0, 1/2 or 1, got {p_prev!r}")


@dataclass(frozen=True)
class IntervalRermState:
    """Running counts for the |p - 1/2|-regularized RERM.

    ``lam_sum`` is lambda_0 + ... + lambda_m for the m points seen so far.
    """

    count_ones: int = 0
    m: int = 0
    lam_sum: float = 0.0

    @property
    def z_bar(self) -> float:
        return self.count_ones / self.m if self.m else 0.5

    @property
    def lam_bar(self) -> float:
        return self.lam_sum / self.m if self.m else math.inf


def interval_rerm_select(state: IntervalRermState) -> float:
    # compare 2*ones with m +- lam_sum rather than dividing by m
    twice = 2.0 * state.count_ones
    if twice > state.m + state.lam_sum:
        return 1.0
    if twice < state.m - state.lam_sum:
        return 0.0
    return 0.5


class _IntervalRun:
    def __init__(self, learner):
        self.learner = learner
        self.state = IntervalRermState(0, 0, learner.lam(0))

    @property
    def hypothesis(self):
        return interval_rerm_select(self.state)

    def observe(self, z):
        s = self.state
        self.state = IntervalRermState(s.count_ones + int(z), s.m + 1,
                                       s.lam_sum + self.learner.lam(s.m + 1))


class IntervalRERM(Learner):
    """argmin_p sum f(p, z_i) + sum_{i<=m} lambda_i |p - 1/2| on the randomized binary game."""

    name = "interval_rerm"

    def __init__(self, problem=None, lam=None):
        super().__init__(problem if problem is not None else RandomizedBinary())
        self.lam = lam if lam is not None else inverse_sqrt(1.0)

    def state_for(self, S) -> IntervalRermState:
        pts = tuple(S)
        return IntervalRermState(sum(pts), len(pts),
                                 math.fsum(self.lam(i) for i in range(len(pts) + 1)))

    def fit(self, S):
        return interval_rerm_select(self.state_for(S))

    def rho(self, i: int) -> float:
        return 0.5 * self.lam(i)

    def start(self):
        return _IntervalRun(self)


def run_tracking(m: int, lam=None):
    """Tracking adversary vs interval RERM; returns (per-round losses, regret)."""
    lam = lam if lam is not None else inverse_sqrt(1.0)
    lams = np.array([lam(i) for i in range(m + 1)], dtype=np.float64)
    losses, ones = kernels.interval_rerm_tracking(m, lams)
    regret = math.fsum(losses) - min(ones, m - ones)
    return np.asarray(losses), regret


def interval_rerm_loo_witness(lam=None, max_n: int = 10_000) -> Dataset:
    """A dataset on which deleting one point moves the interval RERM by 1/2.

    Searches n, ones for a count straddling the (1 + lam_bar)/2 boundary.
    """
    learner = IntervalRERM(lam=lam)
    lam_sum = learner.lam(0)
    for n in range(1, max_n + 1):
        prev = lam_sum
        lam_sum += learner.lam(n)
        for ones in range(n + 1):
            full = interval_rerm_select(IntervalRermState(ones, n, lam_sum))
            # delete a 0 (if any) or a 1 (if any) and compare on that point
            if ones < n and interval_rerm_select(IntervalRermState(ones, n - 1, prev)) != full:
                return Dataset((0,) * (n - ones) + (1,) * ones)
            if ones > 0 and interval_rerm_select(IntervalRermState(ones - 1, n - 1, prev)) != full:
                return Dataset((1,) * ones + (0,) * (n - ones))
    raise StablabError("no witness found")


def tie_half_erm() -> FTL:
    """ERM on the randomized binary game that plays 1/2 on balanced data."""
    return FTL(RandomizedBinary(tie_value=0.5))


def balanced_binary_witness(n_pairs: int = 1) -> Dataset:
    """Balanced dataset on which binary-game FTL has uniform-LOO gap 1."""
    return Dataset((1, 0) * n_pairs)


# ---------------------------------------------------------------------------
# Thresholds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ThresholdAdversaryState:
    x: object = Fraction(1, 2)
    i: int = 1
    history: tuple = ()
    exact: bool = True

    @classmethod
    def initial(cls, exact: bool = True) -> "ThresholdAdversaryState":
        return cls(Fraction(1, 2) if exact else 0.5, 1, (), exact)


def threshold_adversary_next(state: ThresholdAdversaryState, prediction,
                             randomized: bool = False):
    """Emit z_i = (x_i, y_i) with y_i opposing the learner and halve the search step.

    Deterministic mode takes the label in {-1, 1}; randomized mode takes
    p_i = P(h_i(x_i) = 1).
    """
    if not state.exact and state.i > FLOAT_ROUND_CAP:
        raise StablabError(f"dyadic underflow: float mode is capped at {FLOAT_ROUND_CAP} rounds")
    if randomized:
        if not 0.0 <= prediction <= 1.0:
            raise StablabError(f"p must lie in [0, 1], got {prediction!r}")
        y = -1 if prediction >= 0.5 else 1
    else:
        if prediction not in (-1, 1):
            raise StablabError(f"label must be -1 or 1, got {prediction!r}")
        y = -prediction
    step = Fraction(1, 2 ** (state.i + 1)) if state.exact else 2.0 ** -(state.i + 1)
    z = (state.x, y)
    nxt = ThresholdAdversaryState(state.x - y * step, state.i + 1,
                                  state.history + (z,), state.exact)
    return z, nxt


def randomized_threshold_loss(p: float, y: int) -> float:
    """Expected loss (1 + y - 2 p y) / 2 of predicting 1 with probability p."""
    return (1 + y - 2 * p * y) / 2


@dataclass(frozen=True)
class ThresholdDistribution:
    """Uniform distribution of t over the version space (a, b]."""

    a: object
    b: object

    def prob_one(self, x) -> float:
        if x >= self.b:
            return 1.0
        if x < self.a:
            return 0.0
        return float((x - self.a) / (self.b - self.a))


class RandomizedThresholdLearner(Learner):
    """Draws a threshold uniformly from those consistent with the data."""

    name = "randomized_threshold"
    randomized = True

    def __init__(self, problem=None):
        super().__init__(problem if problem is not None else ThresholdClass())

    def fit(self, S):
        a, b = 0, 1
        for x, y in S:
            if y == 1:
                b = min(b, x)  # t <= x
            else:
                a = max(a, x)  # t > x
        if not a < b:
            a, b = 0, 1  # inconsistent data: fall back to the prior
        return ThresholdDistribution(a, b)

    def loss(self, h, z):
        x, y = z
        return randomized_threshold_loss(h.prob_one(x), y)

    def losses(self, h, points):
        return np.array([self.loss(h, z) for z in points], dtype=np.float64)


# ---------------------------------------------------------------------------
# Sources for run_online: first_state() and step(state, h, learner) -> (z, state)
# ---------------------------------------------------------------------------


def _prob_one(h, learner) -> float:
    if isinstance(h, ExpertDistribution):
        experts = learner.experts
        return float(sum(w for w, e in zip(h.weights, experts) if e == 1))
    return float(h)


class MatchingPennies:
    name = "matching_pennies"

    def first_state(self):
        return None

    def step(self, state, h, learner):
        return matching_pennies_next(h), state


class RoundedPennies:
    name = "rounded_pennies"

    def first_state(self):
        return None

    def step(self, state, h, learner):
        return rounded_pennies_next(_prob_one(h, learner)), state


class TrackingAdversary:
    name = "tracking"

    def first_state(self):
        return None

    def step(self, state, h, learner):
        return tracking_adversary_next(float(h)), state


class ThresholdAdversary:
    name = "threshold"

    def __init__(self, exact: bool = True):
        self.exact = exact

    def first_state(self):
        return ThresholdAdversaryState.initial(self.exact)

    def step(self, state, h, learner):
        if isinstance(h, ThresholdDistribution):
            return threshold_adversary_next(state, h.prob_one(state.x), randomized=True)
        return threshold_adversary_next(state, ThresholdClass.predict(h, state.x))


class GreedyExpertAdversary:
    """Loss 1 on the currently heaviest expert, 0 elsewhere (lowest index on ties)."""

    name = "greedy"

    def __init__(self, d: int, B: float = 1.0):
        self.d, self.B = d, B

    def first_state(self):
        return None

    def step(self, state, h, learner):
        w = h.weights if isinstance(h, ExpertDistribution) else np.eye(self.d)[h]
        z = [0.0] * self.d
        z[int(np.argmax(w))] = self.B
        return tuple(z), state


class RandomSource:
    """i.i.d. points from the problem's sampler; the generator lives in the state."""

    name = "random"

    def __init__(self, problem, seed=0, rng: str = "pcg64"):
        self.problem, self.seed, self.rng = problem, seed, rng

    def first_state(self):
        from .harness import make_rng
        return make_rng(self.rng, self.seed)

    def step(self, state, h, learner):
        return self.problem.sample_points(state, 1)[0], state


def make_adversary(name: str, problem=None, seed=0, rng: str = "pcg64", **params):
    if name == "matching_pennies":
        return MatchingPennies()
    if name == "rounded_pennies":
        return RoundedPennies()
    if name == "tracking":
        return TrackingAdversary()
    if name == "threshold":
        return ThresholdAdversary(exact=params.get("exact", True))
    if name == "greedy":
        if problem is None or not hasattr(problem, "d"):
            raise StablabError("greedy adversary needs a finite_experts problem")
        return GreedyExpertAdversary(problem.d, problem.regret_bound)
    if name == "random":
        if problem is None:
            raise StablabError("random adversary needs a problem")
        return RandomSource(problem, seed, rng)
    raise StablabError(f"unknown adversary {name!r}; choose from {', '.join(ADVERSARIES)}")


ADVERSARIES = ("matching_pennies", "rounded_pennies", "tracking", "threshold", "greedy",
               "random")
