"""Catalog of concrete (H, Z, f) instances with exact ERM oracles."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import kernels
from .core import InvalidDataPoint, LossFunctional, StablabError


class Problem:
    """Base class for a learning problem.

    Subclasses set ``kind`` to one of ``interval`` (a real interval
    ``[lo, hi]``), ``finite`` (``hypotheses`` tuple), ``threshold`` or
    ``tagged``.
    """

    name = "problem"
    kind = "interval"
    has_exact_erm = True
    differentiable = False
    regret_bound = 1.0
    lipschitz = None
    strong_convexity = None
    diameter = None
    dim = 1

    def __init__(self, **params):
        self.params = params

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"{self.name}({args})"

    @property
    def loss_functional(self) -> LossFunctional:
        return LossFunctional(self.loss, self.regret_bound, self.lipschitz,
                              self.strong_convexity, self.diameter, self.dim)

    def loss(self, h, z) -> float:
        raise NotImplementedError

    def losses(self, h, points: Sequence) -> np.ndarray:
        """f(h, z_j) for every point."""
        return np.array([self.loss(h, z) for z in points], dtype=np.float64)

    def expert_losses(self, hypotheses: Sequence, z) -> np.ndarray:
        """f(h_k, z) for every hypothesis."""
        return np.array([self.loss(h, z) for h in hypotheses], dtype=np.float64)

    def validate(self, z) -> None:
        pass

    @property
    def default_hypothesis(self):
        raise NotImplementedError

    def erm(self, points):
        raise NotImplementedError

    def erm_loo(self, points) -> list:
        """A(S^{\\i}) for every i, with A the exact ERM."""
        pts = tuple(points)
        return [self.erm(pts[:i] + pts[i + 1:]) for i in range(len(pts))]

    def regularized_erm(self, points, lam_total: float, center: float):
        """argmin sum f(h, z_j) + lam_total * (h - center)^2, or None if no closed form."""
        return None

    def gradient(self, h, z) -> float:
        raise StablabError(f"no gradient for problem {self.name!r}")

    def hindsight_value(self, points) -> float:
        h = self.erm(points)
        return math.fsum(self.loss(h, z) for z in points)

    def prefix_hindsight(self, points) -> np.ndarray:
        """min_h sum_{j<=t} f(h, z_j) for t = 1..m."""
        pts = tuple(points)
        return np.array([self.hindsight_value(pts[: t + 1]) for t in range(len(pts))])

    def sample_points(self, rng: np.random.Generator, n: int) -> list:
        raise NotImplementedError

    def sample_hypotheses(self, rng: np.random.Generator, n: int) -> list:
        raise NotImplementedError


class IntervalProblem(Problem):
    kind = "interval"

    def __init__(self, lo: float, hi: float, /, **params):
        if not hi > lo:
            raise StablabError("interval needs hi > lo")
        super().__init__(**params)
        self.lo, self.hi = float(lo), float(hi)
        self.diameter = self.hi - self.lo

    @property
    def default_hypothesis(self):
        return self.lo

    def clip(self, h: float) -> float:
        return min(max(h, self.lo), self.hi)

    def sample_hypotheses(self, rng, n):
        return [float(v) for v in rng.uniform(self.lo, self.hi, n)]

    def expert_losses(self, hypotheses, z):
        return self._vec_loss(np.asarray(hypotheses, dtype=np.float64), float(z))

    def losses(self, h, points):
        return self._vec_loss(float(h), np.asarray(points, dtype=np.float64))

    def _vec_loss(self, h, z):
        raise NotImplementedError


class Quadratic1D(IntervalProblem):
    """f(h, z) = (h - z)^2 on H = [lo, hi], Z = [zlo, zhi]."""

    name = "quadratic_1d"
    differentiable = True
    strong_convexity = 2.0

    def __init__(self, lo=-1.0, hi=1.0, zlo=None, zhi=None):
        zlo = lo if zlo is None else zlo
        zhi = hi if zhi is None else zhi
        super().__init__(lo, hi, lo=lo, hi=hi, zlo=zlo, zhi=zhi)
        self.zlo, self.zhi = float(zlo), float(zhi)
        span = max(self.hi, self.zhi) - min(self.lo, self.zlo)
        self.lipschitz = 2.0 * span
        self.regret_bound = max(
            max((h - z) ** 2 for h in (self.lo, self.hi)) - min_sq_dist(z, self.lo, self.hi)
            for z in (self.zlo, self.zhi)
        )

    def loss(self, h, z):
        return (h - z) ** 2

    def _vec_loss(self, h, z):
        return (h - z) ** 2

    def validate(self, z):
        if not (isinstance(z, (int, float)) and self.zlo <= z <= self.zhi):
            raise InvalidDataPoint(f"invalid data point {z!r} for {self.name}")

    def erm(self, points):
        if len(points) == 0:
            return self.default_hypothesis
        return self.clip(math.fsum(points) / len(points))

    def erm_loo(self, points):
        pts = list(points)
        n = len(pts)
        if n == 1:
            return [self.default_hypothesis]
        total = math.fsum(pts)
        return [self.clip((total - z) / (n - 1)) for z in pts]

    def regularized_erm(self, points, lam_total, center):
        n = len(points)
        if n == 0 and lam_total == 0:
            return self.default_hypothesis
        return self.clip((math.fsum(points) + lam_total * center) / (n + lam_total))

    def gradient(self, h, z):
        return 2.0 * (h - z)

    def prefix_hindsight(self, points):
        z = np.asarray(points, dtype=np.float64)
        out = np.empty(len(z))
        for t in range(len(z)):
            out[t] = np.square(self.erm(z[: t + 1].tolist()) - z[: t + 1]).sum()
        return out

    def sample_points(self, rng, n):
        return [float(v) for v in rng.uniform(self.zlo, self.zhi, n)]


def min_sq_dist(z, lo, hi):
    c = min(max(z, lo), hi)
    return (c - z) ** 2


class Absolute1D(IntervalProblem):
    """f(h, z) = |h - z| with H = [-k, k], Z = R (sampled on [-zspan, zspan])."""

    name = "absolute_1d"
    lipschitz = 1.0

    def __init__(self, k=1.0, zspan=None):
        if not k > 0:
            raise StablabError("absolute_1d needs k > 0")
        zspan = 2.0 * k if zspan is None else float(zspan)
        super().__init__(-k, k, k=k, zspan=zspan)
        self.k = float(k)
        self.zspan = zspan
        self.regret_bound = 2.0 * self.k

    def loss(self, h, z):
        return abs(h - z)

    def _vec_loss(self, h, z):
        return np.abs(h - z)

    def validate(self, z):
        if not (isinstance(z, (int, float)) and math.isfinite(z)):
            raise InvalidDataPoint(f"invalid data point {z!r} for {self.name}")

    def erm(self, points):
        # lower median, clipped
        n = len(points)
        if n == 0:
            return self.default_hypothesis
        return self.clip(sorted(points)[(n - 1) // 2])

    def erm_loo(self, points):
        pts = list(points)
        n = len(pts)
        if n == 1:
            return [self.default_hypothesis]
        s = sorted(pts)
        k = (n - 2) // 2  # lower-median index among n - 1 points
        out = []
        for z in pts:
            r = s.index(z)
            out.append(self.clip(s[k] if k < r else s[k + 1]))
        return out

    def regularized_erm(self, points, lam_total, center):
        if lam_total <= 0:
            return self.erm(points)
        return kernels.abs_reg_argmin(np.asarray(points, dtype=np.float64),
                                      lam_total, center, self.lo, self.hi)

    def gradient(self, h, z):
        if h == z:
            return 0.0
        return 1.0 if h > z else -1.0

    def prefix_hindsight(self, points):
        return kernels.abs_prefix_hindsight(np.asarray(points, dtype=np.float64),
                                            self.lo, self.hi)

    def sample_points(self, rng, n):
        return [float(v) for v in rng.uniform(-self.zspan, self.zspan, n)]


class BinaryGame(Problem):
    """H = Z = {0, 1}, f(h, z) = |h - z|."""

    name = "binary_game"
    kind = "finite"
    hypotheses = (0, 1)
    diameter = 1.0

    def loss(self, h, z):
        return float(abs(h - z))

    def losses(self, h, points):
        return np.abs(h - np.asarray(points, dtype=np.float64))

    def validate(self, z):
        if z not in (0, 1) or isinstance(z, bool):
            raise InvalidDataPoint(f"invalid data point {z!r} for {self.name}")

    @property
    def default_hypothesis(self):
        return 0

    def erm(self, points):
        ones = sum(points)
        return 1 if 2 * ones > len(points) else 0

    def erm_loo(self, points):
        pts = list(points)
        n, ones = len(pts), sum(pts)
        return [1 if 2 * (ones - z) > n - 1 else 0 for z in pts]

    def prefix_hindsight(self, points):
        ones = np.cumsum(np.asarray(points, dtype=np.int64))
        n = np.arange(1, len(ones) + 1)
        return np.minimum(ones, n - ones).astype(np.float64)

    def sample_points(self, rng, n):
        return [int(v) for v in rng.integers(0, 2, n)]

    def sample_hypotheses(self, rng, n):
        return [int(v) for v in rng.integers(0, 2, n)]


class RandomizedBinary(IntervalProblem):
    """The convexified binary game: p in [0, 1], f(p, z) = (1 - p) z + p (1 - z).

    ``tie_value`` is what the exact ERM returns on a balanced dataset (0 by
    default; 1/2 gives the all-i-LOO-stable variant).
    """

    name = "randomized_binary"
    differentiable = True
    lipschitz = 1.0
    regret_bound = 1.0

    def __init__(self, tie_value=0.0):
        super().__init__(0.0, 1.0, tie_value=tie_value)
        self.tie_value = float(tie_value)

    def loss(self, h, z):
        return (1.0 - h) * z + h * (1.0 - z)

    def _vec_loss(self, h, z):
        return (1.0 - h) * z + h * (1.0 - z)

    def validate(self, z):
        if z not in (0, 1) or isinstance(z, bool):
            raise InvalidDataPoint(f"invalid data point {z!r} for {self.name}")

    @property
    def default_hypothesis(self):
        return self.tie_value

    def _majority(self, ones, n):
        if 2 * ones > n:
            return 1.0
        if 2 * ones < n:
            return 0.0
        return self.tie_value

    def erm(self, points):
        return self._majority(sum(points), len(points))

    def erm_loo(self, points):
        pts = list(points)
        n, ones = len(pts), sum(pts)
        return [self._majority(ones - z, n - 1) for z in pts]

    def regularized_erm(self, points, lam_total, center):
        n, ones = len(points), sum(points)
        if lam_total <= 0:
            return self.erm(points)
        return self.clip(center - ((n - ones) - ones) / (2.0 * lam_total))

    def gradient(self, h, z):
        return 1.0 - 2.0 * z

    def prefix_hindsight(self, points):
        return BinaryGame.prefix_hindsight(self, points)

    def sample_points(self, rng, n):
        return [int(v) for v in rng.integers(0, 2, n)]


class ThresholdClass(Problem):
    """Thresholds on [0, 1]: h_t(x) = 2 I(x >= t) - 1, f = (1 - h_t(x) y) / 2.

    Points are pairs ``(x, y)`` with y in {-1, 1}; x may be a float or an
    exact ``Fraction``.
    """

    name = "threshold_class"
    kind = "threshold"
    diameter = 1.0

    @staticmethod
    def predict(t, x) -> int:
        return 1 if x >= t else -1

    def loss(self, h, z):
        x, y = z
        return (1 - self.predict(h, x) * y) / 2

    def validate(self, z):
        try:
            x, y = z
        except (TypeError, ValueError):
            raise InvalidDataPoint(f"invalid data point {z!r} for {self.name}") from None
        if y not in (-1, 1) or not 0 <= x <= 1:
            raise InvalidDataPoint(f"invalid data point {z!r} for {self.name}")

    @property
    def default_hypothesis(self):
        return 0

    def candidates(self, points) -> list:
        """Thresholds at 0, 1, every x and every midpoint of consecutive distinct x."""
        xs = sorted({x for x, _ in points})
        cands = {0, 1, *xs}
        cands.update((a + b) / 2 for a, b in zip(xs, xs[1:]))
        if xs:
            cands.add((xs[-1] + 1) / 2)
        return sorted(cands)

    def erm(self, points):
        if len(points) == 0:
            return self.default_hypothesis
        pts = sorted(points)
        n = len(pts)
        # mistakes(t) = #{y=+1, x<t} + #{y=-1, x>=t}; sweep t upward
        pos_below = 0
        neg_at_or_above = sum(1 for _, y in pts if y == -1)
        j = 0
        best_t, best = None, None
        for t in self.candidates(pts):
            while j < n and pts[j][0] < t:
                if pts[j][1] == 1:
                    pos_below += 1
                else:
                    neg_at_or_above -= 1
                j += 1
            mistakes = pos_below + neg_at_or_above
            if best is None or mistakes < best:
                best_t, best = t, mistakes
        return best_t

    def sample_points(self, rng, n):
        xs = rng.uniform(0, 1, n)
        ys = rng.choice([-1, 1], n)
        return [(float(x), int(y)) for x, y in zip(xs, ys)]

    def sample_hypotheses(self, rng, n):
        return [float(v) for v in rng.uniform(0, 1, n)]


class FiniteExperts(Problem):
    """d experts; a data point is the loss vector (one entry per expert)."""

    name = "finite_experts"
    kind = "finite"

    def __init__(self, d=2, B=1.0):
        if d < 1:
            raise StablabError("empty expert set")
        super().__init__(d=d, B=B)
        self.d = int(d)
        self.regret_bound = float(B)
        self.hypotheses = tuple(range(self.d))

    def loss(self, h, z):
        return float(z[h])

    def losses(self, h, points):
        if len(points) == 0:
            return np.empty(0)
        return np.asarray(points, dtype=np.float64)[:, h]

    def expert_losses(self, hypotheses, z):
        return np.asarray(z, dtype=np.float64)[list(hypotheses)]

    def validate(self, z):
        try:
            ok = len(z) == self.d and all(0.0 <= v <= self.regret_bound for v in z)
        except TypeError:
            ok = False
        if not ok:
            raise InvalidDataPoint(f"invalid data point {z!r} for {self.name}")

    @property
    def default_hypothesis(self):
        return 0

    def erm(self, points):
        if len(points) == 0:
            return 0
        cum = np.asarray(points, dtype=np.float64).sum(axis=0)
        return int(np.argmin(cum))

    def prefix_hindsight(self, points):
        cum = np.cumsum(np.asarray(points, dtype=np.float64), axis=0)
        return cum.min(axis=1)

    def sample_points(self, rng, n):
        return [tuple(float(v) for v in row)
                for row in rng.uniform(0, self.regret_bound, (n, self.d))]

    def sample_hypotheses(self, rng, n):
        return [int(v) for v in rng.integers(0, self.d, n)]


@dataclass(frozen=True)
class Tagged:
    """A real number carrying an explicit rationality tag."""

    value: float
    rational: bool


RATIONAL_ONE = Tagged(1.0, True)
IRRATIONAL_SQRT2 = Tagged(math.sqrt(2.0), False)


class RationalityGame(Problem):
    """H = Z = R; loss 0 when h and z are both rational or both irrational, else 1."""

    name = "rationality_game"
    kind = "tagged"

    def loss(self, h, z):
        return 0.0 if h.rational == z.rational else 1.0

    def validate(self, z):
        if not isinstance(z, Tagged):
            raise InvalidDataPoint(f"invalid data point {z!r} for {self.name}")

    @property
    def default_hypothesis(self):
        return RATIONAL_ONE

    def erm(self, points):
        rational = sum(1 for z in points if z.rational)
        return IRRATIONAL_SQRT2 if len(points) - rational > rational else RATIONAL_ONE

    def prefix_hindsight(self, points):
        r = np.cumsum([1 if z.rational else 0 for z in points])
        n = np.arange(1, len(r) + 1)
        return np.minimum(r, n - r).astype(np.float64)

    def _sample(self, rng, n):
        out = []
        for tag, v in zip(rng.integers(0, 2, n), rng.uniform(-10, 10, n)):
            if tag:
                out.append(Tagged(float(Fraction(float(v)).limit_denominator(1000)), True))
            else:
                out.append(Tagged(float(v), False))
        return out

    sample_points = _sample
    sample_hypotheses = _sample


CATALOG = {
    "quadratic_1d": Quadratic1D,
    "absolute_1d": Absolute1D,
    "binary_game": BinaryGame,
    "randomized_binary": RandomizedBinary,
    "threshold_class": ThresholdClass,
    "finite_experts": FiniteExperts,
    "rationality_game": RationalityGame,
}


def make_problem(name: str, **params: Any) -> Problem:
    try:
        cls = CATALOG[name]
    except KeyError:
        raise StablabError(
            f"unknown problem {name!r}; catalog: {', '.join(sorted(CATALOG))}"
        ) from None
    return cls(**params)


def exact_erm(problem: Problem, S):
    return problem.erm(tuple(S))


def gradient(problem: Problem, h, z) -> float:
    return problem.gradient(h, z)
