"""Empirical stability gaps and closed-form rate tables."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np

from .core import Dataset, StablabError

Rate = Union[Callable[[int], float], Sequence[float], np.ndarray]


@dataclass(frozen=True)
class StabilityReport:
    kind: str
    gaps: np.ndarray
    sample_count: int = 1
    stderr: np.ndarray = None

    @property
    def max_gap(self) -> float:
        return float(np.max(self.gaps)) if len(self.gaps) else 0.0

    @property
    def mean_gap(self) -> float:
        """Average over indices (the LOO-stable aggregate)."""
        return float(np.mean(self.gaps)) if len(self.gaps) else 0.0


def _pts(S) -> tuple:
    return S.points if isinstance(S, Dataset) else tuple(S)


def online_stability_gap(learner, S) -> float:
    """|f(A(S^{\\m}), z_m) - f(A(S), z_m)|."""
    pts = _pts(S)
    if not pts:
        raise StablabError("online stability needs a non-empty dataset")
    z = pts[-1]
    return abs(learner.loss(learner.fit(pts[:-1]), z) - learner.loss(learner.fit(pts), z))


def uniform_loo_gap(learner, S) -> StabilityReport:
    """|f(A(S^{\\i}), z_i) - f(A(S), z_i)| for every index i."""
    pts = _pts(S)
    full = learner.fit(pts)
    loo = learner.fit_loo(pts)
    gaps = np.array([abs(learner.loss(h, z) - learner.loss(full, z))
                     for h, z in zip(loo, pts)])
    return StabilityReport("uniform-loo", gaps)


def all_i_loo_estimate(learner, sampler: Callable, m: int, n_samples: int,
                       seed=0, threads: int = 1) -> StabilityReport:
    """Monte-Carlo estimate of E_S |f(A(S^{\\i}), z_i) - f(A(S), z_i)| per index i.

    ``sampler(rng, m)`` draws m i.i.d. points. Sample s uses its own child
    seed, so the result does not depend on ``threads``.
    """
    if n_samples < 1:
        raise StablabError("need at least one sample")
    children = np.random.SeedSequence(seed).spawn(n_samples)

    def one(child):
        return uniform_loo_gap(learner, sampler(np.random.default_rng(child), m)).gaps

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(one, children))
    else:
        rows = [one(c) for c in children]
    per_sample = np.vstack(rows)
    means = per_sample.mean(axis=0)
    stderr = per_sample.std(axis=0, ddof=1) / math.sqrt(n_samples) if n_samples > 1 \
        else np.zeros(m)
    report = StabilityReport("all-i-loo", means, n_samples, stderr)
    object.__setattr__(report, "_per_sample_mean", per_sample.mean(axis=1))
    return report


def pooled_stderr(report: StabilityReport) -> float:
    """Standard error of the index-averaged gap (samples are independent)."""
    per = getattr(report, "_per_sample_mean", None)
    if per is None or len(per) < 2:
        return 0.0
    return float(np.std(per, ddof=1) / math.sqrt(len(per)))


def uniform_ro_gap(learner, S, replacements, probe) -> float:
    """(1/m) sum_i |f(A(S^{(i)}), z') - f(A(S), z')|."""
    pts, reps = _pts(S), _pts(replacements)
    if len(pts) != len(reps):
        raise StablabError("replacements must match the dataset length")
    base = learner.loss(learner.fit(pts), probe)
    gaps = [abs(learner.loss(learner.fit(pts[:i] + (r,) + pts[i + 1:]), probe) - base)
            for i, r in enumerate(reps)]
    return math.fsum(gaps) / len(pts)


def binary_all_i_loo_exact(m: int, p: float, decide: Callable[[int, int], float],
                           loss=lambda h, z: (1.0 - h) * z + h * (1.0 - z)) -> float:
    """Exact E|f(A(S^{\\i}), z_i) - f(A(S), z_i)| for a count-based binary learner.

    ``decide(ones, n)`` is the learner's output on n points with ``ones``
    ones; the data are i.i.d. Bernoulli(p). Enumerates the binomial law of
    the other m - 1 points.
    """
    p = Fraction(p)
    total = Fraction(0)
    for z, pz in ((1, p), (0, 1 - p)):
        for k in range(m):
            w = pz * math.comb(m - 1, k) * p ** k * (1 - p) ** (m - 1 - k)
            ones = k + z
            gap = abs(loss(decide(ones - z, m - 1), z) - loss(decide(ones, m), z))
            if gap:
                total += w * Fraction(gap)
    return float(total)


# ---------------------------------------------------------------------------
# Rate tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RateTable:
    """epsilon(m) for m = 1..M."""

    name: str
    values: np.ndarray
    params: dict = field(default_factory=dict)

    @property
    def M(self) -> int:
        return len(self.values)

    def __call__(self, m: int) -> float:
        return float(self.values[m - 1])

    @property
    def ms(self) -> np.ndarray:
        return np.arange(1, self.M + 1)

    def is_non_increasing(self, atol: float = 0.0) -> bool:
        return bool(np.all(np.diff(self.values) <= atol))


def _seq(x: Rate, start: int, stop: int) -> np.ndarray:
    """Values of a rate at indices start..stop (inclusive)."""
    if isinstance(x, RateTable):
        if start < 1 or stop > x.M:
            raise StablabError(f"rate table {x.name} covers 1..{x.M}")
        return x.values[start - 1: stop]
    if callable(x):
        return np.array([x(i) for i in range(start, stop + 1)], dtype=np.float64)
    if np.isscalar(x):
        return np.full(stop - start + 1, float(x))
    arr = np.asarray(x, dtype=np.float64)
    if len(arr) <= stop:
        raise StablabError(f"sequence needs entries 0..{stop}")
    return arr[start: stop + 1]


def rate_loo_strongly_convex_loss(L: float, nu: float, M: int) -> RateTable:
    """2 L^2 / (m nu): ERM with an L-Lipschitz, nu-strongly convex loss."""
    if not (L > 0 and nu > 0):
        raise StablabError("need L > 0 and nu > 0")
    m = np.arange(1, M + 1)
    return RateTable("loo_strongly_convex_loss", 2.0 * L * L / (m * nu),
                     {"L": L, "nu": nu})


def rate_loo_convex_reg(L: float, L_R: Rate, nu: Rate, M: int) -> RateTable:
    """2 L (L + L_R[m]) / sum_{i<=m} nu_i: RERM with Lipschitz strongly convex r_i."""
    nus = _seq(nu, 0, M)
    nu_cum = np.cumsum(nus)[1:]
    lr = _seq(L_R, 1, M)
    return RateTable("loo_convex_reg", 2.0 * L * (L + lr) / nu_cum, {"L": L})


def rate_loo_bounded_reg(L: float, rho: Rate, nu: Rate, M: int) -> RateTable:
    """2 L^2 / sum nu + L sqrt(2 rho_m / sum nu): RERM with bounded strongly convex r_i."""
    nu_cum = np.cumsum(_seq(nu, 0, M))[1:]
    rho_m = _seq(rho, 1, M)
    vals = 2.0 * L * L / nu_cum + L * np.sqrt(2.0 * rho_m / nu_cum)
    return RateTable("loo_bounded_reg", vals, {"L": L})


def rate_regret_rerm(stability: Rate, rho: Rate, M: int) -> RateTable:
    """(1/m) sum_{i<=m} eps_on(i) + (2/m) sum_{i<m} rho_i + rho_m / m."""
    m = np.arange(1, M + 1)
    eps = np.cumsum(_seq(stability, 1, M))
    rhos = _seq(rho, 0, M)
    rho_before = np.cumsum(rhos)[:-1]  # sum_{i=0}^{m-1}
    vals = eps / m + 2.0 * rho_before / m + rhos[1:] / m
    return RateTable("regret_rerm", vals)


def rate_regret_always_aerm(case: int, eps_erm: Rate = 0.0, eps_loo: Rate = 0.0,
                            eps_ro: Rate = 0.0, eps_on: Rate = 0.0,
                            M: int = 1) -> RateTable:
    """Regret rate for always-AERM learners, in one of two sufficient cases.

    case 1: (1/m) sum eps_on(i) + (1/m) sum_{i<=m} i eps_erm(i)
    case 2: (1/m) sum eps_loo(i) + eps_erm(m) + (1/m) sum_{i<m} i [eps_loo(i) + eps_ro(i)]
    """
    m = np.arange(1, M + 1)
    i = m.astype(np.float64)
    erm = _seq(eps_erm, 1, M)
    if case == 1:
        vals = np.cumsum(_seq(eps_on, 1, M)) / m + np.cumsum(i * erm) / m
    elif case == 2:
        loo = _seq(eps_loo, 1, M)
        ro = _seq(eps_ro, 1, M)
        inner = np.concatenate(([0.0], np.cumsum(i * (loo + ro))[:-1]))  # sum_{i<m}
        vals = np.cumsum(loo) / m + erm + inner / m
    else:
        raise StablabError(f"unknown case {case!r}; expected 1 or 2")
    return RateTable(f"regret_always_aerm_case{case}", vals)


def rate_hedge(B: float, d: int, M: int) -> tuple:
    """(loo, erm, regret) tables for Hedge with the default lambda schedule."""
    if d < 2:
        raise StablabError("degenerate expert set: need d >= 2")
    m = np.arange(1, M + 1, dtype=np.float64)
    root = math.sqrt(2.0 * math.log(d))
    loo = B * root * (1.0 / (2.0 * np.sqrt(m) - 1.0) + 1.0 / (2.0 * np.sqrt(m + 1.0)))
    erm = B * np.sqrt(math.log(d) / (2.0 * m)) * (1.0 + 1.0 / (2.0 * np.sqrt(m)))
    regret = hedge_regret_values(B, d, m)
    params = {"B": B, "d": d}
    return (RateTable("hedge_loo", loo, params), RateTable("hedge_erm", erm, params),
            RateTable("hedge_regret", regret, params))


def hedge_regret_values(B: float, d: int, t) -> np.ndarray:
    """B sqrt(2 ln d) [3/sqrt(t) + ln(t)/(2t) + (1 + 2 ln 2)/(2t)]."""
    t = np.asarray(t, dtype=np.float64)
    return B * math.sqrt(2.0 * math.log(d)) * (
        3.0 / np.sqrt(t) + np.log(t) / (2.0 * t) + (1.0 + 2.0 * math.log(2.0)) / (2.0 * t)
    )


def hedge_aerm_gap(learner, S) -> float:
    """F_S(A(S)) - min_h F_S(h) for a Hedge learner (averaged, expected loss)."""
    pts = _pts(S)
    table = learner.loss_table(pts)
    theta = learner.fit(pts)
    return (math.fsum(table @ theta.weights) - table.sum(axis=0).min()) / len(pts)
