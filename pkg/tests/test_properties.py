import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from stablab.core import decompose_regret, run_online, FixedSequence
from stablab.counterexamples import IntervalRermState, interval_rerm_select
from stablab.covering import grid_cover
from stablab.learners import FTL, FTRL, Hedge, inverse_sqrt, quadratic_schedule
from stablab.problems import make_problem
from stablab.stability import rate_hedge, uniform_loo_gap

unit = st.floats(-1, 1, allow_nan=False)
points_1d = st.lists(unit, min_size=1, max_size=25)


@settings(max_examples=60, deadline=None)
@given(points_1d)
def test_decomposition_identity_quadratic(S):
    rep = decompose_regret(FTL(make_problem("quadratic_1d")), S)
    assert abs(rep.residual) <= 1e-9 * len(S)
    assert rep.drift_term <= 1e-9 * len(S)


@settings(max_examples=40, deadline=None)
@given(points_1d)
def test_decomposition_identity_ftrl(S):
    p = make_problem("absolute_1d")
    sched = quadratic_schedule(inverse_sqrt(1.0), -1, 1)
    rep = decompose_regret(FTRL(p, sched), S)
    m = len(S)
    assert abs(rep.residual) <= 1e-9 * m
    assert rep.drift_term <= math.fsum(sched.rho(i) for i in range(1, m)) + 1e-9 * m


@settings(max_examples=60, deadline=None)
@given(points_1d)
def test_ftl_quadratic_regret_nonnegative_for_prefix(S):
    ledger = run_online(FTL(make_problem("quadratic_1d")), FixedSequence(S), len(S))
    # FTL plays the running mean; loss of the best fixed point never exceeds it
    assert ledger.regret >= -1e-9


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 6), st.integers(1, 30), st.integers(0, 2 ** 31))
def test_hedge_loo_within_rate(d, m, seed):
    p = make_problem("finite_experts", d=d)
    S = p.sample_points(np.random.default_rng(seed), m)
    assert uniform_loo_gap(Hedge(p), S).max_gap <= rate_hedge(1.0, d, m)[0](m) + 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 50), st.integers(0, 50), st.floats(0, 20))
def test_interval_select_is_minimizer(a, b, lam):
    ones, m = min(a, b), max(a, b)
    p = interval_rerm_select(IntervalRermState(ones, m, lam))
    obj = lambda q: ones * (1 - q) + (m - ones) * q + lam * abs(q - 0.5)
    assert obj(p) <= min(obj(q) for q in (0.0, 0.5, 1.0)) + 1e-9


@settings(max_examples=100, deadline=None)
@given(st.floats(0.001, 2), st.floats(0.1, 4), unit)
def test_grid_cover_radius(eps, K, h):
    c = np.array(grid_cover(-1.0, 1.0, K, eps).members)
    assert np.abs(c - h).min() <= eps / K + 1e-12
