import math

import numpy as np
import pytest

from stablab.core import FixedSequence, StablabError, UnsupportedObjective, decompose_regret, run_online
from stablab.counterexamples import MatchingPennies
from stablab.learners import (
    FTRL,
    RSLM,
    ConstantLearner,
    ExpertDistribution,
    Hedge,
    LambdaSchedule,
    RegularizerSchedule,
    Surrogate,
    check_rho,
    default_lambda_schedule,
    erm_select,
    fixed_eta_schedule,
    ftl,
    ftrl,
    hedge_rerm_objective,
    hedge_select,
    inverse_sqrt,
    kl_to_uniform,
    linearize,
    quadratic_schedule,
    rerm_select,
    rslm_select,
    surrogate_dominates,
    zero_schedule,
)
from stablab.problems import make_problem


def half_h2():
    return quadratic_schedule(lambda i: 0.5, -1.0, 1.0)


class TestSelection:
    def test_erm_examples(self):
        assert erm_select([0.2, 0.4], make_problem("quadratic_1d")) == pytest.approx(0.3)
        assert erm_select([1], make_problem("binary_game")) == 1
        assert erm_select([1, 0], make_problem("binary_game")) == 0

    def test_rerm_absolute_example(self):
        # |h - 1| + 0.5 h^2 + 0.5 h^2 on [-1, 1]: -1 + 2h = 0
        assert rerm_select([1.0], make_problem("absolute_1d"), half_h2()) == pytest.approx(0.5)

    def test_rerm_anchor(self):
        sched = quadratic_schedule(lambda i: 2.0, -1.0, 1.0, center=0.25)
        assert rerm_select([], make_problem("quadratic_1d"), sched) == pytest.approx(0.25)

    @pytest.mark.parametrize("name", ["quadratic_1d", "absolute_1d", "binary_game",
                                      "randomized_binary", "finite_experts"])
    def test_zero_regularizer_is_erm(self, name):
        p = make_problem(name)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            pts = p.sample_points(rng, int(rng.integers(0, 7)))
            assert rerm_select(pts, p, zero_schedule()) == erm_select(pts, p)

    def test_rerm_matches_grid(self):
        p = make_problem("absolute_1d")
        sched = quadratic_schedule(inverse_sqrt(0.7), -1, 1, center=0.1)
        grid = np.linspace(-1, 1, 40001)
        rng = np.random.default_rng(1)
        for _ in range(50):
            pts = np.array(p.sample_points(rng, int(rng.integers(1, 9))))
            n = len(pts)
            lam = sum(0.7 / math.sqrt(max(1, i)) for i in range(n + 1))
            obj = lambda h: np.abs(h[:, None] - pts[None, :]).sum(axis=1) + lam * (h - 0.1) ** 2
            h = rerm_select(list(pts), p, sched)
            assert obj(np.array([h]))[0] <= obj(grid).min() + 1e-9

    def test_unsupported_objective(self):
        p = make_problem("threshold_class")
        sched = RegularizerSchedule(term=lambda i: (lambda h: h), rho=lambda i: 1.0)
        with pytest.raises(UnsupportedObjective, match="unsupported objective"):
            rerm_select([(0.5, 1)], p, sched)

    def test_rho_spot_check(self):
        sched = quadratic_schedule(inverse_sqrt(1.0), -1, 1)
        hs = np.linspace(-1, 1, 101)
        assert all(check_rho(sched, hs, i) for i in range(10))


class TestSurrogates:
    def test_linearize_quadratic(self):
        s = linearize(make_problem("quadratic_1d"), 0.0, 1.0)
        assert s(0.5) == pytest.approx(0.0)
        assert s.slope == -2.0 and s.intercept == 1.0

    def test_linearize_linear_is_exact(self):
        p = make_problem("randomized_binary")
        s = linearize(p, 0.3, 1)
        for h in np.linspace(0, 1, 11):
            assert s(h) == pytest.approx(p.loss(h, 1))

    def test_linearize_kink(self):
        s = linearize(make_problem("absolute_1d"), 0.2, 0.2)
        assert s.slope == 0.0

    def test_no_gradient(self):
        with pytest.raises(StablabError, match="no gradient"):
            linearize(make_problem("binary_game"), 0, 1)

    def test_single_surrogate_example(self):
        s = Surrogate(0.0, 1.0, -2.0)  # 1 - 2h
        sched = quadratic_schedule(lambda i: 1.0 if i == 0 else 0.0, -1, 1)
        assert rslm_select([s], sched, make_problem("quadratic_1d")) == pytest.approx(1.0)

    @pytest.mark.parametrize("name", ["quadratic_1d", "absolute_1d", "randomized_binary"])
    def test_domination(self, name):
        p = make_problem(name)
        rng = np.random.default_rng(2)
        hs = p.sample_hypotheses(rng, 1000)
        for a, z in zip(p.sample_hypotheses(rng, 20), p.sample_points(rng, 20)):
            assert surrogate_dominates(linearize(p, a, z), p, z, hs) <= 1e-12

    def test_rslm_with_exact_surrogates_is_rerm(self):
        # on randomized_binary the loss is linear, so its linearization is f itself
        p = make_problem("randomized_binary")
        sched = quadratic_schedule(inverse_sqrt(1.0), 0, 1, center=0.5)
        rng = np.random.default_rng(3)
        for _ in range(200):
            pts = p.sample_points(rng, int(rng.integers(0, 8)))
            surr = [linearize(p, 0.5, z) for z in pts]
            assert rslm_select(surr, sched, p) == pytest.approx(rerm_select(pts, p, sched),
                                                                abs=1e-9)

    def test_rslm_is_order_dependent(self):
        p = make_problem("quadratic_1d")
        learner = RSLM(p, quadratic_schedule(inverse_sqrt(1.0), -1, 1))
        assert not learner.symmetric
        assert learner.fit([1.0, -1.0]) != pytest.approx(learner.fit([-1.0, 1.0]))


class TestHedge:
    def test_select_examples(self):
        sched = fixed_eta_schedule(math.log(2))
        np.testing.assert_allclose(hedge_select([0, 0], 0, sched).weights, [0.5, 0.5])
        np.testing.assert_allclose(hedge_select([1, 0], 0, sched).weights, [1 / 3, 2 / 3],
                                   rtol=1e-12)
        w = hedge_select([0, 1e6], 0, fixed_eta_schedule(1.0)).weights
        assert w[0] == pytest.approx(1.0) and w[1] < 1e-300

    def test_empty(self):
        with pytest.raises(StablabError, match="empty expert set"):
            hedge_select([], 0, fixed_eta_schedule(1.0))

    def test_distribution_invariants(self):
        with pytest.raises(StablabError):
            ExpertDistribution(np.array([0.5, 0.6]))
        rng = np.random.default_rng(4)
        sched = default_lambda_schedule(1.0, 5)
        for t in range(50):
            th = hedge_select(rng.uniform(0, 100, 5), t, sched).weights
            assert abs(th.sum() - 1) <= 1e-12 and np.all(th >= 0)

    def test_default_schedule_values(self):
        sched = default_lambda_schedule(1.0, 2)
        lam = 1 / math.sqrt(8 * math.log(2))
        assert sched.lam(0) == pytest.approx(lam) == pytest.approx(0.424661, abs=1e-6)
        assert sched.lam(1) == pytest.approx(lam)
        assert sched.eta(1) == pytest.approx(math.sqrt(2 * math.log(2)))
        assert sched.eta(1) == pytest.approx(1.177410, abs=1e-6)
        for t in (1, 3, 10):
            assert sched.lam(t) / sched.lam(4 * t) == pytest.approx(2.0)

    def test_degenerate(self):
        with pytest.raises(StablabError, match="degenerate expert set"):
            default_lambda_schedule(1.0, 1)

    def test_kl(self):
        assert kl_to_uniform([0.5, 0.5]) == 0.0
        assert kl_to_uniform([1.0, 0.0]) == pytest.approx(math.log(2))
        expected = 0.75 * math.log(1.5) + 0.25 * math.log(0.5)
        assert kl_to_uniform([0.75, 0.25]) == pytest.approx(expected)
        assert kl_to_uniform([0.75, 0.25]) == pytest.approx(0.130812, abs=1e-6)

    def test_rerm_objective_example(self):
        sched = LambdaSchedule(lambda t: 1.0)
        table = np.array([[0.0], [1.0]])  # d x m
        theta = hedge_select(table.sum(axis=1), 1, sched)
        assert sched.eta(1) == 0.5
        best = hedge_rerm_objective(theta, table, sched, 1)
        for a in np.arange(0, 1.0005, 1e-3):
            assert best <= hedge_rerm_objective([a, 1 - a], table, sched, 1) + 1e-12
        assert hedge_rerm_objective([0.5, 0.5], np.zeros((2, 3)), sched, 3) == 0.0

    def test_zero_losses_zero_regret(self):
        p = make_problem("finite_experts", d=2)
        ledger = run_online(Hedge(p), FixedSequence([(0.0, 0.0)] * 20), 20)
        assert ledger.regret == 0.0

    def test_fit_loo_matches_refit(self):
        p = make_problem("finite_experts", d=3)
        learner = Hedge(p)
        pts = tuple(p.sample_points(np.random.default_rng(5), 12))
        fast = learner.fit_loo(pts)
        for i in range(12):
            slow = learner.fit(pts[:i] + pts[i + 1:])
            np.testing.assert_allclose(fast[i].weights, slow.weights, rtol=1e-12)


class TestOnline:
    def test_ftl_prefix(self):
        learner = ftl(make_problem("quadratic_1d"))
        assert learner([0.2, 0.4]) == pytest.approx(0.3)

    def test_ftl_matching_pennies_loses_every_round(self):
        learner = ftl(make_problem("binary_game"))
        ledger = run_online(learner, MatchingPennies(), 50)
        assert np.all(ledger.per_round_loss == 1.0)

    def test_ftrl_loo_kernel_matches_refit(self):
        p = make_problem("absolute_1d")
        learner = ftrl(p, quadratic_schedule(inverse_sqrt(1.0), -1, 1))
        pts = tuple(p.sample_points(np.random.default_rng(6), 30))
        fast = learner.fit_loo(pts)
        slow = [learner.fit(pts[:i] + pts[i + 1:]) for i in range(30)]
        np.testing.assert_allclose(fast, slow, atol=1e-9)

    def test_constant_learner_decomposition(self):
        p = make_problem("absolute_1d")
        pts = p.sample_points(np.random.default_rng(7), 20)
        rep = decompose_regret(ConstantLearner(p, 0.3), pts)
        assert rep.stability_term == 0 and rep.drift_term == 0
        assert rep.aerm_term == pytest.approx(rep.regret)

    def test_ftrl_drift_within_rho(self):
        p = make_problem("absolute_1d")
        sched = quadratic_schedule(inverse_sqrt(1.0), -1, 1)
        rng = np.random.default_rng(8)
        for _ in range(10):
            pts = p.sample_points(rng, 40)
            rep = decompose_regret(FTRL(p, sched), pts)
            assert rep.drift_term <= sched.rho_sequence(39).sum() + 1e-9
