from fractions import Fraction

import numpy as np
import pytest

from stablab.core import FixedSequence, StablabError, run_online
from stablab.counterexamples import (
    GreedyExpertAdversary,
    IntervalRERM,
    IntervalRermState,
    MatchingPennies,
    RandomizedThresholdLearner,
    RoundedPennies,
    ThresholdAdversary,
    ThresholdAdversaryState,
    TrackingAdversary,
    balanced_binary_witness,
    interval_rerm_loo_witness,
    interval_rerm_select,
    matching_pennies_next,
    randomized_threshold_loss,
    rounded_pennies_next,
    run_tracking,
    threshold_adversary_next,
    tie_half_erm,
    tracking_adversary_next,
)
from stablab.learners import FTL, ConstantLearner, Hedge
from stablab.problems import make_problem
from stablab.stability import rate_hedge, uniform_loo_gap


class TestPennies:
    def test_next(self):
        assert matching_pennies_next(0) == 1 and matching_pennies_next(1) == 0
        with pytest.raises(StablabError):
            matching_pennies_next(0.5)
        assert rounded_pennies_next(1.0) == 0
        assert rounded_pennies_next(0.5) == 1
        assert rounded_pennies_next(0.0) == 1

    def test_ftl_m4(self):
        ledger = run_online(FTL(make_problem("binary_game")), MatchingPennies(), 4)
        assert list(ledger.points) == [1, 0, 1, 0]
        assert ledger.average_regret == 0.5

    @pytest.mark.parametrize("m", [1, 2, 3, 10, 99, 1000, 10_000])
    def test_deterministic_lower_bound(self, m):
        p = make_problem("binary_game")
        for learner in (FTL(p), ConstantLearner(p, 0), ConstantLearner(p, 1)):
            ledger = run_online(learner, MatchingPennies(), m)
            assert ledger.average_regret >= 0.5 - 1.0 / m

    @pytest.mark.parametrize("m", [1, 2, 7, 100])
    def test_tie_half_erm(self, m):
        ledger = run_online(tie_half_erm(), RoundedPennies(), m)
        assert ledger.average_regret >= 0.25

    def test_tie_half_erm_is_all_i_stable_but_not_uniform(self):
        # the tie-1/2 rule halves the deletion gap on balanced data
        rep = uniform_loo_gap(tie_half_erm(), [1, 0])
        assert rep.max_gap == 0.5
        rep = uniform_loo_gap(FTL(make_problem("binary_game")), balanced_binary_witness(3))
        assert rep.max_gap == 1.0

    def test_hedge_beats_pennies(self):
        p = make_problem("binary_game")
        for m in (10, 100, 1000):
            ledger = run_online(Hedge(p), RoundedPennies(), m)
            assert ledger.average_regret <= rate_hedge(1.0, 2, m)[2](m)


class TestIntervalRERM:
    def test_select(self):
        assert interval_rerm_select(IntervalRermState(5, 10, 3.0)) == 0.5
        assert interval_rerm_select(IntervalRermState(9, 10, 2.0)) == 1.0
        assert interval_rerm_select(IntervalRermState(1, 10, 2.0)) == 0.0
        assert interval_rerm_select(IntervalRermState(0, 0, 1.0)) == 0.5

    def test_select_matches_grid_argmin(self):
        grid = np.linspace(0, 1, 1001)
        rng = np.random.default_rng(0)
        for _ in range(200):
            m = int(rng.integers(1, 30))
            ones = int(rng.integers(0, m + 1))
            lam = float(rng.uniform(0, 10))
            obj = ones * (1 - grid) + (m - ones) * grid + lam * np.abs(grid - 0.5)
            assert obj[int(round(interval_rerm_select(IntervalRermState(ones, m, lam)) * 1000))] \
                <= obj.min() + 1e-9

    def test_tracking_next(self):
        assert tracking_adversary_next(0.5) == 1
        assert tracking_adversary_next(1.0) == 0
        with pytest.raises(StablabError, match="unreachable state"):
            tracking_adversary_next(0.0)

    def test_kernel_matches_generic_run(self):
        learner = IntervalRERM()
        ledger = run_online(learner, TrackingAdversary(), 500)
        losses, regret = run_tracking(500)
        np.testing.assert_array_equal(ledger.per_round_loss, losses)
        assert ledger.regret == pytest.approx(regret)

    def test_full_run(self):
        losses, regret = run_tracking(100_000)
        assert 0.20 <= regret / 100_000 <= 0.30

    def test_witness(self):
        S = interval_rerm_loo_witness()
        assert uniform_loo_gap(IntervalRERM(), S).max_gap >= 0.5


class TestThreshold:
    def test_first_step(self):
        z, s = threshold_adversary_next(ThresholdAdversaryState.initial(), 1)
        assert z == (Fraction(1, 2), -1)
        assert s.x == Fraction(3, 4) and s.i == 2

    def test_float_cap(self):
        s = ThresholdAdversaryState.initial(exact=False)
        for _ in range(48):
            _, s = threshold_adversary_next(s, 1)
        with pytest.raises(StablabError, match="dyadic underflow"):
            threshold_adversary_next(s, 1)

    @pytest.mark.parametrize("exact,m", [(True, 10), (True, 100), (False, 40)])
    def test_deterministic_learner_loses_every_round(self, exact, m):
        p = make_problem("threshold_class")
        ledger = run_online(FTL(p), ThresholdAdversary(exact), m, track_hindsight=True)
        assert np.all(ledger.per_round_loss == 1.0)
        assert ledger.best_in_hindsight == 0
        assert ledger.average_regret == 1.0

    def test_next_threshold_is_consistent(self):
        # x_{m+1} separates the sequence, as does the canonical ERM
        p = make_problem("threshold_class")
        s = ThresholdAdversaryState.initial()
        pts = []
        for h in (1, -1, -1, 1, 1):
            z, s = threshold_adversary_next(s, h)
            pts.append(z)
        assert sum(p.loss(s.x, z) for z in pts) == 0

    def test_randomized(self):
        p = make_problem("threshold_class")
        for m in (10, 40):
            ledger = run_online(RandomizedThresholdLearner(p), ThresholdAdversary(), m,
                                track_hindsight=True)
            assert np.all(ledger.per_round_loss >= 0.5)
            assert ledger.best_in_hindsight == 0

    def test_expected_loss_formula(self):
        assert randomized_threshold_loss(0.7, -1) == pytest.approx(0.7)
        assert randomized_threshold_loss(0.3, 1) == pytest.approx(0.7)


def test_greedy_adversary_shape():
    p = make_problem("finite_experts", d=3)
    ledger = run_online(Hedge(p), GreedyExpertAdversary(3), 30)
    assert all(sum(z) == 1.0 for z in ledger.points)
