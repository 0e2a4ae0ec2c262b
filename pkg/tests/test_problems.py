from fractions import Fraction

import numpy as np
import pytest

from stablab.core import InvalidDataPoint, StablabError
from stablab.problems import (
    CATALOG,
    IRRATIONAL_SQRT2,
    RATIONAL_ONE,
    Tagged,
    exact_erm,
    gradient,
    make_problem,
)

GRID = np.arange(-1.0, 1.0 + 5e-5, 1e-4)


class TestCatalog:
    def test_unknown_name_lists_catalog(self):
        with pytest.raises(StablabError, match="absolute_1d"):
            make_problem("nope")

    def test_metadata(self):
        q = make_problem("quadratic_1d")
        assert (q.lipschitz, q.strong_convexity, q.regret_bound) == (4.0, 2.0, 4.0)
        assert make_problem("absolute_1d", k=1).regret_bound == 2.0
        assert make_problem("absolute_1d", k=3).regret_bound == 6.0
        assert make_problem("binary_game").regret_bound == 1.0
        rb = make_problem("randomized_binary")
        assert rb.regret_bound == 1.0 and rb.lipschitz == 1.0

    def test_invalid_params(self):
        with pytest.raises(StablabError):
            make_problem("absolute_1d", k=-1)

    def test_every_entry_constructs(self):
        for name in CATALOG:
            assert make_problem(name).name == name


class TestExactERM:
    def test_examples(self):
        assert exact_erm(make_problem("absolute_1d"), [0, 0, 1]) == 0
        assert exact_erm(make_problem("quadratic_1d"), [0.2, 0.4]) == pytest.approx(0.3)
        assert exact_erm(make_problem("binary_game"), [1, 0]) == 0
        assert exact_erm(make_problem("binary_game"), [1, 1, 0]) == 1
        assert exact_erm(make_problem("randomized_binary"), [0, 1]) == 0.0
        assert exact_erm(make_problem("finite_experts", d=2), [(0, 1), (1, 0)]) == 0

    def test_empty_gives_default(self):
        for name in CATALOG:
            p = make_problem(name)
            assert exact_erm(p, []) == p.default_hypothesis

    def test_threshold_scan(self):
        p = make_problem("threshold_class")
        S = [(0.3, -1), (0.7, 1)]
        t = exact_erm(p, S)
        assert 0.3 < t <= 0.7
        assert sum(p.loss(t, z) for z in S) == 0

    def test_threshold_exact_fractions(self):
        p = make_problem("threshold_class")
        S = [(Fraction(1, 2), -1), (Fraction(3, 4), 1), (Fraction(5, 8), -1)]
        t = exact_erm(p, S)
        assert isinstance(t, Fraction)
        assert sum(p.loss(t, z) for z in S) == 0

    @pytest.mark.parametrize("name", ["quadratic_1d", "absolute_1d"])
    def test_matches_grid_search(self, name):
        p = make_problem(name)
        rng = np.random.default_rng(0)
        for _ in range(1000):
            pts = np.array(p.sample_points(rng, int(rng.integers(1, 8))))
            h = exact_erm(p, list(pts))
            risk = p._vec_loss(h, pts).mean()
            grid_risk = p._vec_loss(GRID[:, None], pts[None, :]).mean(axis=1).min()
            assert risk <= grid_risk + 1e-8

    def test_randomized_binary_matches_grid(self):
        p = make_problem("randomized_binary")
        rng = np.random.default_rng(1)
        grid = np.linspace(0, 1, 10001)
        for _ in range(200):
            pts = np.array(p.sample_points(rng, int(rng.integers(1, 9))))
            h = exact_erm(p, list(pts))
            grid_risk = p._vec_loss(grid[:, None], pts[None, :]).mean(axis=1).min()
            assert p._vec_loss(h, pts).mean() <= grid_risk + 1e-8

    def test_erm_loo_consistent_with_erm(self):
        rng = np.random.default_rng(2)
        for name in ("quadratic_1d", "absolute_1d", "binary_game", "randomized_binary"):
            p = make_problem(name)
            pts = tuple(p.sample_points(rng, 9))
            loo = p.erm_loo(pts)
            for i in range(9):
                assert loo[i] == pytest.approx(p.erm(pts[:i] + pts[i + 1:]), abs=1e-12)


class TestGradient:
    def test_examples(self):
        assert gradient(make_problem("quadratic_1d"), 0.0, 1.0) == -2.0
        assert gradient(make_problem("absolute_1d"), 0.4, 0.4) == 0.0
        assert gradient(make_problem("randomized_binary"), 0.3, 1) == -1.0

    def test_no_gradient(self):
        with pytest.raises(StablabError, match="no gradient"):
            gradient(make_problem("binary_game"), 0, 1)

    @pytest.mark.parametrize("name", ["quadratic_1d", "randomized_binary", "absolute_1d"])
    def test_central_differences(self, name):
        p = make_problem(name)
        rng = np.random.default_rng(4)
        d = 1e-6
        for h, z in zip(p.sample_hypotheses(rng, 1000), p.sample_points(rng, 1000)):
            if abs(h - z) < 1e-3 or not (p.lo + d <= h <= p.hi - d):
                continue  # kink of |h - z| or domain edge
            fd = (p.loss(h + d, z) - p.loss(h - d, z)) / (2 * d)
            assert abs(fd - gradient(p, h, z)) <= 1e-5


class TestMetadata:
    @pytest.mark.parametrize("name", ["quadratic_1d", "absolute_1d", "randomized_binary"])
    def test_lipschitz_and_regret_bound(self, name):
        p = make_problem(name)
        rng = np.random.default_rng(5)
        h1 = np.array(p.sample_hypotheses(rng, 5000))
        h2 = np.array(p.sample_hypotheses(rng, 5000))
        z = np.array(p.sample_points(rng, 5000), dtype=float)
        gap = np.abs(p._vec_loss(h1, z) - p._vec_loss(h2, z))
        assert np.all(gap <= p.lipschitz * np.abs(h1 - h2) + 1e-12)
        assert gap.max() <= p.regret_bound

    def test_validate(self):
        with pytest.raises(InvalidDataPoint):
            make_problem("binary_game").validate(2)
        with pytest.raises(InvalidDataPoint):
            make_problem("threshold_class").validate((0.5, 0))
        with pytest.raises(InvalidDataPoint):
            make_problem("finite_experts", d=2).validate((0.1,))
        with pytest.raises(InvalidDataPoint):
            make_problem("rationality_game").validate(1.0)


class TestRationality:
    def test_tag_loss(self):
        p = make_problem("rationality_game")
        assert p.loss(RATIONAL_ONE, Tagged(0.5, True)) == 0.0
        assert p.loss(RATIONAL_ONE, Tagged(3.14, False)) == 1.0
        assert p.loss(IRRATIONAL_SQRT2, Tagged(3.14, False)) == 0.0

    def test_erm_majority(self):
        p = make_problem("rationality_game")
        assert p.erm([Tagged(1.0, False), Tagged(2.0, False), RATIONAL_ONE]) == IRRATIONAL_SQRT2
        assert p.erm([Tagged(1.0, False), RATIONAL_ONE]) == RATIONAL_ONE


def test_prefix_hindsight_matches_erm():
    rng = np.random.default_rng(6)
    for name in CATALOG:
        p = make_problem(name)
        pts = tuple(p.sample_points(rng, 12))
        curve = p.prefix_hindsight(pts)
        for t in range(12):
            prefix = pts[: t + 1]
            h = p.erm(prefix)
            assert curve[t] == pytest.approx(sum(p.loss(h, z) for z in prefix), abs=1e-9)
