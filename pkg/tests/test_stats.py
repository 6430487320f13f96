"""t statistics, analytic p-values, effect sizes.

Reference p-values frozen from standard t tables: the two-sided 5% critical
value at 19 degrees of freedom is 2.093.
"""

import math

import pytest

from coadapt.errors import ConfigError
from coadapt.stats import (
    cohens_d,
    regularized_incomplete_beta,
    t_test_one_sample,
    t_two_sided_p,
)


class TestIncompleteBeta:
    def test_bounds(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_symmetry(self):
        # I_x(a, b) = 1 - I_{1-x}(b, a)
        for a, b, x in ((2.5, 0.5, 0.3), (9.5, 0.5, 0.8), (1.0, 1.0, 0.42)):
            assert regularized_incomplete_beta(a, b, x) == pytest.approx(
                1.0 - regularized_incomplete_beta(b, a, 1.0 - x), abs=1e-12)

    def test_uniform_case(self):
        # I_x(1, 1) = x
        for x in (0.1, 0.5, 0.9):
            assert regularized_incomplete_beta(1.0, 1.0, x) == pytest.approx(x, abs=1e-12)


class TestPValues:
    def test_critical_value_df19(self):
        assert t_two_sided_p(2.093, 19) == pytest.approx(0.05, abs=0.001)

    def test_reference_values(self):
        # frozen from standard tables
        assert t_two_sided_p(2.086, 20) == pytest.approx(0.05, abs=0.001)
        assert t_two_sided_p(1.729, 19) == pytest.approx(0.10, abs=0.001)
        assert t_two_sided_p(2.861, 19) == pytest.approx(0.01, abs=0.001)

    def test_zero_t(self):
        assert t_two_sided_p(0.0, 19) == 1.0

    def test_infinite_t(self):
        assert t_two_sided_p(math.inf, 19) == 0.0


class TestOneSample:
    def test_all_equal_to_hypothesis(self):
        r = t_test_one_sample([0.3] * 20, 0.3)
        assert r.t == 0.0 and r.p == 1.0 and r.d == 0.0
        assert r.df == 19

    def test_effect_size_definition(self):
        # mean exactly one sd above the hypothesis gives d = 1
        values = [0.0, 2.0, 4.0]  # mean 2, sd 2
        r = t_test_one_sample(values, 0.0)
        assert r.d == pytest.approx(1.0)
        assert cohens_d(values, 0.0) == pytest.approx(1.0)

    def test_zero_variance_off_mean_is_infinite(self):
        r = t_test_one_sample([0.5] * 20, 0.3)
        assert r.t == math.inf and r.p == 0.0 and r.d == math.inf
        r = t_test_one_sample([0.1] * 20, 0.3)
        assert r.t == -math.inf and r.d == -math.inf

    def test_one_sided_halves_p(self):
        values = [0.1, 0.3, 0.2, 0.25, 0.15, 0.32]
        two = t_test_one_sample(values, 0.18, sided="two")
        one = t_test_one_sample(values, 0.18, sided="one")
        assert one.p == pytest.approx(two.p / 2)

    def test_small_sample_rejected(self):
        with pytest.raises(ConfigError):
            t_test_one_sample([1.0], 0.0)

    def test_matches_textbook_example(self):
        # n = 20 values with known t: mean 0.05 above mu, sd such that
        # t = 0.05 / (sd / sqrt(20))
        values = [0.05 * i for i in range(20)]
        mu = sum(values) / 20
        sd = math.sqrt(sum((v - mu) ** 2 for v in values) / 19)
        r = t_test_one_sample(values, mu - 0.1)
        assert r.t == pytest.approx(0.1 / (sd / math.sqrt(20)), rel=1e-12)
