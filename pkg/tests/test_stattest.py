import math

import numpy as np
import pytest

from adtomo.special import regularized_gamma_q, regularized_incomplete_beta
from adtomo.stattest import (
    DegenerateTableError,
    StatConfig,
    StatError,
    chi2_sf,
    chi_square_independence,
    collapse_low_mass_columns,
    mean_std,
    student_t_sf,
    welch_t_test,
)

import oracles


class TestSpecialFunctions:
    def test_beta_edge_values(self):
        assert regularized_incomplete_beta(2.0, 3.0, 0.0) == 0.0
        assert regularized_incomplete_beta(2.0, 3.0, 1.0) == 1.0

    def test_beta_symmetry(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            a, b = rng.uniform(0.5, 30, size=2)
            x = rng.uniform(0.01, 0.99)
            lhs = regularized_incomplete_beta(a, b, x)
            rhs = 1.0 - regularized_incomplete_beta(b, a, 1.0 - x)
            assert lhs == pytest.approx(rhs, abs=1e-12)

    def test_beta_uniform_case(self):
        # I_x(1, 1) is the uniform CDF.
        for x in (0.1, 0.25, 0.5, 0.9):
            assert regularized_incomplete_beta(1.0, 1.0, x) == pytest.approx(x, abs=1e-13)

    def test_gamma_exponential_case(self):
        # Q(1, x) = exp(-x).
        for x in (0.1, 1.0, 5.0, 40.0):
            assert regularized_gamma_q(1.0, x) == pytest.approx(math.exp(-x), rel=1e-12)

    def test_gamma_chi2_even_df(self):
        # For df=4, sf(x) = (1 + x/2) exp(-x/2).
        for x in (0.5, 3.0, 10.0):
            expect = (1 + x / 2) * math.exp(-x / 2)
            assert chi2_sf(x, 4) == pytest.approx(expect, rel=1e-12)


class TestWelch:
    def test_identical_samples(self):
        r = welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
        assert r.statistic == 0.0
        assert r.p_value == 1.0

    def test_separated_samples(self):
        r = welch_t_test([1, 2, 3, 4], [11, 12, 13, 14])
        assert r.p_value < 0.001

    def test_zero_variance_unequal_means(self):
        r = welch_t_test([0.0, 0.0, 0.0], [5.0, 5.0, 5.0])
        assert r.degenerate
        assert r.p_value == 0.0

    def test_zero_variance_equal_means(self):
        r = welch_t_test([2.0, 2.0], [2.0, 2.0, 2.0])
        assert r.degenerate
        assert r.statistic == 0.0
        assert r.p_value == 1.0

    def test_sample_size_guard(self):
        with pytest.raises(StatError):
            welch_t_test([1.0], [1.0, 2.0])

    def test_swap_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.normal(0, 1, rng.integers(2, 12)).tolist()
            b = rng.normal(0.5, 2, rng.integers(2, 12)).tolist()
            r1 = welch_t_test(a, b)
            r2 = welch_t_test(b, a)
            assert r1.p_value == pytest.approx(r2.p_value, abs=1e-15)
            assert r1.statistic == pytest.approx(-r2.statistic, abs=1e-15)

    def test_p_monotone_in_separation(self):
        # Same shapes, growing mean gap: p must fall monotonically.
        base = np.array([0.1, -0.2, 0.4, 0.0, -0.3])
        other = np.array([0.2, -0.1, 0.3, -0.2, 0.1])
        ps = []
        for delta in np.linspace(0.0, 3.0, 13):
            ps.append(welch_t_test(base, other + delta).p_value)
        assert all(ps[i] >= ps[i + 1] for i in range(3, len(ps) - 1))
        assert ps[-1] < ps[0]

    def test_against_quadrature_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(30):
            a = rng.normal(0, 1, rng.integers(2, 20)).tolist()
            b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 3),
                           rng.integers(2, 20)).tolist()
            r = welch_t_test(a, b)
            t, df = oracles.welch_statistic(a, b)
            assert r.statistic == pytest.approx(t, abs=1e-9)
            assert r.df == pytest.approx(df, abs=1e-9)
            assert r.p_value == pytest.approx(oracles.t_two_sided_p(t, df), abs=1e-9)


class TestChiSquare:
    def test_identical_rows(self):
        r = chi_square_independence([[10, 10], [10, 10]])
        assert r.statistic == 0.0
        assert r.p_value == 1.0

    def test_hand_computed_example(self):
        # E = 30 in every cell; statistic = 4 * 400/30 = 53.333...
        r = chi_square_independence([[50, 10], [10, 50]])
        assert r.statistic == pytest.approx(53.33, abs=0.01)
        assert r.df == 1.0
        assert r.p_value < 1e-10

    def test_proportional_rows_exact_zero(self):
        r = chi_square_independence([[5, 10, 15], [15, 30, 45]])
        assert r.statistic == 0.0
        assert r.p_value == 1.0

    def test_column_order_invariance(self):
        rng = np.random.default_rng(3)
        table = rng.integers(0, 40, size=(2, 8))
        r1 = chi_square_independence(table)
        perm = rng.permutation(8)
        r2 = chi_square_independence(table[:, perm])
        assert r1.statistic == pytest.approx(r2.statistic, abs=1e-9)
        assert r1.df == r2.df

    def test_collapsing_folds_small_columns(self):
        table = np.array([[10.0, 1.0, 1.0, 1.0], [10.0, 1.0, 0.0, 1.0]])
        collapsed = collapse_low_mass_columns(table, 5.0)
        assert collapsed.shape == (2, 2)
        assert collapsed[:, 1].tolist() == [3.0, 2.0]  # residual keeps the mass

    def test_zero_total_columns_vanish(self):
        table = np.array([[10.0, 0.0, 8.0], [9.0, 0.0, 11.0]])
        collapsed = collapse_low_mass_columns(table, 5.0)
        assert collapsed.shape == (2, 2)

    def test_all_zero_table_raises(self):
        with pytest.raises(DegenerateTableError):
            chi_square_independence([[0, 0], [0, 0]])

    def test_zero_row_is_trivially_independent(self):
        # A row with no mass is proportional to anything: statistic 0, p 1.
        r = chi_square_independence([[0, 0], [10, 10]])
        assert r.statistic == 0.0
        assert r.p_value == 1.0

    def test_insufficient_columns_raises(self):
        with pytest.raises(DegenerateTableError):
            chi_square_independence([[1, 1, 1], [1, 0, 0]], StatConfig(min_expected=5))

    def test_against_oracle_with_collapsing(self):
        rng = np.random.default_rng(4)
        for _ in range(30):
            v = int(rng.integers(3, 15))
            table = rng.integers(0, 25, size=(2, v)).astype(float)
            cfg = StatConfig(min_expected=5)
            try:
                r = chi_square_independence(table, cfg)
            except DegenerateTableError:
                continue
            stat, df = oracles.chi2_statistic_collapsed(table.tolist(), 5)
            assert r.statistic == pytest.approx(stat, abs=1e-9)
            assert r.df == df
            assert r.p_value == pytest.approx(oracles.chi2_sf(stat, df), abs=1e-9)

    def test_type_i_rate_calibrated(self):
        # Control-vs-control resampling: flag rate must stay near alpha.
        rng = np.random.default_rng(5)
        p = np.full(30, 1 / 30)
        flagged = 0
        n_tables = 1000
        for _ in range(n_tables):
            a = rng.multinomial(900, p)
            b = rng.multinomial(120, p)
            r = chi_square_independence(np.vstack([a, b]).astype(float))
            flagged += r.p_value < 0.05
        assert flagged / n_tables <= 0.05 + 0.03


class TestMeanStd:
    def test_singleton(self):
        assert mean_std([5.0]) == (5.0, 0.0)

    def test_hand_computed(self):
        m, s = mean_std([1.0, 2.0, 3.0])
        assert m == pytest.approx(2.0)
        assert s == pytest.approx(math.sqrt(2.0 / 3.0), abs=1e-4)

    def test_constant(self):
        assert mean_std([4.0] * 10)[1] == 0.0

    def test_empty_raises(self):
        with pytest.raises(StatError):
            mean_std([])


def test_t_sf_basic_values():
    # df=1 is a Cauchy: sf(1) = 1/4.
    assert student_t_sf(1.0, 1.0) == pytest.approx(0.25, abs=1e-12)
    assert student_t_sf(0.0, 7.0) == pytest.approx(0.5, abs=1e-12)
