"""Oracle checks against independent exact references.

Moment and majorization references come from exact rational enumeration
of the defining sums (fractions.Fraction, run separately and frozen
here); interval endpoints are cross-checked through the binomial CDF.
"""

import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from scipy.stats import binom

from sparsejl import (
    BudgetError,
    ConstraintViolation,
    DomainError,
    MajorizationSpec,
    MomentSpec,
    TrialReport,
    build_matrix,
    apply,
    check_majorization,
    check_multinomial_inequality,
    check_psi_envelope,
    chernoff_residual_grid,
    clopper_pearson,
    estimate_failure_prob,
    exact_moment_Z,
    moment_bound_rhs,
    squared_norm_samples,
)
from sparsejl import streams


def rational_moment(coeffs, n, p, q):
    """Independent oracle: E[Z^q] from the defining pair sum, exact rationals."""
    total = Fraction(0)
    for eta in product((0, 1), repeat=n):
        w_eta = p ** sum(eta) * (1 - p) ** (n - sum(eta))
        for r in product((-1, 1), repeat=n):
            z = Fraction(0)
            for i in range(n):
                for j in range(n):
                    if i != j and eta[i] and eta[j]:
                        z += coeffs[i][j] * r[i] * r[j]
            total += w_eta * Fraction(1, 2**n) * z**q
    return total


class TestExactMomentZ:
    def test_two_coordinate_second_moment(self):
        """x = (1/sqrt2, 1/sqrt2) leaves the single cross term; E[Z^2] = p^2."""
        spec = MomentSpec((1 / math.sqrt(2), 1 / math.sqrt(2)), 1 / 30, 2)
        assert exact_moment_Z(spec) == pytest.approx((1 / 30) ** 2, rel=1e-13)

    def test_against_rational_oracle_n3(self):
        """Frozen rational enumerations: E[Z^4] = 8/10125, E[Z^3] = 2/30375.

        Odd moments vanish only when no three indices can pair up into a
        triangle of cross terms; at n = 3 the triangle contributes
        48 p^3 / 27 to E[Z^3].
        """
        x = (1 / math.sqrt(3),) * 3
        assert exact_moment_Z(MomentSpec(x, 1 / 30, 4)) == pytest.approx(8 / 10125, rel=1e-12)
        assert exact_moment_Z(MomentSpec(x, 1 / 30, 3)) == pytest.approx(2 / 30375, rel=1e-12)
        coeffs = [[Fraction(1, 3) if i != j else 0 for j in range(3)] for i in range(3)]
        assert rational_moment(coeffs, 3, Fraction(1, 30), 3) == Fraction(2, 30375)

    def test_odd_moments_vanish_for_two_coordinates(self):
        x = (1 / math.sqrt(2), 1 / math.sqrt(2))
        for q in (1, 3, 5):
            assert exact_moment_Z(MomentSpec(x, 0.1, q)) == pytest.approx(0.0, abs=1e-18)

    def test_second_moment_closed_form_sweep(self):
        """E[Z^2] = 2 p^2 sum_{i != j} x_i^2 x_j^2 for n <= 6."""
        rng = np.random.default_rng(8)
        for n in range(2, 7):
            x = rng.standard_normal(n)
            x /= math.sqrt(float(x @ x))
            for p in (1 / 30, 0.1, 0.5):
                sq = x * x
                cross = float(np.sum(sq) ** 2 - np.sum(sq * sq))
                expected = 2.0 * p * p * cross
                got = exact_moment_Z(MomentSpec(tuple(x), p, 2))
                assert got == pytest.approx(expected, rel=1e-12)

    def test_validation(self):
        unit14 = (1 / math.sqrt(14),) * 14
        MomentSpec(unit14, 0.1, 2)  # at the budget edge
        with pytest.raises(BudgetError, match="budget"):
            MomentSpec((1 / math.sqrt(15),) * 15, 0.1, 2)
        with pytest.raises(ConstraintViolation, match="unit"):
            MomentSpec((1.0, 1.0), 0.1, 2)
        with pytest.raises(DomainError):
            MomentSpec((1.0,), 1.5, 2)
        with pytest.raises(DomainError):
            MomentSpec((1.0,), 0.1, 0)


class TestMomentBoundRhs:
    def test_single_term(self):
        assert moment_bound_rhs(0.1, 2) == pytest.approx(16 * 0.01, rel=1e-15)

    def test_two_terms(self):
        p = 1 / 30
        assert moment_bound_rhs(p, 3) == pytest.approx(8 * (8 * p**2 + 27 * p**3), rel=1e-14)

    def test_order_starts_at_two(self):
        with pytest.raises(DomainError):
            moment_bound_rhs(0.1, 1)

    def test_dominates_exact_moments(self):
        rng = np.random.default_rng(9)
        for n in (2, 4, 6, 8):
            for _ in range(3):
                x = rng.standard_normal(n)
                x /= math.sqrt(float(x @ x))
                for p in (1 / 30, 0.1):
                    for q in range(2, 7):
                        exact = exact_moment_Z(MomentSpec(tuple(x), p, q))
                        assert exact <= moment_bound_rhs(p, q) * (1 + 1e-12)


class TestMultinomialInequality:
    def test_hand_values(self):
        """binom(4;2,2) = 6 <= 2^2 binom(2;1,1)^2 = 16; degenerate 1 <= 8."""
        report = check_multinomial_inequality(3)
        assert report.ok
        assert math.factorial(4) // (math.factorial(2) ** 2) == 6
        assert 2**2 * (math.factorial(2) // math.factorial(1) ** 2) ** 2 == 16

    def test_exhaustive_until_twelve(self):
        report = check_multinomial_inequality(12)
        assert report.ok
        assert report.total_checked == sum(2 ** (q - 1) for q in range(1, 13))
        assert report.checked_per_q[12] == 2**11
        assert report.violations == []
        assert report.central_binomial_ok

    def test_budget(self):
        with pytest.raises(BudgetError):
            check_multinomial_inequality(21)
        with pytest.raises(DomainError):
            check_multinomial_inequality(0)


class TestMajorization:
    def test_frozen_rational_values(self):
        """n=2, m=2, s=1, x=(1/sqrt2,1/sqrt2): q=2 gives (1/2, 1/2); q=4
        gives (1/2, 7/8).  Values from exact rational enumeration."""
        x = (1 / math.sqrt(2), 1 / math.sqrt(2))
        lhs, rhs = check_majorization(MajorizationSpec(2, 2, 1, 2, x))
        assert lhs == pytest.approx(0.5, rel=1e-12)
        assert rhs == pytest.approx(0.5, rel=1e-12)
        lhs, rhs = check_majorization(MajorizationSpec(2, 2, 1, 4, x))
        assert lhs == pytest.approx(0.5, rel=1e-12)
        assert rhs == pytest.approx(7 / 8, rel=1e-12)

    def test_single_coordinate_kills_cross_terms(self):
        """x = e_1 leaves no off-diagonal mass, so both sides vanish."""
        lhs, rhs = check_majorization(MajorizationSpec(3, 3, 2, 2, (1.0, 0.0, 0.0)))
        assert lhs == pytest.approx(0.0, abs=1e-15)
        assert rhs == pytest.approx(0.0, abs=1e-15)

    def test_saturated_sparsity_deterministic_selection(self):
        """s = m selects every row; the left side is a pure sign average,
        reproduced here by direct enumeration."""
        x = (1 / math.sqrt(2), 1 / math.sqrt(2))
        m, s, q = 2, 2, 2
        lhs, rhs = check_majorization(MajorizationSpec(2, m, s, q, x))
        direct = []
        for signs in product((-1, 1), repeat=m * 2):
            val = 0.0
            for k in range(m):
                r1, r2 = signs[2 * k], signs[2 * k + 1]
                s_k = x[0] * r1 + x[1] * r2
                val += s_k * s_k - 1.0
            direct.append((val / s) ** q)
        assert lhs == pytest.approx(math.fsum(direct) / len(direct), rel=1e-12)
        assert 0.0 <= lhs <= rhs + 1e-12

    def test_ordering_sweep(self):
        rng = np.random.default_rng(12)
        for n in (1, 2, 3):
            x = rng.standard_normal(n)
            x /= math.sqrt(float(x @ x))
            for m in (2, 3):
                for s in range(1, m + 1):
                    lhs, rhs = check_majorization(MajorizationSpec(n, m, s, 2, tuple(x)))
                    assert -1e-12 <= lhs <= rhs + 1e-12

    def test_budget(self):
        x = (0.5, 0.5, 0.5, 0.5)
        with pytest.raises(BudgetError):
            MajorizationSpec(4, 5, 2, 2, x)

    def test_validation(self):
        with pytest.raises(DomainError):
            MajorizationSpec(2, 2, 1, 3, (1.0, 0.0))  # odd q
        with pytest.raises(DomainError):
            MajorizationSpec(2, 6, 1, 2, (1.0, 0.0))  # m too large


class TestPsiEnvelope:
    def test_default_scale_has_no_violations(self):
        for p in (1 / 100, 1 / 30):
            report = check_psi_envelope(p, grid_points=2000)
            assert report.ok
            assert report.max_violation < 0.0

    def test_small_scale_fails(self):
        report = check_psi_envelope(1 / 30, scale=4.0, grid_points=500)
        assert not report.ok
        assert report.violation_count == 500

    def test_grid_covers_closed_endpoint(self):
        report = check_psi_envelope(1 / 30, grid_points=100)
        assert report.grid_points == 100
        assert report.worst_t <= math.log(15.0) / 2.0


class TestChernoffGrid:
    def test_hundred_point_lattice(self):
        points, residual = chernoff_residual_grid()
        assert points == 100
        assert residual <= 1e-12


class TestClopperPearson:
    def test_endpoint_conventions(self):
        low, high = clopper_pearson(0, 100)
        assert low == 0.0 and 0 < high < 1
        assert binom.cdf(0, 100, high) == pytest.approx(0.005, rel=1e-9)
        low, high = clopper_pearson(100, 100)
        assert high == 1.0 and 0 < low < 1
        assert binom.sf(99, 100, low) == pytest.approx(0.005, rel=1e-9)

    def test_inverts_binomial_cdf(self):
        """Endpoint p solves the defining binomial tail equations."""
        for k, n in [(3, 50), (17, 200), (1, 10)]:
            low, high = clopper_pearson(k, n, confidence=0.99)
            assert binom.sf(k - 1, n, low) == pytest.approx(0.005, rel=1e-9)
            assert binom.cdf(k, n, high) == pytest.approx(0.005, rel=1e-9)

    def test_validation(self):
        with pytest.raises(DomainError):
            clopper_pearson(5, 4)


class TestMonteCarlo:
    def test_samples_match_build_apply_bitwise(self):
        x = np.full(8, 1 / math.sqrt(8.0))
        samples = squared_norm_samples(8, 16, 3, x, trials=6, seed=99)
        for t in range(6):
            matrix = build_matrix(8, 16, 3, streams.substream(99, t))
            y = apply(matrix, x)
            assert samples[t] == float((y * y).sum())

    def test_single_coordinate_never_fails(self):
        """n = 1 columns have unit norm, so |Ax|^2 = 1 up to roundoff."""
        report = estimate_failure_prob(1, 7, 3, np.array([1.0]), 0.1, 500, seed=4)
        assert report.failures == 0
        assert report.p_hat == 0.0
        assert report.ci_low == 0.0

    def test_enumerable_instance_matches_exact_probability(self):
        """n=2, m=2, s=1, uniform x: |Ax|^2 is 1 +- 1 when both columns pick
        the same row (probability 1/2) and exactly 1 otherwise, so the
        failure rate is 1/2 for eps < 1 and 0 for eps >= 1 (strict count)."""
        x = np.full(2, 1 / math.sqrt(2.0))
        report = estimate_failure_prob(2, 2, 1, x, eps=1.0, trials=2000, seed=6)
        assert report.failures == 0
        report = estimate_failure_prob(2, 2, 1, x, eps=0.5, trials=2000, seed=6)
        exact = 0.5
        se = math.sqrt(exact * (1 - exact) / report.trials)
        assert abs(report.p_hat - exact) <= 4.0 * se
        assert report.ci_low <= exact <= report.ci_high

    def test_reproducible(self):
        x = np.full(4, 0.5)
        a = estimate_failure_prob(4, 8, 2, x, 0.3, 300, seed=123)
        b = estimate_failure_prob(4, 8, 2, x, 0.3, 300, seed=123)
        assert a == b
        assert isinstance(a, TrialReport)
        assert a.ci_low <= a.p_hat <= a.ci_high

    def test_chunking_does_not_change_results(self, monkeypatch):
        from sparsejl import transform as tr

        x = np.full(6, 1 / math.sqrt(6.0))
        full = squared_norm_samples(6, 12, 2, x, trials=40, seed=5)
        monkeypatch.setattr(tr, "_CHUNK_ENTRIES", 64)
        chunked = squared_norm_samples(6, 12, 2, x, trials=40, seed=5)
        assert np.array_equal(full, chunked)

    def test_validation(self):
        x = np.full(4, 0.5)
        with pytest.raises(DomainError):
            squared_norm_samples(4, 8, 2, x, trials=0, seed=1)
        with pytest.raises(ConstraintViolation):
            squared_norm_samples(4, 8, 2, np.ones(4), trials=3, seed=1)
        with pytest.raises(DomainError):
            estimate_failure_prob(4, 8, 2, x, eps=0.0, trials=3, seed=1)
