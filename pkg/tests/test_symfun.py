"""Partitions, Schur/zonal polynomials and the matrix-argument series."""

import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from laguerre.errors import DivergenceError, NonConvergedError
from laguerre.symfun import (Partition, enumerate_partitions, gen_pochhammer,
                             hyp_matrix_series, hyp_matrix_series_two, schur,
                             schur_bialternant, schur_dimension,
                             schur_jacobi_trudi, zonal)


def brute_partitions(k, m):
    """Oracle: filter all non-increasing tuples with parts <= k."""
    if k == 0:
        return [()]
    out = set()
    for n_parts in range(1, m + 1):
        for combo in itertools.product(range(1, k + 1), repeat=n_parts):
            if sum(combo) == k and all(combo[i] >= combo[i + 1]
                                       for i in range(n_parts - 1)):
                out.add(combo)
    return sorted(out, reverse=True)


class TestPartitions:
    def test_weight_zero(self):
        assert [p.parts for p in enumerate_partitions(0, 3)] == [()]

    def test_k3_m2(self):
        assert [p.parts for p in enumerate_partitions(3, 2)] == [(3,), (2, 1)]

    def test_k4_m4_count_is_p4(self):
        assert len(enumerate_partitions(4, 4)) == 5

    @pytest.mark.parametrize("k,m", [(5, 2), (6, 3), (7, 4), (8, 1)])
    def test_against_brute_force(self, k, m):
        got = [p.parts for p in enumerate_partitions(k, m)]
        assert got == brute_partitions(k, m)

    @given(st.integers(0, 12), st.integers(1, 5))
    @settings(max_examples=60, deadline=None)
    def test_properties(self, k, m):
        parts_list = enumerate_partitions(k, m)
        seen = set()
        for p in parts_list:
            assert p.weight == k
            assert p.length <= m
            assert all(p.parts[i] >= p.parts[i + 1] for i in range(len(p.parts) - 1))
            seen.add(p.parts)
        assert len(seen) == len(parts_list)

    def test_partition_validation(self):
        with pytest.raises(ValueError):
            Partition((1, 2))
        with pytest.raises(ValueError):
            Partition((2, -1))
        assert Partition((3, 1, 0, 0)).parts == (3, 1)

    def test_conjugate(self):
        assert Partition((3, 1)).conjugate().parts == (2, 1, 1)
        assert Partition(()).conjugate().parts == ()


class TestGenPochhammer:
    def test_empty_partition(self):
        assert gen_pochhammer(3.7, (), 2) == 1.0

    def test_rising_factorial_m1(self):
        # (2)_3 = 2*3*4
        assert gen_pochhammer(2.0, (3,), 1) == pytest.approx(24.0, rel=1e-14)

    def test_gamma_ratio_m2(self):
        # Gamma(5)/Gamma(3) * Gamma(3)/Gamma(2) = 12 * 2
        assert gen_pochhammer(3.0, (2, 1), 2) == pytest.approx(24.0, rel=1e-14)

    @given(st.floats(0.3, 5.0), st.integers(0, 6), st.integers(0, 4))
    @settings(max_examples=50, deadline=None)
    def test_matches_gamma_quotients(self, a, k1, k2extra):
        k2 = min(k1, k2extra)
        tau = tuple(p for p in (k1, k2) if p > 0)
        val = gen_pochhammer(a, tau, 2)
        ref = (math.gamma(a + k1) / math.gamma(a)
               * math.gamma(a - 1 + k2) / math.gamma(a - 1))
        assert val == pytest.approx(ref, rel=1e-11)


class TestSchur:
    def test_e1(self):
        x = np.array([0.7, 1.3, 2.1])
        assert schur((1,), x) == pytest.approx(x.sum(), rel=1e-13)

    def test_hand_determinant(self):
        # x1 x2 (x1 + x2) at (2, 1)
        assert schur((2, 1), [2.0, 1.0]) == pytest.approx(6.0, rel=1e-13)

    def test_repeated_eigenvalues(self):
        # s_(2)(x1,x2) = x1^2 + x1 x2 + x2^2 at (1,1)
        assert schur((2,), [1.0, 1.0]) == pytest.approx(3.0, rel=1e-13)

    def test_routes_agree(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            m = rng.integers(2, 5)
            x = rng.uniform(0.2, 2.0, m)
            x += np.arange(m) * 0.05  # keep distinct
            for k in range(7):
                for tau in enumerate_partitions(k, m):
                    a = schur_bialternant(tau, x)
                    b = schur_jacobi_trudi(tau, x)
                    assert b == pytest.approx(a, rel=1e-10, abs=1e-12)

    def test_permutation_invariance(self):
        rng = np.random.default_rng(11)
        x = rng.uniform(0.3, 2.5, 3)
        base = schur((3, 1), x)
        for _ in range(20):
            perm = rng.permutation(3)
            assert schur((3, 1), x[perm]) == pytest.approx(base, rel=1e-12)

    def test_homogeneity(self):
        rng = np.random.default_rng(12)
        x = rng.uniform(0.3, 2.0, 3)
        for _ in range(10):
            c = rng.uniform(0.2, 3.0)
            assert schur((2, 1), c * x) == pytest.approx(
                c ** 3 * schur((2, 1), x), rel=1e-12)

    def test_monomial_oracle(self):
        # s_(2,1)(x) = sum over semistandard tableaux; brute force over
        # the monomial expansion m_(2,1) + 2 m_(1,1,1) for 3 variables
        x = np.array([0.9, 0.5, 0.3])
        msym21 = sum(x[i] ** 2 * x[j] for i in range(3) for j in range(3) if i != j)
        msym111 = x[0] * x[1] * x[2]
        assert schur((2, 1), x) == pytest.approx(msym21 + 2 * msym111, rel=1e-12)


class TestSchurDimension:
    def test_empty(self):
        assert schur_dimension((), 4) == 1.0

    def test_matches_all_ones(self):
        for m in (1, 2, 3, 4):
            for k in range(7):
                for tau in enumerate_partitions(k, m):
                    d = schur_dimension(tau, m)
                    ref = schur_jacobi_trudi(tau, np.ones(m))
                    assert d == pytest.approx(ref, rel=1e-12)

    def test_two_one(self):
        assert schur_dimension((2, 1), 2) == pytest.approx(2.0)
        assert schur_dimension((2,), 2) == pytest.approx(3.0)


class TestZonal:
    def test_trace_for_k1(self):
        x = np.array([0.4, 1.1, 2.0])
        assert zonal((1,), x) == pytest.approx(x.sum(), rel=1e-13)

    def test_empty_partition(self):
        assert zonal((), np.array([0.4, 1.1])) == 1.0

    def test_weight2_sum(self):
        x = np.array([2.0, 1.0])
        total = zonal((2,), x) + zonal((1, 1), x)
        assert total == pytest.approx(9.0, rel=1e-12)

    def test_trace_power_completeness(self):
        rng = np.random.default_rng(21)
        for m in (1, 2, 3):
            for _ in range(20):
                x = rng.uniform(0.0, 2.0, m)
                for k in range(7):
                    total = math.fsum(zonal(t, x) for t in enumerate_partitions(k, m))
                    assert total == pytest.approx(np.sum(x) ** k, rel=1e-10)


class TestHypMatrixSeries:
    def test_0f0_is_exp_trace(self):
        x = np.array([0.3, 0.2, 0.6])
        res = hyp_matrix_series((), (), x)
        assert res.converged
        assert res.value == pytest.approx(np.exp(x.sum()), rel=1e-12)

    def test_0f1_at_zero(self):
        res = hyp_matrix_series((), (2.5,), np.zeros(2))
        assert res.value == 1.0

    def test_m1_collapse_to_scalar(self):
        from laguerre.specfun import hyp_scalar
        res = hyp_matrix_series((), (2.0,), np.array([0.7]))
        assert res.value == pytest.approx(hyp_scalar(((), (2.0,)), 0.7), rel=1e-12)

    def test_divergence_guard(self):
        with pytest.raises(DivergenceError):
            hyp_matrix_series((1.0, 2.0), (), np.array([0.5, 0.1]))
        with pytest.raises(DivergenceError):
            hyp_matrix_series((1.0,), (), np.array([1.5, 0.1]))

    def test_nonconverged_raises_and_carries_value(self):
        with pytest.raises(NonConvergedError) as err:
            hyp_matrix_series((), (2.0,), np.array([30.0, 5.0]), max_weight=8)
        assert err.value.value is not None
        res = hyp_matrix_series((), (2.0,), np.array([30.0, 5.0]),
                                max_weight=8, strict=False)
        assert not res.converged
        assert res.tail > 0


class TestHypMatrixSeriesTwo:
    def test_ones_reduces_to_one_argument(self):
        b = np.array([0.6, 0.3])
        two = hyp_matrix_series_two((), (2.5,), b, np.ones(2))
        one = hyp_matrix_series((), (2.5,), b)
        assert two.value == pytest.approx(one.value, rel=1e-10)

    def test_zero_argument(self):
        res = hyp_matrix_series_two((), (2.5,), np.zeros(2), np.array([0.7, 0.2]))
        assert res.value == 1.0

    def test_0f0_matches_harish_chandra(self):
        from laguerre.specfun import harish_chandra_0f0
        rng = np.random.default_rng(3)
        for _ in range(5):
            b = np.sort(rng.uniform(0.05, 0.95, 2))[::-1]
            c = np.sort(rng.uniform(0.05, 0.95, 2))[::-1]
            series = hyp_matrix_series_two((), (), b, c)
            assert series.value == pytest.approx(harish_chandra_0f0(b, c), rel=1e-8)

    def test_hua_identity_weight30(self):
        # det(e^{b_i c_j}) / (V(B) V(C)) against the Schur expansion with
        # exponential coefficients e_n = 1/n! and staircase shifts
        rng = np.random.default_rng(9)
        for _ in range(5):
            b = np.sort(rng.uniform(0.05, 1.0, 2))[::-1]
            c = np.sort(rng.uniform(0.05, 1.0, 2))[::-1]
            lhs = np.linalg.det(np.exp(np.outer(b, c)))
            lhs /= (b[0] - b[1]) * (c[0] - c[1])
            rhs = 0.0
            for k in range(31):
                for tau in enumerate_partitions(k, 2):
                    t1, t2 = tau.padded(2)
                    coeff = 1.0 / (math.factorial(t1 + 1) * math.factorial(t2))
                    rhs += coeff * schur_jacobi_trudi(tau, b) * schur_jacobi_trudi(tau, c)
            assert rhs == pytest.approx(lhs, rel=1e-8)
