"""Scalar special functions and the determinantal evaluators."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from laguerre.errors import (DegenerateSpectrumWarning, DivergenceError,
                             NonConvergedError, PoleError)
from laguerre.specfun import (ScalarHypParams, bessel_i, gamma_multivariate,
                              gamma_multivariate_ratio, gross_richards,
                              harish_chandra_0f0, hyp_scalar, struve_l,
                              two_matrix_determinantal)
from laguerre.symfun import hyp_matrix_series, hyp_matrix_series_two


class TestGammaMultivariate:
    def test_m1_is_gamma(self):
        assert gamma_multivariate(2.7, 1) == pytest.approx(math.gamma(2.7), rel=1e-14)

    def test_m2_explicit(self):
        # pi * Gamma(2) * Gamma(1)
        assert gamma_multivariate(2.0, 2) == pytest.approx(math.pi, rel=1e-14)

    def test_ratio_cancels_pi(self):
        nu = 0.7
        direct = gamma_multivariate(2.0, 2) / gamma_multivariate(2.0 + nu, 2)
        ref = 1.0 / (math.gamma(2 + nu) * math.gamma(1 + nu)
                     / (math.gamma(2) * math.gamma(1)))
        assert direct == pytest.approx(ref, rel=1e-13)
        assert gamma_multivariate_ratio(2.0, 2.0 + nu, 2) == pytest.approx(ref, rel=1e-13)

    def test_pole(self):
        with pytest.raises(PoleError):
            gamma_multivariate(1.0, 2)  # Gamma(0)


class TestBesselStruve:
    def test_i0_at_zero(self):
        assert bessel_i(0.0, 0.0) == 1.0

    def test_half_order_closed_form(self):
        # I_{1/2}(z) = sqrt(2/(pi z)) sinh z
        ref = math.sqrt(2 / (math.pi * 1.0)) * math.sinh(1.0)
        assert bessel_i(0.5, 1.0) == pytest.approx(ref, rel=1e-12)

    def test_small_z_leading_term(self):
        z = 1e-6
        assert bessel_i(1.0, z) / z == pytest.approx(0.5, rel=1e-9)

    def test_struve_at_zero(self):
        assert struve_l(2.0, 0.0) == 0.0

    def test_struve_leading_term(self):
        z = 1e-4
        lead = z ** 3 / (math.gamma(1.5) * math.gamma(3.5) * 8)
        assert struve_l(2.0, z) == pytest.approx(lead, rel=1e-6)

    def test_struve_series_oracle(self):
        # direct series sum as an independent check
        def series(nu, z, terms=60):
            return math.fsum((z / 2) ** (2 * k + nu + 1)
                             / (math.gamma(k + 1.5) * math.gamma(k + nu + 1.5))
                             for k in range(terms))
        for z in (0.3, 1.0, 4.0):
            assert struve_l(2.0, z) == pytest.approx(series(2.0, z), rel=1e-12)

    def test_bessel_product_representation(self):
        # I_mu(z) I_nu(z) = (2/pi) int_0^{pi/2} cos((mu-nu)t) I_{mu+nu}(2z cos t) dt
        for mu in (0.0, 1.0):
            for nu in (0.0, 1.0):
                for z in (0.5, 1.0, 2.0):
                    val, _ = quad(lambda th: math.cos((mu - nu) * th)
                                  * bessel_i(mu + nu, 2 * z * math.cos(th)),
                                  0, math.pi / 2)
                    val *= 2 / math.pi
                    assert val == pytest.approx(
                        bessel_i(mu, z) * bessel_i(nu, z), abs=1e-8)


class TestHypScalar:
    def test_degenerate_parameters_exp(self):
        for z in (-3.0, 0.5, 2.0):
            assert hyp_scalar(((2.0,), (2.0,)), z) == pytest.approx(
                math.exp(z), rel=1e-12)

    def test_0f1_sinh_identity(self):
        # 0F1(3/2; z^2/4) = sinh(z)/z
        assert hyp_scalar(((), (1.5,)), 0.25) == pytest.approx(
            math.sinh(1.0) / 1.0, rel=1e-12)

    def test_1f2_at_zero(self):
        assert hyp_scalar(((0.5,), (1.0, 2.0)), 0.0) == 1.0

    def test_pole_denominator(self):
        with pytest.raises(PoleError):
            ScalarHypParams((1.0,), (0.0,))
        with pytest.raises(PoleError):
            hyp_scalar(((1.0,), (-2.0,)), 0.3)

    def test_divergence(self):
        with pytest.raises(DivergenceError):
            hyp_scalar(((1.0, 2.0), ()), 0.3)
        with pytest.raises(DivergenceError):
            hyp_scalar(((1.0,), ()), 1.2)

    def test_term_cap(self):
        with pytest.raises(NonConvergedError):
            hyp_scalar(((), (1.5,)), 1e8, max_terms=20)

    def test_kummer_regions_consistent(self):
        # values straddling the switch points agree with the plain series
        # computed in extended precision via the Kummer transform partner
        import mpmath
        for a, b in ((0.5, 2.5), (-0.5, 1.5), (2.0, 2.5)):
            for z in (-20.0, -31.0, -49.0, -51.0, -400.0):
                mine = hyp_scalar(((a,), (b,)), z)
                ref = float(mpmath.hyp1f1(a, b, z))
                assert mine == pytest.approx(ref, rel=1e-10)

    def test_contiguous_relation(self):
        # b F(a,b,z) - b F(a-1,b,z) = z F(a,b+1,z)
        for a in np.linspace(0.6, 3.9, 6):
            for b in np.linspace(0.5, 3.8, 5):
                for z in np.linspace(-4.8, 4.8, 7):
                    lhs = b * hyp_scalar(((a,), (b,)), z) \
                        - b * hyp_scalar(((a - 1,), (b,)), z)
                    rhs = z * hyp_scalar(((a,), (b + 1,)), z)
                    assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-10)

    def test_kummer_transform_identity(self):
        # 1F1(a, b, z) = e^z 1F1(b-a, b, -z) in the plain-series region
        a, b = 0.8, 2.2
        for z in (-5.0, -1.0, 2.0):
            lhs = hyp_scalar(((a,), (b,)), z)
            rhs = math.exp(z) * hyp_scalar(((b - a,), (b,)), -z)
            assert lhs == pytest.approx(rhs, rel=1e-11)

    def test_eq11_bessel_quadrature(self):
        # int_0^1 I_1(2 lam x)/(2 lam x sqrt(1-x^2)) dx = (pi/4) 1F2(1/2;1;2;lam^2)
        for lam in (0.5, 1.0, 2.0):
            val, _ = quad(lambda th: bessel_i(1.0, 2 * lam * math.sin(th))
                          / (2 * lam * math.sin(th)), 0, math.pi / 2,
                          points=[0.0], limit=200)
            ref = math.pi / 4 * hyp_scalar(((0.5,), (1.0, 2.0)), lam * lam)
            assert val == pytest.approx(ref, abs=1e-8)


class TestGrossRichards:
    def test_0f0_exp_trace(self):
        x = np.array([0.9, 0.4])
        assert gross_richards((), (), x) == pytest.approx(np.exp(x.sum()), rel=1e-12)

    def test_m1_scalar(self):
        assert gross_richards((), (2.5,), np.array([0.7])) == pytest.approx(
            hyp_scalar(((), (2.5,)), 0.7), rel=1e-13)

    def test_series_determinant_agreement(self):
        rng = np.random.default_rng(17)
        for m in (2, 3):
            for _ in range(10):
                x = np.sort(rng.uniform(0.02, 0.8, m))[::-1]
                for a, b in (((), (2.8,)), ((0.5,), (2.0 + 0.5,))):
                    s = hyp_matrix_series(a, b, x, tol=1e-13).value
                    d = gross_richards(a, b, x)
                    assert d == pytest.approx(s, rel=1e-9)

    def test_1f1_negative_argument_series_oracle(self):
        x = np.array([1.0, 0.5])
        s = hyp_matrix_series((0.5,), (2.5,), -x, tol=1e-13).value
        d = gross_richards((0.5,), (2.5,), -x)
        assert d == pytest.approx(s, rel=1e-10)

    def test_degenerate_spectrum_warns_and_matches_series(self):
        x = np.array([0.5, 0.5])
        s = hyp_matrix_series((), (2.5,), x, tol=1e-13).value
        with pytest.warns(DegenerateSpectrumWarning):
            d = gross_richards((), (2.5,), x)
        assert d == pytest.approx(s, rel=1e-8)

    def test_matrix_kummer_relation(self):
        # 1F1(-s; delta; -X) = e^{-tr X} 1F1(delta+s; delta; X)
        rng = np.random.default_rng(23)
        s, delta = 0.7, 2.5
        for _ in range(10):
            x = np.sort(rng.uniform(0.1, 2.0, 2))[::-1]
            x[0] += 0.05
            lhs = gross_richards((-s,), (delta,), -x)
            rhs = math.exp(-x.sum()) * gross_richards((delta + s,), (delta,), x)
            assert lhs == pytest.approx(rhs, rel=1e-8)


class TestTwoMatrixDeterminantal:
    def test_harish_chandra_m1(self):
        assert harish_chandra_0f0(np.array([0.8]), np.array([0.6])) == pytest.approx(
            math.exp(0.48), rel=1e-13)

    def test_harish_chandra_hand_value(self):
        # b = c = (1, 0): Gamma_2(2)/pi * (e - 1)/1
        val = harish_chandra_0f0(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
        assert val == pytest.approx(math.e - 1, rel=1e-12)

    def test_harish_chandra_series_oracle(self):
        rng = np.random.default_rng(31)
        for _ in range(8):
            b = np.sort(rng.uniform(0.05, 1.0, 2))[::-1]
            c = np.sort(rng.uniform(0.05, 1.0, 2))[::-1]
            ref = hyp_matrix_series_two((), (), b, c, tol=1e-13).value
            assert harish_chandra_0f0(b, c) == pytest.approx(ref, rel=1e-8)

    def test_p0_q0_reduces_to_harish_chandra(self):
        b = np.array([0.7, 0.2])
        c = np.array([0.9, 0.1])
        assert two_matrix_determinantal([], [], b, c) == pytest.approx(
            harish_chandra_0f0(b, c), rel=1e-12)

    def test_0f1_series_oracle(self):
        rng = np.random.default_rng(37)
        nu = 0.6
        for _ in range(8):
            b = np.sort(rng.uniform(0.05, 0.9, 2))[::-1]
            c = np.sort(rng.uniform(0.05, 0.9, 2))[::-1]
            ref = hyp_matrix_series_two((), (2 + nu,), b, c, tol=1e-13).value
            val = two_matrix_determinantal([], [nu], b, c)
            assert val == pytest.approx(ref, rel=1e-9)

    def test_bessel_kernel_identity(self):
        # 0F1(nu+1; w)/Gamma(nu+1)^{-1}... the scalar entries satisfy
        # 0F1(nu+1; w^2/4) = Gamma(nu+1) (w/2)^{-nu} I_nu(w)
        nu, w = 0.7, 1.3
        lhs = hyp_scalar(((), (nu + 1,)), w * w / 4)
        rhs = math.gamma(nu + 1) * (w / 2) ** (-nu) * bessel_i(nu, w)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_zero_spectrum(self):
        b = np.zeros(2)
        c = np.array([0.5, 0.2])
        with pytest.warns(DegenerateSpectrumWarning):
            val = two_matrix_determinantal([], [0.5], b, c)
        assert val == pytest.approx(1.0, abs=1e-6)
