import math
from fractions import Fraction

import numpy as np
import pytest

from hyperbn import constants as ct
from hyperbn.geometry import GeodesicBall, ProblemDims


def test_lambda_bar_exact():
    assert ct.lambda_bar_fraction(1) == Fraction(1, 4)
    assert ct.lambda_bar_fraction(2) == Fraction(9, 16)
    assert ct.lambda_bar_fraction(3) == Fraction(225, 64)
    assert ct.lambda_bar(2).value == 0.5625


def test_sobolev_constant_n5():
    d = ProblemDims(5, 2)
    rep = ct.sobolev_constant(d)
    assert rep.value == pytest.approx(105.0 / 16.0 * (math.pi ** 3) ** 0.8, rel=1e-14)
    rep1 = ct.sobolev_constant(ProblemDims(5, 1))
    assert rep1.value == pytest.approx(15.0 / 4.0 * (math.pi ** 3) ** 0.4, rel=1e-14)


def test_sobolev_constant_vs_gamma_oracle():
    import mpmath as mp
    with mp.workdps(40):
        pref = (mp.mpf(6) * 4 / 4) * (mp.mpf(6) * 4 / 4 - 2)
        area = 2 * mp.pi ** (mp.mpf(7) / 2) / mp.gamma(mp.mpf(7) / 2)
        ref = float(pref * area ** (mp.mpf(4) / 6))
    rep = ct.sobolev_constant(ProblemDims(6, 2))
    assert rep.value == pytest.approx(ref, rel=1e-13)


def test_sobolev_positivity_probe():
    # flags (not asserts) the non-positive printed factors
    for n in range(5, 13):
        for k in range(1, 6):
            if n <= 2 * k:
                continue
            rep = ct.sobolev_constant(ProblemDims(n, k))
            if n * (n - 2) / 4.0 > k * (k - 1):
                assert rep.value > 0
                assert "nonpositive_factor" not in rep.diagnostics
            else:
                assert rep.diagnostics.get("nonpositive_factor")


def test_hls_limit_and_value():
    assert ct.hls_constant(5, 1e-9).value == pytest.approx(1.0, abs=1e-6)
    ref = (math.sqrt(math.pi) * (math.gamma(2.0) / math.gamma(4.5))
           * (math.gamma(2.5) / math.gamma(5.0)) ** -0.8)
    assert ct.hls_constant(5, 1.0).value == pytest.approx(ref, rel=1e-13)
    with pytest.raises(ct.ExponentOutOfRange):
        ct.hls_constant(5, 6.0)


def test_hls_vs_extended_precision():
    import mpmath as mp
    with mp.workdps(40):
        lam = mp.mpf(2)
        ref = float(mp.pi ** (lam / 2) * mp.gamma(3 - lam / 2) / mp.gamma(6 - lam / 2)
                    * (mp.gamma(3) / mp.gamma(6)) ** (-1 + lam / 6))
    assert ct.hls_constant(6, 2.0).value == pytest.approx(ref, rel=1e-13)


def test_hls_continuous_no_sign_changes():
    vals = [ct.hls_constant(5, x).value for x in np.linspace(0.05, 4.95, 200)]
    assert all(v > 0 for v in vals)
    # smoothness away from the lam -> n pole where the constant blows up
    vals_mid = [v for x, v in zip(np.linspace(0.05, 4.95, 200), vals) if x <= 4.0]
    jumps = np.abs(np.diff(vals_mid)) / np.abs(np.array(vals_mid[:-1]))
    assert np.max(jumps) < 0.25


def test_pk_symbol():
    assert ct.pk_symbol(0.0, 2) == ct.lambda_bar(2).value
    assert ct.pk_symbol(1.0, 2) == pytest.approx(1.25, rel=1e-15)
    assert ct.pk_symbol(0.0, 1) == 0.25
    taus = np.linspace(0.0, 8.0, 100)
    vals = [ct.pk_symbol(t, 3) for t in taus]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_pk_symbol_positivity_iff_below_bottom():
    taus = np.linspace(0.0, 50.0, 2001)
    lb = ct.lambda_bar(2).value
    for lam, positive in ((lb - 1e-6, True), (lb + 1e-6, False)):
        mins = min(ct.pk_symbol(t, 2) - lam for t in taus)
        assert (mins > 0) == positive


def test_symbol_domination_plateau_extrapolates_to_one():
    d = ProblemDims(5, 2)
    # ratio(tau) = 1 + c/tau^2 + O(tau^-4) for j = k; fit the tail
    lam = 0.1
    taus = np.geomspace(1e2, 1e3, 40)
    ratio = [((16 + t * t) / 4.0) ** 2 / (ct.pk_symbol(t, 2) - lam) for t in taus]
    A = np.vstack([np.ones_like(taus), 1.0 / taus ** 2]).T
    coef, *_ = np.linalg.lstsq(A, np.array(ratio), rcond=None)
    assert abs(coef[0] - 1.0) <= 1e-6


def test_symbol_domination_interior_sup_vs_dense_scan():
    d = ProblemDims(5, 2)
    val = ct.symbol_domination_constant(d, 0.0, 1)
    taus = np.linspace(0.0, 1000.0, 1_000_001)
    dense = np.max(((16.0 + taus ** 2) / 4.0) / ((1 + taus ** 2) * (9 + taus ** 2) / 16.0))
    assert val == pytest.approx(dense, rel=1e-6)


def test_symbol_domination_blowup_near_bottom():
    d = ProblemDims(5, 2)
    lb = ct.lambda_bar(2).value
    v1 = ct.symbol_domination_constant(d, lb - 1e-6, 2)
    assert v1 > 1e5
    with pytest.raises(ct.DenominatorNonPositive):
        ct.symbol_domination_constant(d, lb, 2)


def test_symbol_domination_finite_over_acceptance_grid():
    for n in range(5, 10):
        for k in (2, 3):
            if n <= 2 * k:
                continue
            d = ProblemDims(n, k)
            lam = float(ct.lambda_bar_fraction(k)) / 2.0
            for j in range(0, k + 1):
                val = ct.symbol_domination_constant(d, lam, j, n_grid=2000)
                assert math.isfinite(val) and val > 0


def test_underline_lambda_bracket_value_at_one():
    rep = ct.underline_lambda(ProblemDims(7, 2))
    assert rep.diagnostics["bracket_at_1"] == pytest.approx(7.0, abs=1e-12)


def test_underline_lambda_divergence_diagnostic():
    rep = ct.underline_lambda(ProblemDims(7, 2))
    assert rep.diagnostics["divergent"] is True
    assert rep.diagnostics["fitted_exponent"] == pytest.approx(-3.0, abs=0.3)


def test_underline_lambda_numerator_identity():
    # n=7, k=2: Gamma(7/2) Gamma(2) (1 + Gamma(5/2)/(Gamma(2) Gamma(3/2)))
    #         = Gamma(7/2) (1 + 3/2)
    half = (7 - 4) / 2.0
    coeffs = [math.gamma(j + half) / (math.gamma(j + 1.0) * math.gamma(half))
              for j in range(2)]
    numerator = math.gamma(3.5) * math.gamma(2.0) * sum(coeffs)
    assert numerator == pytest.approx(math.gamma(3.5) * 2.5, rel=1e-14)


def test_underline_lambda_dimension_guard():
    with pytest.raises(ct.DimensionOutOfRange):
        ct.underline_lambda(ProblemDims(5, 2))   # n = 2k+1 below range
    with pytest.raises(ct.DimensionOutOfRange):
        ct.underline_lambda(ProblemDims(9, 2))   # above 4k-1


def test_lambda_star_upper_volume_term_sign():
    d = ProblemDims(5, 2)
    # 2/q - 1 < 0, so the volume factor decays as the ball grows
    v1 = ct.ball_volume(GeodesicBall(0.5).rho_bar, 5)
    v2 = ct.ball_volume(GeodesicBall(0.9).rho_bar, 5)
    e = 2.0 / d.q - 1.0
    assert e < 0
    assert v2 ** e < v1 ** e


def test_lambda_star_upper_report():
    d = ProblemDims(5, 2)
    rep = ct.lambda_star_upper(d, GeodesicBall(0.5), 551.6)
    assert rep.value == pytest.approx(rep.diagnostics["volume_term"])
    assert "dimension_edge_case" in rep.diagnostics
    # n=6 has the in-range underline threshold recorded
    rep6 = ct.lambda_star_upper(ProblemDims(6, 2), GeodesicBall(0.5), 842.0)
    assert rep6.diagnostics["underline_divergent"] is True


def test_lambda_star_upper_grid_refinement_stability():
    from hyperbn.eigen import first_eigenvalue_P2
    d = ProblemDims(5, 2)
    ball = GeodesicBall(0.5)
    l1a = first_eigenvalue_P2(d, ball, 200).value
    l1b = first_eigenvalue_P2(d, ball, 400).value
    ra = ct.lambda_star_upper(d, ball, l1a)
    rb = ct.lambda_star_upper(d, ball, l1b)
    assert ra.value == pytest.approx(rb.value, rel=2e-2)


def test_lambda_star_upper_k1_small_ball_positive():
    from hyperbn.eigen import first_eigenvalue_P1
    d = ProblemDims(5, 1)
    ball = GeodesicBall(0.05)
    l1 = first_eigenvalue_P1(d, ball, 400).value
    rep = ct.lambda_star_upper(d, ball, l1)
    assert rep.value > 0
