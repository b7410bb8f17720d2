import math

import numpy as np
import pytest

from hyperbn import specfun as sf
from hyperbn.numerics import ode_integrate

# Bernoulli-number coefficients of the Stirling series for log Gamma
_STIRLING = [1.0 / 12, -1.0 / 360, 1.0 / 1260, -1.0 / 1680, 1.0 / 1188]


def _lgamma_oracle(x: float) -> float:
    """Shift x up by 200 recurrence steps, apply the Stirling series there."""
    shift = 200
    terms = [-math.log(x + j) for j in range(shift)]
    z = x + shift
    terms.append((z - 0.5) * math.log(z) - z + 0.5 * math.log(2.0 * math.pi))
    zp = z
    for c in _STIRLING:
        terms.append(c / zp)
        zp *= z * z
    return math.fsum(terms)


def test_ln_gamma_basics():
    assert abs(sf.ln_gamma(1.0)[0]) <= 1e-15
    val, sign = sf.ln_gamma(0.5)
    assert sign == 1
    assert abs(val - math.log(math.sqrt(math.pi))) <= 1e-14


def test_ln_gamma_vs_stirling_oracle():
    val, _ = sf.ln_gamma(7.3)
    ref = _lgamma_oracle(7.3)
    assert abs(val - ref) <= 1e-13 * max(1.0, abs(ref))
    # wider points: the oracle's 200-term shift cancels several digits below
    # x ~ 1, so allow its accumulation noise there
    for x in (0.2, 13.7, 412.0, 1e-3):
        val, _ = sf.ln_gamma(x)
        ref = _lgamma_oracle(x)
        assert abs(val - ref) <= 1e-12 * max(1.0, abs(ref)), x


def test_ln_gamma_pole():
    with pytest.raises(sf.PoleAtNonPositiveInteger):
        sf.ln_gamma(0.0)
    with pytest.raises(sf.PoleAtNonPositiveInteger):
        sf.ln_gamma(-3.0)


def test_ln_gamma_negative_sign():
    # Gamma is negative on (-1, 0) and positive on (-2, -1)
    assert sf.ln_gamma(-0.5)[1] == -1
    assert sf.ln_gamma(-1.5)[1] == 1


def test_hyp2f1_trivial():
    assert sf.hyp2f1(sf.HypergeometricParams(0.3, -1.2, 2.7), 0.0) == 1.0


def test_hyp2f1_log_identity():
    # 2F1(1,1;2;z) = -log(1-z)/z
    val = sf.hyp2f1(sf.HypergeometricParams(1.0, 1.0, 2.0), -1.0)
    assert abs(val - math.log(2.0)) <= 1e-14


def _mp_series_oracle(a, b, c, z, terms=10000):
    """Pfaff-transformed series summed term by term in 50-digit arithmetic."""
    import mpmath as mp
    with mp.workdps(50):
        w = mp.mpf(z) / (mp.mpf(z) - 1)
        aa, bb = mp.mpf(a), mp.mpf(c) - mp.mpf(b)
        cc = mp.mpf(c)
        term = mp.mpf(1)
        s = mp.mpf(1)
        for k in range(terms):
            term *= (aa + k) * (bb + k) / ((cc + k) * (k + 1)) * w
            s += term
        return float((1 - mp.mpf(z)) ** (-mp.mpf(a)) * s)


def test_hyp2f1_vs_extended_precision_series():
    val = sf.hyp2f1(sf.HypergeometricParams(0.7, 2.1, 1.5), -3.2)
    ref = _mp_series_oracle(0.7, 2.1, 1.5, -3.2)
    assert abs(val - ref) <= 1e-10 * abs(ref)


def test_hyp2f1_pfaff_direct_overlap():
    from hyperbn.core import hyp2f1_neg
    for z in (-0.55, -0.7, -0.9, -0.99):
        # direct series (converges for |z| < 1)
        a, b, c = 0.8, 1.7, 2.3
        term, s = 1.0, 1.0
        for k in range(200000):
            term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z
            s += term
            if abs(term) <= 1e-16 * abs(s):
                break
        val, _, ok = hyp2f1_neg(a, b, c, z)
        assert ok
        assert abs(val - s) <= 1e-9 * abs(s)


def test_legendre_trivial_degree_zero():
    p = sf.LegendreParams(0.0, 0.0)
    for rho in (0.1, 1.0, 3.0):
        assert abs(sf.legendre_P(p, rho) - 1.0) <= 1e-14


def test_legendre_vanishes_at_origin_for_negative_order():
    p = sf.LegendreParams(1.37, (2 - 5) / 2.0)
    vals = [sf.legendre_P(p, rho) for rho in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(abs(v2) < abs(v1) for v1, v2 in zip(vals, vals[1:]))
    assert abs(vals[-1]) < 1e-5


def test_legendre_vs_extended_precision():
    import mpmath as mp
    with mp.workdps(30):
        ref = float(mp.legenp(mp.mpf("1.37"), mp.mpf("-1.5"),
                              mp.cosh(mp.mpf("0.8")), type=3))
    val = sf.legendre_P(sf.LegendreParams(1.37, -1.5), 0.8)
    assert abs(val - ref) <= 1e-12 * abs(ref)


def test_legendre_degree_reflection():
    for nu, mu, rho in ((1.37, -1.5, 0.8), (0.3, -2.5, 2.0), (2.2, -0.75, 1.2)):
        a = sf.legendre_P(sf.LegendreParams(nu, mu), rho)
        b = sf.legendre_P(sf.LegendreParams(-nu - 1.0, mu), rho)
        assert abs(a - b) <= 1e-10 * max(abs(a), 1e-300)


def legendre_ode_residual_scaled(nu, mu, rho):
    """ODE residual with the second derivative obtained analytically from
    the order-raising ladder (no numerical differentiation):

        u'  = P^{mu+1} + mu coth(rho) P^{mu}
        u'' = P^{mu+2} + (2 mu + 1) coth(rho) P^{mu+1}
              + (mu^2 coth^2(rho) - mu/sinh^2(rho)) P^{mu}
    """
    T = nu * (nu + 1.0)
    coth = 1.0 / math.tanh(rho)
    sh2 = math.sinh(rho) ** 2
    u = sf.legendre_P_T(T, mu, rho)
    p1 = sf.legendre_P_T(T, mu + 1.0, rho)
    p2 = sf.legendre_P_T(T, mu + 2.0, rho)
    du = p1 + mu * coth * u
    d2u = p2 + (2.0 * mu + 1.0) * coth * p1 \
        + (mu * mu * coth * coth - mu / sh2) * u
    resid = d2u + coth * du - (T + mu * mu / sh2) * u
    scale = 1.0 + abs(u) + abs(d2u)
    return abs(resid) / scale


def test_legendre_ode_residual_grid():
    worst = 0.0
    for nu in np.linspace(-3.0, 3.0, 7):
        for mu in np.linspace(-3.0, 0.0, 7):
            for rho in (0.05, 0.3, 1.0, 2.0, 4.0):
                worst = max(worst, legendre_ode_residual_scaled(nu, mu, rho))
    assert worst <= 1e-8


def test_legendre_raising_vs_finite_difference():
    p = sf.LegendreParams(1.37, -1.5)
    for rho in (0.8, 2.0):
        h = 1e-5
        fd = (sf.legendre_P(p, rho + h) - sf.legendre_P(p, rho - h)) / (2.0 * h)
        an = sf.legendre_P_deriv(p, rho)
        assert abs(an - fd) <= 1e-7 * max(abs(an), 1.0)


def test_legendre_deriv_degree_zero():
    p = sf.LegendreParams(0.0, 0.0)
    for rho in (0.2, 1.0, 2.5):
        assert abs(sf.legendre_P_deriv(p, rho)) <= 1e-13


def test_legendre_lowering_relation():
    # d/drho P^{mu+1} = (nu(nu+1) - mu(mu+1)) P^mu - (mu+1) coth(rho) P^{mu+1}
    for nu in (-2.0, 0.3, 1.37, 2.5):
        for mu in (-2.5, -1.5, -0.75):
            for rho in (0.3, 0.8, 2.0):
                T = nu * (nu + 1.0)
                h = 1e-5
                fd = (sf.legendre_P_T(T, mu + 1.0, rho + h)
                      - sf.legendre_P_T(T, mu + 1.0, rho - h)) / (2.0 * h)
                rhs = (T - mu * (mu + 1.0)) * sf.legendre_P_T(T, mu, rho) \
                    - (mu + 1.0) / math.tanh(rho) * sf.legendre_P_T(T, mu + 1.0, rho)
                assert abs(fd - rhs) <= 1e-8 * max(1.0, abs(rhs), abs(fd))


def test_spherical_normalization():
    for n in (3, 5, 7):
        for tau in (0.0, 2.0, 11.0):
            assert sf.spherical_fn(tau, n, 0.0) == 1.0


def test_spherical_h3_closed_form():
    # on H^3: phi_tau(rho) = 2 sin(tau rho / 2) / (tau sinh rho)
    for tau in (0.5, 2.0, 9.0):
        for rho in (0.3, 1.0, 2.5):
            ref = 2.0 * math.sin(tau * rho / 2.0) / (tau * math.sinh(rho))
            assert abs(sf.spherical_fn(tau, 3, rho) - ref) <= 1e-12


def test_spherical_vs_ode_shooting():
    # integrate the radial eigen-ODE from near the origin (n=3, tau=2)
    n, tau = 3, 2.0
    E = ((n - 1) ** 2 + tau ** 2) / 4.0
    eps = 1e-6
    y0 = [1.0 - E * eps ** 2 / (2.0 * n), -E * eps / n]
    rhs = lambda r, y: np.array([y[1], -(n - 1) / math.tanh(r) * y[1] - E * y[0]])
    tr = ode_integrate(rhs, y0, eps, 1.0, tol=1e-12)
    assert abs(tr.final_state[0] - sf.spherical_fn(tau, n, 1.0)) <= 1e-8


def test_spherical_eigen_ode_residual():
    # 4th-order five-point stencils keep the finite-difference truncation
    # below the certification threshold
    for n in (3, 5, 7):
        for tau in (0.0, 1.0, 4.0, 10.0):
            E = ((n - 1) ** 2 + tau * tau) / 4.0
            for rho in (0.1, 0.7, 1.9, 4.0):
                h = 1e-3
                pts = rho + h * np.arange(-2, 3)
                v = sf.spherical_fn(tau, n, pts)
                d1 = (v[0] - 8 * v[1] + 8 * v[3] - v[4]) / (12 * h)
                d2 = (-v[0] + 16 * v[1] - 30 * v[2] + 16 * v[3] - v[4]) / (12 * h * h)
                resid = d2 + (n - 1) / math.tanh(rho) * d1 + E * v[2]
                assert abs(resid) <= 1e-8 * (1.0 + abs(d2) + E * abs(v[2]))


def test_spherical_bounded_by_one():
    rho = np.linspace(0.0, 6.0, 121)
    for n in (3, 5):
        for tau in (0.5, 3.0, 8.0, 20.0):
            vals = sf.spherical_fn(tau, n, rho)
            assert np.all(np.abs(vals) <= 1.0 + 1e-12)


def test_plancherel_density_even():
    for n in (3, 4, 5):
        for tau in (0.5, 1.0, 3.0):
            a = sf.plancherel_density(tau, n)
            b = sf.plancherel_density(-tau, n)
            assert abs(a - b) <= 1e-13 * a


def test_plancherel_density_vanishes_at_zero():
    assert sf.plancherel_density(0.0, 5) == 0.0
    assert sf.plancherel_density(1e-9, 5) < 1e-10


def test_plancherel_density_h3_closed_form():
    # |c(tau)|^{-2} = tau^2/4 on H^3
    for tau in (0.5, 2.0, 7.0):
        assert abs(sf.plancherel_density(tau, 3) - tau * tau / 4.0) <= 1e-11 * tau * tau


def test_plancherel_density_vs_extended_precision():
    import mpmath as mp
    with mp.workdps(40):
        for n in (3, 4, 5, 6, 7):
            for tau in (0.5, 2.0, 11.0):
                c = (mp.mpf(2) ** (n - 1 - 1j * tau) * mp.gamma(mp.mpf(n) / 2)
                     * mp.gamma(1j * mp.mpf(tau))
                     / (mp.gamma((n - 1 + 1j * tau) / 2)
                        * mp.gamma((1 + 1j * tau) / 2)))
                ref = float(1 / abs(c) ** 2)
                val = sf.plancherel_density(tau, n)
                assert abs(val - ref) <= 1e-11 * ref
