import math

import numpy as np
import pytest

from hyperbn import geometry as gm
from hyperbn.specfun import spherical_fn


def test_dims_validation():
    d = gm.ProblemDims(5, 2)
    assert d.q == 10.0
    with pytest.raises(ValueError):
        gm.ProblemDims(4, 2)
    assert gm.ProblemDims(7, 2).q == pytest.approx(14.0 / 3.0)


def test_ball_relation():
    b = gm.GeodesicBall(0.5)
    assert abs(b.rho_bar - math.log(3.0)) <= 1e-14
    with pytest.raises(ValueError):
        gm.GeodesicBall(1.2)


def test_distance_basics():
    x = np.array([0.1, 0.2, 0.0])
    assert gm.geodesic_distance(x, x) == 0.0
    y = np.array([0.5, 0.0, 0.0])
    d = gm.geodesic_distance(np.zeros(3), y)
    assert abs(d - math.log(3.0)) <= 1e-14
    with pytest.raises(gm.PointOutsideModel):
        gm.geodesic_distance(np.array([1.1, 0.0]), np.zeros(2))


def test_distance_triangle_inequality():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        pts = rng.uniform(-0.57, 0.57, (3, 3))
        dxy = gm.geodesic_distance(pts[0], pts[1])
        dyz = gm.geodesic_distance(pts[1], pts[2])
        dxz = gm.geodesic_distance(pts[0], pts[2])
        assert dxz <= dxy + dyz + 1e-12


def test_distance_antipodal_isometry():
    rng = np.random.default_rng(5)
    for _ in range(50):
        x, y = rng.uniform(-0.5, 0.5, (2, 4))
        assert abs(gm.geodesic_distance(x, y)
                   - gm.geodesic_distance(-x, -y)) <= 1e-14


def test_sphere_areas():
    assert abs(gm.sphere_area(1) - 2.0 * math.pi) <= 1e-14
    assert abs(gm.sphere_area(2) - 4.0 * math.pi) <= 1e-13
    assert abs(gm.sphere_area(5) - math.pi ** 3) <= 1e-13


def test_ball_volume_small_euclidean_limit():
    n = 4
    rho = 1e-3
    omega_n = math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)
    assert gm.ball_volume(rho, n) / (omega_n * rho ** n) == pytest.approx(1.0, abs=1e-5)


def test_ball_volume_h3_closed_form():
    # |S^2| int_0^1 sinh^2 = 4 pi (sinh 2 / 4 - 1/2) = pi (sinh 2 - 2)
    assert gm.ball_volume(1.0, 3) == pytest.approx(math.pi * (math.sinh(2.0) - 2.0),
                                                   rel=1e-12)


def test_ball_volume_vs_dense_quadrature():
    ts = np.linspace(0.0, 2.0, 1_000_001)
    oracle = gm.sphere_area(4) * np.trapezoid(np.sinh(ts) ** 4, ts)
    assert gm.ball_volume(2.0, 5) == pytest.approx(oracle, rel=1e-9)


def test_ball_volume_monotone():
    vals = [gm.ball_volume(r, 5) for r in (0.5, 1.0, 1.5)]
    assert vals[0] < vals[1] < vals[2]


def _profile(fn, dims, rho_max=3.0, N=1601, start=0.0):
    rho = np.linspace(start, rho_max, N)
    return gm.RadialProfile(rho, fn(rho), dims)


def test_p1_constant():
    d = gm.ProblemDims(5, 1)
    prof = _profile(lambda r: np.ones_like(r), d)
    out = gm.apply_radial_P1(prof)
    assert np.max(np.abs(out.values + 5 * 3 / 4.0)) <= 1e-7


def test_p1_eigenrelation_spherical():
    # P1 phi_tau = ((tau^2 + 1)/4) phi_tau
    d = gm.ProblemDims(5, 1)
    tau = 2.0
    prof = _profile(lambda r: spherical_fn(tau, 5, r), d)
    out = gm.apply_radial_P1(prof)
    expect = (tau * tau + 1.0) / 4.0 * prof.values
    interior = slice(3, -3)
    assert np.max(np.abs(out.values[interior] - expect[interior])) <= 1e-6


def test_p1_eigenrelation_second_order_convergence():
    d = gm.ProblemDims(5, 1)
    tau = 2.0
    errs = []
    for N in (401, 801):
        prof = _profile(lambda r: spherical_fn(tau, 5, r), d, N=N)
        out = gm.apply_radial_P1(prof)
        expect = (tau * tau + 1.0) / 4.0 * prof.values
        errs.append(np.max(np.abs(out.values[3:-3] - expect[3:-3])))
    # 4th-order interior stencils: halving h cuts the error by >= ~8
    assert errs[1] <= errs[0] / 8.0


def test_pk_definitional_composition():
    d2 = gm.ProblemDims(7, 2)
    prof = _profile(lambda r: np.exp(-r * r), d2)
    via_pk = gm.apply_radial_Pk(prof)
    p1a = gm.apply_radial_P1(prof)
    shifted = gm.RadialProfile(prof.grid, p1a.values + 2.0 * prof.values, d2)
    via_two = gm.apply_radial_P1(shifted)
    # identical composition path => identical to rounding
    assert np.max(np.abs(via_pk.values - via_two.values)) <= 1e-9 * max(
        1.0, np.max(np.abs(via_two.values)))


def test_pk_recovers_spectral_bottom_at_tau_zero():
    from hyperbn.constants import lambda_bar
    d2 = gm.ProblemDims(5, 2)
    # N is capped: four finite-difference derivatives turn rounding-dominated
    # (error ~ eps/h^4) on finer grids
    prof = _profile(lambda r: spherical_fn(0.0, 5, r), d2, rho_max=3.0, N=1001)
    out = gm.apply_radial_Pk(prof)
    expect = lambda_bar(2).value * prof.values
    interior = slice(5, -5)
    err = np.max(np.abs(out.values[interior] - expect[interior]))
    assert err <= 5e-4


def test_grid_too_coarse():
    d2 = gm.ProblemDims(5, 2)
    with pytest.raises(ValueError):
        gm.RadialProfile(np.array([0.0, 0.1]), np.array([1.0, 1.0]), d2)
    with pytest.raises(gm.GridTooCoarse):
        prof = gm.RadialProfile(np.linspace(0, 1, 6), np.ones(6), d2)
        gm.apply_radial_Pk(prof)
