import math

import numpy as np
import pytest

from hyperbn import numerics as nm


def test_integrate_polynomial():
    res = nm.integrate_adaptive(lambda x: x * x, 0.0, 1.0, tol=1e-10)
    assert abs(res.value - 1.0 / 3.0) <= 1e-10
    assert res.converged and res.evaluations >= 1


def test_integrate_endpoint_singularity():
    res = nm.integrate_adaptive(lambda x: 1.0 / math.sqrt(x), 1e-300, 1.0, tol=1e-8)
    assert abs(res.value - 2.0) <= 1e-8


def test_integrate_vs_trapezoid_oracle():
    # brute-force composite trapezoid with 1e6 points
    f = lambda x: math.sinh(x) ** 4 * math.exp(-x * x)
    xs = np.linspace(0.0, 5.0, 1_000_001)
    oracle = np.trapezoid(np.sinh(xs) ** 4 * np.exp(-xs ** 2), xs)
    res = nm.integrate_adaptive(f, 0.0, 5.0, tol=1e-10)
    assert abs(res.value - oracle) <= 1e-8


def test_tolerance_halving_never_worse():
    f = lambda x: math.sinh(x) ** 4 * math.exp(-x * x)
    xs = np.linspace(0.0, 5.0, 1_000_001)
    oracle = np.trapezoid(np.sinh(xs) ** 4 * np.exp(-xs ** 2), xs)
    errs = []
    for tol in (1e-6, 5e-7, 2.5e-7, 1.25e-7):
        errs.append(abs(nm.integrate_adaptive(f, 0.0, 5.0, tol=tol).value - oracle))
    for a, b in zip(errs, errs[1:]):
        assert b <= a + 1e-12


def test_semi_infinite_exponential():
    res = nm.integrate_semi_infinite(lambda t: math.exp(-t), 1.0, tol=1e-10)
    assert abs(res.value - 1.0) <= 1e-10


def test_semi_infinite_gamma_half():
    res = nm.integrate_semi_infinite(
        lambda t: math.exp(-t) / math.sqrt(t) if t > 0 else 0.0, 1.0, tol=1e-8)
    assert abs(res.value - math.sqrt(math.pi)) <= 1e-8


def test_semi_infinite_vs_dense_oracle():
    f = lambda t: t ** -0.5 * math.exp(-0.25 / t - 0.25 * t) if t > 0 else 0.0
    ts = np.linspace(1e-9, 200.0, 10_000_001)
    oracle = np.trapezoid(ts ** -0.5 * np.exp(-0.25 / ts - 0.25 * ts), ts)
    res = nm.integrate_semi_infinite(f, 0.25, tol=1e-9)
    assert abs(res.value - oracle) <= 1e-6


def test_semi_infinite_rejects_nonpositive_decay():
    with pytest.raises(nm.NonPositiveDecay):
        nm.integrate_semi_infinite(lambda t: math.exp(-t), 0.0)


def test_find_root_sqrt2():
    br = nm.Bracket(1.0, 2.0, -1.0, 2.0)
    x = nm.find_root(lambda x: x * x - 2.0, br, tol=1e-13)
    assert abs(x - math.sqrt(2.0)) <= 1e-12
    assert br.lo <= x <= br.hi


def test_find_root_cos():
    br = nm.Bracket(1.0, 2.0, math.cos(1.0), math.cos(2.0))
    x = nm.find_root(math.cos, br, tol=1e-13)
    assert abs(x - math.pi / 2.0) <= 1e-12


def test_bracket_validation():
    with pytest.raises(nm.InvalidBracket):
        nm.Bracket(2.0, 1.0, -1.0, 1.0)
    with pytest.raises(nm.InvalidBracket):
        nm.Bracket(1.0, 2.0, 1.0, 1.0)


def test_scan_sign_changes_sin():
    brs = nm.scan_sign_changes(math.sin, 1.0, 7.0, 1000)
    assert len(brs) == 2
    assert brs[0].lo < math.pi < brs[0].hi
    assert brs[1].lo < 2.0 * math.pi < brs[1].hi
    assert brs[0].hi <= brs[1].lo


def test_scan_constant_empty():
    assert nm.scan_sign_changes(lambda x: 1.0, 0.0, 1.0, 100) == []


def test_ode_exponential():
    tr = nm.ode_integrate(lambda t, y: y, [1.0], 0.0, 1.0, tol=1e-10)
    assert abs(tr.final_state[0] - math.e) <= 1e-9
    assert not tr.underflow


def test_ode_oscillator():
    rhs = lambda t, y: np.array([y[1], -y[0]])
    tr = nm.ode_integrate(rhs, [1.0, 0.0], 0.0, 2.0 * math.pi, tol=1e-10)
    assert abs(tr.final_state[0] - 1.0) <= 1e-8
    assert abs(tr.final_state[1]) <= 1e-8


def test_ode_radial_harmonic_fit():
    # -(v'' + (n-1)/r v') = 0 has solutions A + B r^{2-n}; fit from the trajectory
    n = 5
    rhs = lambda r, y: np.array([y[1], -(n - 1) / r * y[1]])
    tr = nm.ode_integrate(rhs, [1.0, 0.7], 0.1, 2.0, tol=1e-11)
    rs = tr.ts
    vs = tr.ys[:, 0]
    M = np.vstack([np.ones_like(rs), rs ** (2 - n)]).T
    coef, *_ = np.linalg.lstsq(M, vs, rcond=None)
    fit = M @ coef
    assert np.max(np.abs(fit - vs)) <= 1e-8


def test_ode_tolerance_halving_improves():
    errs = []
    for tol in (1e-6, 5e-7):
        tr = nm.ode_integrate(lambda t, y: y, [1.0], 0.0, 1.0, tol=tol)
        errs.append(abs(tr.final_state[0] - math.e))
    assert errs[1] <= errs[0]


def _jacobi_eigen_oracle(C: np.ndarray, sweeps: int = 60) -> np.ndarray:
    """Classical cyclic Jacobi rotations; independent full-spectrum oracle."""
    A = C.copy()
    n = A.shape[0]
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(A[p, q]) < 1e-14:
                    continue
                off = max(off, abs(A[p, q]))
                theta = 0.5 * math.atan2(2.0 * A[p, q], A[q, q] - A[p, p])
                c, s = math.cos(theta), math.sin(theta)
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                A = rot.T @ A @ rot
        if off < 1e-13:
            break
    return np.sort(np.diag(A))


def test_eigen_tridiagonal_laplacian():
    N = 200
    h = 1.0 / N
    A = (np.diag(np.full(N - 1, 2.0)) - np.diag(np.ones(N - 2), 1)
         - np.diag(np.ones(N - 2), -1)) / h ** 2
    B = np.eye(N - 1)
    lam, _ = nm.smallest_generalized_eigenvalue(nm.DenseSymmetricPair(A, B))
    assert abs(lam - math.pi ** 2) <= 5.0 * h ** 2 * math.pi ** 4


def test_eigen_identity():
    pair = nm.DenseSymmetricPair(np.eye(5), np.eye(5))
    lam, v = nm.smallest_generalized_eigenvalue(pair)
    assert abs(lam - 1.0) <= 1e-12
    assert abs(np.linalg.norm(v) - 1.0) <= 1e-10


def test_eigen_vs_jacobi_oracle():
    rng = np.random.default_rng(7)
    M1 = rng.standard_normal((60, 60))
    M2 = rng.standard_normal((60, 60))
    A = M1 @ M1.T + 0.1 * np.eye(60)
    B = M2 @ M2.T + 60 * np.eye(60)
    pair = nm.DenseSymmetricPair(A, B)
    lam, v = nm.smallest_generalized_eigenvalue(pair)
    import scipy.linalg as sla
    L = sla.cholesky(B, lower=True)
    C = sla.solve_triangular(L, A, lower=True)
    C = sla.solve_triangular(L, C.T, lower=True)
    oracle = _jacobi_eigen_oracle(0.5 * (C + C.T))[0]
    assert abs(lam - oracle) <= 1e-9 * max(1.0, abs(oracle))
    # residual and B-normalization
    resid = np.linalg.norm(A @ v - lam * B @ v) / np.linalg.norm(B @ v)
    assert resid <= 1e-8
    assert abs(v @ B @ v - 1.0) <= 1e-8


def test_eigen_rayleigh_upper_bound():
    rng = np.random.default_rng(3)
    M1 = rng.standard_normal((40, 40))
    A = M1 @ M1.T + 0.5 * np.eye(40)
    B = np.diag(rng.uniform(0.5, 2.0, 40))
    pair = nm.DenseSymmetricPair(A, B)
    lam, _ = nm.smallest_generalized_eigenvalue(pair)
    for _ in range(100):
        x = rng.standard_normal(40)
        quot = (x @ A @ x) / (x @ B @ x)
        assert lam <= quot + 1e-9 * abs(quot)


def test_pair_validation():
    with pytest.raises(ValueError):
        nm.DenseSymmetricPair(np.array([[1.0, 2.0], [0.0, 1.0]]), np.eye(2))
    with pytest.raises(ValueError):
        nm.DenseSymmetricPair(np.eye(2), -np.eye(2))
