"""The k=2 threshold machinery on geodesic balls: the 2x2 Legendre
determinant, its first positive root, the independent discretized-quotient
eigenvalue oracle, and Euler-ODE residual certification.

Degree convention: the factorization P2 - lam = (P1 - lam1)(P1 - lam2) with
lam_{1,2} = -1 +- sqrt(1+lam) reduces each factor to the Legendre equation
with zeroth coefficient lam_j, solved by P_nu^mu(cosh rho) with
nu(nu+1) = -lam_j (real combination for every lam > -1).  The determinant is
therefore evaluated through T_j = -lam_j; writing the factorization roots
themselves as degree subscripts leaves the determinant rootless on the
relevant range (see tests/test_thresholds.py for the cross-validation
against the quotient oracle).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg as sla
import scipy.sparse as spsr
from numpy.polynomial import chebyshev as _cheb

from .geometry import GeodesicBall, GridTooCoarse, ProblemDims, RadialProfile
from .numerics import Bracket, find_root, scan_sign_changes
from .specfun import legendre_P_T, legendre_P_deriv_T


class NoRootFound(RuntimeError):
    pass


class DegenerateRoots(ValueError):
    pass


class Method(Enum):
    DETERMINANT = "determinant"
    QUOTIENT = "quotient"


@dataclass
class LambdaStarReport:
    lambda_star: float
    method: Method
    ball: GeodesicBall
    dims: ProblemDims
    bracket: tuple[float, float] | None = None
    cross_check_gap: float | None = None
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lambda_star <= 0:
            raise ValueError("lambda_star must be positive")

    def to_dict(self) -> dict:
        return {"lambda_star": self.lambda_star, "method": self.method.value,
                "R": self.ball.R, "n": self.dims.n,
                "bracket": self.bracket, "cross_check_gap": self.cross_check_gap,
                "diagnostics": self.diagnostics}


def _check_k2_dims(dims: ProblemDims):
    if dims.k != 2 or dims.n not in (5, 6, 7):
        raise ValueError("threshold machinery covers k = 2, n in {5, 6, 7}")


def factor_degrees(lam: float):
    """T_j = -lam_j = 1 -+ sqrt(1+lam): the nu(nu+1) values of the two
    Legendre branches; real for all lam > -1."""
    if lam <= -1.0:
        raise ValueError("need lam > -1 for real factorization roots")
    s = math.sqrt(1.0 + lam)
    return 1.0 - s, 1.0 + s


def lambda_star_determinant(lam: float, dims: ProblemDims, ball: GeodesicBall,
                            form: str = "reduced") -> float:
    """Determinant whose first positive zero in lam is the k=2 threshold:

        det [[ P_{T1}^{(2-n)/2},  P_{T2}^{(2-n)/2} ],
             [ P_{T1}^{(4-n)/2},  P_{T2}^{(4-n)/2} ]]  (rho = rho_bar),

    and, with form="derivative", the unreduced variant whose second row
    carries d/drho P^{(2-n)/2} instead (same zero set: the raising relation
    maps one row pair to the other).
    """
    _check_k2_dims(dims)
    n = dims.n
    T1, T2 = factor_degrees(lam)
    rb = ball.rho_bar
    mu1 = (2.0 - n) / 2.0
    a = legendre_P_T(T1, mu1, rb)
    b = legendre_P_T(T2, mu1, rb)
    if form == "reduced":
        mu2 = (4.0 - n) / 2.0
        c = legendre_P_T(T1, mu2, rb)
        d = legendre_P_T(T2, mu2, rb)
    elif form == "derivative":
        c = legendre_P_deriv_T(T1, mu1, rb)
        d = legendre_P_deriv_T(T2, mu1, rb)
    else:
        raise ValueError("form must be 'reduced' or 'derivative'")
    return a * d - b * c


def find_lambda_star(dims: ProblemDims, ball: GeodesicBall, lambda1: float,
                     n_scan: int = 2000) -> LambdaStarReport:
    """Leftmost positive root of the determinant on (1e-6, lambda1], refined
    to 1e-10 relative.  The run aborts if the reduced and derivative-form
    determinants disagree on the leftmost bracket."""
    _check_k2_dims(dims)
    if lambda1 <= 0:
        raise ValueError("lambda1 must be positive")

    def det_r(lam):
        return lambda_star_determinant(lam, dims, ball, "reduced")

    def det_d(lam):
        return lambda_star_determinant(lam, dims, ball, "derivative")

    brackets = scan_sign_changes(det_r, 1e-6, lambda1, n_scan)
    if not brackets:
        raise NoRootFound(
            f"no determinant sign change on (1e-6, {lambda1}] with {n_scan} points")
    br = brackets[0]
    brackets_d = scan_sign_changes(det_d, 1e-6, lambda1, n_scan)
    if not brackets_d or abs(brackets_d[0].lo - br.lo) > (br.hi - br.lo) * 2:
        raise NoRootFound(
            "reduced and derivative-form determinants disagree on the "
            f"leftmost bracket: {br} vs {brackets_d[:1]}")
    root = find_root(det_r, br, tol=1e-10 * max(br.hi, 1.0))
    return LambdaStarReport(root, Method.DETERMINANT, ball, dims,
                            bracket=(br.lo, br.hi),
                            diagnostics={"scan_points": n_scan,
                                         "n_brackets": len(brackets)})


def quotient_matrices(dims: ProblemDims, ball: GeodesicBall, N: int):
    """Discretized weighted quotient on [0, R]: numerator second-difference
    form with weight r^{7-n} plus first-difference form with midpoint weight
    3(n-3) r^{5-n}; denominator mass (2/(1-r^2))^4 r^{7-n} (cell-integrated).
    Clamped at r = R (last two nodes); the r = 0 node is pinned as well --
    the minimizer behaves like r^{n-4}, matching the determinant's regular
    branch."""
    _check_k2_dims(dims)
    n = dims.n
    R = ball.R
    h = R / N
    r = np.arange(N + 1) * h
    m = N - 1  # unknowns phi_0..phi_{N-2}; phi_{N-1} = phi_N = 0
    D2 = spsr.lil_matrix((N - 1, m))
    for i in range(1, N):
        for j, cval in ((i - 1, 1.0), (i, -2.0), (i + 1, 1.0)):
            if j < m:
                D2[i - 1, j] = cval / h ** 2
    W1 = spsr.diags(r[1:N] ** (7 - n) * h)
    A = (D2.T @ W1 @ D2).toarray()
    D1 = spsr.lil_matrix((N, m))
    for i in range(N):
        if i < m:
            D1[i, i] = -1.0 / h
        if i + 1 < m:
            D1[i, i + 1] = 1.0 / h
    rmid = r[:N] + h / 2.0
    W2 = spsr.diags(3.0 * (n - 3) * rmid ** (5 - n) * h)
    A += (D1.T @ W2 @ D1).toarray()
    wden = np.empty(m)
    for i in range(m):
        a = max(r[i] - h / 2.0, 0.0)
        b = min(r[i] + h / 2.0, R)
        xs = np.linspace(a, b, 7)
        ys = (2.0 / (1.0 - xs ** 2)) ** 4 * xs ** (7 - n)
        wden[i] = np.trapezoid(ys, xs)
    # pin phi(0) = 0: drop node 0
    return A[1:, 1:], np.diag(wden[1:]), r


def lambda_star_quotient(dims: ProblemDims, ball: GeodesicBall,
                         grid: int = 1500) -> LambdaStarReport:
    """Smallest generalized eigenvalue of the discretized quotient, Richardson
    extrapolated over two grids; the minimizer profile rides along for the
    Euler-ODE certification."""
    _check_k2_dims(dims)
    if grid < 500:
        raise ValueError("grid >= 500 required")

    def solve(N):
        A, B, r = quotient_matrices(dims, ball, N)
        A = 0.5 * (A + A.T)
        vals, vecs = sla.eigh(A, B, subset_by_index=[0, 0])
        return vals[0], vecs[:, 0], r

    lam1, _, _ = solve(grid // 2)
    lam2, vec, r = solve(grid)
    rich = (4.0 * lam2 - lam1) / 3.0
    if vec[np.argmax(np.abs(vec))] < 0:
        vec = -vec
    phi = np.concatenate([[0.0], vec, [0.0, 0.0]])
    profile = RadialProfile(r, phi, dims)
    return LambdaStarReport(rich, Method.QUOTIENT, ball, dims,
                            diagnostics={"raw": lam2, "coarse": lam1,
                                         "grid": grid, "profile": profile})


def _cheb_derivs(r: np.ndarray, u: np.ndarray, degree: int):
    """Chebyshev least-squares fit and its first four derivatives as
    callables; the global fit suppresses the eigenvector's rounding-level
    roughness before differentiation amplifies it."""
    ch = _cheb.Chebyshev.fit(r, u, degree, domain=[float(r[0]), float(r[-1])])
    return [ch.deriv(k) if k else ch for k in range(5)]


_RESIDUAL_DEGREES = (14, 18, 22, 26)


def euler_ode_residual(phi: RadialProfile, lam: float, dims: ProblemDims,
                       degrees: tuple = _RESIDUAL_DEGREES) -> float:
    """Scaled sup-norm residual of the quotient's Euler equation (evaluated
    on [0.05 R, R]):

        d4(phi) + 2(7-n) d3(phi)/r + (n^2-16n+51) d2(phi)/r^2
                + 3(n-5)(n-3) d1(phi)/r^3 - lam (2/(1-r^2))^4 phi = 0,

    reported as sup |residual| / sup (sum of term magnitudes).  Derivatives
    come from global Chebyshev least-squares fits over a short degree ladder
    (best representation wins); fits reproduce polynomial inputs exactly, so
    non-solutions keep an O(1) residual."""
    n = dims.n
    r = phi.grid
    u = phi.values
    if r.size < 200:
        raise GridTooCoarse("need at least 200 samples for the residual")
    R = r[-1]
    rr = np.linspace(0.05 * R, R, 400)
    p4 = (2.0 / (1.0 - rr ** 2)) ** 4
    best = math.inf
    for deg in degrees:
        d = _cheb_derivs(r, u, deg)
        terms = [d[4](rr),
                 2.0 * (7 - n) * d[3](rr) / rr,
                 (n * n - 16 * n + 51) * d[2](rr) / rr ** 2,
                 3.0 * (n - 5) * (n - 3) * d[1](rr) / rr ** 3,
                 -lam * p4 * d[0](rr)]
        resid = float(np.max(np.abs(sum(terms))))
        scale = float(np.max(sum(np.abs(t) for t in terms))) + 1e-300
        best = min(best, resid / scale)
    return best


def euler_ode_residual_transformed(phi: RadialProfile, lam: float,
                                   dims: ProblemDims) -> float:
    """Residual of the substituted form: with Phi = r^{4-n} phi, the equation
    becomes the radial bilaplacian eigenproblem

        Phi'''' + 2(n-1) Phi'''/r + (n-1)(n-3)(Phi''/r^2 - Phi'/r^3)
            = lam (2/(1-r^2))^4 Phi

    (the same weight power as the original: the printed sixth power does not
    transform back consistently)."""
    n = dims.n
    R = phi.grid[-1]
    # fit away from the origin: Phi = r^{4-n} phi amplifies the eigenvector's
    # rounding-level noise near r = 0 (phi ~ r^{n-4} there)
    mask = phi.grid >= 0.2 * R
    r = phi.grid[mask]
    Phi = r ** (4 - n) * phi.values[mask]
    if r.size < 200:
        raise GridTooCoarse("profile too short")
    rr = np.linspace(max(0.25 * R, float(r[0])), R, 400)
    p4 = (2.0 / (1.0 - rr ** 2)) ** 4
    best = math.inf
    for deg in _RESIDUAL_DEGREES:
        d = _cheb_derivs(r, Phi, deg)
        terms = [d[4](rr),
                 2.0 * (n - 1) * d[3](rr) / rr,
                 (n - 1.0) * (n - 3.0) * (d[2](rr) / rr ** 2 - d[1](rr) / rr ** 3),
                 -lam * p4 * d[0](rr)]
        resid = float(np.max(np.abs(sum(terms))))
        scale = float(np.max(sum(np.abs(t) for t in terms))) + 1e-300
        best = min(best, resid / scale)
    return best
