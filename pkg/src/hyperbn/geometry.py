"""Poincare ball model bookkeeping: dimensions, geodesic balls, volumes, and
radial application of the operators Delta_H, P1, P_k to tabulated profiles.

Sign convention: the radial Laplace-Beltrami operator is
Delta_H u = u'' + (n-1) coth(rho) u' (negative definite); P1 = -Delta_H
- n(n-2)/4.  The eigen-relation P1 phi_tau = ((tau^2+1)/4) phi_tau pins this
convention.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import integrate_adaptive


class PointOutsideModel(ValueError):
    pass


class GridTooCoarse(ValueError):
    pass


@dataclass(frozen=True)
class ProblemDims:
    """Spatial dimension n, operator order k, critical exponent q = 2n/(n-2k)."""
    n: int
    k: int

    def __post_init__(self):
        if self.k < 1 or self.n <= 2 * self.k:
            raise ValueError("need k >= 1 and n > 2k")

    @property
    def q(self) -> float:
        return 2.0 * self.n / (self.n - 2.0 * self.k)


@dataclass(frozen=True)
class GeodesicBall:
    """Euclidean ball-model radius R and geodesic radius rho_bar = log((1+R)/(1-R))."""
    R: float
    rho_bar: float = field(init=False)

    def __post_init__(self):
        if not (0.0 < self.R < 1.0):
            raise ValueError("need 0 < R < 1")
        object.__setattr__(self, "rho_bar", math.log((1.0 + self.R) / (1.0 - self.R)))


@dataclass
class RadialProfile:
    """Tabulated radial function: strictly increasing geodesic radii and values."""
    grid: np.ndarray
    values: np.ndarray
    dims: ProblemDims

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.grid.ndim != 1 or self.grid.shape != self.values.shape:
            raise ValueError("grid and values must be 1-d arrays of equal length")
        if self.grid.size < 4:
            raise ValueError("need at least 4 samples")
        if np.any(np.diff(self.grid) <= 0) or self.grid[0] < 0:
            raise ValueError("grid must be strictly increasing and nonnegative")


def geodesic_distance(x, y) -> float:
    """Ball-model distance: cosh d = 1 + 2|x-y|^2 / ((1-|x|^2)(1-|y|^2))."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x2 = float(x @ x)
    y2 = float(y @ y)
    if x2 >= 1.0 or y2 >= 1.0:
        raise PointOutsideModel("points must lie inside the unit ball")
    d2 = float((x - y) @ (x - y))
    arg = 1.0 + 2.0 * d2 / ((1.0 - x2) * (1.0 - y2))
    return math.acosh(max(arg, 1.0))


def sphere_area(m: int) -> float:
    """|S^m| = 2 pi^{(m+1)/2} / Gamma((m+1)/2)."""
    if m < 1:
        raise ValueError("m >= 1 required")
    return 2.0 * math.pi ** ((m + 1) / 2.0) / math.gamma((m + 1) / 2.0)


def ball_volume(rho_bar: float, n: int) -> float:
    """|S^{n-1}| * integral_0^rho_bar sinh^{n-1}(t) dt."""
    if rho_bar <= 0:
        raise ValueError("rho_bar must be positive")
    res = integrate_adaptive(lambda t: math.sinh(t) ** (n - 1), 0.0, rho_bar,
                             tol=1e-13 * max(1.0, math.sinh(rho_bar) ** (n - 1)))
    return sphere_area(n - 1) * res.value


def _check_uniform(grid: np.ndarray) -> float:
    h = np.diff(grid)
    if np.max(np.abs(h - h[0])) > 1e-10 * h[0]:
        raise ValueError("operator application requires a uniform grid")
    return float(h[0])


def _fd_weights(offsets: tuple, deriv: int) -> np.ndarray:
    """Finite-difference weights for the given node offsets (in units of h),
    exact for polynomials up to degree len(offsets)-1."""
    m = len(offsets)
    V = np.vander(np.asarray(offsets, dtype=float), m, increasing=True).T
    rhs = np.zeros(m)
    rhs[deriv] = math.factorial(deriv)
    return np.linalg.solve(V, rhs)


_W1_EDGE0 = _fd_weights((0, 1, 2, 3, 4, 5), 1)
_W2_EDGE0 = _fd_weights((0, 1, 2, 3, 4, 5), 2)
_W1_EDGE1 = _fd_weights((-1, 0, 1, 2, 3, 4), 1)
_W2_EDGE1 = _fd_weights((-1, 0, 1, 2, 3, 4), 2)


def _derivs_4th(values: np.ndarray, h: float):
    """4th-order first and second derivatives on a uniform grid; one-sided
    6-point stencils of the same order at the two nodes nearest each end."""
    u = values
    N = u.size
    if N < 7:
        raise GridTooCoarse("need at least 7 nodes for 4th-order stencils")
    d1 = np.empty(N)
    d2 = np.empty(N)
    d1[2:-2] = (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * h)
    d2[2:-2] = (-u[:-4] + 16 * u[1:-3] - 30 * u[2:-2] + 16 * u[3:-1] - u[4:]) / (12 * h * h)
    d1[0] = _W1_EDGE0 @ u[:6] / h
    d2[0] = _W2_EDGE0 @ u[:6] / (h * h)
    d1[1] = _W1_EDGE1 @ u[:6] / h
    d2[1] = _W2_EDGE1 @ u[:6] / (h * h)
    d1[-1] = -(_W1_EDGE0 @ u[-6:][::-1]) / h
    d2[-1] = _W2_EDGE0 @ u[-6:][::-1] / (h * h)
    d1[-2] = -(_W1_EDGE1 @ u[-6:][::-1]) / h
    d2[-2] = _W2_EDGE1 @ u[-6:][::-1] / (h * h)
    return d1, d2


def apply_radial_laplacian(profile: RadialProfile) -> RadialProfile:
    """Delta_H u = u'' + (n-1) coth(rho) u'; at rho = 0 the smooth limit
    Delta_H u(0) = n u''(0)."""
    n = profile.dims.n
    h = _check_uniform(profile.grid)
    d1, d2 = _derivs_4th(profile.values, h)
    rho = profile.grid
    out = np.empty_like(d1)
    pos = rho > 0
    out[pos] = d2[pos] + (n - 1) / np.tanh(rho[pos]) * d1[pos]
    if not pos.all():
        out[~pos] = n * d2[~pos]
    return RadialProfile(profile.grid.copy(), out, profile.dims)


def apply_radial_P1(profile: RadialProfile) -> RadialProfile:
    """P1 u = -Delta_H u - n(n-2)/4 u."""
    n = profile.dims.n
    lap = apply_radial_laplacian(profile)
    vals = -lap.values - n * (n - 2) / 4.0 * profile.values
    return RadialProfile(profile.grid.copy(), vals, profile.dims)


def apply_radial_Pk(profile: RadialProfile) -> RadialProfile:
    """P_k = P1 (P1 + 2) (P1 + 6) ... (P1 + k(k-1)), applied factor by factor."""
    k = profile.dims.k
    if profile.grid.size < 2 * k + 4:
        raise GridTooCoarse(f"need at least {2 * k + 4} nodes for k={k}")
    out = profile
    for j in range(k, 0, -1):
        shift = j * (j - 1)
        p1 = apply_radial_P1(out)
        vals = p1.values + shift * out.values
        out = RadialProfile(profile.grid.copy(), vals, profile.dims)
    return out
