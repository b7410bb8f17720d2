"""Radial solutions of the Brezis-Nirenberg problem on geodesic balls via
conformal transplantation to the Euclidean ball and shooting.

Euclidean side:  (-Delta)^k v = |v|^{q-2} v + lam p^{2k} v,  p = 2/(1-r^2),
with v = ((1-r^2)/2)^{k-n/2} u.  k=1 shoots on a = v(0); k=2 on
(a, b) = (v(0), Delta v(0)) with damped Newton on (v(R), v'(R)).
Certification: boundary residual, Nehari identity, Pohozaev identity,
positivity on (0, R).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import rk4_shoot
from .geometry import GeodesicBall, ProblemDims, RadialProfile, sphere_area


class BlowUp(RuntimeError):
    pass


class NotFound(RuntimeError):
    pass


class OddOrderUnsupported(ValueError):
    pass


@dataclass
class EuclideanProfile:
    """Radial profile in the Euclidean ball-model coordinate r in [0, 1)."""
    grid: np.ndarray
    values: np.ndarray
    dims: ProblemDims


@dataclass
class Trajectory:
    r: np.ndarray
    states: np.ndarray        # columns: v, v' (k=1) or v, v', w, w'
    stop: int                 # first invalid index; len(r) + ... if none

    @property
    def complete(self) -> bool:
        return self.stop >= self.r.size

    @property
    def first_nonpositive(self) -> int | None:
        idx = np.where(self.states[:min(self.stop, self.r.size), 0] <= 0.0)[0]
        return int(idx[0]) if idx.size else None


@dataclass
class RadialSolution:
    dims: ProblemDims
    ball: GeodesicBall
    lam: float
    trajectory: Trajectory
    shoot_params: tuple
    boundary_residual: float
    diagnostics: dict = field(default_factory=dict)

    @property
    def euclid_profile(self) -> EuclideanProfile:
        return EuclideanProfile(self.trajectory.r, self.trajectory.states[:, 0],
                                self.dims)

    @property
    def hyper_profile(self) -> RadialProfile:
        return transform_v_u(self.euclid_profile)

    def to_dict(self) -> dict:
        return {"n": self.dims.n, "k": self.dims.k, "R": self.ball.R,
                "lambda": self.lam, "shoot_params": list(self.shoot_params),
                "boundary_residual": self.boundary_residual,
                "v0": float(self.trajectory.states[0, 0]),
                "diagnostics": self.diagnostics}


def conformal_factor(r: np.ndarray, dims: ProblemDims) -> np.ndarray:
    """((1-r^2)/2)^{k-n/2}: multiplies u to give v."""
    return ((1.0 - np.asarray(r) ** 2) / 2.0) ** (dims.k - dims.n / 2.0)


def transform_u_v(profile: RadialProfile) -> EuclideanProfile:
    """Hyperbolic u(rho) -> Euclidean v(r), r = tanh(rho/2)."""
    r = np.tanh(profile.grid / 2.0)
    vals = conformal_factor(r, profile.dims) * profile.values
    return EuclideanProfile(r, vals, profile.dims)


def transform_v_u(profile: EuclideanProfile) -> RadialProfile:
    """Euclidean v(r) -> hyperbolic u(rho), rho = log((1+r)/(1-r))."""
    r = np.asarray(profile.grid)
    rho = np.log((1.0 + r) / (1.0 - r))
    vals = profile.values / conformal_factor(r, profile.dims)
    return RadialProfile(rho, vals, profile.dims)


def _nonlinearity(dims: ProblemDims, lam: float):
    q = dims.q
    two_k = 2 * dims.k

    def F(r, v):
        p = 2.0 / (1.0 - r * r)
        return math.copysign(abs(v) ** (q - 1.0), v) + lam * p ** two_k * v

    return F


def _taylor_start_k1(dims: ProblemDims, lam: float, a: float, eps: float):
    """Series v = a + c2 r^2 + c4 r^4 with coefficients computed from the
    ODE itself (-lap v = F(r, v))."""
    n = dims.n
    F = _nonlinearity(dims, lam)
    F0 = F(0.0, a)
    c2 = -F0 / (2.0 * n)
    da = 1e-6 * (abs(a) + 1.0)
    Fv = (F(0.0, a + da) - F(0.0, a - da)) / (2.0 * da)
    hr = 1e-4
    Frr = 2.0 * (F(hr, a) - F0) / (hr * hr)
    c4 = -(Fv * c2 + 0.5 * Frr) / (4.0 * n + 8.0)
    v = a + c2 * eps ** 2 + c4 * eps ** 4
    dv = 2.0 * c2 * eps + 4.0 * c4 * eps ** 3
    return np.array([v, dv])


def _taylor_start_k2(dims: ProblemDims, lam: float, a: float, b: float,
                     eps: float):
    """Series for (v, w = lap v): lap w = F(r, v), coefficients from the ODE."""
    n = dims.n
    F = _nonlinearity(dims, lam)
    F0 = F(0.0, a)
    alpha2 = b / (2.0 * n)
    d2 = F0 / (2.0 * n)
    alpha4 = d2 / (4.0 * n + 8.0)
    da = 1e-6 * (abs(a) + 1.0)
    Fv = (F(0.0, a + da) - F(0.0, a - da)) / (2.0 * da)
    hr = 1e-4
    Frr = 2.0 * (F(hr, a) - F0) / (hr * hr)
    d4 = (Fv * alpha2 + 0.5 * Frr) / (4.0 * n + 8.0)
    v = a + alpha2 * eps ** 2 + alpha4 * eps ** 4
    dv = 2.0 * alpha2 * eps + 4.0 * alpha4 * eps ** 3
    w = b + d2 * eps ** 2 + d4 * eps ** 4
    dw = 2.0 * d2 * eps + 4.0 * d4 * eps ** 3
    return np.array([v, dv, w, dw])


def shoot_k1(lam: float, dims: ProblemDims, ball: GeodesicBall, a: float,
             nsteps: int = 4000) -> Trajectory:
    """Integrate the k=1 radial system from eps = 1e-4 R to R."""
    if a <= 0:
        raise ValueError("a > 0 required for the positive branch")
    eps = 1e-4 * ball.R
    y0 = _taylor_start_k1(dims, lam, a, eps)
    r, Y, stop = rk4_shoot(1, dims.n, dims.q, lam, y0, eps, ball.R, nsteps)
    return Trajectory(r, Y, stop)


def shoot_k2(lam: float, dims: ProblemDims, ball: GeodesicBall, a: float,
             b: float, nsteps: int = 4000) -> Trajectory:
    """Integrate the k=2 radial system (v, v', w, w') from eps = 1e-4 R."""
    eps = 1e-4 * ball.R
    y0 = _taylor_start_k2(dims, lam, a, b, eps)
    r, Y, stop = rk4_shoot(2, dims.n, dims.q, lam, y0, eps, ball.R, nsteps)
    return Trajectory(r, Y, stop)


def _boundary_k2(lam, dims, ball, a, b, nsteps):
    tr = shoot_k2(lam, dims, ball, a, b, nsteps)
    if not tr.complete:
        return None, tr
    return np.array([tr.states[-1, 0], tr.states[-1, 1]]), tr


def _newton_k2(lam, dims, ball, a, b, nsteps=4000, max_iter=40,
               tol_factor=1e-8):
    """Damped Newton on (v(R), v'(R)) = 0 over (a, b)."""
    x = np.array([a, b], dtype=float)
    G, tr = _boundary_k2(lam, dims, ball, x[0], x[1], nsteps)
    if G is None:
        raise BlowUp("seed trajectory blew up")
    for _ in range(max_iter):
        scale = abs(tr.states[0, 0]) + 1e-30
        if np.max(np.abs(G)) <= tol_factor * scale:
            return x, tr
        J = np.empty((2, 2))
        ok = True
        for j in range(2):
            dx = 1e-6 * (abs(x[j]) + 1e-3)
            xp = x.copy()
            xp[j] += dx
            Gp, _ = _boundary_k2(lam, dims, ball, xp[0], xp[1], nsteps)
            if Gp is None:
                ok = False
                break
            J[:, j] = (Gp - G) / dx
        if not ok:
            raise BlowUp("Jacobian evaluation blew up")
        try:
            step = np.linalg.solve(J, -G)
        except np.linalg.LinAlgError:
            raise NotFound("singular boundary-map Jacobian")
        lam_damp = 1.0
        for _ in range(20):
            xn = x + lam_damp * step
            Gn, trn = _boundary_k2(lam, dims, ball, xn[0], xn[1], nsteps)
            if Gn is not None and np.linalg.norm(Gn) < np.linalg.norm(G):
                x, G, tr = xn, Gn, trn
                break
            lam_damp *= 0.5
        else:
            raise NotFound("Newton stalled (no descent after 20 halvings)")
    scale = abs(tr.states[0, 0]) + 1e-30
    if np.max(np.abs(G)) > tol_factor * scale:
        raise NotFound("Newton did not reach boundary tolerance")
    return x, tr


def _classify(tr: Trajectory) -> str:
    """CROSS: v hits zero before the boundary (even if it then blows up
    downward); BLOW: diverged while still positive; SURVIVE: reached R with
    positive interior."""
    fz = tr.first_nonpositive
    if fz is not None and fz < min(tr.stop, tr.r.size) - 1:
        return "cross"
    if not tr.complete:
        return "blow"
    return "survive"


def _edge_slope(lam, dims, ball, a, nsteps, bracket=None, n_bisect=90):
    """Edge of the survive/cross dichotomy in b at fixed a.

    The edge-limit trajectory decays to v(R) -> 0 through the stiff stable
    mode, so the family parameterizes v(R) = 0 solutions with the remaining
    mismatch carried by the boundary slope.  Returns
    (v'(R) at the edge, b_edge, edge trajectory) from the survive side,
    or None when no dichotomy shows.
    """
    if bracket is None:
        b_grid = -np.geomspace(1e-3, 3e4, 36) * max(a, 1e-3)
        kinds = []
        for bb in b_grid:
            kinds.append(_classify(shoot_k2(lam, dims, ball, a, float(bb), nsteps)))
        hi = lo = None
        for i in range(len(b_grid) - 1):
            if kinds[i] != "cross" and kinds[i + 1] == "cross":
                hi, lo = b_grid[i], b_grid[i + 1]
                break
        if hi is None:
            return None
    else:
        hi, lo = bracket
        if _classify(shoot_k2(lam, dims, ball, a, float(hi), nsteps)) == "cross" \
                or _classify(shoot_k2(lam, dims, ball, a, float(lo), nsteps)) != "cross":
            return _edge_slope(lam, dims, ball, a, nsteps, None, n_bisect)
    tr_edge = None
    b_keep = hi
    for _ in range(n_bisect):
        mid = -math.sqrt(hi * lo)
        tr = shoot_k2(lam, dims, ball, a, float(mid), nsteps)
        if _classify(tr) == "cross":
            lo = mid
        else:
            hi = mid
            if tr.complete:
                tr_edge = tr
                b_keep = mid
        if abs(hi - lo) <= 5e-16 * abs(lo):
            break
    if tr_edge is None:
        return None
    return float(tr_edge.states[-1, 1]), float(b_keep), tr_edge


def solve_bn(lam: float, dims: ProblemDims, ball: GeodesicBall,
             warm_start: tuple | None = None, nsteps: int = 4000) -> RadialSolution:
    """Certified positive radial solution, or NotFound.

    k=1: bisection on a for v(R) = 0 with positivity tracking.
    k=2: generic trajectories either blow up while positive or cross zero;
    at the dichotomy edge in b the trajectory touches zero tangentially at a
    radius r0(a).  The solver bisects a so the touch radius lands on R
    (nested 1-d bisections; the boundary map is too stiff for plain Newton),
    then polishes with damped Newton from the warm start (v(R), v'(R)) -> 0.
    """
    if dims.k == 1:
        return _solve_k1(lam, dims, ball, nsteps)
    if dims.k != 2:
        raise OddOrderUnsupported("solver supports k in {1, 2}")

    def finish(a, b):
        try:
            (a_fin, b_fin), tr = _newton_k2(lam, dims, ball, a, b, nsteps)
        except (BlowUp, NotFound):
            a_fin, b_fin = a, b
            tr = shoot_k2(lam, dims, ball, a, b, nsteps)
        if not tr.complete or tr.states[0, 0] <= 1e-6 \
                or np.any(tr.states[:-1, 0] <= 0):
            return None
        v0 = tr.states[0, 0]
        resid = float(max(abs(tr.states[-1, 0]), abs(tr.states[-1, 1])))
        if resid > 1e-6 * v0:
            return None
        return RadialSolution(dims, ball, lam, tr, (a_fin, b_fin), resid,
                              {"residual_over_v0": resid / v0})

    if warm_start is not None:
        sol = finish(*warm_start)
        if sol is not None:
            return sol

    scan_steps = min(nsteps, 2000)
    a_grid = np.geomspace(0.02, 50.0, 18)
    slopes = []
    bracket = None
    for a in a_grid:
        out = _edge_slope(lam, dims, ball, float(a), scan_steps, bracket)
        if out is None:
            slopes.append(None)
            bracket = None
            continue
        slope, b_edge, _ = out
        slopes.append(slope)
        bracket = (b_edge * 0.8, b_edge * 1.25)
    lo_a = hi_a = None
    for i in range(len(a_grid) - 1):
        s0, s1 = slopes[i], slopes[i + 1]
        if s0 is None or s1 is None:
            continue
        if s0 * s1 <= 0:
            lo_a, hi_a = float(a_grid[i]), float(a_grid[i + 1])
            sign_lo = s0
            break
    if lo_a is None:
        raise NotFound(
            f"no edge-slope sign change across amplitudes at lam={lam}; "
            f"slopes: {[None if s is None else round(s, 4) for s in slopes]}")
    b_edge = None
    a_fin, b_fin = hi_a, None
    for _ in range(60):
        mid = math.sqrt(lo_a * hi_a)
        out = _edge_slope(lam, dims, ball, mid, scan_steps,
                          (b_edge * 0.8, b_edge * 1.25) if b_edge else None)
        if out is None:
            raise NotFound(f"edge-slope bisection lost the bracket at a={mid}")
        slope, b_edge, _ = out
        if slope * sign_lo > 0:
            lo_a = mid
        else:
            hi_a = mid
        a_fin, b_fin = mid, b_edge
        if hi_a - lo_a <= 1e-13 * hi_a:
            break
    if nsteps != scan_steps:
        out = _edge_slope(lam, dims, ball, a_fin, nsteps,
                          (b_edge * 0.8, b_edge * 1.25) if b_edge else None)
        if out is not None:
            _, b_fin, _ = out
    sol = finish(a_fin, b_fin)
    if sol is None:
        raise NotFound(f"edge candidate at lam={lam} failed certification "
                       f"(a={a_fin:.6g}, b={b_fin:.6g})")
    return sol


def _solve_k1(lam, dims, ball, nsteps):
    """Bisection on a: v(R; a) crosses zero as the amplitude grows."""
    a_grid = np.geomspace(1e-2, 1e3, 60)
    prev = None
    bracket = None
    for a in a_grid:
        tr = shoot_k1(lam, dims, ball, a, nsteps)
        if not tr.complete:
            break
        fz = tr.first_nonpositive
        end = tr.states[-1, 0]
        if fz is not None and fz < tr.r.size - 1:
            # interior zero: overshoot; treat as negative boundary value
            end = -abs(end) if end != 0 else -1.0
        if prev is not None and prev[1] > 0 and end < 0:
            bracket = (prev[0], a)
            break
        prev = (a, end)
    if bracket is None:
        raise NotFound(f"no shooting bracket for k=1 at lam={lam}")
    lo, hi = bracket
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        tr = shoot_k1(lam, dims, ball, mid, nsteps)
        fz = tr.first_nonpositive
        end = tr.states[-1, 0]
        bad = (not tr.complete) or (fz is not None and fz < tr.r.size - 1)
        if (not bad) and end > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    a_fin = lo
    tr = shoot_k1(lam, dims, ball, a_fin, nsteps)
    v0 = tr.states[0, 0]
    resid = float(abs(tr.states[-1, 0]))
    if resid > 1e-6 * v0:
        raise NotFound(f"k=1 bisection did not meet the boundary tolerance "
                       f"(residual {resid:.2e} vs v0 {v0:.2e})")
    return RadialSolution(dims, ball, lam, tr, (a_fin,), resid,
                          {"residual_over_v0": resid / v0})


def _simpson(vals: np.ndarray, h: float) -> float:
    n = vals.size
    if n % 2 == 0:
        # trapezoid on the last cell keeps the grid untouched
        return _simpson(vals[:-1], h) + 0.5 * h * (vals[-2] + vals[-1])
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return float(h / 3.0 * (w @ vals))


def _integrals(sol_or_tr, dims: ProblemDims, lam: float):
    tr = sol_or_tr.trajectory if isinstance(sol_or_tr, RadialSolution) else sol_or_tr
    r = tr.r
    h = float(r[1] - r[0])
    area = sphere_area(dims.n - 1)
    v = tr.states[:, 0]
    q = dims.q
    p = 2.0 / (1.0 - r ** 2)
    rn = r ** (dims.n - 1)
    out = {}
    if dims.k == 2:
        w = tr.states[:, 2]
        out["energy_main"] = area * _simpson(w * w * rn, h)
        out["potential"] = area * _simpson(p ** 4 * v * v * rn, h)
    else:
        dv = tr.states[:, 1]
        out["energy_main"] = area * _simpson(dv * dv * rn, h)
        out["potential"] = area * _simpson(p ** 2 * v * v * rn, h)
    out["q_norm"] = area * _simpson(np.abs(v) ** q * rn, h)
    out["energy"] = out["energy_main"] - lam * out["potential"]
    return out


def nehari_residual(sol: RadialSolution) -> float:
    """Relative gap between I_lam[v] and the q-norm term; zero on solutions."""
    ints = _integrals(sol, sol.dims, sol.lam)
    return abs(ints["energy"] - ints["q_norm"]) / max(ints["q_norm"], 1e-300)


def pohozaev_residual(sol: RadialSolution) -> float:
    """Relative gap in the even-order boundary/bulk balance (k = 2):

        (1/2)|S^{n-1}| R^n (lap v(R))^2
            = (lam/2)|S^{n-1}| int_0^R 2k (p r^2 + 1) p^{2k} v^2 r^{n-1} dr.

    The bulk weight comes from x . grad(p^{2k}) = 2k |x|^2 p^{2k+1}
    (p = 2/(1-r^2) has grad p = x p^2), combined with the 2k p^{2k} surplus
    of the scaling balance at the critical exponent.
    """
    if sol.dims.k != 2:
        raise OddOrderUnsupported("identity implemented for even order k=2")
    tr = sol.trajectory
    r = tr.r
    h = float(r[1] - r[0])
    area = sphere_area(sol.dims.n - 1)
    R = sol.ball.R
    wR = tr.states[-1, 2]
    lhs = 0.5 * area * R ** sol.dims.n * wR * wR
    v = tr.states[:, 0]
    p = 2.0 / (1.0 - r ** 2)
    integrand = 4.0 * (p * r ** 2 + 1.0) * p ** 4 * v * v * r ** (sol.dims.n - 1)
    rhs = 0.5 * sol.lam * area * _simpson(integrand, h)
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


def rayleigh_quotient(sol_or_tr, dims: ProblemDims, lam: float) -> float:
    """I_lam[v] / ||v||_q^2 on the Euclidean side."""
    ints = _integrals(sol_or_tr, dims, lam)
    return ints["energy"] / ints["q_norm"] ** (2.0 / dims.q)


def nehari_level(sol: RadialSolution) -> float:
    """||v||_q^{q-2}: the functional level of a Nehari-normalized solution."""
    ints = _integrals(sol, sol.dims, sol.lam)
    return ints["q_norm"] ** ((sol.dims.q - 2.0) / sol.dims.q)


@dataclass
class ScanReport:
    lam: float
    dims: ProblemDims
    ball: GeodesicBall
    n_positive_trajectories: int
    n_candidates: int
    n_certified: int
    min_boundary_norm: float
    grid_shape: tuple

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "n": self.dims.n, "k": self.dims.k,
                "R": self.ball.R,
                "positive_trajectories": self.n_positive_trajectories,
                "candidates": self.n_candidates,
                "certified_solutions": self.n_certified,
                "min_boundary_norm": self.min_boundary_norm,
                "grid": list(self.grid_shape)}


def nonexistence_scan(lam: float, dims: ProblemDims, ball: GeodesicBall,
                      n_a: int = 60, n_b: int = 60,
                      a_range=(1e-2, 1e3), b_range=(1e-2, 1e3),
                      nsteps: int = 2000) -> ScanReport:
    """Full (a, b) boundary-map scan (b < 0 branch) recording whether any
    positivity-preserving trajectory approaches the clamped condition; each
    candidate cell is handed to Newton for certification."""
    if dims.k != 2:
        raise OddOrderUnsupported("scan implemented for k = 2")
    a_grid = np.geomspace(a_range[0], a_range[1], n_a)
    b_grid = -np.geomspace(b_range[0], b_range[1], n_b)
    n_pos = 0
    candidates = []
    min_norm = math.inf
    for a in a_grid:
        for b in b_grid:
            tr = shoot_k2(lam, dims, ball, float(a), float(b), nsteps)
            if not tr.complete:
                continue
            interior = tr.states[:-1, 0]
            if np.any(interior <= 0):
                continue
            n_pos += 1
            norm = max(abs(tr.states[-1, 0]), abs(tr.states[-1, 1]))
            scaled = norm / (abs(tr.states[0, 0]) + 1e-30)
            min_norm = min(min_norm, scaled)
            if scaled < 1e-2:
                candidates.append((float(a), float(b)))
    certified = 0
    for a, b in candidates[:16]:
        try:
            sol = solve_bn(lam, dims, ball, warm_start=(a, b), nsteps=nsteps)
            if sol.boundary_residual <= 1e-6 * abs(sol.trajectory.states[0, 0]):
                certified += 1
        except (NotFound, BlowUp):
            continue
    return ScanReport(lam, dims, ball, n_pos, len(candidates), certified,
                      min_norm, (n_a, n_b))
