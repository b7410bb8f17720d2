"""Numerical engines: adaptive quadrature, root finding, ODE integration and
dense symmetric generalized eigenvalue solving.

All routines are pure given their inputs and hold no shared mutable state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


class NonPositiveDecay(ValueError):
    pass


class InvalidBracket(ValueError):
    pass


class SingularShift(RuntimeError):
    pass


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int
    converged: bool = True

    def __post_init__(self):
        if self.error_estimate < 0 or self.evaluations < 1:
            raise ValueError("invalid QuadratureResult")


@dataclass(frozen=True)
class Bracket:
    lo: float
    hi: float
    f_lo: float
    f_hi: float

    def __post_init__(self):
        if not (self.lo < self.hi) or self.f_lo * self.f_hi > 0:
            raise InvalidBracket(f"not a sign-change bracket: {self}")


@dataclass
class DenseSymmetricPair:
    A: np.ndarray
    B: np.ndarray
    size: int = field(init=False)

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        if self.A.shape != self.B.shape or self.A.ndim != 2:
            raise ValueError("A, B must be square matrices of equal shape")
        self.size = self.A.shape[0]
        scale = max(np.abs(self.A).max(), 1e-300)
        if np.abs(self.A - self.A.T).max() > 1e-12 * scale:
            raise ValueError("A not symmetric to 1e-12 relative")
        scale_b = max(np.abs(self.B).max(), 1e-300)
        if np.abs(self.B - self.B.T).max() > 1e-12 * scale_b:
            raise ValueError("B not symmetric")
        try:
            sla.cholesky(self.B, lower=True)
        except sla.LinAlgError as exc:
            raise ValueError("B not positive definite") from exc


# Gauss-Legendre embedded pair (10/21 points) for the adaptive rule.
_XG10, _WG10 = np.polynomial.legendre.leggauss(10)
_XG21, _WG21 = np.polynomial.legendre.leggauss(21)


def _gl_pair(f, a, b):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    f10 = np.array([f(mid + half * x) for x in _XG10])
    f21 = np.array([f(mid + half * x) for x in _XG21])
    coarse = half * float(_WG10 @ f10)
    fine = half * float(_WG21 @ f21)
    return fine, abs(fine - coarse), 31


def _tanh_sinh(f, a, b, tol, max_level=12):
    """Double-exponential rule on (a,b); handles integrable endpoint
    singularities.  Nested trapezoid refinement in the u variable."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    umax = 4.0

    def node(u):
        s = math.sinh(u) * (math.pi / 2.0)
        x = mid + half * math.tanh(s)
        w = half * (math.pi / 2.0) * math.cosh(u) / math.cosh(s) ** 2
        return x, w

    evals = 0

    def eval_at(u):
        nonlocal evals
        x, w = node(u)
        if x <= a or x >= b or w < 1e-290:
            return 0.0
        evals += 1
        val = f(x)
        return val * w if math.isfinite(val) else 0.0

    h = 1.0
    total = eval_at(0.0)
    k = 1
    while k * h <= umax:
        total += eval_at(k * h) + eval_at(-k * h)
        k += 1
    prev = total * h
    for _ in range(max_level):
        h *= 0.5
        add = 0.0
        k = 1
        while k * h <= umax:
            add += eval_at(k * h) + eval_at(-k * h)
            k += 2
        cur = prev / 2.0 + add * h
        err = abs(cur - prev)
        if err <= max(tol, 1e-16 * abs(cur)):
            return cur, err, evals
        prev = cur
    return prev, abs(cur - prev) if max_level else abs(prev), evals


def integrate_adaptive(f, a: float, b: float, tol: float = 1e-10,
                       max_intervals: int = 4000) -> QuadratureResult:
    """Adaptive Gauss pair with recursive bisection on [a, b].

    Subintervals adjacent to an original endpoint that stall at depth >= 8
    are handed to a tanh-sinh rule, which absorbs integrable algebraic
    endpoint singularities.
    """
    if not (a < b):
        raise ValueError("requires a < b")
    if tol <= 0:
        raise ValueError("tol must be positive")
    val0, err0, n0 = _gl_pair(f, a, b)
    stack = [(a, b, val0, err0, 0)]
    total = 0.0
    total_err = 0.0
    evals = n0
    n_intervals = 1
    converged = True
    while stack:
        lo, hi, val, err, depth = stack.pop()
        if err <= tol * (hi - lo) / (b - a) or err <= 1e-16 * abs(val):
            total += val
            total_err += err
            continue
        at_end = (lo == a) or (hi == b)
        if at_end and depth >= 8:
            v, e, n = _tanh_sinh(f, lo, hi, tol * (hi - lo) / (b - a))
            total += v
            total_err += e
            evals += n
            continue
        if n_intervals >= max_intervals or depth >= 48:
            total += val
            total_err += err
            converged = converged and err <= tol
            continue
        mid = 0.5 * (lo + hi)
        v1, e1, k1 = _gl_pair(f, lo, mid)
        v2, e2, k2 = _gl_pair(f, mid, hi)
        evals += k1 + k2
        n_intervals += 1
        stack.append((lo, mid, v1, e1, depth + 1))
        stack.append((mid, hi, v2, e2, depth + 1))
    return QuadratureResult(total, total_err, evals,
                            converged and total_err <= max(tol, 1e-15 * abs(total)))


def integrate_semi_infinite(f, decay_rate: float, tol: float = 1e-10) -> QuadratureResult:
    """Integral over (0, inf) of f with |f(t)| <= C exp(-decay_rate t) tail.

    The prefactor C is estimated by sampling at t in {5, 10, 20}/decay_rate;
    the domain is truncated where the tail bound drops below tol/10.
    """
    if decay_rate <= 0:
        raise NonPositiveDecay("decay_rate must be positive")
    C = 0.0
    for t in (5.0 / decay_rate, 10.0 / decay_rate, 20.0 / decay_rate):
        ft = f(t)
        if math.isfinite(ft):
            C = max(C, abs(ft) * math.exp(decay_rate * t))
    C = max(C, 1e-300)
    T = math.log(max(10.0 * C / (decay_rate * tol), 10.0)) / decay_rate
    tail = C * math.exp(-decay_rate * T) / decay_rate
    res = integrate_adaptive(f, 0.0, T, tol=max(tol - tail, tol / 2.0))
    return QuadratureResult(res.value, res.error_estimate + tail,
                            res.evaluations + 3, res.converged)


def find_root(f, bracket: Bracket, tol: float = 1e-12, max_iter: int = 200) -> float:
    """Bisection/secant hybrid; always returns a point inside the bracket."""
    lo, hi, flo, fhi = bracket.lo, bracket.hi, bracket.f_lo, bracket.f_hi
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        # secant proposal clipped away from the ends
        if fhi != flo:
            x = hi - fhi * (hi - lo) / (fhi - flo)
        else:
            x = 0.5 * (lo + hi)
        margin = 0.1 * (hi - lo)
        if not (lo + 1e-3 * margin < x < hi - 1e-3 * margin):
            x = 0.5 * (lo + hi)
        fx = f(x)
        if fx == 0.0:
            return x
        if flo * fx < 0:
            hi, fhi = x, fx
        else:
            lo, flo = x, fx
        # force a bisection step when the bracket shrinks too slowly
        if hi - lo > 0.9 * (bracket.hi - bracket.lo):
            mid = 0.5 * (lo + hi)
            fm = f(mid)
            if flo * fm < 0:
                hi, fhi = mid, fm
            else:
                lo, flo = mid, fm
    return 0.5 * (lo + hi)


def scan_sign_changes(f, lo: float, hi: float, n_points: int) -> list[Bracket]:
    """Uniform sampling; one Bracket per sign change, in increasing order."""
    if not (lo < hi) or n_points < 2:
        raise ValueError("need lo < hi and n_points >= 2")
    xs = np.linspace(lo, hi, n_points)
    vals = [f(x) for x in xs]
    out = []
    for i in range(n_points - 1):
        v0, v1 = vals[i], vals[i + 1]
        if v0 == 0.0:
            left = xs[i - 1] if i > 0 else xs[i]
            fl = vals[i - 1] if i > 0 else v0
            if fl * v1 <= 0 and left < xs[i + 1]:
                out.append(Bracket(left, xs[i + 1], fl, v1))
        elif v0 * v1 < 0:
            out.append(Bracket(xs[i], xs[i + 1], v0, v1))
    return out


@dataclass
class Trajectory:
    ts: np.ndarray
    ys: np.ndarray
    underflow: bool = False

    def __iter__(self):
        return iter(zip(self.ts, self.ys))

    @property
    def final_state(self):
        return self.ys[-1]


# Dormand-Prince 5(4) tableau
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200,
          187 / 2100, 1 / 40)


def ode_integrate(rhs, state0, t0: float, t1: float, tol: float = 1e-10,
                  max_steps: int = 1000000) -> Trajectory:
    """Adaptive explicit Runge-Kutta (Dormand-Prince 5(4)); local error per
    step bounded by tol * (1 + |state|).  Returns the accepted-step
    trajectory; on step underflow a partial trajectory is flagged."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    y = np.atleast_1d(np.asarray(state0, dtype=float))
    t = float(t0)
    direction = 1.0 if t1 >= t0 else -1.0
    h = direction * min(abs(t1 - t0) / 16.0, 1.0)
    hmin = 1e-14 * max(abs(t1 - t0), 1.0)
    ts = [t]
    ys = [y.copy()]
    underflow = False
    steps = 0
    while (t1 - t) * direction > 0 and steps < max_steps:
        steps += 1
        if abs(h) > abs(t1 - t):
            h = t1 - t
        k = [np.asarray(rhs(t, y), dtype=float)]
        for i in range(1, 7):
            yi = y + h * sum(aij * k[j] for j, aij in enumerate(_DP_A[i]))
            k.append(np.asarray(rhs(t + _DP_C[i] * h, yi), dtype=float))
        y5 = y + h * sum(b * k[i] for i, b in enumerate(_DP_B5))
        y4 = y + h * sum(b * k[i] for i, b in enumerate(_DP_B4))
        err = float(np.max(np.abs(y5 - y4)))
        scale = tol * (1.0 + float(np.max(np.abs(y))))
        if not np.all(np.isfinite(y5)):
            err = math.inf
        if err <= scale:
            t += h
            y = y5
            ts.append(t)
            ys.append(y.copy())
        factor = 0.9 * (scale / err) ** 0.2 if err > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        if abs(h) < hmin:
            underflow = True
            break
    return Trajectory(np.array(ts), np.array(ys), underflow)


def _count_below(C: np.ndarray, sigma: float) -> bool:
    """True iff C - sigma I is positive definite (no eigenvalue <= sigma)."""
    try:
        sla.cholesky(C - sigma * np.eye(C.shape[0]), lower=True)
        return True
    except sla.LinAlgError:
        return False


def _inverse_iterate(C, sigma, x, steps=2):
    """Factor C - sigma I and apply ``steps`` inverse-iteration updates;
    retries with perturbed shifts on singular factorization."""
    n = C.shape[0]
    bump = 1e-9 * max(1.0, abs(sigma))
    for attempt in range(6):
        try:
            lu = sla.lu_factor(C - sigma * np.eye(n))
            for _ in range(steps):
                x = sla.lu_solve(lu, x)
                nrm = np.linalg.norm(x)
                if not math.isfinite(nrm) or nrm == 0.0:
                    raise SingularShift("inverse iteration diverged")
                x = x / nrm
            return x
        except (sla.LinAlgError, ValueError):
            sigma -= bump * 10 ** attempt
    raise SingularShift("could not factor shifted matrix")


def smallest_generalized_eigenvalue(pair: DenseSymmetricPair,
                                    max_iter: int = 60):
    """Smallest eigenvalue of A v = lambda B v for symmetric A, SPD B.

    Reduction to standard form C = L^-1 A L^-T via the Cholesky factor of B,
    then shifted inverse iteration (Rayleigh-driven shifts, Cholesky/LU
    solves).  Minimality of the converged eigenvalue is certified by a
    positive-definiteness check just below it, with a bisection fallback
    that re-brackets from the Gershgorin bound.  The eigenvector is returned
    B-normalized.
    """
    A, B = pair.A, pair.B
    n = pair.size
    L = sla.cholesky(B, lower=True)
    C = sla.solve_triangular(L, A, lower=True)
    C = sla.solve_triangular(L, C.T, lower=True)
    C = 0.5 * (C + C.T)
    scale = max(np.abs(C).max(), 1.0)

    x = np.ones(n) / math.sqrt(n)
    lam = float(x @ C @ x)
    resid = float(np.linalg.norm(C @ x - lam * x))
    for _ in range(max_iter):
        sigma = lam - max(2.0 * resid, 1e-9 * scale)
        x = _inverse_iterate(C, sigma, x, steps=2)
        lam = float(x @ C @ x)
        resid = float(np.linalg.norm(C @ x - lam * x))
        if resid <= 1e-13 * max(abs(lam), scale * 1e-3):
            break

    # certify smallest: C - (lam - margin) I must be positive definite
    margin = max(10.0 * resid, 1e-9 * max(abs(lam), 1.0))
    if not _count_below(C, lam - margin):
        # an eigenvalue lies below: bracket it by PD bisection from Gershgorin
        glb = float(np.min(np.diag(C) - (np.sum(np.abs(C), axis=1) - np.abs(np.diag(C)))))
        lo, hi = glb - 1.0, lam - margin
        for _ in range(80):
            if hi - lo <= 1e-8 * max(1.0, abs(hi)):
                break
            mid = 0.5 * (lo + hi)
            if _count_below(C, mid):
                lo = mid
            else:
                hi = mid
        x = _inverse_iterate(C, lo, np.ones(n) / math.sqrt(n), steps=4)
        lam = float(x @ C @ x)
        for _ in range(max_iter):
            resid = float(np.linalg.norm(C @ x - lam * x))
            if resid <= 1e-13 * max(abs(lam), scale * 1e-3):
                break
            x = _inverse_iterate(C, lam - max(2.0 * resid, 1e-12 * scale), x, steps=2)
            lam = float(x @ C @ x)

    # back-transform: v = L^-T x, B-normalize
    v = sla.solve_triangular(L.T, x, lower=False)
    bnorm = math.sqrt(float(v @ B @ v))
    v /= bnorm
    return lam, v
