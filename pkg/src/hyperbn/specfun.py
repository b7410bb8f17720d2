"""Special functions: log-gamma, Gauss hypergeometric on the negative axis,
associated Legendre functions on the cut cosh(rho) > 1, elementary spherical
functions, and the Harish-Chandra spectral density.

The Legendre evaluations are parameterized internally by T = nu(nu+1), the
combination the hypergeometric series actually depends on; this keeps the
degree-reflection symmetry exact and covers conical degrees (T < -1/4)
without complex degree handling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import cgamma, hyp2f1_neg, legendre_series, spherical_block


class PoleAtNonPositiveInteger(ValueError):
    pass


class SeriesNonConvergence(RuntimeError):
    pass


@dataclass(frozen=True)
class LegendreParams:
    """Degree nu and order mu of P_nu^mu(cosh rho)."""
    nu: float
    mu: float

    def __post_init__(self):
        if not (math.isfinite(self.nu) and math.isfinite(self.mu)):
            raise ValueError("nu, mu must be finite")
        if self.mu > 0 and abs(1.0 - self.mu - round(1.0 - self.mu)) < 1e-14 \
                and round(1.0 - self.mu) <= 0:
            raise PoleAtNonPositiveInteger("1 - mu is a non-positive integer")

    @property
    def T(self) -> float:
        """nu(nu+1); invariant under nu <-> -nu-1."""
        return self.nu * (self.nu + 1.0)


@dataclass(frozen=True)
class HypergeometricParams:
    a: float
    b: float
    c: float

    def __post_init__(self):
        if self.c <= 0 and abs(self.c - round(self.c)) < 1e-14:
            raise ValueError("c must not be a non-positive integer")


def ln_gamma(x: float) -> tuple[float, int]:
    """log|Gamma(x)| and the sign of Gamma(x).

    Lanczos/Stirling-class accuracy (<= 1e-13 relative on [1e-3, 1e3]);
    reflection handles x < 0.
    """
    if x <= 0 and abs(x - round(x)) < 1e-300:
        raise PoleAtNonPositiveInteger(f"gamma pole at {x}")
    value = math.lgamma(x)
    if x > 0:
        return value, 1
    # Gamma alternates sign on the negative axis: negative on (-1, 0),
    # positive on (-2, -1), ...
    k = math.floor(x)
    sign = -1 if (k % 2) else 1
    return value, sign


def gamma(x: float) -> float:
    ln, sign = ln_gamma(x)
    return sign * math.exp(ln)


def hyp2f1(params: HypergeometricParams, z: float) -> float:
    """2F1(a, b; c; z) for z <= 0.

    Direct series on (-1/2, 0]; Pfaff transform w = z/(z-1) otherwise, with a
    term-ratio convergence guard and a 1e5-term budget.
    """
    if z > 0:
        raise ValueError("only z <= 0 supported")
    value, _terms, ok = hyp2f1_neg(params.a, params.b, params.c, z)
    if not ok:
        raise SeriesNonConvergence(
            f"2F1({params.a},{params.b};{params.c};{z}) budget exceeded")
    return value


def _legendre_small_rho(T: float, mu: float, rho: float) -> float:
    """Three-term small-rho expansion of coth^mu(rho/2) 2F1(...) to avoid
    evaluating the trigonometric prefactors at tiny arguments."""
    t = rho / 2.0
    c = 1.0 - mu
    g1 = -T / c
    g2 = g1 * (2.0 - T) / (2.0 * (c + 1.0))
    c2 = mu / 3.0 - g1
    c4 = (mu * mu / 18.0 - 7.0 * mu / 90.0) - g1 * mu / 3.0 - g1 / 3.0 + g2
    series = 1.0 + c2 * t * t + c4 * t ** 4
    return t ** (-mu) / math.gamma(c) * series


def _legendre_regularized_int_order(T: float, mu: float, rho: float,
                                    max_terms: int = 200000) -> float:
    """Positive-integer orders: the Gamma(1-mu) pole cancels the series pole
    of the hypergeometric factor; sum the regularized series, which starts at
    k0 = mu (the first index where Gamma(1-mu+k) is finite)."""
    m = int(round(mu))
    z = -math.sinh(rho / 2.0) ** 2
    th = math.tanh(rho / 2.0)
    if z >= -0.5:
        aa_prod = 1.0
        for j in range(m):
            aa_prod *= j * (j + 1.0) - T
        # t_{k0} = prod * z^{k0} / (Gamma(1 - mu + k0) k0!) with k0 = m
        term = aa_prod * z ** m / math.factorial(m)
        s = term
        c = 1.0 - mu
        for k in range(m, max_terms):
            term *= (k * (k + 1.0) - T) / ((c + k) * (k + 1.0)) * z
            s += term
            if abs(term) <= 1e-15 * abs(s):
                break
        return th ** (-mu) * s
    # Pfaff route with the same regularization
    nu = -0.5 + complex(0.25 + T) ** 0.5
    w = th * th
    aa = -nu
    bb = -mu - nu
    c = 1.0 - mu
    lead = complex(1.0, 0.0)
    for j in range(m):
        lead *= (aa + j) * (bb + j)
    term = lead * w ** m / math.factorial(m)
    s = term
    for k in range(m, max_terms):
        term *= (aa + k) * (bb + k) / ((c + k) * (k + 1.0)) * w
        s += term
        if abs(term) <= 1e-15 * abs(s):
            break
    ch = math.cosh(rho / 2.0)
    pref = np.exp(2.0 * nu * math.log(ch))
    return th ** (-mu) * (pref * s).real


def legendre_P_T(T: float, mu: float, rho: float) -> float:
    """P_nu^mu(cosh rho) with the degree given through T = nu(nu+1):

        P = (1/Gamma(1-mu)) coth^mu(rho/2) 2F1(-nu, nu+1; 1-mu; -sinh^2(rho/2)).

    Positive integer orders take the regularized limit (the 1/Gamma(1-mu)
    zero cancels the series pole), matching the classical continuation.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    if 1.0 - mu <= 0 and abs((1.0 - mu) - round(1.0 - mu)) < 1e-12:
        return _legendre_regularized_int_order(T, round(mu), rho)
    if rho < 1e-3:
        return _legendre_small_rho(T, mu, rho)
    return legendre_series(T, mu, rho)


def legendre_P(params: LegendreParams, rho: float) -> float:
    return legendre_P_T(params.T, params.mu, rho)


def legendre_P_raise(params: LegendreParams, rho: float) -> float:
    """P_nu^{mu+1}(cosh rho), the raised-order companion."""
    return legendre_P_T(params.T, params.mu + 1.0, rho)


def legendre_P_deriv(params: LegendreParams, rho: float) -> float:
    """d/drho P_nu^mu(cosh rho), computed through the raising relation

        d/drho P^mu = P^{mu+1} + mu coth(rho) P^mu

    (no numerical differentiation).
    """
    p = legendre_P(params, rho)
    p1 = legendre_P_raise(params, rho)
    return p1 + params.mu / math.tanh(rho) * p


def legendre_P_deriv_T(T: float, mu: float, rho: float) -> float:
    return legendre_P_T(T, mu + 1.0, rho) + mu / math.tanh(rho) * legendre_P_T(T, mu, rho)


def spherical_fn(tau: float, n: int, rho) -> float | np.ndarray:
    """Elementary spherical function phi_tau(rho) on H^n, phi_tau(0) = 1.

    Radial eigenfunction of -Laplacian with eigenvalue ((n-1)^2 + tau^2)/4;
    evaluated as 2F1((n-1+i tau)/2, (n-1-i tau)/2; n/2; -sinh^2(rho/2)).
    """
    if n < 2:
        raise ValueError("n >= 2 required")
    scalar = np.isscalar(rho)
    arr = np.atleast_1d(np.asarray(rho, dtype=float))
    out = np.ones_like(arr)
    pos = arr > 0
    if np.any(pos):
        out[pos] = spherical_block(n, float(tau), arr[pos])
    return float(out[0]) if scalar else out


_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7)


def cgamma_logabs(z: complex) -> float:
    """log|Gamma(z)| via the Lanczos sum in log space; stays finite where
    |Gamma| itself underflows (large imaginary parts)."""
    z = complex(z)
    if z.real < 0.5:
        # log|Gamma(z)| = log(pi) - log|sin(pi z)| - log|Gamma(1-z)|
        y = abs(z.imag)
        if y > 20.0:
            log_sin = math.pi * y - math.log(2.0)
        else:
            log_sin = math.log(abs(np.sin(math.pi * z)))
        return math.log(math.pi) - log_sin - cgamma_logabs(1.0 - z)
    x = _LANCZOS[0]
    for i in range(1, 9):
        x += _LANCZOS[i] / (z - 1.0 + i)
    t = z + _LANCZOS_G - 0.5
    return 0.5 * math.log(2.0 * math.pi) \
        + ((z - 0.5) * np.log(t) - t).real + math.log(abs(x))


def plancherel_density(tau: float, n: int) -> float:
    """|c(tau)|^{-2} for the Harish-Chandra c-function

        c(tau) = 2^{n-1-i tau} Gamma(n/2) Gamma(i tau)
                 / (Gamma((n-1+i tau)/2) Gamma((1+i tau)/2)).

    Even in tau; -> 0 as tau -> 0 (Gamma(i tau) pole).  Evaluated through
    log-moduli so large tau neither overflows nor underflows.
    """
    t = abs(float(tau))
    if t == 0.0:
        return 0.0
    log_c = ((n - 1) * math.log(2.0) + math.lgamma(n / 2.0)
             + cgamma_logabs(1j * t)
             - cgamma_logabs((n - 1 + 1j * t) / 2.0)
             - cgamma_logabs((1 + 1j * t) / 2.0))
    return math.exp(-2.0 * log_c)
