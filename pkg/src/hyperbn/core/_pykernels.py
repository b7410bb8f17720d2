"""Pure-Python implementations of the hot kernels.

Selected automatically when the compiled extension is unavailable; the
compiled module mirrors this API exactly (see ``_fastcore.pyx``).
"""
from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_LANCZOS_G = 7.0
_LANCZOS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def cgamma(z: complex) -> complex:
    """Complex gamma via the Lanczos approximation (reflection for Re z < 0.5)."""
    z = complex(z)
    if z.real < 0.5:
        s = np.sin(np.pi * z)
        if s == 0:
            raise ZeroDivisionError("gamma pole")
        return np.pi / (s * cgamma(1.0 - z))
    x = _LANCZOS[0]
    for i in range(1, 9):
        x += _LANCZOS[i] / (z - 1.0 + i)
    t = z + _LANCZOS_G - 0.5
    return math.sqrt(2.0 * math.pi) * t ** (z - 0.5) * np.exp(-t) * x


def hyp2f1_neg(a: float, b: float, c: float, z: float,
               rtol: float = 1e-15, max_terms: int = 100000):
    """Gauss hypergeometric for real parameters and z <= 0.

    Direct series on (-0.5, 0]; Pfaff transform w = z/(z-1) in [1/3, 1)
    otherwise.  Kahan-compensated summation; returns (value, terms_used,
    converged).
    """
    if z > 0.0:
        raise ValueError("hyp2f1_neg requires z <= 0")
    if z == 0.0:
        return 1.0, 1, True
    if z >= -0.5:
        aa, bb, pref = a, b, 1.0
        w = z
    else:
        # F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1))
        aa, bb = a, c - b
        w = z / (z - 1.0)
        pref = (1.0 - z) ** (-a)
    s = 1.0
    comp = 0.0
    term = 1.0
    k = 0
    while k < max_terms:
        term *= (aa + k) * (bb + k) / ((c + k) * (k + 1.0)) * w
        y = term - comp
        t = s + y
        comp = (t - s) - y
        s = t
        k += 1
        if abs(term) <= rtol * abs(s):
            # one confirmation step guards against accidental small terms
            nxt = term * (aa + k) * (bb + k) / ((c + k) * (k + 1.0)) * w
            if abs(nxt) <= rtol * abs(s):
                return pref * s, k + 1, True
    return pref * s, k + 1, False


def legendre_series(T: float, mu: float, rho: float,
                    rtol: float = 1e-15, max_terms: int = 200000) -> float:
    """Associated Legendre P_nu^mu(cosh rho), parameterized by T = nu(nu+1).

    Series in z = -sinh^2(rho/2) whose term ratio depends on nu only through
    T, so conical degrees (T < -1/4) need no complex degree handling:

        P = coth^mu(rho/2)/Gamma(1-mu) * sum_k t_k,
        t_{k+1}/t_k = (k(k+1) - T) / ((k+1-mu)(k+1)) * z.

    For z < -0.5 the Pfaff transform with argument tanh^2(rho/2) is used
    (complex arithmetic internally, real result).
    """
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    th = math.tanh(rho / 2.0)
    z = -math.sinh(rho / 2.0) ** 2
    c = 1.0 - mu
    if z >= -0.5:
        s = 1.0
        comp = 0.0
        term = 1.0
        for k in range(max_terms):
            term *= (k * (k + 1.0) - T) / ((c + k) * (k + 1.0)) * z
            y = term - comp
            t = s + y
            comp = (t - s) - y
            s = t
            if abs(term) <= rtol * abs(s):
                break
        return th ** (-mu) / math.gamma(c) * s
    # Pfaff: F(-nu, nu+1; c; z) = cosh^{2 nu}(rho/2) F(-nu, -mu-nu; c; tanh^2(rho/2))
    nu = -0.5 + complex(0.25 + T) ** 0.5
    w = th * th
    aa = -nu
    bb = -mu - nu
    term = 1.0 + 0.0j
    s = 1.0 + 0.0j
    for k in range(max_terms):
        term *= (aa + k) * (bb + k) / ((c + k) * (k + 1.0)) * w
        s += term
        if abs(term) <= rtol * abs(s):
            break
    ch = math.cosh(rho / 2.0)
    pref = np.exp(2.0 * nu * math.log(ch))
    return th ** (-mu) / math.gamma(c) * (pref * s).real


def _phi_direct(n, tau, zs, rtol=1e-16, max_terms=400000):
    """Direct real series; reliable while tau*sqrt(|z|) stays moderate."""
    c = n / 2.0
    half = (n - 1) / 2.0
    term = np.ones_like(zs)
    s = np.ones_like(zs)
    active = np.arange(zs.size)
    k = 0
    while active.size and k < max_terms:
        mult = ((half + k) ** 2 + tau * tau / 4.0) / ((c + k) * (k + 1.0))
        term[active] = term[active] * mult * zs[active]
        s[active] += term[active]
        k += 1
        if k % 8 == 0:
            keep = np.abs(term[active]) > rtol * np.abs(s[active])
            active = active[keep]
    return s


def _phi_direct_deriv(n, tau, rho, rtol=1e-16, max_terms=400000):
    """(phi, dphi/drho) from the direct series and its term-wise derivative."""
    z = -math.sinh(rho / 2.0) ** 2
    dz = -math.sinh(rho / 2.0) * math.cosh(rho / 2.0)
    c = n / 2.0
    half = (n - 1) / 2.0
    term = 1.0
    s = 1.0
    ds = 0.0
    for k in range(max_terms):
        mult = ((half + k) ** 2 + tau * tau / 4.0) / ((c + k) * (k + 1.0))
        term *= mult * z
        s += term
        ds += term * (k + 1) / z * dz
        if abs(term) <= rtol * abs(s) and k > 2:
            break
    return s, ds


def _phi_pfaff(n, tau, zl, rtol=1e-16, max_terms=400000):
    """Pfaff-transformed complex series (small-tau only: cancels at large tau)."""
    c = n / 2.0
    half = (n - 1) / 2.0
    w = zl / (zl - 1.0)
    a = complex(half, tau / 2.0)
    cb = complex(0.5, tau / 2.0)  # c - b
    term = np.ones(zl.shape, dtype=complex)
    s = np.ones(zl.shape, dtype=complex)
    active = np.arange(zl.size)
    k = 0
    while active.size and k < max_terms:
        mult = (a + k) * (cb + k) / ((c + k) * (k + 1.0))
        term[active] = term[active] * mult * w[active]
        s[active] += term[active]
        k += 1
        if k % 8 == 0:
            keep = np.abs(term[active]) > rtol * np.abs(s[active])
            active = active[keep]
    pref = np.exp(-a * np.log1p(-zl))
    return (pref * s).real


def _phi_kummer(n, tau, zl, rtol=1e-16, max_terms=100000):
    """Kummer 1/z connection: stable at large tau, needs |z| not too small."""
    c = n / 2.0
    half = (n - 1) / 2.0
    iz = 1.0 / zl
    a = complex(half, tau / 2.0)
    b = complex(half, -tau / 2.0)
    A = cgamma(c) * cgamma(b - a) / (cgamma(b) * cgamma(c - a))
    p = a
    q = a - c + 1.0
    r2 = a - b + 1.0
    term = np.ones(zl.shape, dtype=complex)
    s = np.ones(zl.shape, dtype=complex)
    active = np.arange(zl.size)
    k = 0
    while active.size and k < max_terms:
        mult = (p + k) * (q + k) / ((r2 + k) * (k + 1.0))
        term[active] = term[active] * mult * iz[active]
        s[active] += term[active]
        k += 1
        if k % 8 == 0:
            keep = np.abs(term[active]) > rtol * np.abs(s[active])
            active = active[keep]
    val = A * np.exp(-a * np.log(-zl)) * s
    return 2.0 * val.real


def _phi_ode_march(n, tau, rho_start, phi0, dphi0, rho_targets):
    """March the spherical-function ODE phi'' + (n-1)coth(rho) phi' + E phi = 0
    from rho_start through the sorted targets with fixed-step RK4."""
    E = ((n - 1) ** 2 + tau * tau) / 4.0
    nm1 = n - 1.0
    h_base = 0.008 / max(tau, 4.0)

    def rhs(r, y0, y1):
        return y1, -nm1 / math.tanh(r) * y1 - E * y0

    out = np.empty(rho_targets.size)
    r = rho_start
    y0, y1 = phi0, dphi0
    for idx, rt in enumerate(rho_targets):
        while r < rt - 1e-15:
            h = min(h_base, rt - r)
            k10, k11 = rhs(r, y0, y1)
            k20, k21 = rhs(r + h / 2, y0 + h / 2 * k10, y1 + h / 2 * k11)
            k30, k31 = rhs(r + h / 2, y0 + h / 2 * k20, y1 + h / 2 * k21)
            k40, k41 = rhs(r + h, y0 + h * k30, y1 + h * k31)
            y0 += h / 6 * (k10 + 2 * k20 + 2 * k30 + k40)
            y1 += h / 6 * (k11 + 2 * k21 + 2 * k31 + k41)
            r += h
        out[idx] = y0
    return out


_TAU_SERIES_MAX = 12.0     # Pfaff usable below; ODE band above
_DIRECT_LOSS_CAP = 15.0    # keep direct series while tau*sqrt(|z|) <= cap
_KUMMER_Z_MIN = 1.5        # Kummer needs |z| >= this


def spherical_block(n: int, tau: float, rho: np.ndarray) -> np.ndarray:
    """Spherical function phi_tau on H^n at the radii ``rho`` (vectorized).

    phi = 2F1((n-1+i tau)/2, (n-1-i tau)/2; n/2; -sinh^2(rho/2)).  Regime
    dispatch keeps every evaluation well-conditioned: the direct series where
    tau sqrt|z| is moderate, the Kummer 1/z connection for large |z|, the
    Pfaff series at small tau, and marching the eigen-ODE across the
    remaining high-tau band (the series lose ~ e^{tau sqrt|z|} digits there).
    """
    rho = np.asarray(rho, dtype=float)
    z = -np.sinh(rho / 2.0) ** 2
    out = np.empty_like(z)
    at = abs(tau)

    if at <= _TAU_SERIES_MAX:
        direct = z >= -0.5
        kummer = (z < -4.0) & (at > 1e-8)
        pfaff = ~direct & ~kummer
        if np.any(direct):
            out[direct] = _phi_direct(n, tau, z[direct])
        if np.any(pfaff):
            out[pfaff] = _phi_pfaff(n, tau, z[pfaff])
        if np.any(kummer):
            out[kummer] = _phi_kummer(n, tau, z[kummer])
        return out

    z_direct_max = min((_DIRECT_LOSS_CAP / at) ** 2, 0.75)
    direct = z >= -z_direct_max
    kummer = z <= -_KUMMER_Z_MIN
    band = ~direct & ~kummer
    if np.any(direct):
        out[direct] = _phi_direct(n, tau, z[direct])
    if np.any(kummer):
        out[kummer] = _phi_kummer(n, tau, z[kummer])
    if np.any(band):
        rho_start = 2.0 * math.asinh(math.sqrt(z_direct_max) * 0.95)
        phi0, dphi0 = _phi_direct_deriv(n, tau, rho_start)
        idx = np.where(band)[0]
        order = np.argsort(rho[idx])
        targets = rho[idx][order]
        vals = _phi_ode_march(n, tau, rho_start, phi0, dphi0, targets)
        out[idx[order]] = vals
    return out


def spherical_matrix(n: int, taus: np.ndarray, rho: np.ndarray) -> np.ndarray:
    """phi_tau(rho) for a whole grid of taus (rows) and radii (columns).

    Same regime dispatch as ``spherical_block``, but the high-tau ODE band is
    marched once for all taus simultaneously (the eigenvalue varies per row,
    the steps are shared), which amortizes the stepping cost.
    """
    taus = np.asarray(taus, dtype=float)
    rho = np.asarray(rho, dtype=float)
    z = -np.sinh(rho / 2.0) ** 2
    out = np.empty((taus.size, rho.size))

    lo_mask = np.abs(taus) <= _TAU_SERIES_MAX
    for i in np.where(lo_mask)[0]:
        out[i] = spherical_block(n, float(taus[i]), rho)
    hi = np.where(~lo_mask)[0]
    if hi.size == 0:
        return out

    taus_hi = taus[hi]
    at_max = float(np.max(np.abs(taus_hi)))
    z_cap_min = min((_DIRECT_LOSS_CAP / at_max) ** 2, 0.75)
    rho_start = 2.0 * math.asinh(math.sqrt(z_cap_min) * 0.95)
    band_hi = 2.0 * math.asinh(math.sqrt(_KUMMER_Z_MIN))
    march_targets = rho[(rho > rho_start) & (rho < band_hi)]

    # series regimes per row
    for row, i in enumerate(hi):
        t = float(abs(taus_hi[row]))
        z_cap = min((_DIRECT_LOSS_CAP / t) ** 2, 0.75)
        direct = z >= -z_cap
        kummer = z <= -_KUMMER_Z_MIN
        if np.any(direct):
            out[i, direct] = _phi_direct(n, t, z[direct])
        if np.any(kummer):
            out[i, kummer] = _phi_kummer(n, t, z[kummer])

    if march_targets.size:
        # vectorized RK4 march across all high-tau rows
        E = ((n - 1) ** 2 + taus_hi ** 2) / 4.0
        nm1 = n - 1.0
        y0 = np.empty(taus_hi.size)
        y1 = np.empty(taus_hi.size)
        for row in range(taus_hi.size):
            y0[row], y1[row] = _phi_direct_deriv(n, float(abs(taus_hi[row])), rho_start)
        h_base = 0.008 / max(at_max, 4.0)
        r = rho_start
        vals = np.empty((taus_hi.size, march_targets.size))
        for j, rt in enumerate(march_targets):
            while r < rt - 1e-15:
                h = min(h_base, rt - r)
                coth_r = 1.0 / math.tanh(r)
                coth_m = 1.0 / math.tanh(r + h / 2.0)
                coth_p = 1.0 / math.tanh(r + h)
                k10 = y1
                k11 = -nm1 * coth_r * y1 - E * y0
                a0 = y0 + h / 2 * k10
                a1 = y1 + h / 2 * k11
                k20 = a1
                k21 = -nm1 * coth_m * a1 - E * a0
                b0 = y0 + h / 2 * k20
                b1 = y1 + h / 2 * k21
                k30 = b1
                k31 = -nm1 * coth_m * b1 - E * b0
                c0 = y0 + h * k30
                c1 = y1 + h * k31
                k40 = c1
                k41 = -nm1 * coth_p * c1 - E * c0
                y0 = y0 + h / 6 * (k10 + 2 * k20 + 2 * k30 + k40)
                y1 = y1 + h / 6 * (k11 + 2 * k21 + 2 * k31 + k41)
                r += h
            vals[:, j] = y0
        # scatter the marched values into rows that need them
        for row, i in enumerate(hi):
            t = float(abs(taus_hi[row]))
            z_cap = min((_DIRECT_LOSS_CAP / t) ** 2, 0.75)
            need = (z < -z_cap) & (z > -_KUMMER_Z_MIN)
            if np.any(need):
                cols = np.searchsorted(march_targets, rho[need])
                out[i, need] = vals[row, cols]
    return out


def rk4_shoot(kind: int, n: int, q: float, lam: float, y0: np.ndarray,
              eps: float, R: float, nsteps: int):
    """Fixed-step RK4 integration of the radial Euclidean shooting systems.

    kind=1: state (v, v'),      -lap v = |v|^{q-2} v + lam p^{2} v
    kind=2: state (v, v', w, w'), w = lap v;  lap w = |v|^{q-2} v + lam p^{4} v
    with radial lap u = u'' + (n-1)/r u' and p = 2/(1-r^2).

    Returns (r, Y, stop) with Y of shape (npts, dim); ``stop`` is the index
    at which the state became non-finite or huge (npts if none).
    """
    dim = 2 if kind == 1 else 4
    h = (R - eps) / nsteps
    r_out = eps + h * np.arange(nsteps + 1)
    Y = np.empty((nsteps + 1, dim))
    y = np.array(y0, dtype=float)
    Y[0] = y
    stop = nsteps + 1

    def rhs(r, y):
        p2 = 2.0 / (1.0 - r * r)
        if kind == 1:
            v, dv = y
            f = math.copysign(abs(v) ** (q - 1.0), v) + lam * p2 * p2 * v
            return np.array([dv, -f - (n - 1.0) / r * dv])
        v, dv, w, dw = y
        f = math.copysign(abs(v) ** (q - 1.0), v) + lam * p2 ** 4 * v
        return np.array([dv, w - (n - 1.0) / r * dv,
                         dw, f - (n - 1.0) / r * dw])

    r = eps
    for i in range(1, nsteps + 1):
        k1 = rhs(r, y)
        k2 = rhs(r + h / 2.0, y + h / 2.0 * k1)
        k3 = rhs(r + h / 2.0, y + h / 2.0 * k2)
        k4 = rhs(r + h, y + h * k3)
        y = y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        r = eps + i * h
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > 1e100:
            stop = i
            Y[i:] = np.nan
            break
        Y[i] = y
    return r_out, Y, stop
