# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled implementations of the hot kernels; mirrors _pykernels.py."""

import numpy as np

cimport numpy as cnp
from libc.math cimport (asinh, atanh, cosh, exp, fabs, isfinite, log, log1p,
                        pow, sinh, sqrt, tanh, tgamma, copysign, M_PI)

cnp.import_array()

BACKEND = "cython"

cdef double _LG = 7.0
cdef double[9] _LANCZOS = [
    0.99999999999980993, 676.5203681218851, -1259.1392167224028,
    771.32342877765313, -176.61502916214059, 12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7]


cdef double complex _cgamma(double complex z):
    cdef double complex x, t, s
    cdef int i
    if z.real < 0.5:
        s = _csin(M_PI * z)
        return M_PI / (s * _cgamma(1.0 - z))
    x = _LANCZOS[0]
    for i in range(1, 9):
        x = x + _LANCZOS[i] / (z - 1.0 + i)
    t = z + _LG - 0.5
    return sqrt(2.0 * M_PI) * _cpow(t, z - 0.5) * _cexp(-t) * x


cdef double complex _cexp(double complex z):
    cdef double e = exp(z.real)
    return e * _complex(_ccos_d(z.imag), _csin_d(z.imag))

cdef inline double complex _complex(double re, double im):
    cdef double complex out
    out.real = re
    out.imag = im
    return out

cdef extern from "math.h":
    double cos(double)
    double sin(double)
    double atan2(double, double)
    double hypot(double, double)

cdef inline double _ccos_d(double x):
    return cos(x)

cdef inline double _csin_d(double x):
    return sin(x)

cdef double complex _clog(double complex z):
    return _complex(log(hypot(z.real, z.imag)), atan2(z.imag, z.real))

cdef double complex _cpow(double complex base, double complex expo):
    return _cexp(expo * _clog(base))

cdef double complex _csin(double complex z):
    return _complex(sin(z.real) * cosh(z.imag), cos(z.real) * sinh(z.imag))

cdef inline double _cabs(double complex z):
    return hypot(z.real, z.imag)


def cgamma(z):
    """Complex gamma via the Lanczos approximation."""
    cdef double complex zz = z
    cdef double complex out = _cgamma(zz)
    return complex(out.real, out.imag)


def hyp2f1_neg(double a, double b, double c, double z,
               double rtol=1e-15, long max_terms=100000):
    """Gauss hypergeometric for real parameters and z <= 0 (Pfaff for z < -1/2).

    Returns (value, terms_used, converged); Kahan-compensated summation."""
    if z > 0.0:
        raise ValueError("hyp2f1_neg requires z <= 0")
    if z == 0.0:
        return 1.0, 1, True
    cdef double aa, bb, pref, w, s, comp, term, y, t, nxt
    cdef long k = 0
    if z >= -0.5:
        aa = a
        bb = b
        w = z
        pref = 1.0
    else:
        aa = a
        bb = c - b
        w = z / (z - 1.0)
        pref = pow(1.0 - z, -a)
    s = 1.0
    comp = 0.0
    term = 1.0
    while k < max_terms:
        term *= (aa + k) * (bb + k) / ((c + k) * (k + 1.0)) * w
        y = term - comp
        t = s + y
        comp = (t - s) - y
        s = t
        k += 1
        if fabs(term) <= rtol * fabs(s):
            nxt = term * (aa + k) * (bb + k) / ((c + k) * (k + 1.0)) * w
            if fabs(nxt) <= rtol * fabs(s):
                return pref * s, k + 1, True
    return pref * s, k + 1, False


def legendre_series(double T, double mu, double rho,
                    double rtol=1e-15, long max_terms=200000):
    """P_nu^mu(cosh rho) with T = nu(nu+1); see _pykernels.legendre_series."""
    if rho <= 0.0:
        raise ValueError("rho must be positive")
    cdef double th = tanh(rho / 2.0)
    cdef double z = -sinh(rho / 2.0) ** 2
    cdef double c = 1.0 - mu
    cdef double s, comp, term, y, t
    cdef long k
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
            if fabs(term) <= rtol * fabs(s):
                break
        return pow(th, -mu) / tgamma(c) * s
    cdef double complex nu = -0.5 + _cpow(_complex(0.25 + T, 0.0), _complex(0.5, 0.0))
    cdef double w = th * th
    cdef double complex aa = -nu
    cdef double complex bb = -mu - nu
    cdef double complex cterm = _complex(1.0, 0.0)
    cdef double complex csum = _complex(1.0, 0.0)
    for k in range(max_terms):
        cterm = cterm * (aa + k) * (bb + k) / ((c + k) * (k + 1.0)) * w
        csum = csum + cterm
        if _cabs(cterm) <= rtol * _cabs(csum):
            break
    cdef double complex pref = _cexp(2.0 * nu * log(cosh(rho / 2.0)))
    return pow(th, -mu) / tgamma(c) * (pref * csum).real


cdef double _TAU_SERIES_MAX = 12.0
cdef double _DIRECT_LOSS_CAP = 15.0
cdef double _KUMMER_Z_MIN = 1.5


cdef double _phi_direct_scalar(int n, double tau, double z,
                               double rtol=1e-16, long max_terms=400000):
    cdef double c = n / 2.0
    cdef double half = (n - 1) / 2.0
    cdef double term = 1.0, s = 1.0, mult
    cdef long k
    for k in range(max_terms):
        mult = ((half + k) * (half + k) + tau * tau / 4.0) / ((c + k) * (k + 1.0))
        term *= mult * z
        s += term
        if fabs(term) <= rtol * fabs(s) and k > 2:
            break
    return s

cdef void _phi_direct_deriv_scalar(int n, double tau, double rho,
                                   double *out_phi, double *out_dphi):
    cdef double z = -sinh(rho / 2.0) ** 2
    cdef double dz = -sinh(rho / 2.0) * cosh(rho / 2.0)
    cdef double c = n / 2.0
    cdef double half = (n - 1) / 2.0
    cdef double term = 1.0, s = 1.0, ds = 0.0, mult
    cdef long k
    for k in range(400000):
        mult = ((half + k) * (half + k) + tau * tau / 4.0) / ((c + k) * (k + 1.0))
        term *= mult * z
        s += term
        ds += term * (k + 1) / z * dz
        if fabs(term) <= 1e-16 * fabs(s) and k > 2:
            break
    out_phi[0] = s
    out_dphi[0] = ds


cdef double _phi_pfaff_scalar(int n, double tau, double z,
                              double rtol=1e-16, long max_terms=400000):
    cdef double c = n / 2.0
    cdef double half = (n - 1) / 2.0
    cdef double w = z / (z - 1.0)
    cdef double complex a = _complex(half, tau / 2.0)
    cdef double complex cb = _complex(0.5, tau / 2.0)
    cdef double complex term = _complex(1.0, 0.0)
    cdef double complex s = _complex(1.0, 0.0)
    cdef long k
    for k in range(max_terms):
        term = term * (a + k) * (cb + k) / ((c + k) * (k + 1.0)) * w
        s = s + term
        if _cabs(term) <= rtol * _cabs(s) and k > 2:
            break
    cdef double complex pref = _cexp(-a * log1p(-z))
    return (pref * s).real


cdef double _phi_kummer_scalar(int n, double tau, double z,
                               double rtol=1e-16, long max_terms=100000):
    cdef double c = n / 2.0
    cdef double half = (n - 1) / 2.0
    cdef double iz = 1.0 / z
    cdef double complex a = _complex(half, tau / 2.0)
    cdef double complex b = _complex(half, -tau / 2.0)
    cdef double complex A = _cgamma(_complex(c, 0.0)) * _cgamma(b - a) / (
        _cgamma(b) * _cgamma(_complex(c, 0.0) - a))
    cdef double complex p = a
    cdef double complex q = a - c + 1.0
    cdef double complex r2 = a - b + 1.0
    cdef double complex term = _complex(1.0, 0.0)
    cdef double complex s = _complex(1.0, 0.0)
    cdef long k
    for k in range(max_terms):
        term = term * (p + k) * (q + k) / ((r2 + k) * (k + 1.0)) * iz
        s = s + term
        if _cabs(term) <= rtol * _cabs(s) and k > 2:
            break
    cdef double complex val = A * _cexp(-a * log(-z)) * s
    return 2.0 * val.real


def spherical_block(int n, double tau, rho):
    """Spherical function phi_tau on H^n at the radii ``rho``; see
    _pykernels.spherical_block for the regime dispatch."""
    rarr = np.ascontiguousarray(np.atleast_1d(np.asarray(rho, dtype=np.float64)))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r = rarr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty_like(r)
    cdef Py_ssize_t i, m = r.shape[0]
    cdef double at = fabs(tau)
    cdef double z, z_cap, rho_start, phi0, dphi0
    cdef double E, nm1, h_base, h, rr, y0, y1
    cdef double k10, k11, k20, k21, k30, k31, k40, k41, a0, a1, b0, b1, c0, c1
    cdef double coth_r, coth_m, coth_p

    if at <= _TAU_SERIES_MAX:
        for i in range(m):
            z = -sinh(r[i] / 2.0) ** 2
            if z >= -0.5:
                out[i] = _phi_direct_scalar(n, at, z)
            elif z < -4.0 and at > 1e-8:
                out[i] = _phi_kummer_scalar(n, at, z)
            else:
                out[i] = _phi_pfaff_scalar(n, at, z)
        return out

    z_cap = (_DIRECT_LOSS_CAP / at) ** 2
    if z_cap > 0.75:
        z_cap = 0.75
    # series regimes
    cdef list band_idx = []
    for i in range(m):
        z = -sinh(r[i] / 2.0) ** 2
        if z >= -z_cap:
            out[i] = _phi_direct_scalar(n, at, z)
        elif z <= -_KUMMER_Z_MIN:
            out[i] = _phi_kummer_scalar(n, at, z)
        else:
            band_idx.append(i)
    if band_idx:
        pairs = [(r[j], j) for j in band_idx]
        pairs.sort()
        order = [j for _, j in pairs]
        rho_start = 2.0 * asinh(sqrt(z_cap) * 0.95)
        _phi_direct_deriv_scalar(n, at, rho_start, &phi0, &dphi0)
        E = ((n - 1) * (n - 1) + tau * tau) / 4.0
        nm1 = n - 1.0
        h_base = 0.008 / (at if at > 4.0 else 4.0)
        rr = rho_start
        y0 = phi0
        y1 = dphi0
        for j in order:
            while rr < r[j] - 1e-15:
                h = h_base
                if rr + h > r[j]:
                    h = r[j] - rr
                coth_r = 1.0 / tanh(rr)
                coth_m = 1.0 / tanh(rr + h / 2.0)
                coth_p = 1.0 / tanh(rr + h)
                k10 = y1
                k11 = -nm1 * coth_r * y1 - E * y0
                a0 = y0 + h / 2.0 * k10
                a1 = y1 + h / 2.0 * k11
                k20 = a1
                k21 = -nm1 * coth_m * a1 - E * a0
                b0 = y0 + h / 2.0 * k20
                b1 = y1 + h / 2.0 * k21
                k30 = b1
                k31 = -nm1 * coth_m * b1 - E * b0
                c0 = y0 + h * k30
                c1 = y1 + h * k31
                k40 = c1
                k41 = -nm1 * coth_p * c1 - E * c0
                y0 = y0 + h / 6.0 * (k10 + 2.0 * k20 + 2.0 * k30 + k40)
                y1 = y1 + h / 6.0 * (k11 + 2.0 * k21 + 2.0 * k31 + k41)
                rr += h
            out[j] = y0
    return out


def spherical_matrix(int n, taus, rho):
    """phi matrix over (taus x rho); high-tau band marched per row (the
    compiled stepping is cheap enough without cross-row batching)."""
    tarr = np.ascontiguousarray(np.asarray(taus, dtype=np.float64))
    rarr = np.ascontiguousarray(np.asarray(rho, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] tt = tarr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r = rarr
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((tt.shape[0], r.shape[0]))
    cdef Py_ssize_t i
    for i in range(tt.shape[0]):
        out[i, :] = spherical_block(n, tt[i], r)
    return out


def rk4_shoot(int kind, int n, double q, double lam, y0, double eps,
              double R, long nsteps):
    """Fixed-step RK4 for the radial Euclidean shooting systems; see
    _pykernels.rk4_shoot."""
    cdef int dim = 2 if kind == 1 else 4
    cdef double h = (R - eps) / nsteps
    cdef cnp.ndarray[cnp.float64_t, ndim=1] r_out = eps + h * np.arange(nsteps + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Y = np.empty((nsteps + 1, dim))
    cdef double[4] y
    cdef double[4] k1, k2, k3, k4, tmp
    cdef Py_ssize_t i, d
    cdef long stop = nsteps + 1
    cdef double rr
    y0arr = np.ascontiguousarray(np.asarray(y0, dtype=np.float64))
    cdef cnp.ndarray[cnp.float64_t, ndim=1] y0a = y0arr
    for d in range(dim):
        y[d] = y0a[d]
        Y[0, d] = y[d]

    cdef double nm1 = n - 1.0
    cdef bint bad

    for i in range(1, nsteps + 1):
        rr = eps + (i - 1) * h
        _shoot_rhs(kind, nm1, q, lam, rr, y, k1)
        for d in range(dim):
            tmp[d] = y[d] + h / 2.0 * k1[d]
        _shoot_rhs(kind, nm1, q, lam, rr + h / 2.0, tmp, k2)
        for d in range(dim):
            tmp[d] = y[d] + h / 2.0 * k2[d]
        _shoot_rhs(kind, nm1, q, lam, rr + h / 2.0, tmp, k3)
        for d in range(dim):
            tmp[d] = y[d] + h * k3[d]
        _shoot_rhs(kind, nm1, q, lam, rr + h, tmp, k4)
        bad = False
        for d in range(dim):
            y[d] = y[d] + h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d])
            if not isfinite(y[d]) or fabs(y[d]) > 1e100:
                bad = True
        if bad:
            stop = i
            Y[i:, :] = np.nan
            break
        for d in range(dim):
            Y[i, d] = y[d]
    return r_out, np.asarray(Y), stop


cdef void _shoot_rhs(int kind, double nm1, double q, double lam, double r,
                     double *y, double *out):
    cdef double p2 = 2.0 / (1.0 - r * r)
    cdef double f
    if kind == 1:
        f = copysign(pow(fabs(y[0]), q - 1.0), y[0]) + lam * p2 * p2 * y[0]
        out[0] = y[1]
        out[1] = -f - nm1 / r * y[1]
    else:
        f = copysign(pow(fabs(y[0]), q - 1.0), y[0]) + lam * p2 * p2 * p2 * p2 * y[0]
        out[0] = y[1]
        out[1] = y[2] - nm1 / r * y[1]
        out[2] = y[3]
        out[3] = f - nm1 / r * y[3]
