"""Scalar numba routines for the built-in valuation families and transforms.

Every family is addressed by an integer code plus a row of four float
parameters.  Tabulated laws keep their knots in shared flat arrays
(``tx``, ``tF``, ``td``) and store ``(offset, length)`` in the parameter row.
The same routines back the Python-level distribution objects and the fused
Monte Carlo kernel, so both paths evaluate identical arithmetic.

A finite cap ``b`` truncates the law to ``[lo, b]``; callers pass the
precomputed mass ``Fb = F(b)`` so the truncated cdf is ``F / Fb``.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

UNIFORM = 0
EXPONENTIAL = 1
WEIBULL = 2
MIXEXP = 3
TABULATED = 4

H_IDENTITY = 0
H_AFFINE = 1
H_POWER = 2
H_PSI = 3
H_CONSTANT = 4

DENSITY_FLOOR = 1e-12
_BISECT_MAX = 200


@njit(cache=True, error_model="numpy")
def _tab_locate(x, off, m, v):
    # index k with x[off+k] <= v < x[off+k+1], clipped to [0, m-2]
    lo = 0
    hi = m - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if x[off + mid] <= v:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True, error_model="numpy")
def _tab_eval(tx, tF, td, off, m, v, deriv):
    if v <= tx[off]:
        return 0.0
    if v >= tx[off + m - 1]:
        return 0.0 if deriv else 1.0
    k = _tab_locate(tx, off, m, v)
    x0 = tx[off + k]
    h = tx[off + k + 1] - x0
    t = (v - x0) / h
    f0 = tF[off + k]
    f1 = tF[off + k + 1]
    d0 = td[off + k]
    d1 = td[off + k + 1]
    if deriv:
        dh00 = 6.0 * t * t - 6.0 * t
        dh10 = 3.0 * t * t - 4.0 * t + 1.0
        dh01 = -dh00
        dh11 = 3.0 * t * t - 2.0 * t
        return (dh00 * f0 + dh01 * f1) / h + dh10 * d0 + dh11 * d1
    t2 = t * t
    t3 = t2 * t
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0
    h10 = t3 - 2.0 * t2 + t
    h01 = -2.0 * t3 + 3.0 * t2
    h11 = t3 - t2
    return h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1


@njit(cache=True, error_model="numpy")
def _tab_quantile(tx, tF, td, off, m, u):
    lo = 0
    hi = m - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if tF[off + mid] <= u:
            lo = mid
        else:
            hi = mid
    a = tx[off + lo]
    b = tx[off + lo + 1]
    if tF[off + lo + 1] <= tF[off + lo]:
        return a
    # safeguarded Newton on the monotone Hermite segment
    v = a + (b - a) * (u - tF[off + lo]) / (tF[off + lo + 1] - tF[off + lo])
    for _ in range(100):
        g = _tab_eval(tx, tF, td, off, m, v, False) - u
        if g > 0.0:
            b = v
        else:
            a = v
        dg = _tab_eval(tx, tF, td, off, m, v, True)
        step_ok = False
        if dg > 0.0:
            vn = v - g / dg
            if a < vn < b:
                step_ok = True
        if not step_ok:
            vn = 0.5 * (a + b)
        if abs(vn - v) <= 1e-15 * max(1.0, abs(v)):
            return vn
        v = vn
    return v


@njit(cache=True, error_model="numpy")
def base_cdf(fam, p, tx, tF, td, v):
    if fam == UNIFORM:
        if v <= p[0]:
            return 0.0
        if v >= p[1]:
            return 1.0
        return (v - p[0]) / (p[1] - p[0])
    if v <= 0.0:
        return 0.0
    if fam == EXPONENTIAL:
        return -math.expm1(-p[0] * v)
    if fam == WEIBULL:
        return -math.expm1(-((v / p[1]) ** p[0]))
    if fam == MIXEXP:
        return 1.0 - p[0] * math.exp(-p[1] * v) - (1.0 - p[0]) * math.exp(-p[2] * v)
    return _tab_eval(tx, tF, td, int(p[0]), int(p[1]), v, False)


@njit(cache=True, error_model="numpy")
def base_sf(fam, p, tx, tF, td, v):
    # survival function computed without cancellation where a closed form exists
    if fam == UNIFORM:
        return 1.0 - base_cdf(fam, p, tx, tF, td, v)
    if v <= 0.0:
        return 1.0
    if fam == EXPONENTIAL:
        return math.exp(-p[0] * v)
    if fam == WEIBULL:
        return math.exp(-((v / p[1]) ** p[0]))
    if fam == MIXEXP:
        return p[0] * math.exp(-p[1] * v) + (1.0 - p[0]) * math.exp(-p[2] * v)
    return 1.0 - _tab_eval(tx, tF, td, int(p[0]), int(p[1]), v, False)


@njit(cache=True, error_model="numpy")
def base_pdf(fam, p, tx, tF, td, v):
    if fam == UNIFORM:
        if v < p[0] or v > p[1]:
            return 0.0
        return 1.0 / (p[1] - p[0])
    if v < 0.0:
        return 0.0
    if fam == EXPONENTIAL:
        return p[0] * math.exp(-p[0] * v)
    if fam == WEIBULL:
        if v == 0.0:
            if p[0] < 1.0:
                return math.inf
            if p[0] == 1.0:
                return 1.0 / p[1]
            return 0.0
        z = v / p[1]
        return (p[0] / p[1]) * z ** (p[0] - 1.0) * math.exp(-(z ** p[0]))
    if fam == MIXEXP:
        return p[0] * p[1] * math.exp(-p[1] * v) + (1.0 - p[0]) * p[2] * math.exp(-p[2] * v)
    return _tab_eval(tx, tF, td, int(p[0]), int(p[1]), v, True)


@njit(cache=True, error_model="numpy")
def base_quantile(fam, p, tx, tF, td, u):
    if fam == UNIFORM:
        return p[0] + u * (p[1] - p[0])
    if fam == EXPONENTIAL:
        return -math.log1p(-u) / p[0]
    if fam == WEIBULL:
        return p[1] * (-math.log1p(-u)) ** (1.0 / p[0])
    if fam == MIXEXP:
        e = -math.log1p(-u)
        a = e / max(p[1], p[2])
        b = e / min(p[1], p[2])
        if b <= a:
            return a
        target = math.log1p(-u)
        v = 0.5 * (a + b)
        for _ in range(200):
            s = base_sf(fam, p, tx, tF, td, v)
            g = math.log(s) - target
            if g > 0.0:
                a = v
            else:
                b = v
            haz = base_pdf(fam, p, tx, tF, td, v) / s
            vn = v + g / haz
            if not (a < vn < b):
                vn = 0.5 * (a + b)
            if abs(vn - v) <= 1e-15 * max(1.0, v):
                return vn
            v = vn
        return v
    return _tab_quantile(tx, tF, td, int(p[0]), int(p[1]), u)


@njit(cache=True, error_model="numpy")
def cdf(fam, p, tx, tF, td, cap, Fcap, v):
    if v >= cap:
        return 1.0
    return base_cdf(fam, p, tx, tF, td, v) / Fcap


@njit(cache=True, error_model="numpy")
def pdf(fam, p, tx, tF, td, cap, Fcap, v):
    if v > cap:
        return 0.0
    return base_pdf(fam, p, tx, tF, td, v) / Fcap


@njit(cache=True, error_model="numpy")
def quantile(fam, p, tx, tF, td, cap, Fcap, u):
    if Fcap < 1.0:
        return min(base_quantile(fam, p, tx, tF, td, u * Fcap), cap)
    return base_quantile(fam, p, tx, tF, td, u)


@njit(cache=True, error_model="numpy")
def psi(fam, p, tx, tF, td, cap, Fcap, v):
    """Virtual valuation; NaN when the density is below the floor."""
    if Fcap >= 1.0:
        if fam == UNIFORM:
            return 2.0 * v - p[1]
        if fam == EXPONENTIAL:
            return v - 1.0 / p[0]
        if fam == WEIBULL:
            if v <= 0.0:
                return -math.inf if p[0] > 1.0 else (-p[1] if p[0] == 1.0 else 0.0)
            return v - (p[1] / p[0]) * (v / p[1]) ** (1.0 - p[0])
    f = base_pdf(fam, p, tx, tF, td, v)
    if not (f > DENSITY_FLOOR):
        return math.nan
    if Fcap >= 1.0:
        s = base_sf(fam, p, tx, tF, td, v)
    else:
        s = Fcap - base_cdf(fam, p, tx, tF, td, v)
    return v - s / f


@njit(cache=True, error_model="numpy")
def support_lo(fam, p):
    if fam == UNIFORM:
        return p[0]
    return 0.0


@njit(cache=True, error_model="numpy")
def h_eval(hc, hp, fam, p, tx, tF, td, cap, Fcap, v):
    if hc == H_IDENTITY:
        return v
    if hc == H_AFFINE:
        return hp[0] + hp[1] * v
    if hc == H_POWER:
        return v ** hp[0]
    if hc == H_CONSTANT:
        return hp[0]
    lo = support_lo(fam, p)
    if v < lo:
        v = lo
    return psi(fam, p, tx, tF, td, cap, Fcap, v)


@njit(cache=True, error_model="numpy")
def h_inverse(hc, hp, fam, p, tx, tF, td, cap, Fcap, y, a, b, tol):
    """Smallest v in [a, b] with h(v) >= y, assuming h(a) < y <= h(b)."""
    if hc == H_IDENTITY:
        return y
    if hc == H_AFFINE:
        return (y - hp[0]) / hp[1]
    if hc == H_POWER:
        return y ** (1.0 / hp[0]) if y > 0.0 else 0.0
    if hc == H_PSI and Fcap >= 1.0:
        if fam == UNIFORM:
            return 0.5 * (y + p[1])
        if fam == EXPONENTIAL:
            return y + 1.0 / p[0]
    for _ in range(_BISECT_MAX):
        if b - a <= tol:
            break
        mid = 0.5 * (a + b)
        if h_eval(hc, hp, fam, p, tx, tF, td, cap, Fcap, mid) >= y:
            b = mid
        else:
            a = mid
    return b


@njit(cache=True, error_model="numpy")
def batch_quantile(fam, p, tx, tF, td, cap, Fcap, u, idx, out):
    """``out[k] = quantile(u[k])`` for every ``k`` in ``idx``.

    The family branch sits outside the loop so the closed forms stay tight.
    """
    if Fcap >= 1.0 and fam == UNIFORM:
        a = p[0]
        w = p[1] - p[0]
        for k in idx:
            out[k] = a + u[k] * w
    elif Fcap >= 1.0 and fam == EXPONENTIAL:
        s = 1.0 / p[0]
        for k in idx:
            out[k] = -math.log1p(-u[k]) * s
    elif Fcap >= 1.0 and fam == WEIBULL:
        e = 1.0 / p[0]
        for k in idx:
            out[k] = p[1] * (-math.log1p(-u[k])) ** e
    else:
        for k in idx:
            out[k] = quantile(fam, p, tx, tF, td, cap, Fcap, u[k])


@njit(cache=True, error_model="numpy")
def batch_psi(fam, p, tx, tF, td, cap, Fcap, v, idx, out):
    if Fcap >= 1.0 and fam == UNIFORM:
        for k in idx:
            out[k] = 2.0 * v[k] - p[1]
    elif Fcap >= 1.0 and fam == EXPONENTIAL:
        m = 1.0 / p[0]
        for k in idx:
            out[k] = v[k] - m
    else:
        for k in idx:
            out[k] = psi(fam, p, tx, tF, td, cap, Fcap, v[k])


@njit(cache=True, error_model="numpy")
def batch_h(hc, hp, fam, p, tx, tF, td, cap, Fcap, v, idx, out):
    if hc == H_IDENTITY:
        for k in idx:
            out[k] = v[k]
    elif hc == H_AFFINE:
        for k in idx:
            out[k] = hp[0] + hp[1] * v[k]
    elif hc == H_POWER:
        for k in idx:
            out[k] = v[k] ** hp[0]
    elif hc == H_CONSTANT:
        for k in idx:
            out[k] = hp[0]
    else:
        lo = support_lo(fam, p)
        for k in idx:
            out[k] = max(v[k], lo)
        batch_psi(fam, p, tx, tF, td, cap, Fcap, out, idx, out)


@njit(cache=True, error_model="numpy")
def vec_cdf(fam, p, tx, tF, td, cap, Fcap, v):
    out = np.empty(v.size)
    for k in range(v.size):
        out[k] = cdf(fam, p, tx, tF, td, cap, Fcap, v[k])
    return out


@njit(cache=True, error_model="numpy")
def vec_pdf(fam, p, tx, tF, td, cap, Fcap, v):
    out = np.empty(v.size)
    for k in range(v.size):
        out[k] = pdf(fam, p, tx, tF, td, cap, Fcap, v[k])
    return out


@njit(cache=True, error_model="numpy")
def vec_quantile(fam, p, tx, tF, td, cap, Fcap, u):
    out = np.empty(u.size)
    for k in range(u.size):
        out[k] = quantile(fam, p, tx, tF, td, cap, Fcap, u[k])
    return out


@njit(cache=True, error_model="numpy")
def vec_psi(fam, p, tx, tF, td, cap, Fcap, v):
    out = np.empty(v.size)
    for k in range(v.size):
        out[k] = psi(fam, p, tx, tF, td, cap, Fcap, v[k])
    return out


@njit(cache=True, error_model="numpy")
def vec_h(hc, hp, fam, p, tx, tF, td, cap, Fcap, v):
    out = np.empty(v.size)
    for k in range(v.size):
        out[k] = h_eval(hc, hp, fam, p, tx, tF, td, cap, Fcap, v[k])
    return out


@njit(cache=True, error_model="numpy")
def vec_h_inverse(hc, hp, fam, p, tx, tF, td, cap, Fcap, y, a, b, tol):
    out = np.empty(y.size)
    for k in range(y.size):
        out[k] = h_inverse(hc, hp, fam, p, tx, tF, td, cap, Fcap, y[k], a[k], b[k], tol)
    return out
