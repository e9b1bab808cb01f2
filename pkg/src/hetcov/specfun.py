"""Special functions used by the coverage formulas.

Everything here accepts numpy arrays where it makes sense so the quadrature
code can evaluate whole node grids at once.
"""
from __future__ import annotations

import math
from typing import Union

import numpy as np

ArrayLike = Union[float, complex, np.ndarray]

_TINY = 1e-300
_EPS = 1e-16


def _is_pole(a: float) -> bool:
    return a <= 0 and float(a).is_integer()


def gamma_fn(a: float) -> float:
    """Euler gamma for real ``a`` away from the poles."""
    if _is_pole(a):
        raise ValueError(f"gamma has a pole at {a}")
    return math.gamma(a)


def rgamma(a: float) -> float:
    """1/Gamma(a), zero at the poles."""
    return 0.0 if _is_pole(a) else 1.0 / math.gamma(a)


def sinc_fn(x: ArrayLike) -> ArrayLike:
    """Unnormalised sinc, sin(x)/x."""
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x != 0
    out[nz] = np.sin(x[nz]) / x[nz]
    return out if out.ndim else float(out)


def cpow(z: ArrayLike, p: float) -> np.ndarray:
    """Principal-branch complex power z**p (arg in (-pi, pi])."""
    z = np.asarray(z, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(p * np.log(z))
    return np.where(z == 0, 0.0 if p > 0 else np.inf, out)


def _scalarize(out: np.ndarray, like) -> ArrayLike:
    return complex(out) if np.ndim(like) == 0 else out


# ---------------------------------------------------------------- incomplete gamma

def _lower_gamma_star_series(a: float, z: np.ndarray) -> np.ndarray:
    """sum_n (-z)^n / (n! (a+n)); entire in z, fine for small |z|."""
    term = np.ones_like(z)
    total = term / a
    for n in range(1, 400):
        term = term * (-z) / n
        inc = term / (a + n)
        total = total + inc
        if np.all(np.abs(inc) <= _EPS * np.maximum(np.abs(total), _TINY)):
            break
    return total


def _upper_gamma_cf(a: float, z: np.ndarray, max_iter: int = 20000) -> np.ndarray:
    """Continued fraction for Gamma(a, z), |arg z| < pi (modified Lentz)."""
    b = z + 1.0 - a
    c = np.full_like(z, 1.0 / _TINY)
    d = 1.0 / b
    h = d.copy()
    done = np.zeros(z.shape, dtype=bool)
    for i in range(1, max_iter):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = d * c
        h = np.where(done, h, h * delta)
        done |= np.abs(delta - 1.0) < 1e-15
        if done.all():
            break
    return np.exp(-z + a * np.log(z)) * h


def upper_gamma(a: float, z: ArrayLike) -> ArrayLike:
    """Gamma(a, z) for real non-integer-pole ``a`` and complex ``z`` off the cut."""
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(zz == 0):
        if a <= 0:
            raise ValueError("Gamma(a, 0) diverges for a <= 0")
    out = np.empty_like(zz)
    small = np.abs(zz) < 2.0
    if small.any():
        zs = zz[small]
        out[small] = gamma_fn(a) - cpow(zs, a) * _lower_gamma_star_series(a, zs)
    if (~small).any():
        out[~small] = _upper_gamma_cf(a, zz[~small])
    return _scalarize(out.reshape(np.shape(z)), z)


def gamma_upper_inc(a: float, z: ArrayLike) -> ArrayLike:
    """Upper incomplete gamma Gamma(a, z) for a in (-1, 0) and Re z >= 0, z != 0."""
    if not (-1.0 < a < 0.0):
        raise ValueError("order must lie in (-1, 0)")
    zz = np.asarray(z, dtype=complex)
    if np.any(zz == 0):
        raise ValueError("Gamma(a, 0) diverges for negative a")
    if np.any(zz.real < 0):
        raise ValueError("argument must have nonnegative real part")
    return upper_gamma(a, z)


# ---------------------------------------------------------------- Kummer 1F1

def _series_1f1(a: float, b: float, z: np.ndarray) -> np.ndarray:
    term = np.ones_like(z)
    total = term.copy()
    for n in range(0, 5000):
        term = term * (a + n) / (b + n) * z / (n + 1)
        total = total + term
        if np.all(np.abs(term) <= _EPS * np.maximum(np.abs(total), _TINY)):
            break
    return total


def _asymptotic_1f1(a: float, b: float, z: np.ndarray) -> np.ndarray:
    """Large-|z| expansion, each divergent sum cut at its smallest term."""
    mz = -z
    mz = np.where((mz.imag == 0) & (mz.real < 0), mz - 0j, mz)

    def tail(p: float, q: float, w: np.ndarray) -> np.ndarray:
        term = np.ones_like(w)
        total = term.copy()
        active = np.ones(w.shape, dtype=bool)
        prev = np.abs(term)
        for n in range(0, 400):
            nxt = term * (p + n) * (q + n) / (n + 1) / w
            grow = np.abs(nxt) >= prev
            active &= ~grow
            active &= np.abs(nxt) > _EPS * np.abs(total)
            if not active.any():
                break
            total = np.where(active, total + nxt, total)
            term = nxt
            prev = np.abs(nxt)
        return total

    s1 = tail(a, a - b + 1.0, mz)
    s2 = tail(b - a, 1.0 - a, z)
    part1 = rgamma(b - a) * cpow(mz, -a) * s1
    part2 = rgamma(a) * np.exp(z) * cpow(z, a - b) * s2
    return gamma_fn(b) * (part1 + part2)


def _hyp1f1_incgamma(a: float, z: np.ndarray) -> np.ndarray:
    """1F1(a; a+1; z) = a (-z)^(-a) [Gamma(a) - Gamma(a, -z)]."""
    w = -z
    return a * cpow(w, -a) * (gamma_fn(a) - np.asarray(upper_gamma(a, w)))


def hyp1f1(a: float, b: float, z: ArrayLike) -> ArrayLike:
    """Confluent hypergeometric 1F1(a; b; z) for complex z."""
    if _is_pole(b):
        raise ValueError(f"1F1 undefined for b = {b}")
    zz = np.atleast_1d(np.asarray(z, dtype=complex)).ravel()
    out = np.empty_like(zz)
    todo = np.ones(zz.shape, dtype=bool)

    if abs(b - a - 1.0) < 1e-14 and not _is_pole(a):
        # Shifted-order case: exact through the incomplete gamma function.
        route = (np.abs(zz) > 8.0) & (np.abs(zz.imag) > 0.25 * np.abs(zz))
        if route.any():
            out[route] = _hyp1f1_incgamma(a, zz[route])
            todo &= ~route

    flip = todo & (zz.real < 0)
    ar = np.where(flip, b - a, a)
    zr = np.where(flip, -zz, zz)
    pref = np.where(flip, np.exp(zz), 1.0)
    for aa in np.unique(ar[todo]):
        sel = todo & (ar == aa)
        zs = zr[sel]
        use_series = (np.abs(zs) - zs.real <= 16.0) & (np.abs(zs) <= 600.0)
        vals = np.empty_like(zs)
        if use_series.any():
            vals[use_series] = _series_1f1(aa, b, zs[use_series])
        if (~use_series).any():
            vals[~use_series] = _asymptotic_1f1(aa, b, zs[~use_series])
        out[sel] = pref[sel] * vals
    return _scalarize(out.reshape(np.shape(z)), z)


# ---------------------------------------------------------------- Gauss 2F1(1, a; 1+a; x)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(120)
_GL_V = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def hyp2f1_special(a: float, x: float) -> float:
    """2F1(1, a; 1+a; x) for a in (0, 1) and real x <= 0.

    Uses a * int_0^1 t^(a-1) / (1 - x t) dt after t = v^(4/a), which keeps
    the integrand smooth at the origin; for x < -2 the reflected expansion
    in 1/x is summed instead.
    """
    if not (0.0 < a < 1.0):
        raise ValueError("a must lie in (0, 1)")
    if x > 0:
        raise ValueError("x must be nonpositive")
    if x == 0:
        return 1.0
    if x >= -2.0:
        return float(4.0 * np.sum(_GL_W * _GL_V ** 3 / (1.0 - x * _GL_V ** (4.0 / a))))
    c = -x
    s = 0.0
    for n in range(0, 2000):
        t = (-1.0) ** n * c ** (a - 1.0 - n) / (n + 1.0 - a)
        s += t
        if abs(t) < 1e-17 * abs(s):
            break
    return a * c ** (-a) * (math.pi / math.sin(math.pi * a) - s)


def hyp2f1_shifted(b: float, x: ArrayLike) -> ArrayLike:
    """2F1(1, b; 1+b; x) for b in (0, 1) and complex x off the cut [1, inf)."""
    if not (0.0 < b < 1.0):
        raise ValueError("b must lie in (0, 1)")
    xx = np.atleast_1d(np.asarray(x, dtype=complex)).ravel()
    out = np.empty_like(xx)
    near = np.abs(xx) <= 2.0
    if near.any():
        xn = xx[near][:, None]
        vals = 4.0 * (_GL_W * _GL_V ** 3)[None, :] / (1.0 - xn * (_GL_V ** (4.0 / b))[None, :])
        out[near] = vals.sum(axis=1)
    if (~near).any():
        c = -xx[~near]
        s = np.zeros_like(c)
        term_done = np.zeros(c.shape, dtype=bool)
        for n in range(0, 4000):
            t = (-1.0) ** n * cpow(c, b - 1.0 - n) / (n + 1.0 - b)
            s = s + np.where(term_done, 0.0, t)
            term_done |= np.abs(t) < 1e-17 * np.abs(s)
            if term_done.all():
                break
        out[~near] = b * cpow(c, -b) * (math.pi / math.sin(math.pi * b) - s)
    return _scalarize(out.reshape(np.shape(x)), x)


# ---------------------------------------------------------------- G kernel

def g_kernel(omega: ArrayLike, a: float) -> ArrayLike:
    """int_0^inf (1 - exp(j omega t)) a t^(-1-a) dt = Gamma(1-a) (-j omega)^a."""
    if not (0.0 < a < 1.0):
        raise ValueError("a must lie in (0, 1)")
    w = np.asarray(omega, dtype=float)
    out = math.gamma(1.0 - a) * cpow(-1j * w, a)
    out = np.where(w == 0, 0.0 + 0j, out)
    return _scalarize(out, omega)
