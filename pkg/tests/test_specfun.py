import cmath
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from hetcov.specfun import (
    g_kernel,
    gamma_fn,
    gamma_upper_inc,
    hyp1f1,
    hyp2f1_special,
    sinc_fn,
    upper_gamma,
)

mp.mp.dps = 30


# ----------------------------------------------------------------- gamma

def test_gamma_values():
    assert gamma_fn(1) == 1
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)


@pytest.mark.parametrize("a", np.linspace(-0.99, 10, 23))
def test_gamma_accuracy(a):
    if abs(a) < 1e-12:
        return
    assert gamma_fn(a) == pytest.approx(float(mp.gamma(a)), rel=1e-12)


def test_gamma_reflection_at_two_thirds():
    x = 2 / 3
    assert gamma_fn(1 + x) * gamma_fn(1 - x) == pytest.approx(math.pi * x / math.sin(math.pi * x), rel=1e-12)


@pytest.mark.parametrize("a", [0, -1, -2])
def test_gamma_poles(a):
    with pytest.raises(ValueError):
        gamma_fn(a)


# ----------------------------------------------------------------- incomplete gamma

def quad_upper_gamma(a, z):
    """Gamma(a, z) for real z > 0 by adaptive quadrature."""
    return integrate.quad(lambda t: t ** (a - 1) * math.exp(-t), z, math.inf, epsabs=0, epsrel=1e-13)[0]


def test_upper_gamma_half_at_one():
    v = gamma_upper_inc(-0.5, 1.0)
    assert v.real == pytest.approx(quad_upper_gamma(-0.5, 1.0), rel=1e-9)
    assert v.real == pytest.approx(0.1781477, abs=1e-7)


INC_GRID = [(a, z) for a in (-0.9, -2 / 3, -0.5, -0.25, -0.05)
            for z in (0.3, 2.5 + 0j, 1j * 0.7, 3 + 40j)]


@pytest.mark.parametrize("a,z", INC_GRID)
def test_upper_gamma_matches_mpmath(a, z):
    ref = complex(mp.gammainc(a, z))
    got = complex(gamma_upper_inc(a, z))
    assert abs(got - ref) <= 1e-9 * abs(ref)


@pytest.mark.parametrize("a,z", [(-0.5, 0.2), (-0.3, 1.7), (-0.8, 5.0), (-0.1, 12.0)])
def test_upper_gamma_real_vs_quadrature(a, z):
    assert complex(gamma_upper_inc(a, z)).real == pytest.approx(quad_upper_gamma(a, z), rel=1e-9)


def test_upper_gamma_decays():
    assert abs(gamma_upper_inc(-0.5, 60.0)) < 1e-26


@given(st.floats(-0.95, -0.05), st.floats(0.05, 30), st.floats(-50, 50))
def test_upper_gamma_recurrence(a, x, y):
    z = complex(x, y) if x > 0 else complex(0.1, y)
    lhs = complex(upper_gamma(a, z))
    rhs = (complex(upper_gamma(a + 1, z)) - cmath.exp(a * cmath.log(z) - z)) / a
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


def test_upper_gamma_domain():
    with pytest.raises(ValueError):
        gamma_upper_inc(-0.5, 0)
    with pytest.raises(ValueError):
        gamma_upper_inc(0.5, 1)
    with pytest.raises(ValueError):
        gamma_upper_inc(-0.5, -1 + 1j)


# ----------------------------------------------------------------- 1F1

def test_hyp1f1_zero_and_identity():
    assert complex(hyp1f1(-0.5, 0.5, 0)) == 1
    assert complex(hyp1f1(0.3, 0.3, 1j)) == pytest.approx(cmath.exp(1j), abs=1e-14)


def test_hyp1f1_series_oracle():
    a, b, z = -0.5, 0.5, 2j
    term, total, n = 1 + 0j, 1 + 0j, 0
    while True:
        term *= (a + n) / (b + n) * z / (n + 1)
        n += 1
        total += term
        if abs(term) < 1e-10 * 1e-6:
            break
    assert abs(complex(hyp1f1(a, b, z)) - total) < 1e-10


H1_GRID = [(eps, w) for eps in (2.5, 3.0, 4.0, 6.0)
           for w in (0.01, 3.0, 35.0, 900.0, 1e4)]


@pytest.mark.parametrize("eps,w", H1_GRID)
def test_hyp1f1_matches_mpmath(eps, w):
    d = 2 / eps
    ref = complex(mp.hyp1f1(-d, 1 - d, 1j * w))
    got = complex(hyp1f1(-d, 1 - d, 1j * w))
    assert abs(got - ref) <= 1e-8 * abs(ref)


@pytest.mark.parametrize("a,b,z", [(0.4, 1.7, -25 + 3j), (-0.2, 2.5, 40 + 10j), (1.5, 0.5, 60j)])
def test_hyp1f1_general_args(a, b, z):
    ref = complex(mp.hyp1f1(a, b, z))
    assert abs(complex(hyp1f1(a, b, z)) - ref) <= 1e-8 * abs(ref)


@given(st.floats(0.2, 0.9), st.floats(0, 5000))
def test_hyp1f1_conjugate_symmetry(d, w):
    a, b = -d, 1 - d
    assert complex(hyp1f1(a, b, -1j * w)) == pytest.approx(complex(hyp1f1(a, b, 1j * w)).conjugate(), rel=1e-12, abs=1e-14)


def test_hyp1f1_vectorised_agrees():
    w = np.array([0.5, 20.0, 3000.0])
    vec = hyp1f1(-0.5, 0.5, 1j * w)
    for wi, v in zip(w, vec):
        assert v == complex(hyp1f1(-0.5, 0.5, 1j * wi))


def test_hyp1f1_pole():
    with pytest.raises(ValueError):
        hyp1f1(0.5, -1.0, 1j)


# ----------------------------------------------------------------- 2F1(1, a; 1 + a; x)

def quad_2f1(a, x):
    f = lambda t: t ** (a - 1) / (1 - x * t)
    return a * integrate.quad(f, 0, 1, epsabs=0, epsrel=1e-13, limit=200)[0]


def test_hyp2f1_at_zero():
    assert hyp2f1_special(0.5, 0.0) == 1.0


def test_hyp2f1_arctan():
    assert hyp2f1_special(0.5, -1.0) == pytest.approx(math.pi / 4, rel=1e-12)


def test_hyp2f1_series_oracle():
    a, x = 2 / 3, -0.5
    s = math.fsum(a / (a + n) * x ** n for n in range(200))
    assert hyp2f1_special(a, x) == pytest.approx(s, rel=1e-10)


H2_GRID = [(a, x) for a in (0.25, 0.5, 2 / 3, 0.9) for x in (-0.01, -0.3, -0.75, -0.99, -1.0)]


@pytest.mark.parametrize("a,x", H2_GRID)
def test_hyp2f1_quadrature_grid(a, x):
    assert hyp2f1_special(a, x) == pytest.approx(quad_2f1(a, x), rel=1e-10)


@pytest.mark.parametrize("a,x", [(0.5, -1.5), (2 / 3, -4.0), (0.8, -50.0), (0.3, -1e4)])
def test_hyp2f1_beyond_unit_disk(a, x):
    ref = float(mp.hyp2f1(1, a, 1 + a, x))
    assert hyp2f1_special(a, x) == pytest.approx(ref, rel=1e-10)


def test_hyp2f1_domain():
    with pytest.raises(ValueError):
        hyp2f1_special(1.0, -0.5)
    with pytest.raises(ValueError):
        hyp2f1_special(0.5, 0.1)


# ----------------------------------------------------------------- G kernel

def quad_g(w, a):
    """int_0^inf (1 - e^{j w t}) a t^(-1-a) dt, split at t = 1 with Fourier weights on the tail."""
    f = lambda t: a * t ** (-1 - a)
    re_head = integrate.quad(lambda t: (1 - math.cos(w * t)) * f(t), 0, 1, epsabs=1e-13, limit=200)[0]
    im_head = integrate.quad(lambda t: -math.sin(w * t) * f(t), 0, 1, epsabs=1e-13, limit=200)[0]
    re_tail = 1.0 - integrate.quad(f, 1, math.inf, weight="cos", wvar=w)[0]
    im_tail = -integrate.quad(f, 1, math.inf, weight="sin", wvar=w)[0]
    return complex(re_head + re_tail, im_head + im_tail)


G_GRID = [(w, a) for a in (0.3, 0.5, 2 / 3, 0.8) for w in (0.2, 1.0, 3.0, 7.5, 20.0)]


@pytest.mark.parametrize("w,a", G_GRID)
def test_g_kernel_quadrature(w, a):
    assert abs(complex(g_kernel(w, a)) - quad_g(w, a)) < 1e-6 * max(1.0, abs(quad_g(w, a)))


def test_g_kernel_half_at_one():
    assert abs(complex(g_kernel(1.0, 0.5)) - quad_g(1.0, 0.5)) < 1e-6


def test_g_kernel_zero_and_conjugate():
    assert complex(g_kernel(0.0, 0.5)) == 0
    for w in (0.3, 4.0, 100.0):
        assert complex(g_kernel(-w, 0.6)) == pytest.approx(complex(g_kernel(w, 0.6)).conjugate(), rel=1e-14)


def test_g_kernel_signs():
    v = complex(g_kernel(2.0, 0.5))
    assert v.real > 0 and v.imag < 0


def test_g_kernel_domain():
    for a in (0.0, 1.0, 1.5):
        with pytest.raises(ValueError):
            g_kernel(1.0, a)


# ----------------------------------------------------------------- sinc

def test_sinc_values():
    assert sinc_fn(0.0) == 1.0
    assert abs(sinc_fn(math.pi)) < 1e-15
    assert sinc_fn(2 * math.pi / 3) == pytest.approx(0.4134967, abs=1e-7)


@pytest.mark.parametrize("eps", np.linspace(2.05, 8.0, 40))
def test_reflection_identity(eps):
    a = 2 / eps
    lhs = 1 / (gamma_fn(1 + a) * sinc_fn(math.pi * a))
    assert lhs == pytest.approx(gamma_fn(1 - a), rel=1e-10)
