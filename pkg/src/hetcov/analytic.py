"""Semi-analytic coverage probabilities.

Open-tier weights ``c_k = lambda_k * pi * P_k^d * E[psi_k^d]`` with
``d = 2 / eps_k`` appear throughout: a tier's received powers form a 1-D
Poisson process whose number of points above level p is ``c_k p^(-d)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from .equivalence import open_weights, same_eps_reduction
from .model import (
    ANALYTIC,
    CONSTANT,
    EXPONENTIAL,
    ConnectivityModel,
    CoverageReport,
    FadingDistribution,
    HetNetScenario,
    TierConfig,
    require_valid,
)
from .specfun import (
    cpow,
    g_kernel,
    gamma_fn,
    hyp1f1,
    hyp2f1_shifted,
    hyp2f1_special,
    sinc_fn,
    upper_gamma,
)


class NonConvergenceError(RuntimeError):
    """Quadrature could not reach the requested accuracy."""


@dataclass(frozen=True)
class QuadratureSpec:
    omega_max: float = 2000.0
    omega_points: int = 4096
    radial_rel_tol: float = 1e-8
    max_subdivisions: int = 400

    def __post_init__(self) -> None:
        if not self.omega_max > 0:
            raise ValueError("omega_max must be positive")
        if self.omega_points < 64:
            raise ValueError("omega_points must be at least 64")
        if not (0 < self.radial_rel_tol <= 1e-2):
            raise ValueError("radial_rel_tol must lie in (0, 1e-2]")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be positive")


DEFAULT_QUAD = QuadratureSpec()


# ----------------------------------------------------------------- helpers

def _weight(t: TierConfig) -> float:
    return t.density * math.pi * t.power ** t.delta * t.moment()


def _finish(value: float, err: float, quad: QuadratureSpec, per_tier=None) -> CoverageReport:
    tol = max(10 * quad.radial_rel_tol, 1e-6)
    if not math.isfinite(value) or value < -tol - err or value > 1 + tol + err:
        raise NonConvergenceError(f"quadrature produced {value} outside [0, 1]")
    p = min(max(value, 0.0), 1.0)
    tiers = [min(max(x, 0.0), 1.0) for x in (per_tier or [])]
    return CoverageReport(p, ANALYTIC, abs(err), tiers)


def _quad(f: Callable[[float], float], a: float, b: float, quad: QuadratureSpec) -> Tuple[float, float]:
    val, err = integrate.quad(
        f, a, b, epsabs=1e-13, epsrel=quad.radial_rel_tol, limit=quad.max_subdivisions
    )
    return val, err


def _radial_integral(coeffs, noise: float, half_eps: float, quad: QuadratureSpec) -> Tuple[float, float]:
    """int_0^inf exp(-noise v^half_eps - sum a v^p) dv, split at the integrand's own scale.

    A single adaptive pass over [0, inf) can miss the mass entirely when
    noise confines it to a tiny neighbourhood of 0.
    """
    terms = [(np.array([a]), p) for a, p in coeffs if a > 0]
    if noise > 0:
        terms.append((np.array([noise]), half_eps))

    def f(v):
        return math.exp(-noise * v ** half_eps - sum(a * v ** p for a, p in coeffs))

    edges = [0.0] + [float(_solve_radius(terms, x)[0]) for x in (0.1, 1.0, 5.0, 40.0)] + [math.inf]
    total = err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, e = _quad(f, lo, hi, quad)
        total += val
        err += e
    return total, err


def fading_nodes(dist: FadingDistribution, n: int = 48) -> Tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights for expectations over a fading law."""
    if dist.kind == CONSTANT:
        return np.array([dist.param]), np.array([1.0])
    if dist.kind == EXPONENTIAL:
        x, w = np.polynomial.laguerre.laggauss(n)
        return dist.param * x, w
    x, w = np.polynomial.hermite_e.hermegauss(n)
    return np.exp(dist.sigma_ln * x), w / math.sqrt(2 * math.pi)


def _as_complex(s) -> complex:
    return complex(s)


# ----------------------------------------------------------------- Laplace transforms

def laplace_closed_interference(sc: HetNetScenario, s) -> complex:
    """E[exp(-s I_c)] for the closed-access interference."""
    require_valid(sc)
    s = _as_complex(s)
    if s.real < 0:
        raise ValueError("need Re(s) >= 0")
    if s == 0 or sc.L == 0:
        return 1.0 + 0j
    e = 0j
    for t in sc.closed_tiers:
        d = t.delta
        e += t.density * math.pi * complex(cpow(s * t.power, d)) * t.moment() * gamma_fn(1 - d)
    return complex(np.exp(-e))


def _maxsinr_open_exponent(t: TierConfig, s: np.ndarray, u: np.ndarray) -> np.ndarray:
    """c s^d [Gamma(1-d) + d Gamma(-d, s u / gamma)], with the s -> 0 limit."""
    d = t.delta
    c = _weight(t)
    z = s * u / t.gamma
    out = np.empty(np.broadcast(s, u).shape, dtype=complex)
    s_b, z_b = np.broadcast_arrays(s, z)
    zero = z_b == 0
    if (~zero).any():
        zz = z_b[~zero]
        inc = np.asarray(upper_gamma(-d, zz))
        out[~zero] = c * cpow(s_b[~zero], d) * (gamma_fn(1 - d) + d * inc)
    if zero.any():
        u_b = np.broadcast_to(u, out.shape)[zero]
        out[zero] = c * (u_b / t.gamma) ** (-d)
    return out


def _closed_exponent(sc: HetNetScenario, s: np.ndarray) -> np.ndarray:
    e = np.zeros(np.shape(s), dtype=complex)
    for t in sc.closed_tiers:
        d = t.delta
        e = e + t.density * math.pi * t.power ** d * t.moment() * gamma_fn(1 - d) * cpow(s, d)
    return e


def _laplace_joint_maxsinr_arr(sc: HetNetScenario, s: np.ndarray, u: np.ndarray) -> np.ndarray:
    e = _closed_exponent(sc, s) + s * sc.noise
    for t in sc.open_tiers:
        if t.density > 0:
            e = e + _maxsinr_open_exponent(t, s, u)
    return np.exp(-e)


def laplace_joint_maxsinr(sc: HetNetScenario, s, u: float) -> complex:
    """E[exp(-s (I_o + I_c + eta)); max_k gamma_k M_k <= u]."""
    require_valid(sc)
    if not u > 0:
        raise ValueError("u must be positive")
    s = _as_complex(s)
    if s.real < 0:
        raise ValueError("need Re(s) >= 0")
    return complex(_laplace_joint_maxsinr_arr(sc, np.asarray(s), np.asarray(float(u))))


def _dlog_maxsinr_arr(sc: HetNetScenario, s: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.zeros(np.broadcast(s, u).shape, dtype=complex)
    for t in sc.open_tiers:
        d = t.delta
        c = _weight(t)
        out = out + c * d * t.gamma ** d * u ** (-1 - d) * np.exp(-s * u / t.gamma)
    return out


def dlog_laplace_maxsinr(sc: HetNetScenario, s, u: float) -> complex:
    """Derivative in u of log laplace_joint_maxsinr."""
    require_valid(sc)
    if not u > 0:
        raise ValueError("u must be positive")
    return complex(_dlog_maxsinr_arr(sc, np.asarray(_as_complex(s)), np.asarray(float(u))))


# nearest-BS transform ---------------------------------------------------------

def _beyond_exponent(t: TierConfig, s: np.ndarray, r: np.ndarray, nodes) -> np.ndarray:
    """(1/(lambda pi)) * log-transform of the tier interference beyond radius r.

    Equals r^2 E_psi[V g(V) - 1 + exp(-V)] with V = s P psi r^-eps and
    g(V) = gamma_lower(1-d, V) V^(d-1), i.e. the normalised lower gamma.
    """
    d = t.delta
    if t.fading.kind == EXPONENTIAL:
        z = s * t.power * t.fading.param * r ** (-t.pathloss_exp)
        return r ** 2 * z * (d / (1 - d)) * np.asarray(hyp2f1_shifted(1 - d, -z))
    psi, w = nodes
    shape = np.broadcast(s, r).shape
    acc = np.zeros(shape, dtype=complex)
    for p, wt in zip(psi, w):
        v = np.broadcast_to(s * t.power * p * r ** (-t.pathloss_exp), shape).astype(complex)
        acc = acc + wt * _lower_term(d, v)
    return r ** 2 * acc


def _lower_term(d: float, v: np.ndarray) -> np.ndarray:
    """V * gamma_lower(1-d, V) V^(d-1) - 1 + exp(-V), entire in V."""
    out = np.empty_like(v)
    small = np.abs(v) < 1.0
    if small.any():
        vs = v[small]
        # series: sum_{n>=1} (-V)^n / n! * (n ... ) written directly
        term = np.ones_like(vs)
        acc = np.zeros_like(vs)
        for n in range(1, 60):
            term = term * (-vs) / n
            acc = acc + term * (-(n) / (n - d) + 1.0)
        out[small] = acc
    if (~small).any():
        vl = v[~small]
        low = gamma_fn(1 - d) - np.asarray(upper_gamma(1 - d, vl))
        out[~small] = cpow(vl, d) * low - 1.0 + np.exp(-vl)
    return out


_NV, _NW = np.polynomial.legendre.leggauss(160)
_NV = 0.5 * (_NV + 1.0)
_NW = 0.5 * _NW


def _lognormal_partial(a: np.ndarray, b: np.ndarray, sigma: float) -> np.ndarray:
    """E[exp(-a psi); psi <= b] for psi = exp(sigma X), X standard normal."""
    x_hi = np.clip(np.log(np.maximum(b, 1e-300)) / sigma, -9.0, 9.0)
    lo = -9.0
    xs = lo + (x_hi[..., None] - lo) * _NV
    ws = (x_hi[..., None] - lo) * _NW
    vals = np.exp(-a[..., None] * np.exp(sigma * xs) - 0.5 * xs ** 2) / math.sqrt(2 * math.pi)
    return (vals * ws).sum(axis=-1)


def _nearest_tier_factor(
    t: TierConfig, s: np.ndarray, u: np.ndarray, n_nodes: int, derivative: bool
) -> np.ndarray:
    """E[exp(-s I_k); gamma_k N_k <= u] for one open tier, or its u-derivative.

    Integrates over the nearest distance r; the nearest BS's fading is
    handled in closed form (exponential) or by quadrature (log-normal).
    """
    shape = np.broadcast(s, u).shape
    lam_pi = t.density * math.pi
    if lam_pi == 0:
        return np.full(shape, 0j if derivative else 1 + 0j)
    eps = t.pathloss_exp
    fad = t.fading
    inner = fading_nodes(fad, n_nodes)
    s_b = np.broadcast_to(np.asarray(s, dtype=complex), shape)[..., None]
    u_b = np.broadcast_to(np.asarray(u, dtype=float), shape)[..., None]
    const = fad.kind == CONSTANT or (fad.kind != EXPONENTIAL and fad.param == 0)
    span = math.sqrt(60.0 / lam_pi)
    if const:
        c = fad.param if fad.kind == CONSTANT else 1.0
        r0 = (t.gamma * t.power * c / u_b) ** (1 / eps)
        if derivative:
            q = _beyond_exponent(t, s_b, r0, inner)
            val = 2 * lam_pi * r0 ** 2 / (eps * u_b) * np.exp(
                -lam_pi * r0 ** 2 - s_b * u_b / t.gamma - lam_pi * q
            )
            return val[..., 0]
        r = r0 + span * _NV ** 2
        w = span * 2 * _NV * _NW
        q = _beyond_exponent(t, s_b, r, inner)
        f = 2 * lam_pi * r * np.exp(-lam_pi * r ** 2 - lam_pi * q - s_b * t.power * c * r ** (-eps))
        return (f * w).sum(axis=-1)
    r = span * _NV ** 2
    w = span * 2 * _NV * _NW
    q = _beyond_exponent(t, s_b, r, inner)
    base = 2 * lam_pi * r * np.exp(-lam_pi * r ** 2 - lam_pi * q)
    a = s_b * t.power * r ** (-eps)
    b = u_b * r ** eps / (t.gamma * t.power)
    if derivative:
        if fad.kind == EXPONENTIAL:
            dens = np.exp(-b / fad.param) / fad.param
        else:
            sg = fad.sigma_ln
            dens = np.exp(-0.5 * (np.log(b) / sg) ** 2) / (sg * b * math.sqrt(2 * math.pi))
        part = dens * np.exp(-s_b * u_b / t.gamma) * r ** eps / (t.gamma * t.power)
    elif fad.kind == EXPONENTIAL:
        m = fad.param
        part = -np.expm1(-(a + 1 / m) * b) / (1 + a * m)
    else:
        a_f, b_f = np.broadcast_arrays(a, b)
        part = _lognormal_partial(a_f, b_f, fad.sigma_ln)
    return (base * part * w).sum(axis=-1)


def _laplace_joint_nearest_arr(sc, s, u, n_nodes=32):
    val = np.exp(-(_closed_exponent(sc, s) + s * sc.noise))
    for t in sc.open_tiers:
        val = val * _nearest_tier_factor(t, s, u, n_nodes, False)
    return val


def _dlog_nearest_arr(sc, s, u, n_nodes=32):
    out = 0j
    for t in sc.open_tiers:
        if t.density > 0:
            out = out + _nearest_tier_factor(t, s, u, n_nodes, True) / _nearest_tier_factor(
                t, s, u, n_nodes, False
            )
    return out


def _joint_nearest_arr(sc, s, u, n_nodes=32):
    """Joint transform and its u-derivative, by the product rule (no division)."""
    base = np.exp(-(_closed_exponent(sc, s) + s * sc.noise))
    facs, ders = [], []
    for t in sc.open_tiers:
        if t.density > 0:
            facs.append(_nearest_tier_factor(t, s, u, n_nodes, False))
            ders.append(_nearest_tier_factor(t, s, u, n_nodes, True))
    val = base
    for f in facs:
        val = val * f
    der = 0j
    for k, dk in enumerate(ders):
        term = base * dk
        for l, f in enumerate(facs):
            if l != k:
                term = term * f
        der = der + term
    return val, der


def _joint_maxsinr_arr(sc, s, u):
    val = _laplace_joint_maxsinr_arr(sc, s, u)
    return val, val * _dlog_maxsinr_arr(sc, s, u)


def laplace_joint_nearest(sc: HetNetScenario, s, u: float, n_nodes: int = 32) -> complex:
    """E[exp(-s (I_o + I_c + eta)); max_k gamma_k N_k <= u], N_k the nearest BS power."""
    require_valid(sc)
    if not u > 0:
        raise ValueError("u must be positive")
    s = _as_complex(s)
    if s.real < 0:
        raise ValueError("need Re(s) >= 0")
    return complex(_laplace_joint_nearest_arr(sc, np.asarray(s), np.asarray(float(u)), n_nodes))


def dlog_laplace_nearest(sc: HetNetScenario, s, u: float, n_nodes: int = 32) -> complex:
    require_valid(sc)
    if not u > 0:
        raise ValueError("u must be positive")
    return complex(_dlog_nearest_arr(sc, np.asarray(_as_complex(s)), np.asarray(float(u)), n_nodes))


# ----------------------------------------------------------------- thresholds >= 1

def coverage_beta_ge1(sc: HetNetScenario, quad: QuadratureSpec = DEFAULT_QUAD) -> CoverageReport:
    """Max-SINR (equivalently MIRP) coverage when every threshold is at least 1.

    At most one BS can clear its threshold, so coverage is a sum over tiers
    of single radial integrals (a closed form without noise and with one
    common exponent).
    """
    require_valid(sc)
    if any(t.sinr_threshold < 1 for t in sc.open_tiers):
        raise ValueError("every open-tier threshold must be at least 1")
    tiers = sc.all_tiers()
    per_tier: List[float] = []
    err = 0.0
    closed_form = sc.noise == 0 and sc.common_exponent() is not None
    for t in sc.open_tiers:
        if t.density == 0:
            per_tier.append(0.0)
            continue
        ratio = t.sinr_threshold / t.power
        pref = t.density * math.pi * t.moment() / gamma_fn(1 + t.delta)
        coeffs = [(_weight(l) * ratio ** l.delta * gamma_fn(1 - l.delta), t.pathloss_exp * l.delta / 2)
                  for l in tiers if l.density > 0]
        if closed_form:
            per_tier.append(pref / sum(a for a, _ in coeffs))
            continue
        noise = sc.noise * ratio
        half_eps = t.pathloss_exp / 2

        val, e = _radial_integral(coeffs, noise, half_eps, quad)
        per_tier.append(pref * val)
        err += pref * e
    return _finish(sum(per_tier), err, quad, per_tier)


# ----------------------------------------------------------------- MBRP with exponential fading

def f_kernel(beta: float, eps: float) -> float:
    """1/sinc(2 pi/eps) + beta^(-2/eps) (1 - 2F1(1, 2/eps; 1+2/eps; -1/beta))."""
    if not beta > 0 or not eps > 2:
        raise ValueError("need beta > 0 and eps > 2")
    d = 2.0 / eps
    return 1.0 / sinc_fn(2 * math.pi / eps) + beta ** (-d) * (1.0 - hyp2f1_special(d, -1.0 / beta))


def coverage_mbrp_exp(
    sc: HetNetScenario, biases: Optional[Sequence[float]] = None, quad: QuadratureSpec = DEFAULT_QUAD
) -> CoverageReport:
    """MBRP coverage for exponentially faded open tiers.

    Closed tiers may use any fading law.  The kernel argument carries the
    bias ratio between serving and interfering tier; with equal biases it
    reduces to ``f_kernel(beta_k, eps_l)``.
    """
    require_valid(sc)
    if biases is None:
        biases = [t.bias for t in sc.open_tiers]
    if len(biases) != sc.K or any(not b > 0 for b in biases):
        raise ValueError("need one positive bias per open tier")
    if any(t.fading.kind != EXPONENTIAL for t in sc.open_tiers):
        raise ValueError("open tiers must use exponential fading; use Monte Carlo instead")
    closed_form = sc.noise == 0 and sc.common_exponent() is not None
    per_tier: List[float] = []
    err = 0.0
    for k, t in enumerate(sc.open_tiers):
        if t.density == 0:
            per_tier.append(0.0)
            continue
        mk = t.fading.param
        ratio = t.sinr_threshold / (t.power * mk)
        coeffs = []
        for l, bl in zip(sc.open_tiers, biases):
            if l.density == 0:
                continue
            x = t.sinr_threshold * biases[k] / bl
            a = l.density * math.pi * (ratio * l.power * l.fading.param) ** l.delta * f_kernel(x, l.pathloss_exp)
            coeffs.append((a, t.pathloss_exp * l.delta / 2))
        for c in sc.closed_tiers:
            if c.density == 0:
                continue
            a = c.density * math.pi * (ratio * c.power) ** c.delta * c.moment() * gamma_fn(1 - c.delta)
            coeffs.append((a, t.pathloss_exp * c.delta / 2))
        pref = t.density * math.pi
        if closed_form:
            per_tier.append(pref / sum(a for a, _ in coeffs))
            continue
        noise = sc.noise * ratio
        half_eps = t.pathloss_exp / 2

        val, e = _radial_integral(coeffs, noise, half_eps, quad)
        per_tier.append(pref * val)
        err += pref * e
    return _finish(sum(per_tier), err, quad, per_tier)


def _association_weights(sc: HetNetScenario, biases: Sequence[float]) -> List[float]:
    if len(biases) != sc.K or any(not b > 0 for b in biases):
        raise ValueError("need one positive bias per open tier")
    return [t.power * t.fading.mean() * b for t, b in zip(sc.open_tiers, biases)]


def serving_joint_density_mbrp(sc: HetNetScenario, biases: Sequence[float], k: int, r: float) -> float:
    """Joint density of the serving tier ``k`` and its normalised path loss ``r``.

    The normalised path loss of a BS at distance x in tier l is
    x^eps_l / (P_l E[psi_l] B_l); the smallest one across tiers is served.
    """
    require_valid(sc)
    a = _association_weights(sc, biases)
    if r < 0:
        raise ValueError("r must be nonnegative")
    if r == 0:
        return 0.0 if sc.open_tiers[k].delta > 1 else math.inf
    t = sc.open_tiers[k]
    dens = t.density * math.pi * t.delta * a[k] ** t.delta * r ** (t.delta - 1)
    cum = sum(l.density * math.pi * (al * r) ** l.delta for l, al in zip(sc.open_tiers, a))
    return dens * math.exp(-cum)


def tier_pmf_mbrp(sc: HetNetScenario, biases: Optional[Sequence[float]] = None) -> List[float]:
    """Probability that each open tier serves under biased average-power association."""
    require_valid(sc)
    if biases is None:
        biases = [t.bias for t in sc.open_tiers]
    a = _association_weights(sc, biases)
    if len({t.pathloss_exp for t in sc.open_tiers}) == 1:
        w = [t.density * ak ** t.delta for t, ak in zip(sc.open_tiers, a)]
        tot = sum(w)
        return [x / tot for x in w]
    out = []
    for k in range(sc.K):
        t = sc.open_tiers[k]
        if t.density == 0:
            out.append(0.0)
            continue
        # integrate in v = r^(d_k) to remove the endpoint singularity
        dk = t.delta

        def f(v, k=k, dk=dk):
            r = v ** (1 / dk)
            return t.density * math.pi * a[k] ** dk * math.exp(
                -sum(l.density * math.pi * (al * r) ** l.delta for l, al in zip(sc.open_tiers, a))
            )

        val, _ = integrate.quad(f, 0, math.inf, epsabs=1e-14, epsrel=1e-12, limit=400)
        out.append(val)
    return out


# ----------------------------------------------------------------- MIRP

_PANEL_V, _PANEL_W = np.polynomial.legendre.leggauss(16)
_RV, _RW = np.polynomial.legendre.leggauss(256)
_RV = 0.5 * (_RV + 1.0)
_RW = 0.5 * _RW


def _omega_grid(omega_max: float, width: float, levels: int = 48) -> Tuple[np.ndarray, np.ndarray]:
    """Composite 16-point Gauss-Legendre nodes on [0, omega_max].

    The first panel is split geometrically towards 0, where fractional
    powers of omega make the integrands non-smooth.
    """
    n = max(1, int(math.ceil(omega_max / width)))
    edges = np.linspace(0.0, omega_max, n + 1)
    first = edges[1] * 2.0 ** -np.arange(levels + 1)[::-1]
    edges = np.concatenate(([0.0], first, edges[2:]))
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _PANEL_V[None, :]).ravel()
    weights = (half[:, None] * _PANEL_W[None, :]).ravel()
    return nodes, weights


def _solve_radius(coeffs: List[Tuple[np.ndarray, float]], target: float) -> np.ndarray:
    """Vectorised bisection for sum a r^p = target (a > 0 arrays, p > 0)."""
    shape = coeffs[0][0].shape
    lo = np.zeros(shape)
    hi = np.ones(shape)
    f = lambda r: sum(a * r ** p for a, p in coeffs)  # noqa: E731
    while True:
        small = f(hi) < target
        if not small.any():
            break
        hi = np.where(small, hi * 2, hi)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        big = f(mid) > target
        hi = np.where(big, mid, hi)
        lo = np.where(big, lo, mid)
    return hi


def _served_transform(
    sc: HetNetScenario, k: int, omega: np.ndarray, kernels: dict
) -> np.ndarray:
    """E[exp(j w Z); tier k holds the strongest open BS], Z = (other power + noise)/serving power.

    Integrated over the serving level; returned for every node of ``omega``.
    """
    t = sc.open_tiers[k]
    ek = t.pathloss_exp
    terms = []
    for l in sc.open_tiers:
        if l.density > 0:
            terms.append((_weight(l), ek * l.delta / 2, kernels[("o", l.delta)]))
    for c in sc.closed_tiers:
        if c.density > 0:
            terms.append((_weight(c), ek * c.delta / 2, kernels[("c", c.delta)]))
    # Work in v = r^2 so the radial weight 2 pi r dr becomes pi dv.  With
    # noise the phase exp(j w eta v^(eps/2)) is turned into decay by moving
    # the contour to the ray arg v = pi/eps_k; every interference kernel
    # keeps a positive real part there, so the rotation is legitimate.
    theta = math.pi / ek if sc.noise > 0 else 0.0
    env = [(a * np.maximum((ker * np.exp(1j * p * theta)).real, 0.0), p) for a, p, ker in terms]
    if sc.noise > 0:
        env.append((omega * sc.noise, ek / 2))
    vmax = _solve_radius(env, 60.0)
    rho = vmax[:, None] * _RV[None, :] ** 2
    w = vmax[:, None] * 2 * _RV[None, :] * _RW[None, :] * np.exp(1j * theta)
    expo = np.zeros(rho.shape, dtype=complex)
    for a, p, ker in terms:
        expo = expo - a * rho ** p * np.exp(1j * p * theta) * ker[:, None]
    if sc.noise > 0:
        expo = expo - omega[:, None] * sc.noise * rho ** (ek / 2)
    vals = np.exp(expo) * w
    return _weight(t) * vals.sum(axis=1)


def _mirp_kernels(sc: HetNetScenario, omega: np.ndarray) -> dict:
    out = {}
    for l in sc.open_tiers:
        key = ("o", l.delta)
        if key not in out:
            out[key] = np.asarray(hyp1f1(-l.delta, 1 - l.delta, 1j * omega))
    for c in sc.closed_tiers:
        key = ("c", c.delta)
        if key not in out:
            out[key] = np.asarray(g_kernel(omega, c.delta))
    return out


def _gil_pelaez_tiers(
    betas: Sequence[float],
    masses: Sequence[float],
    transforms: Sequence[np.ndarray],
    omega: np.ndarray,
    weights: np.ndarray,
    omega_max: float,
) -> Tuple[List[float], float]:
    """P(Z_k < 1/beta_k) for defective transforms H_k(w) = E[exp(j w Z_k); A_k].

    Uses mass/2 - (1/pi) int_0^inf Im(exp(-j w a) H(w)) / w dw with a one-term
    integration-by-parts tail beyond ``omega_max``.
    """
    out = []
    tail_err = 0.0
    for beta, mass, h in zip(betas, masses, transforms):
        a = 1.0 / beta
        g = np.exp(-1j * omega * a) * h / omega
        body = float(np.sum(weights * g.imag))
        h_end = h[-1]
        tail = (np.exp(-1j * omega_max * a) * h_end / omega_max / (1j * a)).imag
        out.append(0.5 * mass - (body + tail) / math.pi)
        tail_err += abs(h_end) / omega_max ** 2 / a ** 2 / math.pi
    return out, tail_err


def _panel_width(sc: HetNetScenario) -> float:
    bmin = min(t.sinr_threshold for t in sc.open_tiers)
    return min(0.5, math.pi * bmin / 2)


def coverage_mirp(sc: HetNetScenario, quad: QuadratureSpec = DEFAULT_QUAD) -> CoverageReport:
    """Coverage under maximum instantaneous received power association."""
    require_valid(sc)
    omega, wts = _omega_grid(quad.omega_max, _panel_width(sc))
    kernels = _mirp_kernels(sc, omega)
    zero = np.array([0.0])
    kern0 = {key: np.array([1.0 + 0j if key[0] == "o" else 0j]) for key in kernels}
    masses, transforms, betas = [], [], []
    for k, t in enumerate(sc.open_tiers):
        if t.density == 0:
            continue
        masses.append(float(_served_transform(sc, k, zero, kern0)[0].real))
        transforms.append(_served_transform(sc, k, omega, kernels))
        betas.append(t.sinr_threshold)
    per, err = _gil_pelaez_tiers(betas, masses, transforms, omega, wts, quad.omega_max)
    full = []
    it = iter(per)
    for t in sc.open_tiers:
        full.append(next(it) if t.density > 0 else 0.0)
    return _finish(sum(full), err, quad, full)


def coverage_mirp_same_eps(sc: HetNetScenario, quad: QuadratureSpec = DEFAULT_QUAD) -> CoverageReport:
    """MIRP coverage for a common path-loss exponent via the normalised two-tier form."""
    require_valid(sc)
    eps = sc.common_exponent()
    if eps is None:
        raise ValueError("all path-loss exponents must be equal")
    red = same_eps_reduction(sc)
    d = 2.0 / eps
    omega, wts = _omega_grid(quad.omega_max, _panel_width(sc))
    f11 = np.asarray(hyp1f1(-d, 1 - d, 1j * omega))
    kern = f11 + (red.closed_density * np.asarray(g_kernel(omega, d)) if red.closed_density > 0 else 0)
    if red.noise == 0:
        h = 1.0 / kern
    else:
        # same contour rotation as in _served_transform
        rot = np.exp(1j * math.pi / eps)
        env = [(np.maximum((kern * rot).real, 1e-300) * math.pi, 1.0), (omega * red.noise, eps / 2)]
        vmax = _solve_radius(env, 60.0)
        rho = vmax[:, None] * _RV[None, :] ** 2
        w = vmax[:, None] * 2 * _RV[None, :] * _RW[None, :] * rot
        vals = np.exp(-omega[:, None] * red.noise * rho ** (eps / 2) - math.pi * rho * rot * kern[:, None])
        h = math.pi * (vals * w).sum(axis=1)
    ws = open_weights(sc)
    tot = sum(ws)
    betas = [t.sinr_threshold for t in sc.open_tiers]
    per, err = _gil_pelaez_tiers(betas, [1.0] * sc.K, [h] * sc.K, omega, wts, quad.omega_max)
    per = [x * wk / tot for x, wk in zip(per, ws)]
    return _finish(sum(per), err, quad, per)


# ----------------------------------------------------------------- general thresholds

def _envelope_omega(sc: HetNetScenario, target: float = 40.0) -> float:
    """Frequency beyond which |E[exp(j w I)]| < exp(-target) for the full interference."""
    coeffs = []
    for t in sc.all_tiers():
        if t.density > 0:
            d = t.delta
            coeffs.append((np.array([_weight(t) * gamma_fn(1 - d) * math.cos(math.pi * d / 2)]), d))
    return float(_solve_radius(coeffs, target)[0])


def coverage_general(
    sc: HetNetScenario,
    model: ConnectivityModel,
    quad: QuadratureSpec = DEFAULT_QUAD,
    tail_mass: float = 0.05,
    y_nodes_per_decade: int = 24,
) -> CoverageReport:
    """Max-SINR or nearest-BS coverage for arbitrary thresholds.

    With Y the largest gamma-weighted candidate power and X the total
    received power plus noise, coverage is P(X < Y).  For each level y the
    probability P(X < y, Y in dy) is recovered from the u-derivative of the
    joint transform by Gil-Pelaez inversion; levels above the point where
    P(Y > y) drops below ``tail_mass`` are counted as covered.  This path is
    slow, especially for the nearest-BS model.
    """
    require_valid(sc)
    if model.variant == ConnectivityModel.MAXSINR:
        joint = _joint_maxsinr_arr
        chunk = 200_000
    elif model.variant == ConnectivityModel.NEAREST:
        def joint(sc_, s, u):
            return _joint_nearest_arr(sc_, s, u, 24)
        chunk = 4_000
    else:
        raise ValueError("coverage_general handles the max-SINR and nearest-BS models only")
    if all(t.density == 0 for t in sc.open_tiers):
        return _finish(0.0, 0.0, quad)

    def cdf(y: float) -> float:
        return float(joint(sc, np.asarray(0j), np.asarray(y))[0].real)

    def level_above(mass: float, start: float) -> float:
        """log y with P(Y > y) = mass, by bisection in log y."""
        hi = start
        while 1.0 - cdf(hi) > mass:
            hi *= 4.0
        b_lo, b_hi = math.log(hi / 4.0), math.log(hi)
        for _ in range(40):
            m = 0.5 * (b_lo + b_hi)
            if 1.0 - cdf(math.exp(m)) > mass:
                b_lo = m
            else:
                b_hi = m
        return b_hi

    lo = 1.0
    while cdf(lo) > 1e-15:
        lo /= 4.0
    a_lo = math.log(lo)
    a_mid = level_above(2.0 * tail_mass, lo)
    a_hi = level_above(tail_mass, math.exp(a_mid))

    def log_nodes(x0: float, x1: float) -> Tuple[np.ndarray, np.ndarray]:
        n = max(2, int(math.ceil((x1 - x0) / math.log(10) * y_nodes_per_decade / 16)))
        edges = np.linspace(x0, x1, n + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        return (mid[:, None] + half[:, None] * _PANEL_V[None, :]).ravel(), (half[:, None] * _PANEL_W[None, :]).ravel()

    kappa = max(t.gamma for t in sc.open_tiers)
    om_env = _envelope_omega(sc)
    def level_density(y: float) -> float:
        """P(X < y, Y in dy) / dy."""
        om_top = min(om_env + 40.0 * kappa / y, 1e7)
        width = min(math.pi / (2.0 * (y + sc.noise)), om_top / 64.0)
        omega, wts = _omega_grid(om_top, width)
        acc = 0.0
        for i in range(0, omega.size, chunk):
            om = omega[i:i + chunk]
            s = -1j * om
            phi = joint(sc, s, np.asarray(y))[1]
            acc += float(np.sum(wts[i:i + chunk] * (np.exp(-1j * om * y) * phi).imag / om))
        zero = np.asarray(0j)
        f_y = float(joint(sc, zero, np.asarray(y))[1].real)
        return 0.5 * f_y - acc / math.pi

    def integrate_levels(x0: float, x1: float) -> float:
        ly, lw = log_nodes(x0, x1)
        return float(sum(wy * math.exp(v) * level_density(math.exp(v)) for v, wy in zip(ly, lw)))

    inner = integrate_levels(a_lo, a_mid)
    coarse = inner + 1.0 - cdf(math.exp(a_mid))
    fine = inner + integrate_levels(a_mid, a_hi) + 1.0 - cdf(math.exp(a_hi))
    return _finish(fine, abs(fine - coarse), quad)
