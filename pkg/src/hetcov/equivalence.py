"""Reductions of a heterogeneous network to simpler equivalent forms.

The 1-D densities describe the process of normalised path losses
r^eps / (P * psi) (unit power, unit fading, path-loss exponent 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .model import (
    FadingDistribution,
    HetNetScenario,
    TierConfig,
    fading_moment,
    require_valid,
)


@dataclass(frozen=True)
class RadialDensity:
    """lambda(r) = sum c * r**p over ``terms`` of (c, p)."""

    terms: Tuple[Tuple[float, float], ...] = ()

    def __post_init__(self) -> None:
        for c, p in self.terms:
            if c < 0 or p <= -1:
                raise ValueError("need c >= 0 and p > -1 in every term")
        object.__setattr__(self, "terms", tuple((float(c), float(p)) for c, p in self.terms))

    def __call__(self, r: float) -> float:
        return sum(c * r ** p for c, p in self.terms)

    def __add__(self, other: "RadialDensity") -> "RadialDensity":
        return RadialDensity(self.terms + other.terms)

    def scaled(self, k: float) -> "RadialDensity":
        return RadialDensity(tuple((k * c, p) for c, p in self.terms))

    def cumulative(self, t: float) -> float:
        """Integral of the density over [0, t]."""
        return sum(c * t ** (p + 1) / (p + 1) for c, p in self.terms)

    def interference_laplace(self, s: float) -> float:
        """E[exp(-s * sum 1/x)] for a Poisson process with this density.

        For a term c r^(d-1) the exponent is c * s^d * Gamma(1-d) / d.
        """
        total = 0.0
        for c, p in self.terms:
            d = p + 1.0
            if not d < 1.0:
                raise ValueError("interference diverges for exponent >= 0")
            total += c * s ** d * math.gamma(1.0 - d) / d
        return math.exp(-total)

    def is_empty(self) -> bool:
        return all(c == 0 for c, _ in self.terms)


@dataclass(frozen=True)
class EquivalentTwoTier:
    open_density: float
    closed_density: float
    noise: float

    def __post_init__(self) -> None:
        if min(self.open_density, self.closed_density, self.noise) < 0:
            raise ValueError("all fields must be nonnegative")


def _term(density: float, scale: float, eps: float) -> Tuple[float, float]:
    d = 2.0 / eps
    return (density * math.pi * d * scale ** d, d - 1.0)


def _mirp_term(t: TierConfig) -> Tuple[float, float]:
    d = t.delta
    return (t.density * math.pi * d * t.power ** d * t.moment(), d - 1.0)


def collapse_closed_tiers(sc: HetNetScenario) -> RadialDensity:
    """Single 1-D density whose unit interference matches all closed tiers."""
    require_valid(sc)
    return RadialDensity(tuple(_mirp_term(t) for t in sc.closed_tiers))


def exponentialize(sc: HetNetScenario) -> HetNetScenario:
    """Replace every fading law by Exp(1) and rescale densities to compensate.

    Valid for max-SINR and MIRP, whose coverage depends on fading only
    through E[psi^(2/eps)].
    """
    require_valid(sc)
    unit = FadingDistribution.exponential(1.0)

    def conv(t: TierConfig) -> TierConfig:
        k = t.moment() / math.gamma(1.0 + t.delta)
        return t.replace(density=t.density * k, fading=unit)

    return sc.replace(
        open_tiers=tuple(conv(t) for t in sc.open_tiers),
        closed_tiers=tuple(conv(t) for t in sc.closed_tiers),
    )


def mirp_1d_densities(sc: HetNetScenario) -> Tuple[List[RadialDensity], RadialDensity]:
    require_valid(sc)
    opened = [RadialDensity((_mirp_term(t),)) for t in sc.open_tiers]
    return opened, collapse_closed_tiers(sc)


def mbrp_1d_densities(
    sc: HetNetScenario, biases: Sequence[float]
) -> Tuple[List[RadialDensity], RadialDensity, List[float]]:
    """Densities of r^eps / (P E[psi] B) per open tier and matching powers 1/(E[psi] B)."""
    require_valid(sc)
    if len(biases) != sc.K or any(not b > 0 for b in biases):
        raise ValueError("need one positive bias per open tier")
    dens = []
    powers = []
    for t, b in zip(sc.open_tiers, biases):
        m = t.fading.mean()
        dens.append(RadialDensity((_term(t.density, t.power * m * b, t.pathloss_exp),)))
        powers.append(1.0 / (m * b))
    return dens, collapse_closed_tiers(sc), powers


def open_weights(sc: HetNetScenario) -> List[float]:
    """lambda P^(2/eps) E[psi^(2/eps)] per open tier."""
    return [t.density * t.power ** t.delta * t.moment() for t in sc.open_tiers]


def same_eps_reduction(sc: HetNetScenario) -> EquivalentTwoTier:
    """Normalise a common-exponent network to unit open density."""
    require_valid(sc)
    eps = sc.common_exponent()
    if eps is None:
        raise ValueError("all path-loss exponents must be equal")
    total = sum(open_weights(sc))
    if total <= 0:
        raise ValueError("open tiers carry no BSs")
    closed = sum(t.density * t.power ** t.delta * t.moment() for t in sc.closed_tiers)
    return EquivalentTwoTier(1.0, closed / total, sc.noise * total ** (-eps / 2.0))
