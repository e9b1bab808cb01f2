"""Scenario types, fading moments and validation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

OPEN = "open"
CLOSED = "closed"

EXPONENTIAL = "exponential"
LOGNORMAL_DB = "lognormal_db"
CONSTANT = "constant"

DB_TO_NEPER = math.log(10.0) / 10.0


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def linear_to_db(x: float) -> float:
    return 10.0 * math.log10(x)


@dataclass(frozen=True)
class FadingDistribution:
    """Shadow/fast fading law of a tier.

    ``param`` is the mean for exponential, the dB standard deviation for
    log-normal and the fixed value for constant fading.
    """

    kind: str
    param: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in (EXPONENTIAL, LOGNORMAL_DB, CONSTANT):
            raise ValueError(f"unknown fading kind {self.kind!r}")
        if not math.isfinite(self.param):
            raise ValueError("fading parameter must be finite")
        if self.kind == LOGNORMAL_DB:
            if self.param < 0:
                raise ValueError("sigma_db must be nonnegative")
        elif self.param <= 0:
            raise ValueError("fading scale must be positive")

    @classmethod
    def exponential(cls, mean: float = 1.0) -> "FadingDistribution":
        return cls(EXPONENTIAL, mean)

    @classmethod
    def lognormal_db(cls, sigma_db: float) -> "FadingDistribution":
        return cls(LOGNORMAL_DB, sigma_db)

    @classmethod
    def constant(cls, value: float = 1.0) -> "FadingDistribution":
        return cls(CONSTANT, value)

    @property
    def sigma_ln(self) -> float:
        return self.param * DB_TO_NEPER

    def mean(self) -> float:
        return fading_moment(self, 1.0)


def fading_moment(dist: FadingDistribution, s: float) -> float:
    """Return E[psi**s] for s in (0, 1]."""
    if not (0.0 < s <= 1.0):
        raise ValueError(f"moment order must lie in (0, 1], got {s}")
    if dist.kind == EXPONENTIAL:
        return dist.param ** s * math.gamma(1.0 + s)
    if dist.kind == LOGNORMAL_DB:
        return math.exp(0.5 * (s * dist.sigma_ln) ** 2)
    return dist.param ** s


def gamma_factor(beta: float) -> float:
    """Threshold-to-total-power factor 1 + 1/beta."""
    if not beta > 0:
        raise ValueError("threshold must be positive")
    if math.isinf(beta):
        return 1.0
    return 1.0 + 1.0 / beta


@dataclass(frozen=True)
class TierConfig:
    density: float
    power: float
    pathloss_exp: float
    fading: FadingDistribution = field(default_factory=FadingDistribution.exponential)
    sinr_threshold: float = 1.0
    bias: float = 1.0
    access: str = OPEN

    @property
    def delta(self) -> float:
        """2 / pathloss exponent."""
        return 2.0 / self.pathloss_exp

    @property
    def gamma(self) -> float:
        return gamma_factor(self.sinr_threshold)

    def moment(self, s: Optional[float] = None) -> float:
        return fading_moment(self.fading, self.delta if s is None else s)

    def replace(self, **kw) -> "TierConfig":
        from dataclasses import replace

        return replace(self, **kw)


@dataclass(frozen=True)
class HetNetScenario:
    open_tiers: Tuple[TierConfig, ...]
    closed_tiers: Tuple[TierConfig, ...] = ()
    noise: float = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "open_tiers", tuple(self.open_tiers))
        object.__setattr__(self, "closed_tiers", tuple(self.closed_tiers))

    @property
    def K(self) -> int:
        return len(self.open_tiers)

    @property
    def L(self) -> int:
        return len(self.closed_tiers)

    def all_tiers(self) -> Tuple[TierConfig, ...]:
        return self.open_tiers + self.closed_tiers

    def replace(self, **kw) -> "HetNetScenario":
        from dataclasses import replace

        return replace(self, **kw)

    def with_thresholds(self, betas: Sequence[float]) -> "HetNetScenario":
        if len(betas) != self.K:
            raise ValueError("one threshold per open tier required")
        tiers = tuple(t.replace(sinr_threshold=b) for t, b in zip(self.open_tiers, betas))
        return self.replace(open_tiers=tiers)

    def common_exponent(self) -> Optional[float]:
        eps = {t.pathloss_exp for t in self.all_tiers()}
        return eps.pop() if len(eps) == 1 else None


class ScenarioError(ValueError):
    """Raised when a scenario violates its invariants."""

    def __init__(self, violations: List[str]):
        super().__init__("; ".join(violations))
        self.violations = violations


def _tier_violations(t: TierConfig, label: str, is_open: bool) -> List[str]:
    out: List[str] = []
    if not (math.isfinite(t.density) and t.density >= 0):
        out.append(f"{label}: density must be nonnegative")
    if not (math.isfinite(t.power) and t.power > 0):
        out.append(f"{label}: power must be positive")
    if not (math.isfinite(t.pathloss_exp) and t.pathloss_exp > 2):
        out.append(f"{label}: pathloss_exp must exceed 2")
    else:
        try:
            m = fading_moment(t.fading, t.delta)
            if not math.isfinite(m):
                out.append(f"{label}: fading moment of order 2/pathloss_exp is not finite")
        except (ValueError, OverflowError):
            out.append(f"{label}: fading moment of order 2/pathloss_exp is not finite")
    if is_open:
        if not t.sinr_threshold > 0:
            out.append(f"{label}: sinr_threshold must be positive")
        if not (t.bias > 0 and math.isfinite(t.bias)):
            out.append(f"{label}: bias must be positive")
        if t.access != OPEN:
            out.append(f"{label}: open tier must have open access")
    elif t.access != CLOSED:
        out.append(f"{label}: closed tier must have closed access")
    return out


def validate_scenario(sc: HetNetScenario) -> List[str]:
    """Return the list of violated invariants (empty means valid)."""
    out: List[str] = []
    if sc.K == 0:
        out.append("at least one open tier required")
    for i, t in enumerate(sc.open_tiers):
        out += _tier_violations(t, f"open_tiers[{i}]", True)
    for i, t in enumerate(sc.closed_tiers):
        out += _tier_violations(t, f"closed_tiers[{i}]", False)
    if not (math.isfinite(sc.noise) and sc.noise >= 0):
        out.append("noise must be nonnegative")
    return out


def require_valid(sc: HetNetScenario) -> None:
    v = validate_scenario(sc)
    if v:
        raise ScenarioError(v)


@dataclass(frozen=True)
class ConnectivityModel:
    """Association rule. ``biases`` is only used by MBRP."""

    variant: str
    biases: Optional[Tuple[float, ...]] = None

    MAXSINR = "maxsinr"
    NEAREST = "nearest"
    MIRP = "mirp"
    MBRP = "mbrp"

    def __post_init__(self) -> None:
        if self.variant not in (self.MAXSINR, self.NEAREST, self.MIRP, self.MBRP):
            raise ValueError(f"unknown connectivity model {self.variant!r}")
        if self.variant == self.MBRP:
            if self.biases is None:
                raise ValueError("MBRP requires per-tier biases")
            b = tuple(float(x) for x in self.biases)
            if any(not x > 0 for x in b):
                raise ValueError("biases must be positive")
            object.__setattr__(self, "biases", b)

    @classmethod
    def max_sinr(cls) -> "ConnectivityModel":
        return cls(cls.MAXSINR)

    @classmethod
    def nearest(cls) -> "ConnectivityModel":
        return cls(cls.NEAREST)

    @classmethod
    def mirp(cls) -> "ConnectivityModel":
        return cls(cls.MIRP)

    @classmethod
    def mbrp(cls, biases: Sequence[float]) -> "ConnectivityModel":
        return cls(cls.MBRP, tuple(biases))

    def check_against(self, sc: HetNetScenario) -> None:
        if self.variant == self.MBRP and len(self.biases) != sc.K:
            raise ValueError("MBRP bias list length must equal the number of open tiers")

    @property
    def name(self) -> str:
        return self.variant


def average_power_biases(sc: HetNetScenario) -> Tuple[float, ...]:
    """Biases 1/(P E[psi]) that turn MBRP into nearest-BS association per tier."""
    return tuple(1.0 / (t.power * t.fading.mean()) for t in sc.open_tiers)


def tier_biases(sc: HetNetScenario) -> Tuple[float, ...]:
    return tuple(t.bias for t in sc.open_tiers)


ANALYTIC = "analytic"
MONTECARLO = "montecarlo"


@dataclass
class CoverageReport:
    probability: float
    method: str
    stderr: float = 0.0
    tier_serving_prob: List[float] = field(default_factory=list)
    conditional_rate: Optional[float] = None
    rate_units: str = "bits"
    trials: int = 0

    def __post_init__(self) -> None:
        self.probability = float(self.probability)
        self.stderr = float(self.stderr)
        self.tier_serving_prob = [float(x) for x in self.tier_serving_prob]
        if self.conditional_rate is not None:
            self.conditional_rate = float(self.conditional_rate)
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError(f"probability {self.probability} outside [0, 1]")
        if self.stderr < 0:
            raise ValueError("stderr must be nonnegative")
