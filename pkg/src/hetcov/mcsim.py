"""Monte Carlo simulation of the typical mobile in a finite disk.

Trials are processed in fixed-size blocks; block ``b`` draws from a Philox
stream keyed by ``(seed, b)``, so results depend only on the seed and the
trial count, never on how the work is scheduled.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtri

from .model import (
    CONSTANT,
    EXPONENTIAL,
    MONTECARLO,
    ConnectivityModel,
    CoverageReport,
    FadingDistribution,
    HetNetScenario,
    TierConfig,
    require_valid,
)

BLOCK_TRIALS = 4096
FIXED = "fixed"
AUTO = "auto"


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    With ``guard_policy == "auto"`` the disk radius is doubled, starting from
    ``disk_radius``, until the mean interference expected from beyond the
    disk is below ``edge_tolerance`` times a reference power level.  When
    ``tail_compensation`` is set the far field is added back as a gamma
    variate with the exact far-field mean and variance.  Blocks of trials
    use independent RNG streams keyed by (seed, block), so ``workers`` only
    affects speed.
    """

    trials: int = 100_000
    disk_radius: float = 1.0
    seed: int = 0
    guard_policy: str = AUTO
    edge_tolerance: float = 0.05
    tail_compensation: bool = True
    max_points_per_trial: float = 20_000.0
    workers: int = 1

    def __post_init__(self) -> None:
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.disk_radius > 0:
            raise ValueError("disk_radius must be positive")
        if self.guard_policy not in (FIXED, AUTO):
            raise ValueError("guard_policy must be 'fixed' or 'auto'")
        if not self.edge_tolerance > 0:
            raise ValueError("edge_tolerance must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass
class MonteCarloEstimate:
    mean: float
    stderr: float
    trials: int


@dataclass
class SnapshotResult:
    """Per-snapshot outcome arrays for each requested model."""

    covered: Dict[str, np.ndarray]
    serving_tier: Dict[str, np.ndarray]
    serving_sinr: Dict[str, np.ndarray]
    open_interference: np.ndarray
    closed_interference: np.ndarray


@dataclass
class TierPoints:
    counts: np.ndarray  # BSs per trial
    distance: np.ndarray  # concatenated, grouped by trial
    fading: np.ndarray


def _model_key(m: ConnectivityModel) -> str:
    if m.variant == ConnectivityModel.MBRP:
        return "mbrp(" + ",".join(repr(b) for b in m.biases) + ")"
    return m.variant


def model_key(m: ConnectivityModel) -> str:
    return _model_key(m)


# ----------------------------------------------------------------- sampling

def sample_fading(dist: FadingDistribution, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF fading draws from uniforms in (0, 1)."""
    if dist.kind == EXPONENTIAL:
        return -dist.param * np.log1p(-u)
    if dist.kind == CONSTANT:
        return np.full_like(u, dist.param)
    return np.exp(dist.sigma_ln * ndtri(u))


def generate_tier_points(
    density: float,
    radius: float,
    rng: np.random.Generator,
    fading: FadingDistribution = FadingDistribution.exponential(),
    trials: int = 1,
) -> TierPoints:
    """Poisson number of BSs uniform in a disk, with independent fading."""
    if density < 0 or not radius > 0:
        raise ValueError("density must be nonnegative and radius positive")
    mean = density * math.pi * radius ** 2
    counts = rng.poisson(mean, size=trials) if mean > 0 else np.zeros(trials, dtype=np.int64)
    total = int(counts.sum())
    r = radius * np.sqrt(rng.random(total))
    psi = sample_fading(fading, rng.random(total))
    return TierPoints(counts.astype(np.int64), r, psi)


def _tail_interference(t: TierConfig, radius: float) -> float:
    """Mean received power from a tier's BSs beyond ``radius``."""
    eps = t.pathloss_exp
    return t.density * t.power * t.fading.mean() * 2 * math.pi * radius ** (2 - eps) / (eps - 2)


def _fading_second_moment(d: FadingDistribution) -> float:
    if d.kind == EXPONENTIAL:
        return 2.0 * d.param ** 2
    if d.kind == CONSTANT:
        return d.param ** 2
    return math.exp(2.0 * d.sigma_ln ** 2)


def _tail_variance(t: TierConfig, radius: float) -> float:
    eps = t.pathloss_exp
    return (
        t.density * t.power ** 2 * _fading_second_moment(t.fading)
        * 2 * math.pi * radius ** (2 - 2 * eps) / (2 * eps - 2)
    )


def _far_field(tiers: Sequence[TierConfig], radius: float, rng: np.random.Generator, n: int) -> np.ndarray:
    mean = sum(_tail_interference(t, radius) for t in tiers)
    var = sum(_tail_variance(t, radius) for t in tiers)
    if mean <= 0 or var <= 0:
        return np.full(n, mean)
    return rng.gamma(mean * mean / var, var / mean, size=n)


def _reference_power(sc: HetNetScenario) -> float:
    tiers = [t for t in sc.all_tiers() if t.density > 0]
    lam = sum(t.density for t in tiers)
    if lam == 0:
        return sc.noise
    r0 = 1.0 / math.sqrt(math.pi * lam)
    return sc.noise + sum(_tail_interference(t, r0) for t in tiers)


def _tail_total(sc: HetNetScenario, radius: float) -> Tuple[float, float]:
    o = sum(_tail_interference(t, radius) for t in sc.open_tiers)
    c = sum(_tail_interference(t, radius) for t in sc.closed_tiers)
    return o, c


def resolve_radius(sc: HetNetScenario, sim: SimConfig) -> float:
    """Disk radius actually simulated under the configured guard policy."""
    radius = sim.disk_radius
    if sim.guard_policy == FIXED:
        return radius
    ref = _reference_power(sc)
    if ref <= 0:
        return radius
    lam = sum(t.density for t in sc.all_tiers())
    for _ in range(200):
        o, c = _tail_total(sc, radius)
        if o + c <= sim.edge_tolerance * ref:
            break
        if lam * math.pi * (2 * radius) ** 2 > sim.max_points_per_trial:
            break
        radius *= 2.0
    return radius


# ----------------------------------------------------------------- grouped reductions

def _group_reduce(fn, values: np.ndarray, counts: np.ndarray, fill: float) -> np.ndarray:
    out = np.full(counts.shape, fill, dtype=float)
    nz = counts > 0
    if values.size:
        starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
        out[nz] = fn.reduceat(values, starts[nz])
    return out


@dataclass
class _TierStats:
    total: np.ndarray
    strongest: np.ndarray
    nearest_dist: np.ndarray
    nearest_power: np.ndarray


def _tier_stats(t: TierConfig, pts: TierPoints) -> _TierStats:
    n = pts.counts.size
    ids = np.repeat(np.arange(n), pts.counts)
    power = t.power * pts.fading * pts.distance ** (-t.pathloss_exp)
    total = np.bincount(ids, weights=power, minlength=n)
    strongest = _group_reduce(np.maximum, power, pts.counts, 0.0)
    near = _group_reduce(np.minimum, pts.distance, pts.counts, np.inf)
    if power.size:
        is_near = pts.distance == near[ids]
        near_pow = np.zeros(n)
        near_pow[ids[is_near]] = power[is_near]
    else:
        near_pow = np.zeros(n)
    return _TierStats(total, strongest, near, near_pow)


def _evaluate(
    sc: HetNetScenario,
    open_stats: List[_TierStats],
    closed_total: np.ndarray,
    models: Sequence[ConnectivityModel],
    extra_open=0.0,
) -> SnapshotResult:
    n = closed_total.size
    i_open = np.zeros(n)
    for st in open_stats:
        i_open += st.total
    i_open += extra_open
    total = i_open + closed_total + sc.noise
    gam = np.array([t.gamma for t in sc.open_tiers])
    beta = np.array([t.sinr_threshold for t in sc.open_tiers])
    strongest = np.stack([st.strongest for st in open_stats], axis=1)
    nearest_pow = np.stack([st.nearest_power for st in open_stats], axis=1)
    rows = np.arange(n)

    covered: Dict[str, np.ndarray] = {}
    tier: Dict[str, np.ndarray] = {}
    sinr: Dict[str, np.ndarray] = {}

    def pick(power_matrix: np.ndarray, score: np.ndarray, key: str, rule: str) -> None:
        t = np.argmax(score, axis=1)
        s = power_matrix[rows, t]
        valid = s > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(valid, s / (total - s), 0.0)
        if rule == "gamma":
            cov = valid & (gam[t] * s > total)
        else:
            cov = valid & (q > beta[t])
        covered[key] = cov
        tier[key] = np.where(valid, t, -1)
        sinr[key] = q

    for m in models:
        key = _model_key(m)
        if m.variant == ConnectivityModel.MAXSINR:
            pick(strongest, gam * strongest, key, "gamma")
        elif m.variant == ConnectivityModel.NEAREST:
            pick(nearest_pow, gam * nearest_pow, key, "gamma")
        elif m.variant == ConnectivityModel.MIRP:
            pick(strongest, strongest, key, "sinr")
        else:
            m.check_against(sc)
            metric = np.stack(
                [
                    np.where(
                        np.isfinite(st.nearest_dist),
                        t.power * t.fading.mean() * b * st.nearest_dist ** (-t.pathloss_exp),
                        -np.inf,
                    )
                    for st, t, b in zip(open_stats, sc.open_tiers, m.biases)
                ],
                axis=1,
            )
            pick(nearest_pow, metric, key, "sinr")
    return SnapshotResult(covered, tier, sinr, i_open, closed_total)


def evaluate_snapshot(
    sc: HetNetScenario,
    open_points: Sequence[Sequence[Tuple[float, float]]],
    closed_points: Sequence[Sequence[Tuple[float, float]]],
    models: Sequence[ConnectivityModel],
) -> SnapshotResult:
    """Evaluate one snapshot given explicit (distance, fading) lists per tier."""

    def pts(lst) -> TierPoints:
        arr = np.asarray(lst, dtype=float).reshape(-1, 2)
        return TierPoints(np.array([len(arr)]), arr[:, 0], arr[:, 1])

    ostats = [_tier_stats(t, pts(p)) for t, p in zip(sc.open_tiers, open_points)]
    ctotal = np.zeros(1)
    for t, p in zip(sc.closed_tiers, closed_points):
        ctotal += _tier_stats(t, pts(p)).total
    return _evaluate(sc, ostats, ctotal, models)


# ----------------------------------------------------------------- driver

def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed) & (2**64 - 1), block])))


def _blocks(trials: int):
    b = 0
    done = 0
    while done < trials:
        n = min(BLOCK_TRIALS, trials - done)
        yield b, n
        b += 1
        done += n


def simulate(
    sc: HetNetScenario, models: Sequence[ConnectivityModel], sim: SimConfig
) -> SnapshotResult:
    """Run ``sim.trials`` independent snapshots, evaluating every model on each."""
    require_valid(sc)
    for m in models:
        m.check_against(sc)
    radius = resolve_radius(sc, sim)

    def run(job: Tuple[int, int]) -> SnapshotResult:
        block, n = job
        rng = _block_rng(sim.seed, block)
        ostats = [
            _tier_stats(t, generate_tier_points(t.density, radius, rng, t.fading, n))
            for t in sc.open_tiers
        ]
        ctotal = np.zeros(n)
        for t in sc.closed_tiers:
            ctotal += _tier_stats(t, generate_tier_points(t.density, radius, rng, t.fading, n)).total
        far_o: object = 0.0
        if sim.tail_compensation:
            far_o = _far_field(sc.open_tiers, radius, rng, n)
            ctotal += _far_field(sc.closed_tiers, radius, rng, n)
        return _evaluate(sc, ostats, ctotal, models, far_o)

    jobs = list(_blocks(sim.trials))
    if sim.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=sim.workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]
    keys = list(parts[0].covered)
    return SnapshotResult(
        {k: np.concatenate([p.covered[k] for p in parts]) for k in keys},
        {k: np.concatenate([p.serving_tier[k] for p in parts]) for k in keys},
        {k: np.concatenate([p.serving_sinr[k] for p in parts]) for k in keys},
        np.concatenate([p.open_interference for p in parts]),
        np.concatenate([p.closed_interference for p in parts]),
    )


def _mean_se(x: np.ndarray) -> Tuple[float, float]:
    x = np.asarray(x, dtype=float)
    n = x.size
    mean = float(math.fsum(x) / n)
    if n < 2:
        return mean, 0.0
    var = float(math.fsum((x - mean) ** 2) / (n - 1))
    return mean, math.sqrt(var / n)


def report_from_snapshots(sc: HetNetScenario, res: SnapshotResult, model: ConnectivityModel) -> CoverageReport:
    key = _model_key(model)
    cov = res.covered[key]
    p, se = _mean_se(cov)
    tiers = res.serving_tier[key]
    per_tier = [float(np.count_nonzero(cov & (tiers == k)) / cov.size) for k in range(sc.K)]
    rate = None
    if cov.any():
        rate = float(math.fsum(np.log2(1.0 + res.serving_sinr[key][cov])) / np.count_nonzero(cov))
    return CoverageReport(p, MONTECARLO, se, per_tier, rate, "bits", cov.size)


def estimate_coverage(sc: HetNetScenario, model: ConnectivityModel, sim: SimConfig) -> CoverageReport:
    """Coverage probability as a Bernoulli mean over snapshots."""
    return report_from_snapshots(sc, simulate(sc, [model], sim), model)


def estimate_conditional_rate(
    sc: HetNetScenario, model: ConnectivityModel, sim: SimConfig
) -> Optional[MonteCarloEstimate]:
    """Mean log2(1 + SINR) over covered snapshots; ``None`` when none are covered."""
    res = simulate(sc, [model], sim)
    key = _model_key(model)
    cov = res.covered[key]
    if not cov.any():
        return None
    m, se = _mean_se(np.log2(1.0 + res.serving_sinr[key][cov]))
    return MonteCarloEstimate(m, se, int(cov.sum()))


def estimate_serving_tier_fractions(
    sc: HetNetScenario, model: ConnectivityModel, sim: SimConfig
) -> List[MonteCarloEstimate]:
    """Fraction of snapshots served by each tier (coverage not required)."""
    res = simulate(sc, [model], sim)
    t = res.serving_tier[_model_key(model)]
    out = []
    for k in range(sc.K):
        m, se = _mean_se(t == k)
        out.append(MonteCarloEstimate(m, se, t.size))
    return out


def estimate_interference_transform(sc: HetNetScenario, s: float, sim: SimConfig) -> MonteCarloEstimate:
    """Empirical E[exp(-s I_c)] for the closed-access interference."""
    if not s > 0:
        raise ValueError("s must be positive")
    if sc.L == 0:
        return MonteCarloEstimate(1.0, 0.0, sim.trials)
    res = simulate(sc, [], sim)
    m, se = _mean_se(np.exp(-s * res.closed_interference))
    return MonteCarloEstimate(m, se, sim.trials)
