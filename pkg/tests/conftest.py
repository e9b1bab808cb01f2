import math

import pytest

from hetcov.model import FadingDistribution, HetNetScenario, TierConfig

EXP1 = FadingDistribution.exponential(1.0)


def two_tier(beta1=2.0, beta2=None, eps=3.0, noise=0.0, fading=EXP1, closed=()):
    """Macro + pico layout: pico density 5x, macro power 25x."""
    beta2 = beta1 if beta2 is None else beta2
    return HetNetScenario(
        (TierConfig(1.0, 25.0, eps, fading, beta1), TierConfig(5.0, 1.0, eps, fading, beta2)),
        tuple(closed),
        noise,
    )


def single_tier(beta=1.0, eps=4.0, fading=EXP1, noise=0.0, closed=()):
    return HetNetScenario((TierConfig(1.0, 1.0, eps, fading, beta),), tuple(closed), noise)


@pytest.fixture
def exp1():
    return EXP1


def within(a, b, n_sigma, *ses):
    return abs(a - b) <= n_sigma * math.sqrt(sum(s * s for s in ses))
