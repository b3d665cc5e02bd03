"""
Loss distributions of the simulation studies and seeded sample generation.

Replication samples are drawn from the counter-based Philox generator keyed on
``SeedSequence(master_seed, spawn_key=(N, r))``, so a replication's sample does
not depend on the order in which workers run.
"""
import math
from dataclasses import dataclass
from typing import Optional

from django.db import models

import numpy as np
from scipy import stats

from core.conf import risk_setting
from core.exceptions import BadParameters
from core.types import Sample


class DistributionFamily(models.TextChoices):
    NORMAL = 'normal', 'Normal'
    T = 't', 'Shifted Student t'
    POINT = 'point', 'Point mass'


class NormalParameter(models.TextChoices):
    VARIANCE = 'variance', 'Second parameter is the variance'
    SD = 'sd', 'Second parameter is the standard deviation'


@dataclass(frozen=True)
class Normal:
    """N(mean, scale); ``parameter`` says whether scale is a variance or a standard deviation."""

    mean: float = 10.0
    scale: float = 3.0
    parameter: Optional[str] = None
    family = DistributionFamily.NORMAL
    df = None

    def __post_init__(self):
        parameter = self.parameter or risk_setting('NORMAL_PARAMETER')
        errors = {}
        if parameter not in NormalParameter.values:
            errors['parameter'] = f'unknown normal parameter {parameter!r}'
        if not self.scale > 0.0 or not math.isfinite(self.scale):
            errors['scale'] = f'scale must be positive, got {self.scale}'
        if errors:
            raise BadParameters(errors)
        object.__setattr__(self, 'parameter', NormalParameter(parameter))

    @property
    def sd(self) -> float:
        if self.parameter == NormalParameter.VARIANCE:
            return math.sqrt(self.scale)
        return float(self.scale)

    def frozen(self):
        return stats.norm(loc=self.mean, scale=self.sd)

    def draw(self, rng, n_obs) -> np.ndarray:
        return rng.normal(self.mean, self.sd, size=n_obs)


@dataclass(frozen=True)
class ShiftedT:
    """Standard t with ``df`` degrees of freedom, shifted to ``target_mean``."""

    df: int
    target_mean: float = 10.0
    family = DistributionFamily.T

    def __post_init__(self):
        if not self.df > 2:
            raise BadParameters({'df': f'degrees of freedom must exceed 2, got {self.df}'})

    @property
    def mean(self) -> float:
        return self.target_mean

    def frozen(self):
        return stats.t(self.df, loc=self.target_mean)

    def draw(self, rng, n_obs) -> np.ndarray:
        return rng.standard_t(self.df, size=n_obs) + self.target_mean


@dataclass(frozen=True)
class PointMass:
    value: float = 0.0
    family = DistributionFamily.POINT
    df = None

    @property
    def mean(self) -> float:
        return self.value

    def frozen(self):
        return None

    def draw(self, rng, n_obs) -> np.ndarray:
        return np.full(n_obs, float(self.value))


def replication_seed(master_seed, n_obs, replication) -> np.random.SeedSequence:
    """Independent stream for replication ``replication`` at sample size ``n_obs``."""
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(n_obs), int(replication)))


def sample_generator(dist, n_obs, seed) -> Sample:
    """
    Draw ``n_obs`` observations of ``dist``.

    ``seed`` is an integer or a ``SeedSequence``; equal inputs give identical samples.

    Raises:
        BadParameters: ``n_obs`` below one.
    """
    if int(n_obs) < 1:
        raise BadParameters({'n_obs': f'sample size must be at least 1, got {n_obs}'})
    rng = np.random.Generator(np.random.Philox(seed))
    return Sample(dist.draw(rng, int(n_obs)))


def distribution_label(dist) -> str:
    return dist.family.value
