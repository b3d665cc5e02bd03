"""
Shape-preserving scaling functions.

Both functions are nonnegative, compactly supported, form a partition of unity
over integer translates and reproduce x exactly: sum_l l * phi(x - l) = x.
"""
import math
from dataclasses import dataclass
from typing import Callable

from django.db import models

import numpy as np

from core.conf import risk_setting
from core.exceptions import BackendUnavailable, BadParameters
from smoothing.profiles import PiecewisePolynomialProfile


class ScalingFamily(models.TextChoices):
    LINEAR = 'linear', 'Locally linear'
    QUADRATIC = 'quadratic', 'Locally quadratic'


class ResolutionRounding(models.TextChoices):
    NEAREST = 'nearest', 'Nearest integer, ties up'
    FLOOR = 'floor', 'Largest integer not above'


def _linear(x):
    x = np.asarray(x, dtype=float)
    return np.select(
        [(x >= -1.0) & (x < 0.0), (x >= 0.0) & (x <= 1.0)],
        [1.0 + x, 1.0 - x],
        default=0.0,
    )


def _quadratic(x):
    x = np.asarray(x, dtype=float)
    return np.select(
        [
            (x > -1.5) & (x <= -0.5),
            (x > -0.5) & (x < 0.5),
            (x >= 0.5) & (x < 1.5),
        ],
        [
            0.5 * (1.5 + x) ** 2,
            1.0 + x - (x + 0.5) ** 2,
            0.5 * (1.5 - x) ** 2,
        ],
        default=0.0,
    )


@dataclass(frozen=True)
class ScalingFunction:
    family: str
    support_radius: float
    formula: Callable
    profile: PiecewisePolynomialProfile

    def __call__(self, x):
        return self.formula(x)

    def translates(self, y):
        """
        Integer shifts l with phi(y - l) possibly nonzero, and the values.

        Returns two (len(y), K) arrays; K is the same for every point.
        """
        y = np.asarray(y, dtype=float).reshape(-1)
        reach = math.ceil(self.support_radius)
        shifts = np.floor(y).astype(np.int64)[:, None] + np.arange(-reach, reach + 2)[None, :]
        return shifts, self.formula(y[:, None] - shifts)


SCALING_FUNCTIONS = {
    ScalingFamily.LINEAR: ScalingFunction(
        ScalingFamily.LINEAR,
        1.0,
        _linear,
        PiecewisePolynomialProfile([(-1.0, 0.0, [1.0, 1.0]), (0.0, 1.0, [1.0, -1.0])]),
    ),
    ScalingFamily.QUADRATIC: ScalingFunction(
        ScalingFamily.QUADRATIC,
        1.5,
        _quadratic,
        PiecewisePolynomialProfile([
            (-1.5, -0.5, [1.125, 1.5, 0.5]),
            (-0.5, 0.5, [0.75, 0.0, -1.0]),
            (0.5, 1.5, [1.125, -1.5, 0.5]),
        ]),
    ),
}


def get_scaling_function(basis_id) -> ScalingFunction:
    if isinstance(basis_id, ScalingFunction):
        return basis_id
    try:
        return SCALING_FUNCTIONS[ScalingFamily(basis_id)]
    except ValueError:
        raise BackendUnavailable(f'unknown scaling function {basis_id!r}')


def phi_eval(phi, x):
    """phi(x); returns a float for scalar input."""
    value = get_scaling_function(phi)(x)
    return float(value) if np.ndim(value) == 0 else value


def resolution_rule(n_obs, rounding=None) -> int:
    """
    log2(N) / 5 rounded to an integer, never below 0.

    ``rounding`` is a ResolutionRounding value; None reads the
    RESOLUTION_ROUNDING setting.
    """
    if n_obs < 1:
        raise BadParameters({'n_obs': f'resolution rule needs a positive sample size, got {n_obs}'})
    rounding = rounding or risk_setting('RESOLUTION_ROUNDING')
    if rounding not in ResolutionRounding.values:
        raise BadParameters({'rounding': f'unknown resolution rounding {rounding!r}'})
    level = math.log2(n_obs) / 5.0
    if rounding == ResolutionRounding.FLOOR:
        return max(0, math.floor(level))
    return max(0, math.floor(level + 0.5))


def generalized_kernel(phi, y, x) -> float:
    """K(y, x) = sum_l phi(y - l) phi(x - l)."""
    phi = get_scaling_function(phi)
    shifts, values = phi.translates([y])
    return math.fsum(values[0] * phi(x - shifts[0]))
