"""
Risk-measure parameters and CLI tokens.

Internally losses are positive. ``Orientation.RETURNS`` means the data are
returns and the loss of a position u is -<u, x>; ``Orientation.LOSSES`` means
the data already are losses.
"""
import math
from dataclasses import dataclass
from typing import Optional

from django.db import models

from core.exceptions import BadParameters


class RiskFamily(models.TextChoices):
    MEAN_SEMIDEVIATION = 'msd', 'Mean-semideviation'
    HIGHER_ORDER = 'hor', 'Higher-order inverse measure'


class Orientation(models.TextChoices):
    LOSSES = 'losses', 'Losses positive'
    RETURNS = 'returns', 'Returns positive'


DEFAULT_ORIENTATION = {
    RiskFamily.MEAN_SEMIDEVIATION: Orientation.RETURNS,
    RiskFamily.HIGHER_ORDER: Orientation.LOSSES,
}


@dataclass(frozen=True)
class RiskSpec:
    """
    Parameters of one risk measure.

    Mean-semideviation uses ``p`` and ``kappa``; the higher-order measure uses
    ``q``, ``alpha`` and ``kappa`` (1 gives the pure measure).
    """

    family: str
    p: float = 1.0
    q: float = 2.0
    alpha: float = 0.05
    kappa: float = 1.0
    orientation: Optional[str] = None

    def __post_init__(self):
        errors = {}
        if self.family not in RiskFamily.values:
            raise BadParameters({'family': f'unknown risk family {self.family!r}'})
        family = RiskFamily(self.family)
        object.__setattr__(self, 'family', family)
        if self.orientation is None:
            object.__setattr__(self, 'orientation', DEFAULT_ORIENTATION[family])
        elif self.orientation not in Orientation.values:
            errors['orientation'] = f'unknown orientation {self.orientation!r}'

        if family == RiskFamily.MEAN_SEMIDEVIATION:
            if not self.p >= 1.0 or not math.isfinite(self.p):
                errors['p'] = f'order p must be at least 1, got {self.p}'
            if not 0.0 <= self.kappa <= 1.0:
                errors['kappa'] = f'kappa must lie in [0, 1], got {self.kappa}'
        else:
            if not self.q >= 1.0 or not math.isfinite(self.q):
                errors['q'] = f'order q must be at least 1, got {self.q}'
            if not 0.0 < self.alpha <= 1.0:
                errors['alpha'] = f'alpha must lie in (0, 1], got {self.alpha}'
            if not 0.0 < self.kappa <= 1.0:
                errors['kappa'] = f'kappa must lie in (0, 1], got {self.kappa}'
        if errors:
            raise BadParameters(errors)

    @property
    def loss_sign(self) -> float:
        return -1.0 if self.orientation == Orientation.RETURNS else 1.0

    @property
    def order(self) -> float:
        return self.p if self.family == RiskFamily.MEAN_SEMIDEVIATION else self.q

    @property
    def token(self) -> str:
        if self.family == RiskFamily.MEAN_SEMIDEVIATION:
            return f'msd:p={self.p:g},kappa={self.kappa:g}'
        token = f'hor:q={self.q:g},alpha={self.alpha:g}'
        return token if self.kappa == 1.0 else f'{token},kappa={self.kappa:g}'


_TOKEN_KEYS = {
    RiskFamily.MEAN_SEMIDEVIATION: {'p', 'kappa', 'orientation'},
    RiskFamily.HIGHER_ORDER: {'q', 'alpha', 'kappa', 'orientation'},
}


def parse_risk_token(token) -> RiskSpec:
    """
    Parse ``msd:p=2,kappa=0.5`` or ``hor:q=2,alpha=0.05``.

    Raises:
        BadParameters: unknown family or key, or a value out of range.
    """
    head, _, body = token.strip().partition(':')
    if head not in RiskFamily.values:
        raise BadParameters({'risk': f'unknown risk family {head!r} in {token!r}'})
    family = RiskFamily(head)
    params = {}
    for item in filter(None, body.split(',')):
        key, sep, value = item.partition('=')
        key = key.strip()
        if not sep or key not in _TOKEN_KEYS[family]:
            raise BadParameters({'risk': f'unexpected parameter {item!r} for {family.value}'})
        if key == 'orientation':
            params[key] = value.strip()
            continue
        try:
            params[key] = float(value)
        except ValueError:
            raise BadParameters({key: f'not a number: {value!r}'})
    return RiskSpec(family, **params)
