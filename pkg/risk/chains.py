"""
Composite chains of the mean-semideviation and higher-order inverse measures.

Stages are listed outermost first. The stage averaged with smoothing is the
one flagged ``convex_in_x``.
"""
import logging
import threading

import numpy as np

from core.composite import make_chain
from core.exceptions import BadParameters
from core.types import AffineIntegrand, HolderModulus, Stage, TruncatedPower

from .measures import RiskFamily

logger = logging.getLogger('numerics')


class ClipCounter:
    """Counts inner values clipped at zero before a fractional root."""

    def __init__(self):
        self._lock = threading.Lock()
        self._count = 0

    def record(self, value):
        with self._lock:
            self._count += 1
        logger.debug(f'Clipped inner value {value:.3e} to zero before the root')

    @property
    def value(self) -> int:
        return self._count

    def reset(self):
        with self._lock:
            self._count = 0


domain_clips = ClipCounter()


def _root(value, order):
    value = float(value)
    if value < 0.0:
        domain_clips.record(value)
        value = 0.0
    return value ** (1.0 / order)


def _truncated_power(slope, offset, power):
    """Closed-form descriptor when the power is 1 or 2, else None."""
    if power not in (1.0, 2.0):
        return None
    return TruncatedPower.upper(slope, offset, int(power))


def _power_modulus(power, peak):
    """Lipschitz constant of t -> max(0, t) ** power on t <= peak."""
    peak = max(0.0, peak)
    return power * peak ** (power - 1.0) if power > 1.0 else 1.0


def _check_family(spec, family):
    if spec.family != family:
        raise BadParameters({'family': f'expected a {family.label} specification, got {spec.family.label}'})


def mean_semideviation_chain(spec, n_assets=1):
    """
    Y + kappa * (E[max(0, Y - E[Y]) ** p]) ** (1/p) for the loss Y of a position u.

    f3(u, x) = -Y, f2(u, eta, x) = max(0, eta + Y) ** p and
    f1(u, eta, x) = Y + kappa * eta ** (1/p); for returns data Y = -<u, x>.
    """
    _check_family(spec, RiskFamily.MEAN_SEMIDEVIATION)
    sign, p, kappa = spec.loss_sign, float(spec.p), float(spec.kappa)

    def loss(u, x):
        return sign * (x @ np.asarray(u, dtype=float))

    def semideviation_closed_form(u, eta):
        return [_truncated_power(sign * np.asarray(u), -float(eta[0]), p)]

    def semideviation_modulus(u, eta, lo, hi):
        slope = sign * np.asarray(u, dtype=float)
        peak = float(eta[0]) + float(np.sum(np.maximum(slope * lo, slope * hi)))
        return HolderModulus(_power_modulus(p, peak) * float(np.linalg.norm(slope)), 1.0)

    stages = [
        Stage(
            index=1,
            func=lambda u, eta, x: loss(u, x) + kappa * _root(eta[0], p),
            out_dim=1,
            in_dim=1,
            monotone_in_eta=True,
            closed_form=lambda u, eta: [AffineIntegrand(sign * np.asarray(u), kappa * _root(eta[0], p))],
            name='mean plus deviation',
        ),
        Stage(
            index=2,
            func=lambda u, eta, x: np.maximum(eta[0] + loss(u, x), 0.0) ** p,
            out_dim=1,
            in_dim=1,
            convex_in_x=True,
            closed_form=semideviation_closed_form if p in (1.0, 2.0) else None,
            modulus=semideviation_modulus,
            name='upper semideviation',
        ),
        Stage(
            index=3,
            func=lambda u, eta, x: -loss(u, x),
            out_dim=1,
            closed_form=lambda u, eta: [AffineIntegrand(-sign * np.asarray(u), 0.0)],
            name='negated loss',
        ),
    ]
    return make_chain(stages, decision_dim=n_assets, data_dim=n_assets)


def _shortfall_stage(spec, direction, index=2):
    """
    Inner stage of the inverse measures; two outputs (loss, shortfall) when kappa < 1.

    ``direction(u)`` is the slope of the loss in x, so the loss is x . direction(u).
    """
    q = float(spec.q)
    pure = spec.kappa == 1.0

    def loss(u, x):
        return x @ direction(u)

    def shortfall(u, x):
        return np.maximum(loss(u, x) - u[-1], 0.0) ** q

    def func(u, eta, x):
        if pure:
            return shortfall(u, x)
        return np.column_stack([loss(u, x), shortfall(u, x)])

    def closed_form(u, eta):
        power = _truncated_power(direction(u), float(u[-1]), q)
        return [power] if pure else [AffineIntegrand(direction(u), 0.0), power]

    def modulus(u, eta, lo, hi):
        slope = direction(u)
        peak = float(np.sum(np.maximum(slope * lo, slope * hi))) - float(u[-1])
        return HolderModulus(_power_modulus(q, peak) * float(np.linalg.norm(slope)), 1.0)

    return Stage(
        index=index,
        func=func,
        out_dim=1 if pure else 2,
        convex_in_x=True,
        closed_form=closed_form if q in (1.0, 2.0) else None,
        modulus=modulus,
        name='shortfall',
    )


def _inverse_outer_stage(spec):
    q, alpha, kappa = float(spec.q), float(spec.alpha), float(spec.kappa)

    def value(u, eta):
        risk = u[-1] + _root(eta[-1], q) / alpha
        return risk if kappa == 1.0 else (1.0 - kappa) * eta[0] + kappa * risk

    return Stage(
        index=1,
        func=lambda u, eta, x: value(u, eta),
        out_dim=1,
        in_dim=1 if kappa == 1.0 else 2,
        monotone_in_eta=True,
        closed_form=lambda u, eta: [AffineIntegrand(np.zeros(1), value(u, eta))],
        name='inverse measure',
    )


def higher_order_risk_objective(spec):
    """
    Chain in the scalar decision u of u + (1/alpha) * (E[max(0, L - u) ** q]) ** (1/q).

    With kappa < 1 the value is (1 - kappa) E[L] + kappa times the expression above.
    """
    _check_family(spec, RiskFamily.HIGHER_ORDER)
    direction = np.array([spec.loss_sign])
    stages = [_inverse_outer_stage(spec), _shortfall_stage(spec, lambda u: direction)]
    return make_chain(stages, decision_dim=1, data_dim=1)


def inverse_portfolio_chain(spec, n_assets):
    """
    The higher-order measure of a portfolio loss; the decision is (w_1, ..., w_n, u0).
    """
    _check_family(spec, RiskFamily.HIGHER_ORDER)
    sign = spec.loss_sign

    def direction(u):
        return sign * np.asarray(u[:-1], dtype=float)

    return make_chain(
        [_inverse_outer_stage(spec), _shortfall_stage(spec, direction)],
        decision_dim=n_assets + 1,
        data_dim=n_assets,
    )
