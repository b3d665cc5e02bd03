"""
True optimal risk values by numerical integration.

The shortfall moment E[max(0, L - u) ** q] is integrated against the density of
the loss L with adaptive quadrature; the outer minimization over u uses the same
bounded search as the estimators.
"""
import logging
import math
from typing import NamedTuple

from scipy import integrate

from core.conf import risk_setting
from core.exceptions import BadParameters, QuadratureFailure
from optimize.search import ScalarDomain, minimize_scalar
from risk.measures import RiskFamily

from .distributions import DistributionFamily, Normal, NormalParameter

logger = logging.getLogger('numerics')

# Tail probabilities bounding the search bracket for u
_LOWER_TAIL = 1e-6
_UPPER_TAIL = 1e-14

# Printed reference pair for N(10, 3), alpha = 0.05, q = 2
REFERENCE_THETA0 = 15.5163
REFERENCE_U_STAR = 14.5048


class OracleResult(NamedTuple):
    theta0: float
    u_star: float


class ConventionCheck(NamedTuple):
    parameter: str
    results: dict
    matched: bool


def _quad(func, lo, hi):
    value, _, *rest = integrate.quad(
        func, lo, hi,
        epsabs=risk_setting('QUAD_ABS_TOL'),
        epsrel=risk_setting('QUAD_REL_TOL'),
        limit=500,
        full_output=1,
    )
    if len(rest) > 1:
        raise QuadratureFailure(f'quad on [{lo}, {hi}] did not converge: {rest[1]}')
    if not math.isfinite(value):
        raise QuadratureFailure(f'quad on [{lo}, {hi}] returned {value}')
    return value


def _loss_bracket(frozen, sign):
    if sign > 0:
        return frozen.ppf(_LOWER_TAIL) - 1.0, frozen.isf(_UPPER_TAIL) + 1.0
    return -frozen.isf(_LOWER_TAIL) - 1.0, -frozen.ppf(_UPPER_TAIL) + 1.0


def shortfall_moment(dist, u, q, sign=1.0) -> float:
    """E[max(0, sign * X - u) ** q] for X ~ dist."""
    frozen = dist.frozen()
    if frozen is None:
        return max(0.0, sign * dist.mean - u) ** q
    if sign > 0:
        return _quad(lambda x: (x - u) ** q * frozen.pdf(x), u, math.inf)
    return _quad(lambda x: (-x - u) ** q * frozen.pdf(x), -math.inf, -u)


def true_value_oracle(dist, spec, tol=None) -> OracleResult:
    """
    min over u of u + (1/alpha) * (E[max(0, L - u) ** q]) ** (1/q) for the loss of ``dist``.

    A point mass is the analytic special case: theta0 = u* = c.

    Raises:
        BadParameters: ``spec`` is not a higher-order measure.
        QuadratureFailure: the shortfall moment could not be integrated.
    """
    if spec.family != RiskFamily.HIGHER_ORDER:
        raise BadParameters({'family': 'the oracle computes higher-order inverse measures only'})
    sign = spec.loss_sign
    mean_loss = sign * dist.mean
    if dist.family == DistributionFamily.POINT:
        return OracleResult(mean_loss, mean_loss)

    q, alpha, kappa = float(spec.q), float(spec.alpha), float(spec.kappa)

    def objective(u):
        risk = u + shortfall_moment(dist, u, q, sign) ** (1.0 / q) / alpha
        return risk if kappa == 1.0 else (1.0 - kappa) * mean_loss + kappa * risk

    lo, hi = _loss_bracket(dist.frozen(), sign)
    result = minimize_scalar(objective, ScalarDomain(lo, hi, tol=tol))
    logger.info(
        f'Oracle for {dist} with {spec.token}: theta0={result.value:.6f}, '
        f'u*={result.u_star:.6f} after {result.evaluations} evaluations'
    )
    return OracleResult(result.value, result.u_star)


def resolve_normal_convention(spec, mean=10.0, scale=3.0, reference=None, tol=1e-3) -> ConventionCheck:
    """
    Evaluate the oracle with ``scale`` read as a variance and as a standard deviation.

    The convention whose (theta0, u*) lies closest to ``reference`` is adopted;
    ``matched`` says whether it agrees within ``tol``.
    """
    reference = reference or OracleResult(REFERENCE_THETA0, REFERENCE_U_STAR)
    results = {
        parameter: true_value_oracle(Normal(mean, scale, parameter), spec)
        for parameter in NormalParameter.values
    }

    def distance(result):
        return max(abs(result.theta0 - reference.theta0), abs(result.u_star - reference.u_star))

    chosen = min(results, key=lambda parameter: distance(results[parameter]))
    matched = distance(results[chosen]) <= tol
    logger.info(
        f'Normal convention check: {chosen} gives theta0={results[chosen].theta0:.4f}, '
        f'u*={results[chosen].u_star:.4f} (matched={matched})'
    )
    return ConventionCheck(chosen, results, matched)
