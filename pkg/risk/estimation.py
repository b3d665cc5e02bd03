"""
Estimators of optimal risk values under a chosen expectation backend.

Smoothing (kernel or wavelet) is applied to the stages flagged convex in x;
every other level stays empirical.
"""
from typing import NamedTuple

import numpy as np

from core.composite import CompositeEvaluator
from core.conf import risk_setting
from core.types import ExpectationBackend
from optimize.search import ScalarDomain, minimize_scalar
from smoothing.kernels import get_kernel, kernel_moment

from .chains import higher_order_risk_objective, inverse_portfolio_chain, mean_semideviation_chain


class RiskEstimate(NamedTuple):
    theta: float
    u_star: float
    details: dict


def sample_losses(spec, sample) -> np.ndarray:
    return spec.loss_sign * sample.data[:, 0]


def _level_details(evaluator):
    merged = {}
    for details in evaluator.details.values():
        merged.update(details)
    return merged


def estimate_higher_order_risk(spec, tag, sample, tol=None) -> RiskEstimate:
    """min over u of the higher-order objective with ``tag`` applied at the convex stage."""
    chain = higher_order_risk_objective(spec)
    evaluator = CompositeEvaluator(chain, ExpectationBackend.smoothing_convex(chain, tag), sample)
    domain = ScalarDomain.for_losses(sample_losses(spec, sample), spec.alpha, tol=tol)
    result = minimize_scalar(evaluator, domain)
    return RiskEstimate(result.value, result.u_star, _level_details(evaluator))


def mean_semideviation_objective(spec, tag, sample):
    """Weights -> estimated mean-semideviation of the portfolio loss."""
    chain = mean_semideviation_chain(spec, n_assets=sample.dim)
    return CompositeEvaluator(chain, ExpectationBackend.smoothing_convex(chain, tag), sample)


def portfolio_objective(spec, tag, sample, tol=None):
    """
    Weights -> higher-order measure of the portfolio loss, minimized over u0.

    The returned callable is what minimize_simplex sees.
    """
    chain = inverse_portfolio_chain(spec, n_assets=sample.dim)
    evaluator = CompositeEvaluator(chain, ExpectationBackend.smoothing_convex(chain, tag), sample)

    def objective(weights):
        weights = np.asarray(weights, dtype=float)
        losses = spec.loss_sign * (sample.data @ weights)
        domain = ScalarDomain.for_losses(losses, spec.alpha, tol=tol)
        return minimize_scalar(lambda u0: evaluator(np.append(weights, u0)), domain).value

    return objective


def kernel_bias_bound(spec, sample, tag, bandwidth, u_star) -> float:
    """
    Upper bound on (kernel estimate - plug-in estimate) at bandwidth h.

    Uses the Hoelder modulus l * t^beta of the shortfall stage on the loss range
    extended by the kernel reach: (kappa / alpha) * (l * m_beta(K)) ** (1/q) * h ** (beta/q).
    """
    kernel = get_kernel(tag.kernel_id)
    stage = higher_order_risk_objective(spec).stages[-1]
    radius = kernel.support_radius
    if radius is None:
        radius = risk_setting('GAUSSIAN_TRUNCATION')
    reach = radius * bandwidth
    lo, hi = sample.data.min(axis=0) - reach, sample.data.max(axis=0) + reach
    modulus = stage.modulus(np.array([u_star]), np.empty(0), lo, hi)
    factor = spec.kappa / spec.alpha
    spread = modulus.ell * kernel_moment(kernel, modulus.beta)
    return factor * spread ** (1.0 / spec.q) * bandwidth ** (modulus.beta / spec.q)
