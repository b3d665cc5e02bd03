"""
Convolution-smoothed expectations.

The kernel estimator replaces E[f(X)] by (1/N) sum_i E[f(X_i + h Z)], Z ~ K.
Truncated-power and affine integrands are handled in closed form; any other
stage goes through adaptive quadrature over the kernel support.
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional

from django.db import models

import numpy as np

from core.composite import check_eta, exact_mean, weighted_mean
from core.conf import risk_setting
from core.exceptions import BadParameters, DegenerateSample, DimensionMismatch
from core.registry import register_backend
from core.types import AffineIntegrand, BackendKind, TruncatedPower

from .kernels import Kernel, get_kernel
from .profiles import GaussianProfile, expected_truncated_power
from .quadrature import integrate_box, integrate_vector

logger = logging.getLogger('numerics')


class BandwidthRule(models.TextChoices):
    SILVERMAN_LIKE = 'silverman_like', '1.06 sd N^(-1/5)'


class IntegrationMode(models.TextChoices):
    AUTO = 'auto', 'Closed form when available'
    ANALYTIC = 'analytic', 'Closed form only'
    QUADRATURE = 'quadrature', 'Adaptive quadrature'


def bandwidth_rule(sample):
    """
    1.06 * sd * N^(-1/5) with the N - 1 denominator.

    Returns a float for one-dimensional samples and one bandwidth per
    coordinate otherwise.

    Raises:
        DegenerateSample: fewer than two observations or a coordinate without spread.
    """
    if sample.n_obs < 2:
        raise DegenerateSample('the bandwidth rule needs at least two observations')
    spread = np.std(sample.data, axis=0, ddof=1)
    if np.any(spread == 0.0):
        raise DegenerateSample('the bandwidth rule needs a sample with nonzero spread')
    bandwidth = 1.06 * spread * sample.n_obs ** -0.2
    if sample.dim == 1:
        return float(bandwidth[0])
    logger.info(f'Bandwidth rule applied per coordinate in {sample.dim} dimensions')
    return bandwidth


@dataclass(frozen=True)
class SmoothingPlan:
    """Kernel, bandwidth (explicit or rule) and integration settings for one level."""

    kernel: Kernel
    bandwidth: object = BandwidthRule.SILVERMAN_LIKE
    integration: str = IntegrationMode.AUTO
    abs_tol: Optional[float] = None
    rel_tol: Optional[float] = None
    truncation_radius: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'kernel', get_kernel(self.kernel))
        errors = {}
        if not self.uses_rule:
            bandwidth = np.atleast_1d(np.asarray(self.bandwidth, dtype=float))
            if bandwidth.size == 0 or not np.all(np.isfinite(bandwidth)) or np.any(bandwidth <= 0.0):
                errors['bandwidth'] = f'bandwidth must be positive, got {self.bandwidth}'
        if self.integration not in IntegrationMode.values:
            errors['integration'] = f'unknown integration mode {self.integration!r}'
        if self.truncation_radius is not None and self.truncation_radius <= 0.0:
            errors['truncation_radius'] = 'truncation radius must be positive'
        if errors:
            raise BadParameters(errors)

    @property
    def uses_rule(self) -> bool:
        return isinstance(self.bandwidth, str)

    def resolve(self, sample) -> 'SmoothingPlan':
        """The same plan with the bandwidth rule evaluated on ``sample``."""
        if not self.uses_rule:
            return self
        return replace(self, bandwidth=bandwidth_rule(sample))

    def bandwidths(self, dim) -> np.ndarray:
        if self.uses_rule:
            raise BadParameters({'bandwidth': 'resolve the bandwidth rule against a sample first'})
        bandwidth = np.atleast_1d(np.asarray(self.bandwidth, dtype=float))
        if bandwidth.size == 1:
            return np.full(dim, bandwidth[0])
        if bandwidth.size != dim:
            raise DimensionMismatch(f'{bandwidth.size} bandwidths given for {dim} coordinates')
        return bandwidth

    @property
    def radius(self) -> float:
        if self.kernel.support_radius is not None:
            return self.kernel.support_radius
        if self.truncation_radius is not None:
            return self.truncation_radius
        return risk_setting('GAUSSIAN_TRUNCATION')


def _closed_form_values(integrands, centres, scales, profile, out_dim):
    """Per-centre values of E[g(c + scales * Z)] or None when an integrand has no closed form."""
    if integrands is None:
        return None
    if len(integrands) != out_dim:
        raise DimensionMismatch(f'{len(integrands)} closed-form integrands for {out_dim} outputs')
    dim = centres.shape[1]
    columns = []
    for integrand in integrands:
        if isinstance(integrand, AffineIntegrand):
            columns.append(integrand(centres))
        elif isinstance(integrand, TruncatedPower) and integrand.power in (1, 2):
            slope = np.asarray(integrand.slope, dtype=float)
            if dim == 1:
                spread = abs(slope[0]) * scales[0]
            elif isinstance(profile, GaussianProfile):
                spread = float(np.sqrt(np.sum((slope * scales) ** 2)))
            else:
                return None
            mu = centres @ slope - integrand.offset
            columns.append(expected_truncated_power(mu, spread, integrand.power, profile))
        else:
            return None
    return np.column_stack(columns)


def convolved_mean(stage, centres, scales, profile, u, eta, weights=None, radius=None,
                   integration=IntegrationMode.AUTO, abs_tol=None, rel_tol=None):
    """
    Average over centres c_i of E[stage(u, eta, c_i + scales * Z)].

    Z has the product density built from ``profile``; ``weights`` default to
    uniform. Kernel smoothing uses the observations as centres; the wavelet
    estimator uses the dyadic grid with its coefficients as weights.
    """
    centres = np.asarray(centres, dtype=float)
    scales = np.asarray(scales, dtype=float)
    average = exact_mean if weights is None else (lambda values: weighted_mean(values, weights))

    if integration != IntegrationMode.QUADRATURE:
        values = _closed_form_values(stage.integrands(u, eta), centres, scales, profile, stage.out_dim)
        if values is not None:
            return average(values)
        if integration == IntegrationMode.ANALYTIC:
            raise BadParameters({
                'integration': f'stage {stage.index} has no closed-form integrand description'
            })

    if radius is None:
        radius = profile.support_radius or risk_setting('GAUSSIAN_TRUNCATION')
    options = {'abs_tol': abs_tol, 'rel_tol': rel_tol}
    dim = centres.shape[1]

    if dim == 1:
        def integrand(z):
            return stage.evaluate(u, eta, centres + scales * z) * profile.pdf(z)

        integrated = integrate_vector(integrand, -radius, radius, profile.breakpoints, **options)
    else:
        def integrand(z):
            point = z[0]
            return stage.evaluate(u, eta, centres + scales * point) * np.prod(profile.pdf(point))

        integrated = integrate_box(
            integrand, [(-radius, radius)] * dim, [profile.breakpoints] * dim, **options
        )
    return average(integrated)


def smoothed_expectation(stage, sample, plan, u, eta) -> np.ndarray:
    """
    (1/N) sum_i int stage(u, eta, X_i + h z) K(z) dz, componentwise.

    Raises:
        QuadratureFailure: adaptive quadrature missed its tolerance.
        NonFiniteValue: the stage produced NaN or infinity.
    """
    eta = check_eta(stage, eta)
    plan = plan.resolve(sample)
    return convolved_mean(
        stage, sample.data, plan.bandwidths(sample.dim), plan.kernel.profile, u, eta,
        radius=plan.radius,
        integration=plan.integration,
        abs_tol=plan.abs_tol,
        rel_tol=plan.rel_tol,
    )


def kernel_density(sample, kernel, bandwidth, grid) -> np.ndarray:
    """Kernel density estimate (1/(N prod h)) sum_i K((x - X_i) / h) at grid points."""
    kernel = get_kernel(kernel)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1:
        grid = grid.reshape(-1, 1)
    if grid.shape[1] != sample.dim:
        raise DimensionMismatch(f'grid points have {grid.shape[1]} coordinates, sample has {sample.dim}')
    plan = SmoothingPlan(kernel, bandwidth).resolve(sample)
    scales = plan.bandwidths(sample.dim)
    scaled = (grid[:, None, :] - sample.data[None, :, :]) / scales
    values = np.prod(kernel.profile.pdf(scaled), axis=-1)
    return values.mean(axis=1) / np.prod(scales)


class SmoothedLevel:
    """Kernel backend for one nesting level; the bandwidth is fixed at construction."""

    kind = BackendKind.KERNEL

    def __init__(self, tag, sample):
        kernel = get_kernel(tag.kernel_id)
        bandwidth = tag.bandwidth if tag.bandwidth is not None else BandwidthRule.SILVERMAN_LIKE
        self.sample = sample
        self.plan = SmoothingPlan(kernel, bandwidth).resolve(sample)
        resolved = np.atleast_1d(np.asarray(self.plan.bandwidth, dtype=float))
        self.details = {
            'kernel': kernel.family.value,
            'bandwidth': float(resolved[0]) if resolved.size == 1 else resolved.tolist(),
            'bandwidth_rule': tag.bandwidth is None,
        }

    @property
    def bandwidth(self):
        return self.details['bandwidth']

    def expect(self, stage, u, eta):
        return smoothed_expectation(stage, self.sample, self.plan, u, eta)


register_backend(BackendKind.KERNEL, SmoothedLevel)
