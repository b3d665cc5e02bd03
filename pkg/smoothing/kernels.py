"""
Smoothing kernels of order two.

Every kernel is a symmetric probability density on the line; in m dimensions
the product kernel is used.
"""
import math
from dataclasses import dataclass

from django.db import models

import numpy as np
from scipy import special

from core.exceptions import BackendUnavailable, BadParameters, OrderExceeded
from core.types import KernelTag

from .profiles import GaussianProfile, PiecewisePolynomialProfile
from .quadrature import integrate_box


class KernelFamily(models.TextChoices):
    UNIFORM = 'uniform', 'Uniform'
    EPANECHNIKOV = 'epanechnikov', 'Epanechnikov'
    GAUSSIAN = 'gaussian', 'Gaussian'


@dataclass(frozen=True)
class Kernel:
    """A product kernel built from a one-dimensional profile."""

    family: str
    profile: object
    order: float = 2.0

    @property
    def support_radius(self):
        """Half-width of the support per coordinate, None when unbounded."""
        return self.profile.support_radius

    @property
    def bounded(self) -> bool:
        return self.support_radius is not None

    def density(self, y) -> np.ndarray:
        """K(y) for points y of shape (..., m); a 1-D array is read as scalar points."""
        y = np.asarray(y, dtype=float)
        if y.ndim <= 1:
            return self.profile.pdf(y)
        return np.prod(self.profile.pdf(y), axis=-1)

    def moment(self, alpha, dim=1) -> float:
        return kernel_moment(self, alpha, dim=dim)


KERNELS = {
    KernelFamily.UNIFORM: Kernel(
        KernelFamily.UNIFORM,
        PiecewisePolynomialProfile([(-1.0, 1.0, [0.5])]),
    ),
    KernelFamily.EPANECHNIKOV: Kernel(
        KernelFamily.EPANECHNIKOV,
        PiecewisePolynomialProfile([(-1.0, 1.0, [0.75, 0.0, -0.75])]),
    ),
    KernelFamily.GAUSSIAN: Kernel(KernelFamily.GAUSSIAN, GaussianProfile()),
}


def get_kernel(kernel_id) -> Kernel:
    if isinstance(kernel_id, Kernel):
        return kernel_id
    try:
        return KERNELS[KernelFamily(kernel_id)]
    except ValueError:
        raise BackendUnavailable(f'unknown kernel {kernel_id!r}')


def kernel_moment(kernel, alpha, dim=1) -> float:
    """
    m_alpha(K) = int ||y||^alpha K(y) dy.

    Closed forms in one dimension for every built-in kernel and in any dimension
    for the Gaussian; bounded kernels in m > 1 fall back to quadrature.

    Raises:
        OrderExceeded: alpha is above the kernel order.
    """
    kernel = get_kernel(kernel)
    alpha = float(alpha)
    if alpha <= 0.0:
        raise BadParameters({'alpha': f'moment order must be positive, got {alpha}'})
    if alpha > kernel.order:
        raise OrderExceeded(f'moment of order {alpha} requested from a kernel of order {kernel.order}')

    if dim == 1:
        return float(kernel.profile.abs_moment(alpha))
    if kernel.family == KernelFamily.GAUSSIAN:
        return float(2.0 ** (alpha / 2.0) * math.exp(
            special.gammaln((dim + alpha) / 2.0) - special.gammaln(dim / 2.0)
        ))

    radius = kernel.support_radius

    def integrand(z):
        return (np.linalg.norm(z, axis=-1) ** alpha * kernel.density(z)).reshape(-1, 1)

    bounds = [(-radius, radius)] * dim
    return float(np.ravel(integrate_box(integrand, bounds))[0])


def parse_kernel_token(token):
    """
    Parse ``uniform``, ``gaussian:h=0.5`` and friends into a ``KernelTag``.

    Raises:
        BadParameters: unknown family, malformed option or non-positive bandwidth.
    """
    head, _, options = token.strip().partition(':')
    if head not in KernelFamily.values:
        raise BadParameters({'kernel': f'unknown kernel {head!r}'})
    bandwidth = None
    for option in filter(None, options.split(':')):
        key, _, value = option.partition('=')
        if key != 'h':
            raise BadParameters({'kernel': f'unknown kernel option {option!r}'})
        try:
            bandwidth = float(value)
        except ValueError:
            raise BadParameters({'bandwidth': f'not a number: {value!r}'})
        if not bandwidth > 0.0 or not math.isfinite(bandwidth):
            raise BadParameters({'bandwidth': f'bandwidth must be positive, got {value}'})
    return KernelTag(head, bandwidth)
