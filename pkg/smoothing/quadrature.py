"""
Adaptive vector quadrature shared by the kernel and wavelet backends.

One-dimensional integrals use ``scipy.integrate.quad_vec`` with a 21-point
Gauss-Kronrod rule per panel; boxes in m > 1 dimensions are integrated by
nesting it one coordinate at a time.
"""
import logging

import numpy as np
from scipy import integrate

from core.conf import risk_setting
from core.exceptions import QuadratureFailure

logger = logging.getLogger('numerics')

_POINTS_PER_PANEL = 21


def integrate_vector(func, lo, hi, points=(), abs_tol=None, rel_tol=None, budget=None):
    """
    int_lo^hi func(z) dz for a vector-valued ``func``.

    Raises:
        QuadratureFailure: the panel limit derived from ``budget`` is reached or
            the result is not finite.
    """
    abs_tol = risk_setting('QUAD_ABS_TOL') if abs_tol is None else abs_tol
    rel_tol = risk_setting('QUAD_REL_TOL') if rel_tol is None else rel_tol
    budget = risk_setting('QUAD_BUDGET') if budget is None else budget
    inner = [p for p in points if lo < p < hi]

    result, error, info = integrate.quad_vec(
        func, lo, hi,
        epsabs=abs_tol,
        epsrel=rel_tol,
        norm='max',
        quadrature='gk21',
        limit=max(1, int(budget) // _POINTS_PER_PANEL),
        points=inner or None,
        full_output=True,
    )
    result = np.asarray(result, dtype=float)
    if info.status == 1 or not np.all(np.isfinite(result)):
        raise QuadratureFailure(
            f'quadrature on [{lo}, {hi}] stopped after {info.neval} evaluations '
            f'with error estimate {error:.3e}'
        )
    if info.status == 2:
        logger.warning(f'Quadrature roundoff on [{lo}, {hi}]: error estimate {error:.3e} accepted')
    return result


def integrate_box(func, bounds, points=None, **options):
    """
    Integrate ``func`` over a box given as a list of (lo, hi) pairs.

    ``func`` receives points of shape (B, m) with B = 1 and returns an array of
    any fixed shape; ``points`` optionally lists breakpoints per coordinate.
    """
    bounds = list(bounds)
    points = list(points) if points is not None else [()] * len(bounds)

    def nested(prefix):
        depth = len(prefix)
        lo, hi = bounds[depth]
        if depth == len(bounds) - 1:
            return integrate_vector(
                lambda z: np.asarray(func(np.array([prefix + [z]])), dtype=float),
                lo, hi, points[depth], **options,
            )
        return integrate_vector(lambda z: nested(prefix + [z]), lo, hi, points[depth], **options)

    return nested([])
