"""
Symmetric probability densities on the real line with closed-form tail moments.

Both the smoothing kernels and the wavelet scaling functions are symmetric,
nonnegative and integrate to one, so expectations of truncated powers
E[max(0, mu + s Z) ** p] against them share one implementation.
"""
import math

import numpy as np
from numpy.polynomial import Polynomial
from scipy import special

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


class PiecewisePolynomialProfile:
    """
    Density given by polynomial pieces on consecutive intervals [lo, hi).

    Tail moments M_k(z0) = int_{z0}^inf z^k p(z) dz come from exact
    antiderivatives of z^k times each piece.
    """

    def __init__(self, pieces):
        self.pieces = tuple((float(lo), float(hi), Polynomial(coef)) for lo, hi, coef in pieces)
        self.support_radius = max(abs(self.pieces[0][0]), abs(self.pieces[-1][1]))
        self.breakpoints = tuple(hi for _, hi, _ in self.pieces[:-1])
        self._antiderivatives = {
            k: tuple((Polynomial.basis(k) * poly).integ() for _, _, poly in self.pieces)
            for k in (0, 1, 2)
        }

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        out = np.zeros_like(z)
        last = len(self.pieces) - 1
        for position, (lo, hi, poly) in enumerate(self.pieces):
            upper = z <= hi if position == last else z < hi
            mask = (z >= lo) & upper
            out[mask] = poly(z[mask])
        return out

    def tail_moment(self, k, z0):
        z0 = np.asarray(z0, dtype=float)
        total = np.zeros_like(z0)
        for (lo, hi, _), antiderivative in zip(self.pieces, self._antiderivatives[k]):
            start = np.clip(z0, lo, hi)
            total += antiderivative(hi) - antiderivative(start)
        return total

    def abs_moment(self, alpha):
        """int |z|^alpha p(z) dz for real alpha > 0, by symmetry twice the right half."""
        alpha = float(alpha)
        total = 0.0
        for lo, hi, poly in self.pieces:
            lo = max(lo, 0.0)
            if hi <= lo:
                continue
            for power, coef in enumerate(poly.coef):
                exponent = alpha + power + 1.0
                total += coef * (hi ** exponent - lo ** exponent) / exponent
        return 2.0 * total


class GaussianProfile:
    """Standard normal density; tail moments through the complementary error function."""

    support_radius = None
    breakpoints = ()

    def pdf(self, z):
        z = np.asarray(z, dtype=float)
        return _INV_SQRT_2PI * np.exp(-0.5 * z * z)

    def tail_moment(self, k, z0):
        z0 = np.asarray(z0, dtype=float)
        upper_tail = 0.5 * special.erfc(z0 / _SQRT2)
        if k == 0:
            return upper_tail
        density = self.pdf(z0)
        if k == 1:
            return density
        if k == 2:
            return z0 * density + upper_tail
        raise ValueError(f'tail moment of order {k} is not available')

    def abs_moment(self, alpha):
        alpha = float(alpha)
        return 2.0 ** (alpha / 2.0) * special.gamma((alpha + 1.0) / 2.0) / math.sqrt(math.pi)


def expected_truncated_power(mu, scale, power, profile):
    """
    E[max(0, mu + scale * Z) ** power] for Z with the given symmetric profile.

    ``mu`` is an array of centres, ``scale`` >= 0 a scalar or matching array and
    ``power`` is 1 or 2.
    """
    mu = np.asarray(mu, dtype=float)
    scale = np.broadcast_to(np.asarray(scale, dtype=float), mu.shape)
    if power not in (1, 2):
        raise ValueError(f'closed form only covers powers 1 and 2, got {power}')

    result = np.maximum(mu, 0.0) ** power
    spread = scale > 0.0
    if np.any(spread):
        m, s = mu[spread], scale[spread]
        z0 = -m / s
        m0 = profile.tail_moment(0, z0)
        m1 = profile.tail_moment(1, z0)
        if power == 1:
            value = m * m0 + s * m1
        else:
            m2 = profile.tail_moment(2, z0)
            value = m * m * m0 + 2.0 * m * s * m1 + s * s * m2
        result = result.astype(float, copy=True)
        result[spread] = np.maximum(value, 0.0)
    return result
