"""
Wavelet density estimator and its expectation backend.

With p_l = (1/N) sum_i prod_d phi(2^j X_id - l_d) the estimate is
d(x) = sum_l p_l prod_d 2^j phi(2^j x_d - l_d). Since every p_l >= 0 and the
p_l sum to one, d is a mixture of rescaled copies of phi centred on the dyadic
grid l / 2^j; expectations against d are taken on that mixture.
"""
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from core.composite import check_eta
from core.conf import risk_setting
from core.exceptions import BadParameters, DimensionMismatch
from core.registry import register_backend
from core.types import BackendKind, WaveletTag
from smoothing.expectation import IntegrationMode, convolved_mean

from .scaling import ResolutionRounding, ScalingFamily, get_scaling_function, resolution_rule


@dataclass(frozen=True)
class WaveletBasis:
    """Scaling function with one dyadic resolution per coordinate."""

    phi: object
    resolution: tuple
    dims: int = 1

    def __post_init__(self):
        object.__setattr__(self, 'phi', get_scaling_function(self.phi))
        resolution = self.resolution
        if np.ndim(resolution) == 0:
            resolution = (int(resolution),) * self.dims
        resolution = tuple(int(j) for j in resolution)
        errors = {}
        if len(resolution) != self.dims:
            errors['resolution'] = f'{len(resolution)} resolutions given for {self.dims} dimensions'
        elif any(j < 0 for j in resolution):
            errors['resolution'] = f'resolution levels must be nonnegative, got {resolution}'
        if errors:
            raise BadParameters(errors)
        object.__setattr__(self, 'resolution', resolution)

    @property
    def dyadic_scale(self) -> np.ndarray:
        """2^j per coordinate."""
        return np.array([2.0 ** j for j in self.resolution])


@dataclass(frozen=True, eq=False)
class WaveletDensity:
    """
    Sparse coefficients of the estimate.

    ``coefficients`` maps index tuples l to c_l = 2^{|j|/2} p_l, the empirical
    inner products with the normalised translates.
    """

    basis: WaveletBasis
    coefficients: dict = field(repr=False)
    active_range: tuple = ()

    @property
    def indices(self) -> np.ndarray:
        return np.array(sorted(self.coefficients), dtype=float).reshape(-1, self.basis.dims)

    @property
    def weights(self) -> np.ndarray:
        """Mixture weights p_l, ordered like ``indices``."""
        normaliser = math.prod(2.0 ** (j / 2.0) for j in self.basis.resolution)
        return np.array([self.coefficients[key] for key in sorted(self.coefficients)]) / normaliser

    @property
    def centres(self) -> np.ndarray:
        return self.indices / self.basis.dyadic_scale

    def __call__(self, x) -> np.ndarray:
        """Density values at points of shape (G, m); a 1-D array is read as scalar points."""
        x = np.asarray(x, dtype=float)
        if x.ndim <= 1:
            x = x.reshape(-1, 1)
        if x.shape[1] != self.basis.dims:
            raise DimensionMismatch(f'points have {x.shape[1]} coordinates, density has {self.basis.dims}')
        scale = self.basis.dyadic_scale
        shifted = x[:, None, :] * scale - self.indices[None, :, :]
        factors = np.prod(scale * self.basis.phi(shifted), axis=-1)
        return factors @ self.weights

    def mean(self) -> np.ndarray:
        return self.weights @ self.centres


def wavelet_density(sample, phi, j=None, rounding=None) -> WaveletDensity:
    """
    Build the estimate from a sample.

    ``j`` is an integer (equal resolution in every coordinate), a per-coordinate
    tuple or None for the resolution rule under ``rounding``.
    """
    phi = get_scaling_function(phi)
    if j is None:
        j = resolution_rule(sample.n_obs, rounding)
    basis = WaveletBasis(phi, j, dims=sample.dim)
    scale = basis.dyadic_scale

    shifts, values = [], []
    for coordinate in range(sample.dim):
        coordinate_shifts, coordinate_values = phi.translates(sample.data[:, coordinate] * scale[coordinate])
        shifts.append(coordinate_shifts)
        values.append(coordinate_values)

    terms = {}
    width = shifts[0].shape[1]
    for combo in itertools.product(range(width), repeat=sample.dim):
        weight = np.prod([values[d][:, k] for d, k in enumerate(combo)], axis=0)
        keys = np.column_stack([shifts[d][:, k] for d, k in enumerate(combo)])
        for key, value in zip(map(tuple, keys.tolist()), weight.tolist()):
            if value > 0.0:
                terms.setdefault(key, []).append(value)

    normaliser = math.prod(2.0 ** (level / 2.0) for level in basis.resolution)
    coefficients = {
        key: normaliser * math.fsum(parts) / sample.n_obs for key, parts in sorted(terms.items())
    }
    keys = np.array(list(coefficients), dtype=np.int64).reshape(-1, sample.dim)
    active_range = tuple(
        (int(keys[:, d].min()), int(keys[:, d].max())) for d in range(sample.dim)
    )
    return WaveletDensity(basis=basis, coefficients=coefficients, active_range=active_range)


def wavelet_expectation(stage, density, u, eta, integration=IntegrationMode.AUTO) -> np.ndarray:
    """
    int stage(u, eta, x) d(x) dx, componentwise.

    Each mixture component l contributes p_l E[stage(u, eta, l / 2^j + Y / 2^j)]
    with Y ~ phi, in closed form for affine and truncated-power stages.
    """
    eta = check_eta(stage, eta)
    basis = density.basis
    return convolved_mean(
        stage, density.centres, 1.0 / basis.dyadic_scale, basis.phi.profile, u, eta,
        weights=density.weights,
        radius=basis.phi.support_radius,
        integration=integration,
    )


def parse_wavelet_token(token) -> WaveletTag:
    """
    Parse ``wavelet:linear``, ``wavelet:quadratic:j=2`` or ``wavelet:linear:round=floor``.

    Raises:
        BadParameters: malformed token, unknown family or option, negative
            resolution, or both a resolution and a rounding.
    """
    parts = token.strip().split(':')
    if len(parts) < 2 or parts[0] != 'wavelet':
        raise BadParameters({'wavelet': f'expected wavelet:<basis>, got {token!r}'})
    basis_id = parts[1]
    if basis_id not in ScalingFamily.values:
        raise BadParameters({'wavelet': f'unknown scaling function {basis_id!r}'})
    resolution = rounding = None
    for option in parts[2:]:
        key, _, value = option.partition('=')
        if key == 'round':
            if value not in ResolutionRounding.values:
                raise BadParameters({'rounding': f'unknown resolution rounding {value!r}'})
            rounding = value
            continue
        if key != 'j':
            raise BadParameters({'wavelet': f'unknown wavelet option {option!r}'})
        try:
            resolution = int(value)
        except ValueError:
            raise BadParameters({'resolution': f'not an integer: {value!r}'})
        if resolution < 0:
            raise BadParameters({'resolution': f'resolution must be nonnegative, got {resolution}'})
    if resolution is not None and rounding is not None:
        raise BadParameters({'wavelet': f'a pinned resolution takes no rounding in {token!r}'})
    return WaveletTag(basis_id, resolution, rounding)


class WaveletLevel:
    """Wavelet backend for one nesting level; the density is estimated once."""

    kind = BackendKind.WAVELET

    def __init__(self, tag, sample):
        phi = get_scaling_function(tag.basis_id)
        self.density = wavelet_density(sample, phi, tag.resolution, tag.rounding)
        resolution = self.density.basis.resolution
        from_rule = tag.resolution is None
        self.details = {
            'basis': phi.family.value,
            'resolution': resolution[0] if len(resolution) == 1 else list(resolution),
            'resolution_rule': from_rule,
            'resolution_rounding': (tag.rounding or risk_setting('RESOLUTION_ROUNDING')) if from_rule else None,
        }

    @property
    def resolution(self):
        return self.details['resolution']

    def expect(self, stage, u, eta):
        return wavelet_expectation(stage, self.density, u, eta)


register_backend(BackendKind.WAVELET, WaveletLevel)
