"""
Data model of nested composite functionals.

A functional E[f1(u, E[f2(u, ... E[f_{k+1}(u, X)] ..., X)], X)] is a chain of
stages evaluated from the innermost outward. Every expectation in the chain is
taken by a per-level backend (empirical, kernel-smoothed or wavelet).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

from django.db import models

import numpy as np

from .exceptions import BadParameters, DimensionMismatch, NonFiniteValue


class BackendKind(models.TextChoices):
    EMPIRICAL = 'empirical', 'Empirical plug-in'
    KERNEL = 'kernel', 'Kernel smoothed'
    WAVELET = 'wavelet', 'Shape-preserving wavelet'


@dataclass(frozen=True, eq=False)
class Sample:
    """N observations of an m-dimensional random vector, stored as an (N, m) array."""

    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=float)
        if data.ndim == 1:
            data = data.reshape(-1, 1)
        errors = {}
        if data.ndim != 2:
            errors['data'] = f'expected a 1-D or 2-D array, got {data.ndim} dimensions'
        elif data.shape[0] < 1:
            errors['n_obs'] = 'a sample needs at least one observation'
        elif data.shape[1] < 1:
            errors['dim'] = 'observations need at least one coordinate'
        if errors:
            raise BadParameters(errors)
        if not np.all(np.isfinite(data)):
            raise NonFiniteValue('sample contains NaN or infinite coordinates')
        data.setflags(write=False)
        object.__setattr__(self, 'data', data)

    @property
    def n_obs(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    def shifted(self, offset) -> 'Sample':
        return Sample(self.data + np.asarray(offset, dtype=float))

    def scaled(self, factor) -> 'Sample':
        return Sample(self.data * float(factor))

    def __len__(self):
        return self.n_obs


@dataclass(frozen=True, eq=False)
class AffineIntegrand:
    """x -> slope.x + intercept."""

    slope: np.ndarray
    intercept: float

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ np.asarray(self.slope, dtype=float) + self.intercept


@dataclass(frozen=True, eq=False)
class TruncatedPower:
    """x -> max(0, slope.x - offset) ** power with power in {1, 2}."""

    slope: np.ndarray
    offset: float
    power: int

    @classmethod
    def upper(cls, slope, offset, power):
        return cls(np.atleast_1d(np.asarray(slope, dtype=float)), float(offset), int(power))

    @classmethod
    def lower(cls, slope, offset, power):
        """max(0, offset - slope.x) ** power, rewritten in the upper form."""
        return cls(-np.atleast_1d(np.asarray(slope, dtype=float)), -float(offset), int(power))

    def __call__(self, x):
        t = np.asarray(x, dtype=float) @ self.slope - self.offset
        return np.maximum(t, 0.0) ** self.power


Integrand = Union[AffineIntegrand, TruncatedPower]


@dataclass(frozen=True)
class HolderModulus:
    """w(t) = ell * t ** beta."""

    ell: float
    beta: float

    def __call__(self, t):
        return self.ell * np.asarray(t, dtype=float) ** self.beta


StageFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Stage:
    """
    One map f_j of the chain.

    ``func(u, eta, x)`` receives a batch of observations ``x`` with shape (B, m)
    and returns B values of dimension ``out_dim``. The innermost stage has
    ``in_dim == 0`` and ignores ``eta``.

    ``closed_form(u, eta)`` optionally describes each output component as an
    affine or truncated-power integrand so smoothed expectations can be taken in
    closed form. ``modulus(u, eta, lo, hi)`` optionally returns a Hoelder modulus
    in x valid on the box [lo, hi].
    """

    index: int
    func: StageFunction
    out_dim: int
    in_dim: int = 0
    convex_in_x: bool = False
    monotone_in_eta: bool = False
    closed_form: Optional[Callable[[np.ndarray, np.ndarray], Sequence[Integrand]]] = None
    modulus: Optional[Callable[..., HolderModulus]] = None
    name: str = ''

    def evaluate(self, u, eta, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        batch = x.shape[0]
        out = np.asarray(self.func(u, eta, x), dtype=float)
        if out.size == self.out_dim:
            out = np.broadcast_to(out.reshape(1, self.out_dim), (batch, self.out_dim))
        elif out.size == batch * self.out_dim:
            out = out.reshape(batch, self.out_dim)
        else:
            raise DimensionMismatch(
                f'stage {self.index} returned shape {out.shape}, '
                f'expected ({batch}, {self.out_dim})'
            )
        if not np.all(np.isfinite(out)):
            bad = int(np.argwhere(~np.isfinite(out))[0][0])
            raise NonFiniteValue(
                f'stage {self.index} produced a non-finite value at observation {bad}'
            )
        return out

    def integrands(self, u, eta):
        if self.closed_form is None:
            return None
        return tuple(self.closed_form(u, eta))


@dataclass(frozen=True)
class CompositeChain:
    """Stages f_1 (outermost) ... f_{k+1} (innermost) with their dimension signature."""

    stages: tuple
    decision_dim: int = 1
    data_dim: int = 1

    @property
    def k(self) -> int:
        return len(self.stages) - 1

    @property
    def signature(self) -> tuple:
        """(m_0, m_1, ..., m_k); m_0 is always 1."""
        return tuple(stage.out_dim for stage in self.stages)

    def __len__(self):
        return len(self.stages)

    def __iter__(self):
        return iter(self.stages)


@dataclass(frozen=True)
class Empirical:
    kind = BackendKind.EMPIRICAL

    @property
    def label(self):
        return 'plugin'


@dataclass(frozen=True)
class KernelTag:
    """Kernel smoothing with a registered kernel; ``bandwidth=None`` applies the rule."""

    kernel_id: str
    bandwidth: Optional[float] = None
    kind = BackendKind.KERNEL

    @property
    def label(self):
        if self.bandwidth is None:
            return self.kernel_id
        return f'{self.kernel_id}:h={float(self.bandwidth)!r}'


@dataclass(frozen=True)
class WaveletTag:
    """
    Wavelet density with a registered scaling function.

    ``resolution=None`` applies the resolution rule with ``rounding`` (None
    reads the setting); a pinned resolution ignores the rounding.
    """

    basis_id: str
    resolution: Optional[Union[int, tuple]] = None
    rounding: Optional[str] = None
    kind = BackendKind.WAVELET

    @property
    def label(self):
        label = f'wavelet:{self.basis_id}'
        if self.resolution is not None:
            levels = self.resolution if isinstance(self.resolution, tuple) else (self.resolution,)
            return f'{label}:j={"/".join(str(int(j)) for j in levels)}'
        if self.rounding is not None:
            return f'{label}:round={self.rounding}'
        return label


BackendTag = Union[Empirical, KernelTag, WaveletTag]


@dataclass(frozen=True)
class ExpectationBackend:
    """One backend tag per nesting level, outermost first."""

    per_level: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, 'per_level', tuple(self.per_level))

    @property
    def smoothed_levels(self) -> frozenset:
        """The index set J of levels where smoothing is applied (1-based)."""
        return frozenset(
            level for level, tag in enumerate(self.per_level, start=1)
            if tag.kind != BackendKind.EMPIRICAL
        )

    @classmethod
    def empirical(cls, chain: CompositeChain) -> 'ExpectationBackend':
        return cls(tuple(Empirical() for _ in chain.stages))

    @classmethod
    def smoothing_convex(cls, chain: CompositeChain, tag) -> 'ExpectationBackend':
        """Apply ``tag`` at every level whose stage is convex in x, empirical elsewhere."""
        return cls(tuple(
            tag if stage.convex_in_x else Empirical() for stage in chain.stages
        ))

    def __len__(self):
        return len(self.per_level)
