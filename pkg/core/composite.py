"""
Construction and evaluation of composite functionals.

eval_composite works from the innermost stage outward; every level averages
over the full sample with the backend assigned to it.
"""
import math

import numpy as np

from .exceptions import DimensionMismatch, EmptyChain
from .registry import register_backend, resolve_level
from .types import BackendKind, CompositeChain, ExpectationBackend


def exact_mean(values) -> np.ndarray:
    """Column means with exactly rounded sums, so row order never changes the result."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    n = values.shape[0]
    return np.array([math.fsum(column) / n for column in values.T])


def weighted_mean(values, weights) -> np.ndarray:
    """Column sums of weights * values, exactly rounded; weights are expected to sum to one."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values.reshape(-1, 1)
    weighted = values * np.asarray(weights, dtype=float).reshape(-1, 1)
    return np.array([math.fsum(column) for column in weighted.T])


def make_chain(stages, decision_dim=1, data_dim=1) -> CompositeChain:
    """
    Validate a stage sequence (outermost first) and build the chain.

    Raises:
        EmptyChain: fewer than two stages (k >= 1 is required).
        DimensionMismatch: the signature does not chain or does not end in a scalar.
    """
    stages = tuple(stages)
    if not stages:
        raise EmptyChain('a composite chain needs stages')
    if len(stages) < 2:
        raise EmptyChain('a composite chain needs at least two stages (k >= 1)')

    for position, stage in enumerate(stages, start=1):
        if stage.index != position:
            raise DimensionMismatch(
                f'stage at position {position} carries index {stage.index}'
            )
    if stages[0].out_dim != 1:
        raise DimensionMismatch(
            f'the outermost stage must be scalar, got out_dim={stages[0].out_dim}'
        )
    if stages[-1].in_dim != 0:
        raise DimensionMismatch(
            f'the innermost stage must have in_dim=0, got {stages[-1].in_dim}'
        )
    for outer, inner in zip(stages, stages[1:]):
        if outer.in_dim != inner.out_dim:
            raise DimensionMismatch(
                f'stage {inner.index} returns {inner.out_dim} values but '
                f'stage {outer.index} expects {outer.in_dim}'
            )
    return CompositeChain(stages=stages, decision_dim=int(decision_dim), data_dim=int(data_dim))


def check_eta(stage, eta):
    eta = np.asarray(eta, dtype=float).reshape(-1)
    if eta.size != stage.in_dim:
        raise DimensionMismatch(
            f'stage {stage.index} expects {stage.in_dim} inner values, got {eta.size}'
        )
    return eta


def empirical_expectation(stage, sample, u, eta) -> np.ndarray:
    """(1/N) sum_i stage(u, eta, X_i), componentwise."""
    eta = check_eta(stage, eta)
    return exact_mean(stage.evaluate(u, eta, sample.data))


class EmpiricalLevel:
    kind = BackendKind.EMPIRICAL

    def __init__(self, sample):
        self.sample = sample
        self.details = {}

    def expect(self, stage, u, eta):
        return empirical_expectation(stage, self.sample, u, eta)


register_backend(BackendKind.EMPIRICAL, lambda tag, sample: EmpiricalLevel(sample))


class CompositeEvaluator:
    """
    A chain bound to a backend and a sample.

    Backend set-up (bandwidth rules, wavelet coefficients) happens once here, so
    repeated evaluation inside a minimizer only pays for the expectations.
    """

    def __init__(self, chain, backend, sample):
        if len(backend) != len(chain):
            raise DimensionMismatch(
                f'backend has {len(backend)} levels but the chain has {len(chain)} stages'
            )
        if sample.dim != chain.data_dim:
            raise DimensionMismatch(
                f'sample dimension {sample.dim} does not match chain data_dim {chain.data_dim}'
            )
        self.chain = chain
        self.backend = backend
        self.sample = sample
        self.levels = tuple(resolve_level(tag, sample) for tag in backend.per_level)

    @property
    def details(self):
        """Per-level backend parameters actually used (bandwidths, resolutions)."""
        return {
            stage.index: level.details
            for stage, level in zip(self.chain.stages, self.levels)
        }

    def __call__(self, u) -> float:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if u.size != self.chain.decision_dim:
            raise DimensionMismatch(
                f'decision has {u.size} coordinates, chain expects {self.chain.decision_dim}'
            )
        eta = np.empty(0)
        for stage, level in zip(reversed(self.chain.stages), reversed(self.levels)):
            eta = level.expect(stage, u, check_eta(stage, eta))
        return float(eta[0])


def eval_composite(chain, backend, sample, u) -> float:
    return CompositeEvaluator(chain, backend, sample)(u)


__all__ = [
    'CompositeEvaluator',
    'ExpectationBackend',
    'empirical_expectation',
    'eval_composite',
    'check_eta',
    'exact_mean',
    'make_chain',
    'weighted_mean',
]
