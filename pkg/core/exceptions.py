"""
Exception hierarchy shared by every app.

All numerical and modelling failures derive from ``CompositeRiskError`` so the
CLI can map them to a single exit code.
"""


class CompositeRiskError(Exception):
    """Base class for failures raised while building or evaluating estimators."""


class DimensionMismatch(CompositeRiskError):
    """Adjacent stages, samples or decisions disagree on a dimension."""


class EmptyChain(CompositeRiskError):
    """A composite chain needs at least two stages."""


class NonFiniteValue(CompositeRiskError):
    """A stage produced NaN or infinity."""


class BackendUnavailable(CompositeRiskError):
    """An expectation backend tag names an unregistered kernel or basis."""


class DegenerateSample(CompositeRiskError):
    """The sample carries no spread where one is required."""


class OrderExceeded(CompositeRiskError):
    """A kernel moment was requested beyond the kernel order."""


class QuadratureFailure(CompositeRiskError):
    """Adaptive quadrature did not reach its tolerance within the budget."""


class BracketTooNarrow(CompositeRiskError):
    """The scalar minimizer is pinned at an endpoint of its search bracket."""


class InfeasibleDomain(CompositeRiskError):
    """The simplex bounds cannot meet the budget constraint."""


class BadParameters(CompositeRiskError):
    """
    Invalid parameters.

    Accepts either a message or a ``{field: message}`` dict, like Django's
    ``ValidationError``; the dict is kept on ``errors``.
    """

    def __init__(self, errors):
        if isinstance(errors, dict):
            self.errors = dict(errors)
            message = '; '.join(f'{field}: {text}' for field, text in self.errors.items())
        else:
            self.errors = {'__all__': str(errors)}
            message = str(errors)
        super().__init__(message)


class StudyAborted(CompositeRiskError):
    """A bias study stopped because one replication failed."""

    def __init__(self, message, *, n_obs=None, replication=None, estimator=None):
        self.n_obs = n_obs
        self.replication = replication
        self.estimator = estimator
        super().__init__(
            f'{message} (N={n_obs}, replication={replication}, estimator={estimator})'
        )
