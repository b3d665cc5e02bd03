"""
Derivative-free minimizers for composite objectives.

minimize_scalar wraps bounded Brent search; minimize_simplex runs Nelder-Mead
on a penalised objective whose argument is projected onto the budget set
{u : sum(u) = K, l <= u <= b}. Each run restarts from its own converged point
with a fresh simplex until a round stops improving the value.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np
from scipy import optimize

from core.conf import risk_setting
from core.exceptions import BadParameters, BracketTooNarrow, InfeasibleDomain

logger = logging.getLogger('numerics')

_SQRT_EPS = math.sqrt(np.finfo(float).eps)
_FLAT = 4.0 * np.finfo(float).eps
_POLISH_ROUNDS = 50
_SIMPLEX_STEP = 0.1


class ScalarResult(NamedTuple):
    u_star: float
    value: float
    evaluations: int


class SimplexResult(NamedTuple):
    u_star: np.ndarray
    value: float
    restart_values: tuple


@dataclass(frozen=True)
class ScalarDomain:
    """Search bracket [lo, hi] and absolute tolerance on the minimizer."""

    lo: float
    hi: float
    tol: Optional[float] = None
    budget: Optional[int] = None

    def __post_init__(self):
        tol = risk_setting('OPT_TOL') if self.tol is None else self.tol
        budget = risk_setting('OPT_BUDGET') if self.budget is None else self.budget
        errors = {}
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            errors['bracket'] = f'need finite lo < hi, got [{self.lo}, {self.hi}]'
        if not tol > 0.0:
            errors['tol'] = f'tolerance must be positive, got {tol}'
        if int(budget) < 1:
            errors['budget'] = f'evaluation budget must be positive, got {budget}'
        if errors:
            raise BadParameters(errors)
        object.__setattr__(self, 'tol', float(tol))
        object.__setattr__(self, 'budget', int(budget))

    @classmethod
    def for_losses(cls, losses, alpha, tol=None):
        """[min - 1, max + (max - min) / alpha], one unit wider on the right for constant data."""
        losses = np.asarray(losses, dtype=float)
        lo, hi = float(losses.min()), float(losses.max())
        right = hi + (hi - lo) / alpha
        if hi == lo:
            right += 1.0
        return cls(lo - 1.0, right, tol=tol)


def _slack(value):
    return _FLAT * max(1.0, abs(value))


def minimize_scalar(objective, domain) -> ScalarResult:
    """
    Minimize a unimodal function on the domain bracket.

    A second bounded pass centred on the first estimate brings the absolute
    error down to the domain tolerance. Flat minima resolve to the leftmost
    point of the bracket when the lower end is as good as the search result.

    Raises:
        BracketTooNarrow: the result sits on an endpoint and the objective keeps
            decreasing into it.
    """
    lo, hi, tol = domain.lo, domain.hi, domain.tol
    evaluations = 0

    def counted(u):
        nonlocal evaluations
        evaluations += 1
        return float(objective(u))

    options = {'xatol': tol, 'maxiter': domain.budget}
    first = optimize.minimize_scalar(counted, bounds=(lo, hi), method='bounded', options=options)
    best_u, best_value = float(first.x), float(first.fun)

    reach = 5.0 * (_SQRT_EPS * abs(best_u) + tol)
    left, right = max(lo, best_u - reach), min(hi, best_u + reach)
    if right - left > tol:
        centre = best_u
        polish = optimize.minimize_scalar(
            lambda t: counted(centre + t),
            bounds=(left - centre, right - centre),
            method='bounded',
            options={'xatol': tol / 10.0, 'maxiter': domain.budget},
        )
        if polish.fun < best_value:
            best_u, best_value = centre + float(polish.x), float(polish.fun)

    lower_value = counted(lo)
    if lower_value <= best_value + _slack(best_value):
        best_u, best_value = lo, lower_value

    if best_u - lo <= 5.0 * tol:
        inside = counted(lo + 10.0 * tol)
        if best_value < inside - _slack(inside):
            raise BracketTooNarrow(f'minimizer pinned at the lower end {lo} of [{lo}, {hi}]')
    elif hi - best_u <= 5.0 * tol:
        upper_value = counted(hi)
        inside = counted(hi - 10.0 * tol)
        if upper_value < inside - _slack(inside):
            raise BracketTooNarrow(f'minimizer pinned at the upper end {hi} of [{lo}, {hi}]')

    return ScalarResult(best_u, best_value, evaluations)


@dataclass(frozen=True, eq=False)
class SimplexDomain:
    """Budget set {u : sum(u) = budget, lower <= u <= upper}."""

    dim: int
    budget: float = 1.0
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    tol: Optional[float] = None
    max_evaluations: Optional[int] = None

    def __post_init__(self):
        lower = np.zeros(self.dim) if self.lower is None else np.broadcast_to(
            np.asarray(self.lower, dtype=float), (self.dim,)).copy()
        upper = np.full(self.dim, float(self.budget)) if self.upper is None else np.broadcast_to(
            np.asarray(self.upper, dtype=float), (self.dim,)).copy()
        errors = {}
        if self.dim < 1:
            errors['dim'] = f'need at least one coordinate, got {self.dim}'
        if np.any(lower > upper):
            errors['bounds'] = 'every lower bound must be at most its upper bound'
        if errors:
            raise BadParameters(errors)
        if not lower.sum() <= self.budget <= upper.sum():
            raise InfeasibleDomain(
                f'bounds sum to [{lower.sum()}, {upper.sum()}], which excludes the budget {self.budget}'
            )
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)
        object.__setattr__(self, 'tol', float(risk_setting('OPT_TOL') if self.tol is None else self.tol))
        object.__setattr__(self, 'max_evaluations', int(
            risk_setting('OPT_BUDGET') if self.max_evaluations is None else self.max_evaluations
        ))

    @property
    def is_point(self) -> bool:
        return self.dim == 1 or math.isclose(self.lower.sum(), self.budget) or math.isclose(
            self.upper.sum(), self.budget)

    def project(self, v) -> np.ndarray:
        """Euclidean projection: clip(v - tau, lower, upper) with tau solving the budget equation."""
        v = np.asarray(v, dtype=float)
        if self.is_point:
            if self.dim == 1:
                return np.array([float(self.budget)])
            return self.lower.copy() if math.isclose(self.lower.sum(), self.budget) else self.upper.copy()

        def excess(tau):
            return np.clip(v - tau, self.lower, self.upper).sum() - self.budget

        tau_lo, tau_hi = float(np.min(v - self.upper)), float(np.max(v - self.lower))
        if excess(tau_lo) <= 0.0:
            tau = tau_lo
        elif excess(tau_hi) >= 0.0:
            tau = tau_hi
        else:
            tau = optimize.brentq(excess, tau_lo, tau_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        return np.clip(v - tau, self.lower, self.upper)

    def seeds(self, restarts, seed=0) -> np.ndarray:
        rng = np.random.default_rng(seed)
        draws = rng.dirichlet(np.ones(self.dim), size=restarts) * self.budget
        return np.array([self.project(draw) for draw in draws])


def _initial_simplex(start, domain):
    step = _SIMPLEX_STEP * max(float(domain.budget), float(np.max(domain.upper - domain.lower)), 1.0)
    return np.vstack([start, start + step * np.eye(domain.dim)])


def _polished_run(penalised, objective, start, domain, options, index):
    """
    Nelder-Mead from ``start``, restarted at the converged point with a fresh
    simplex until a round improves the value by no more than the tolerance.
    """
    point = domain.project(start)
    value = float(objective(point))
    for round_ in range(_POLISH_ROUNDS):
        result = optimize.minimize(
            penalised, point, method='Nelder-Mead',
            options={**options, 'initial_simplex': _initial_simplex(point, domain)},
        )
        if not result.success:
            logger.warning(f'Nelder-Mead restart {index} round {round_} stopped early: {result.message}')
        candidate = domain.project(result.x)
        candidate_value = float(objective(candidate))
        if candidate_value >= value:
            break
        improvement = value - candidate_value
        point, value = candidate, candidate_value
        if improvement <= domain.tol * max(1.0, abs(value)):
            break
    else:
        logger.warning(f'Nelder-Mead restart {index} still improving after {_POLISH_ROUNDS} rounds')
    return value, point


def minimize_simplex(objective, domain, restarts=5, seed=0) -> SimplexResult:
    """
    Best feasible point over polished Nelder-Mead runs from ``restarts`` projected Dirichlet seeds.

    Ties between restarts go to the lowest restart index.
    """
    if restarts < 1:
        raise BadParameters({'restarts': f'need at least one restart, got {restarts}'})
    if domain.is_point:
        point = domain.project(np.zeros(domain.dim))
        value = float(objective(point))
        return SimplexResult(point, value, (value,) * restarts)

    def penalised(v):
        projected = domain.project(v)
        return float(objective(projected)) + float(np.sum((v - projected) ** 2))

    options = {
        'xatol': domain.tol,
        'fatol': domain.tol,
        'maxfev': domain.max_evaluations,
        'adaptive': domain.dim > 2,
    }
    outcomes = []
    for index, start in enumerate(domain.seeds(restarts, seed)):
        value, point = _polished_run(penalised, objective, start, domain, options, index)
        outcomes.append((value, index, point))

    value, _, point = min(outcomes, key=lambda outcome: (outcome[0], outcome[1]))
    logger.debug(f'Simplex search over {restarts} restarts: best value {value}')
    return SimplexResult(point, value, tuple(outcome[0] for outcome in outcomes))
