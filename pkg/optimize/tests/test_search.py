import numpy as np
import pytest

from core.exceptions import BadParameters, BracketTooNarrow, InfeasibleDomain
from optimize.search import ScalarDomain, SimplexDomain, minimize_scalar, minimize_simplex


@pytest.mark.unit
class TestScalarDomain:
    """Test bracket validation and the default bracket"""

    def test_reversed_bracket(self):
        with pytest.raises(BadParameters) as excinfo:
            ScalarDomain(3.0, 1.0)
        assert 'bracket' in excinfo.value.errors

    def test_non_positive_tolerance(self):
        with pytest.raises(BadParameters):
            ScalarDomain(0.0, 1.0, tol=0.0)

    def test_default_tolerance_from_settings(self):
        assert ScalarDomain(0.0, 1.0).tol == pytest.approx(1e-8)

    def test_bracket_for_losses(self):
        domain = ScalarDomain.for_losses([2.0, 4.0, 3.0], alpha=0.5)
        assert (domain.lo, domain.hi) == (1.0, 8.0)

    def test_bracket_for_constant_losses(self):
        domain = ScalarDomain.for_losses([7.0, 7.0], alpha=0.05)
        assert (domain.lo, domain.hi) == (6.0, 8.0)


@pytest.mark.unit
class TestMinimizeScalar:
    """Test bounded scalar search"""

    def test_quadratic_bowl(self):
        result = minimize_scalar(lambda x: (x - 2.0) ** 2, ScalarDomain(0.0, 5.0, tol=1e-8))
        assert abs(result.u_star - 2.0) <= 1e-8
        assert result.value == pytest.approx(0.0, abs=1e-15)

    def test_absolute_value_kink(self):
        result = minimize_scalar(abs, ScalarDomain(-1.0, 3.0, tol=1e-8))
        assert abs(result.u_star) <= 1e-8

    @pytest.mark.parametrize('minimizer', [-3.7, 0.25, 14.5048, 120.0])
    def test_piecewise_smooth_suite(self, minimizer):
        objectives = [
            lambda x: abs(x - minimizer) + 0.5 * max(0.0, x - minimizer) ** 2,
            lambda x: np.exp(abs(x - minimizer)),
            lambda x: max(minimizer - x, 3.0 * (x - minimizer)),
        ]
        domain = ScalarDomain(minimizer - 10.0, minimizer + 7.0, tol=1e-8)
        for objective in objectives:
            assert abs(minimize_scalar(objective, domain).u_star - minimizer) <= 1e-8

    def test_constant_sample_risk(self):
        alpha = 0.05

        def objective(u):
            return u + max(0.0, 7.0 - u) / alpha

        result = minimize_scalar(objective, ScalarDomain.for_losses([7.0] * 5, alpha))
        assert result.u_star == pytest.approx(7.0, abs=1e-8)
        assert result.value == pytest.approx(7.0, abs=1e-7)

    def test_flat_minimum_returns_leftmost_point(self):
        result = minimize_scalar(lambda x: max(0.0, x - 1.0), ScalarDomain(-2.0, 4.0))
        assert result.u_star == -2.0
        assert result.value == 0.0

    def test_decreasing_into_upper_end(self):
        with pytest.raises(BracketTooNarrow):
            minimize_scalar(lambda x: -x, ScalarDomain(0.0, 1.0))

    def test_decreasing_into_lower_end(self):
        with pytest.raises(BracketTooNarrow):
            minimize_scalar(lambda x: x, ScalarDomain(0.0, 1.0))

    def test_deterministic(self):
        domain = ScalarDomain(-5.0, 5.0)

        def objective(x):
            return np.cosh(x - 0.3)

        assert minimize_scalar(objective, domain) == minimize_scalar(objective, domain)


@pytest.mark.unit
class TestSimplexDomain:
    """Test the budget set"""

    def test_infeasible_bounds(self):
        with pytest.raises(InfeasibleDomain):
            SimplexDomain(3, budget=1.0, upper=0.2)

    def test_projection_is_feasible(self):
        domain = SimplexDomain(4, budget=2.0, lower=[0.0, 0.1, 0.0, 0.0], upper=[1.0, 1.0, 0.5, 2.0])
        rng = np.random.default_rng(1)
        for v in rng.normal(scale=3.0, size=(50, 4)):
            point = domain.project(v)
            assert point.sum() == pytest.approx(2.0, abs=1e-12)
            assert np.all(point >= domain.lower - 1e-15)
            assert np.all(point <= domain.upper + 1e-15)

    def test_projection_keeps_feasible_points(self):
        domain = SimplexDomain(3)
        point = np.array([0.2, 0.3, 0.5])
        assert np.allclose(domain.project(point), point, atol=1e-14)

    def test_seeds_are_deterministic(self):
        domain = SimplexDomain(3)
        assert np.array_equal(domain.seeds(5, seed=9), domain.seeds(5, seed=9))


@pytest.mark.unit
class TestMinimizeSimplex:
    """Test the projected Nelder-Mead search"""

    def test_single_asset(self):
        result = minimize_simplex(lambda u: float(u[0] ** 2), SimplexDomain(1, budget=3.0))
        assert result.u_star.tolist() == [3.0]
        assert result.value == 9.0

    def test_flat_objective(self):
        returns = np.random.default_rng(2).normal(0.05, 0.1, size=60)
        scenarios = np.column_stack([returns, returns])

        def objective(u):
            return -float(np.mean(scenarios @ u))

        result = minimize_simplex(objective, SimplexDomain(2, budget=1.0))
        assert result.value == pytest.approx(-returns.mean(), abs=1e-8)

    def test_dominant_asset(self):
        rng = np.random.default_rng(3)
        second = rng.normal(0.02, 0.05, size=40)
        scenarios = np.column_stack([second + 0.01, second])

        def objective(u):
            return -float(np.mean(scenarios @ u))

        result = minimize_simplex(objective, SimplexDomain(2, budget=1.0))
        assert result.u_star == pytest.approx([1.0, 0.0], abs=1e-6)

    def test_restarts_agree_on_convex_objective(self):
        target = np.array([0.1, 0.5, 0.15, 0.25])

        def objective(u):
            return float(np.sum((u - target) ** 2) + 1.0)

        result = minimize_simplex(objective, SimplexDomain(4), restarts=5, seed=4)
        values = np.array(result.restart_values)
        assert np.all(np.abs(values - values.min()) <= 1e-6 * abs(values.min()))
        assert result.u_star == pytest.approx(target, abs=1e-4)

    def test_restarts_agree_on_a_face(self):
        target = np.array([0.7, 0.6, -0.2])

        def objective(u):
            return float(np.sum((u - target) ** 2))

        result = minimize_simplex(objective, SimplexDomain(3), restarts=5, seed=2)
        values = np.array(result.restart_values)
        assert np.all(np.abs(values - result.value) <= 1e-6 * abs(result.value))
        assert result.u_star == pytest.approx([0.55, 0.45, 0.0], abs=1e-4)

    def test_deterministic_given_seed(self):
        def objective(u):
            return float(np.sum(np.abs(u - 0.3)))

        first = minimize_simplex(objective, SimplexDomain(3), restarts=3, seed=8)
        second = minimize_simplex(objective, SimplexDomain(3), restarts=3, seed=8)
        assert np.array_equal(first.u_star, second.u_star)
        assert first.value == second.value

    def test_needs_a_restart(self):
        with pytest.raises(BadParameters):
            minimize_simplex(lambda u: 0.0, SimplexDomain(2), restarts=0)
