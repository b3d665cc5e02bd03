import numpy as np
import pytest

from core.composite import empirical_expectation, eval_composite
from core.exceptions import BadParameters, DegenerateSample
from core.tests.factories import ConstantSampleFactory, SampleFactory, higher_order_chain, shortfall_stage
from core.types import AffineIntegrand, ExpectationBackend, KernelTag, Sample, Stage, TruncatedPower
from smoothing.expectation import (
    IntegrationMode, SmoothedLevel, SmoothingPlan, bandwidth_rule, kernel_density, smoothed_expectation,
)
from smoothing.kernels import KERNELS, KernelFamily, kernel_moment
from smoothing.quadrature import integrate_vector

NO_ETA = np.empty(0)


def linear_stage(closed=True):
    return Stage(
        index=1,
        func=lambda u, eta, x: 2.0 * x[:, 0] - 1.0,
        out_dim=1,
        closed_form=(lambda u, eta: [AffineIntegrand(np.array([2.0]), -1.0)]) if closed else None,
    )


def square_stage():
    return Stage(index=1, func=lambda u, eta, x: x[:, 0] ** 2, out_dim=1, convex_in_x=True)


def sample_with_spread(spread, n_obs, seed=0):
    draws = np.random.default_rng(seed).normal(size=n_obs)
    return Sample((draws - draws.mean()) / draws.std(ddof=1) * spread + 10.0)


@pytest.mark.unit
class TestBandwidthRule:
    """Test the 1.06 sd N^(-1/5) rule"""

    def test_hundred_observations(self):
        assert bandwidth_rule(sample_with_spread(3.0, 100)) == pytest.approx(1.06 * 3.0 * 100 ** -0.2, abs=1e-12)

    def test_five_hundred_observations(self):
        assert bandwidth_rule(sample_with_spread(3.0, 500)) == pytest.approx(0.9175571401569879, abs=1e-12)

    def test_constant_sample(self):
        with pytest.raises(DegenerateSample):
            bandwidth_rule(ConstantSampleFactory(n_obs=10))

    def test_single_observation(self):
        with pytest.raises(DegenerateSample):
            bandwidth_rule(Sample([1.0]))

    def test_per_coordinate(self):
        sample = SampleFactory(n_obs=64, dim=2)
        bandwidth = bandwidth_rule(sample)
        expected = 1.06 * np.std(sample.data, axis=0, ddof=1) * 64 ** -0.2
        assert np.allclose(bandwidth, expected, rtol=1e-14)


@pytest.mark.unit
class TestSmoothingPlan:
    """Test plan validation"""

    def test_non_positive_bandwidth(self):
        with pytest.raises(BadParameters) as excinfo:
            SmoothingPlan('uniform', bandwidth=-1.0)
        assert 'bandwidth' in excinfo.value.errors

    def test_unknown_integration(self):
        with pytest.raises(BadParameters):
            SmoothingPlan('uniform', bandwidth=1.0, integration='simpson')

    def test_rule_resolves_against_sample(self):
        sample = SampleFactory(n_obs=30)
        plan = SmoothingPlan('gaussian').resolve(sample)
        assert plan.bandwidth == pytest.approx(bandwidth_rule(sample))


@pytest.mark.unit
class TestSmoothedExpectation:
    """Test kernel-smoothed expectations"""

    @pytest.mark.parametrize('family', KernelFamily.values)
    @pytest.mark.parametrize('integration', [IntegrationMode.AUTO, IntegrationMode.QUADRATURE])
    def test_affine_exactness(self, family, integration):
        sample = SampleFactory(n_obs=40)
        stage = linear_stage()
        plan = SmoothingPlan(family, bandwidth=0.8, integration=integration)
        smoothed = smoothed_expectation(stage, sample, plan, np.zeros(1), NO_ETA)
        empirical = empirical_expectation(stage, sample, np.zeros(1), NO_ETA)
        tolerance = 1e-12 if integration == IntegrationMode.AUTO else 1e-7
        assert smoothed[0] == pytest.approx(empirical[0], abs=tolerance)

    def test_square_at_origin_uniform(self):
        plan = SmoothingPlan('uniform', bandwidth=1.0)
        value = smoothed_expectation(square_stage(), Sample([0.0]), plan, np.zeros(1), NO_ETA)
        assert value[0] == pytest.approx(1.0 / 3.0, abs=1e-10)

    def test_analytic_mode_requires_closed_form(self):
        plan = SmoothingPlan('uniform', bandwidth=1.0, integration=IntegrationMode.ANALYTIC)
        with pytest.raises(BadParameters):
            smoothed_expectation(square_stage(), Sample([0.0]), plan, np.zeros(1), NO_ETA)

    @pytest.mark.parametrize('family', KernelFamily.values)
    @pytest.mark.parametrize('power', [1, 2])
    def test_closed_form_agrees_with_quadrature(self, family, power):
        sample = SampleFactory(n_obs=12)
        stage = shortfall_stage(power=power)
        u = np.array([10.5])
        closed = smoothed_expectation(stage, sample, SmoothingPlan(family, 1.3), u, NO_ETA)
        numeric = smoothed_expectation(
            stage, sample, SmoothingPlan(family, 1.3, integration=IntegrationMode.QUADRATURE), u, NO_ETA
        )
        assert closed[0] == pytest.approx(numeric[0], rel=1e-7, abs=1e-9)

    @pytest.mark.parametrize('seed', range(20))
    def test_jensen_ordering(self, seed):
        sample = SampleFactory(n_obs=25, seed=seed)
        stage = shortfall_stage()
        u = np.array([float(np.median(sample.data))])
        empirical = empirical_expectation(stage, sample, u, NO_ETA)[0]
        for family in KernelFamily.values:
            for bandwidth in (2.0, 0.5, 0.01):
                smoothed = smoothed_expectation(stage, sample, SmoothingPlan(family, bandwidth), u, NO_ETA)
                assert smoothed[0] >= empirical - 1e-8

    @pytest.mark.parametrize('family', KernelFamily.values)
    def test_vanishing_bandwidth(self, family):
        sample = SampleFactory(n_obs=50)
        stage = shortfall_stage()
        u = np.array([float(np.median(sample.data))])
        empirical = empirical_expectation(stage, sample, u, NO_ETA)[0]
        gaps = [
            smoothed_expectation(stage, sample, SmoothingPlan(family, h), u, NO_ETA)[0] - empirical
            for h in (1.0, 1e-1, 1e-2, 1e-3)
        ]
        assert all(later < earlier for earlier, later in zip(gaps, gaps[1:]))
        assert abs(gaps[-1]) < 1e-4

    @pytest.mark.parametrize('family', [KernelFamily.UNIFORM, KernelFamily.EPANECHNIKOV])
    @pytest.mark.parametrize('seed', range(10))
    def test_lipschitz_bandwidth_bound(self, family, seed):
        sample = SampleFactory(n_obs=30, seed=seed)
        stage = shortfall_stage()
        u = np.array([10.0])
        bandwidth = 0.7
        reach = KERNELS[family].support_radius * bandwidth
        modulus = stage.modulus(u, NO_ETA, sample.data.min() - reach, sample.data.max() + reach)
        smoothed = smoothed_expectation(stage, sample, SmoothingPlan(family, bandwidth), u, NO_ETA)[0]
        empirical = empirical_expectation(stage, sample, u, NO_ETA)[0]
        bound = modulus.ell * bandwidth ** modulus.beta * kernel_moment(family, modulus.beta)
        assert abs(smoothed - empirical) <= bound + 1e-8

    def test_gaussian_closed_form_in_two_dimensions(self):
        sample = SampleFactory(n_obs=3, dim=2, spread=1.0, loc=0.0)
        slope = np.array([1.0, 0.5])
        stage = Stage(
            index=1,
            func=lambda u, eta, x: np.maximum(x @ slope - 0.2, 0.0) ** 2,
            out_dim=1,
            convex_in_x=True,
            closed_form=lambda u, eta: [TruncatedPower.upper(slope, 0.2, 2)],
        )
        closed = smoothed_expectation(stage, sample, SmoothingPlan('gaussian', [0.6, 0.9]), np.zeros(1), NO_ETA)
        numeric = smoothed_expectation(
            stage, sample,
            SmoothingPlan('gaussian', [0.6, 0.9], integration=IntegrationMode.QUADRATURE,
                          abs_tol=1e-9, truncation_radius=7.0),
            np.zeros(1), NO_ETA,
        )
        assert closed[0] == pytest.approx(numeric[0], rel=1e-6)


@pytest.mark.integration
class TestKernelBackend:
    """Test kernel levels inside composite evaluation"""

    def test_evaluation_converges_to_plugin(self):
        sample = SampleFactory(n_obs=40)
        chain = higher_order_chain()
        plugin = eval_composite(chain, ExpectationBackend.empirical(chain), sample, [11.0])
        gaps = []
        for h in (1e-1, 1e-3, 1e-6):
            backend = ExpectationBackend.smoothing_convex(chain, KernelTag('epanechnikov', h))
            gaps.append(eval_composite(chain, backend, sample, [11.0]) - plugin)
        assert gaps[0] > gaps[1] > gaps[2] >= -1e-12
        assert gaps[2] < 1e-6

    def test_level_reports_rule_bandwidth(self):
        sample = SampleFactory(n_obs=100)
        level = SmoothedLevel(KernelTag('uniform'), sample)
        assert level.details['bandwidth_rule'] is True
        assert level.bandwidth == pytest.approx(bandwidth_rule(sample))

    def test_constant_sample_needs_explicit_bandwidth(self):
        with pytest.raises(DegenerateSample):
            SmoothedLevel(KernelTag('uniform'), ConstantSampleFactory(n_obs=5))


@pytest.mark.unit
class TestKernelDensity:
    """Test the kernel density curve"""

    @pytest.mark.parametrize('family', KernelFamily.values)
    def test_integrates_to_one(self, family):
        sample = SampleFactory(n_obs=15)
        h = 0.9
        reach = (KERNELS[family].support_radius or 8.0) * h
        lo, hi = sample.data.min() - reach, sample.data.max() + reach
        kinks = tuple(np.concatenate([sample.data[:, 0] - h, sample.data[:, 0] + h]))
        total = integrate_vector(lambda x: kernel_density(sample, family, h, [x]), lo, hi, points=kinks)
        assert total[0] == pytest.approx(1.0, abs=1e-8)

    def test_single_point_uniform(self):
        values = kernel_density(Sample([0.0]), 'uniform', 2.0, [0.0, 1.5, 2.5])
        assert values.tolist() == [0.25, 0.25, 0.0]
