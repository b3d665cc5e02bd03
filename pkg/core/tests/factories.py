import factory
import numpy as np
from factory import fuzzy

from core.composite import make_chain
from core.types import HolderModulus, Sample, Stage, TruncatedPower


class SampleFactory(factory.Factory):
    """Factory for normally distributed samples."""

    class Meta:
        model = Sample

    class Params:
        n_obs = fuzzy.FuzzyInteger(2, 50)
        dim = 1
        seed = factory.Sequence(lambda n: 7000 + n)
        loc = 10.0
        spread = 3.0

    data = factory.LazyAttribute(
        lambda o: np.random.default_rng(o.seed).normal(o.loc, o.spread, size=(o.n_obs, o.dim))
    )


class ConstantSampleFactory(SampleFactory):
    """Factory for samples of identical points."""

    class Params:
        value = 7.0

    data = factory.LazyAttribute(lambda o: np.full((o.n_obs, o.dim), o.value))


def shortfall_stage(index=2, power=2):
    """x -> max(0, x - u) ** power, the innermost map of the higher-order measure."""
    return Stage(
        index=index,
        func=lambda u, eta, x: np.maximum(x[:, 0] - u[0], 0.0) ** power,
        out_dim=1,
        convex_in_x=True,
        closed_form=lambda u, eta: [TruncatedPower.upper([1.0], u[0], power)],
        modulus=lambda u, eta, lo, hi: HolderModulus(
            power * max(0.0, float(np.max(hi)) - u[0]) ** (power - 1), 1.0
        ),
        name='shortfall',
    )


def outer_risk_stage(alpha=0.05, power=2):
    """(u, eta) -> u + eta ** (1/power) / alpha."""
    return Stage(
        index=1,
        func=lambda u, eta, x: u[0] + eta[0] ** (1.0 / power) / alpha,
        out_dim=1,
        in_dim=1,
        monotone_in_eta=True,
        name='outer',
    )


def higher_order_chain(alpha=0.05, power=2):
    return make_chain([outer_risk_stage(alpha, power), shortfall_stage(2, power)])
