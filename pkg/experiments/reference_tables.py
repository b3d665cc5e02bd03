"""
Reference simulation tables for the higher-order measure (alpha = 0.05, q = 2).

Normal data are N(10, 3) read with variance 3; t data are standard t shifted to
mean 10. Each row holds (N, df, estimator, bias, variance, plug-in bias,
plug-in variance). Rows that cannot be checked against a distinct printed
value carry ``verifiable=False``; rows with a known, explained disagreement
carry a ``gap`` note and are checked for improvement over the plug-in only.

The wavelet rows are reproduced with log2(N) / 5 rounded down (j = 1 at every
tabulated N); ``check_resolution_convention`` reruns both roundings against
the printed rows.
"""
from typing import NamedTuple, Optional

import pandas as pd

from risk.measures import RiskFamily, RiskSpec
from wavelet.scaling import ResolutionRounding

from .distributions import Normal, NormalParameter, ShiftedT
from .study import ExperimentConfig, run_bias_study

TABLE_VERSION = 2
SAMPLE_SIZES = (100, 200, 500)
RESOLUTION_ROUNDING = ResolutionRounding.FLOOR
WAVELET = f'wavelet:linear:round={RESOLUTION_ROUNDING.value}'

N100_WAVELET_GAP = (
    'N = 100 resolves to j = 1 under either rounding and the printed bias is less '
    'negative than the j = 1 estimate (normal table: about -0.79 computed, -0.64 printed)'
)


class TolerancePolicy(NamedTuple):
    bias_floor: float
    se_multiple: float
    variance_rel: float


# t rows allow more: the printed t samples may have been rescaled before shifting
POLICIES = {
    'normal': TolerancePolicy(bias_floor=0.10, se_multiple=3.0, variance_rel=0.25),
    't': TolerancePolicy(bias_floor=0.20, se_multiple=3.0, variance_rel=0.35),
}


class ReferenceRow(NamedTuple):
    n_obs: int
    df: Optional[int]
    estimator: str
    bias: float
    variance: float
    plugin_bias: float
    plugin_variance: float
    verifiable: bool = True
    gap: str = ''


NORMAL_KERNEL = [
    ReferenceRow(100, None, 'uniform', -0.6095, 0.5893, -1.1896, 0.5754),
    ReferenceRow(200, None, 'uniform', -0.3930, 0.5132, -0.7891, 0.5350),
    ReferenceRow(500, None, 'uniform', -0.1655, 0.3482, -0.3236, 0.4099),
    ReferenceRow(100, None, 'epanechnikov', -0.7254, 0.5813, -1.1896, 0.5754),
    ReferenceRow(200, None, 'epanechnikov', -0.4852, 0.5168, -0.7891, 0.5350),
    ReferenceRow(500, None, 'epanechnikov', -0.2164, 0.3641, -0.3236, 0.4099),
    # Printed values repeat the uniform rows verbatim
    ReferenceRow(100, None, 'gaussian', -0.6095, 0.5893, -1.1896, 0.5754, False),
    ReferenceRow(200, None, 'gaussian', -0.3930, 0.5132, -0.7891, 0.5350, False),
    ReferenceRow(500, None, 'gaussian', -0.1655, 0.3482, -0.3236, 0.4099, False),
]

NORMAL_WAVELET = [
    ReferenceRow(100, None, WAVELET, -0.6430, 0.6054, -1.1668, 0.6375, gap=N100_WAVELET_GAP),
    ReferenceRow(200, None, WAVELET, -0.3728, 0.4879, -0.7677, 0.5382),
    ReferenceRow(500, None, WAVELET, -0.1016, 0.2842, -0.2996, 0.3525),
]

T_WAVELET = [
    ReferenceRow(100, 6, WAVELET, -1.6239, 1.3681, -2.1477, 1.4114),
    ReferenceRow(200, 6, WAVELET, -1.2090, 1.4265, -1.5892, 1.4979),
    ReferenceRow(500, 6, WAVELET, -0.5870, 1.9387, -0.7453, 2.1290),
    ReferenceRow(100, 8, WAVELET, -1.0266, 0.9092, -1.5532, 0.9622),
    ReferenceRow(200, 8, WAVELET, -0.6814, 0.9434, -1.0694, 1.0175),
    ReferenceRow(500, 8, WAVELET, -0.3029, 1.0214, -0.4800, 1.1519),
    ReferenceRow(100, 60, WAVELET, -0.2176, 0.2182, -0.7692, 0.2506, gap=N100_WAVELET_GAP),
    ReferenceRow(200, 60, WAVELET, -0.0788, 0.1745, -0.5058, 0.2171),
    ReferenceRow(500, 60, WAVELET, 0.0490, 0.0935, -0.2092, 0.1366),
]

T_UNIFORM = [
    ReferenceRow(100, 6, 'uniform', -1.9800, 1.3440, -2.1343, 1.3150),
    ReferenceRow(200, 6, 'uniform', -1.4528, 1.5973, -1.5649, 1.5886),
    ReferenceRow(500, 6, 'uniform', -0.7694, 1.6350, -0.7952, 1.6624),
    ReferenceRow(100, 8, 'uniform', -1.4044, 1.2057, -1.5452, 1.1805),
    ReferenceRow(200, 8, 'uniform', -0.9433, 1.2299, -1.0468, 1.2207),
    ReferenceRow(500, 8, 'uniform', -0.4875, 1.0281, -0.5126, 1.0460),
    ReferenceRow(100, 60, 'uniform', -0.6193, 0.2529, -0.7367, 0.2457),
    ReferenceRow(200, 60, 'uniform', -0.3776, 0.2168, -0.4642, 0.2158),
    ReferenceRow(500, 60, 'uniform', -0.1513, 0.1687, -0.1789, 0.1768),
]

T_EPANECHNIKOV = [
    ReferenceRow(100, 6, 'epanechnikov', -2.0119, 1.3370, -2.1343, 1.3150),
    ReferenceRow(200, 6, 'epanechnikov', -1.4790, 1.5954, -1.5649, 1.5886),
    ReferenceRow(500, 6, 'epanechnikov', -0.7782, 1.6435, -0.7952, 1.6624),
    ReferenceRow(100, 8, 'epanechnikov', -1.4336, 1.1996, -1.5452, 1.1805),
    ReferenceRow(200, 8, 'epanechnikov', -0.9675, 1.2299, -1.0468, 1.2207),
    ReferenceRow(500, 8, 'epanechnikov', -0.4960, 1.0336, -0.5126, 1.0460),
    ReferenceRow(100, 60, 'epanechnikov', -0.6436, 0.2510, -0.7367, 0.2457),
    ReferenceRow(200, 60, 'epanechnikov', -0.3979, 0.2166, -0.4642, 0.2158),
    ReferenceRow(500, 60, 'epanechnikov', -0.1606, 0.1710, -0.1789, 0.1768),
]

TABLES = {
    'normal': NORMAL_KERNEL + NORMAL_WAVELET,
    't': T_WAVELET + T_UNIFORM + T_EPANECHNIKOV,
}

T_DEGREES = (6, 8, 60)
RISK = RiskSpec(RiskFamily.HIGHER_ORDER, q=2.0, alpha=0.05)


class RoundingCheck(NamedTuple):
    """Largest |computed - printed| wavelet bias per rounding, and the closer rounding."""

    errors: dict
    matched: str


def _distributions(name):
    if name == 'normal':
        return [Normal(10.0, 3.0, NormalParameter.VARIANCE)]
    if name == 't':
        return [ShiftedT(df, 10.0) for df in T_DEGREES]
    raise KeyError(f'unknown reference table {name!r}')


def table_configs(name, replications=None, master_seed=None):
    """The study configurations behind table ``name`` ('normal' or 't')."""
    kernels = ('uniform', 'epanechnikov', 'gaussian') if name == 'normal' else ('uniform', 'epanechnikov')
    return [
        ExperimentConfig(
            dist=dist,
            sample_sizes=SAMPLE_SIZES,
            estimators=('plugin',) + kernels + (WAVELET,),
            risk=RISK,
            replications=replications,
            master_seed=master_seed,
        )
        for dist in _distributions(name)
    ]


def check_resolution_convention(name='normal', replications=None, master_seed=None) -> RoundingCheck:
    """
    Rerun the wavelet rows of table ``name`` under every rounding of the resolution rule.

    All roundings share each replication sample, so the comparison is paired.
    """
    tokens = {rounding: f'wavelet:linear:round={rounding}' for rounding in ResolutionRounding.values}
    computed = {}
    for dist in _distributions(name):
        config = ExperimentConfig(
            dist=dist,
            sample_sizes=SAMPLE_SIZES,
            estimators=('plugin',) + tuple(tokens.values()),
            risk=RISK,
            replications=replications,
            master_seed=master_seed,
        )
        report = run_bias_study(config)
        for row in report.rows:
            computed[(row.n_obs, row.df, row.estimator)] = row.bias

    printed = [row for row in TABLES[name] if row.estimator == WAVELET]
    errors = {
        rounding: max(abs(computed[(row.n_obs, row.df, token)] - row.bias) for row in printed)
        for rounding, token in tokens.items()
    }
    return RoundingCheck(errors=errors, matched=min(errors, key=errors.get))


def _within(reference, computed, spread, reps, policy):
    standard_error = spread / reps ** 0.5
    return abs(computed - reference) <= max(policy.bias_floor, policy.se_multiple * standard_error)


def compare_table(name, reports) -> pd.DataFrame:
    """
    Printed versus computed values for every reference row of table ``name``.

    ``bias_ok`` allows max(floor, k standard errors) on the bias and
    ``variance_ok`` a relative error on the variance, both from the table's
    TolerancePolicy. Rows with a documented gap get ``bias_ok`` and
    ``variance_ok`` of None and ``improves_plugin`` instead.
    """
    policy = POLICIES[name]
    rows = {}
    for report in reports:
        for row in report.rows:
            df = None if row.df is None else int(row.df)
            rows[(row.n_obs, df, row.estimator)] = row

    records = []
    for reference in TABLES[name]:
        computed = rows.get((reference.n_obs, reference.df, reference.estimator))
        if computed is None:
            continue
        plugin_sd = computed.plugin_variance ** 0.5
        checked = reference.verifiable and not reference.gap
        records.append({
            'N': reference.n_obs,
            'df': reference.df,
            'estimator': reference.estimator,
            'reference_bias': reference.bias,
            'bias': computed.bias,
            'reference_variance': reference.variance,
            'variance': computed.variance,
            'reference_plugin_bias': reference.plugin_bias,
            'plugin_bias': computed.plugin_bias,
            'reference_plugin_variance': reference.plugin_variance,
            'plugin_variance': computed.plugin_variance,
            'bias_ok': _within(reference.bias, computed.bias, computed.sd, computed.reps, policy) if checked else None,
            'variance_ok': (
                abs(computed.variance - reference.variance) <= policy.variance_rel * reference.variance
                if checked else None
            ),
            'plugin_bias_ok': _within(reference.plugin_bias, computed.plugin_bias, plugin_sd, computed.reps, policy),
            'improves_plugin': computed.bias > computed.plugin_bias,
            'gap': reference.gap,
            'ordering_violations': computed.ordering_violations,
        })
    return pd.DataFrame.from_records(records)
