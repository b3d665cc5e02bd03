"""
Monte Carlo bias and variance studies of the optimal-value estimators.

Every estimator sees the same sample within a replication, and the plug-in
estimate is always computed so that the smoothed estimates can be checked
against it sample by sample.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from core.conf import risk_setting
from core.exceptions import BadParameters, CompositeRiskError, StudyAborted
from core.types import BackendKind, Empirical
from risk.estimation import estimate_higher_order_risk, kernel_bias_bound
from risk.measures import RiskFamily, RiskSpec
from smoothing.kernels import parse_kernel_token
from wavelet.density import parse_wavelet_token

from .distributions import replication_seed, sample_generator
from .oracle import true_value_oracle
from .report import BiasReport, BiasRow

logger = logging.getLogger('experiments')

PAIRED_PROTOCOL = 'paired: all estimators share each replication sample'


def parse_estimator_token(token):
    """``plugin``, a kernel token such as ``uniform`` or ``gaussian:h=0.4``, or ``wavelet:linear``."""
    token = token.strip()
    if token in ('plugin', 'empirical'):
        return Empirical()
    if token.startswith('wavelet'):
        return parse_wavelet_token(token)
    return parse_kernel_token(token)


@dataclass(frozen=True)
class ExperimentConfig:
    dist: object
    sample_sizes: tuple
    estimators: tuple
    risk: RiskSpec = field(default_factory=lambda: RiskSpec(RiskFamily.HIGHER_ORDER))
    replications: int = None
    master_seed: int = None

    def __post_init__(self):
        replications = risk_setting('DEFAULT_REPLICATIONS') if self.replications is None else self.replications
        master_seed = risk_setting('DEFAULT_SEED') if self.master_seed is None else self.master_seed
        object.__setattr__(self, 'replications', int(replications))
        object.__setattr__(self, 'master_seed', int(master_seed))
        object.__setattr__(self, 'sample_sizes', tuple(int(n) for n in self.sample_sizes))
        object.__setattr__(self, 'estimators', tuple(
            parse_estimator_token(tag) if isinstance(tag, str) else tag for tag in self.estimators
        ))

        errors = {}
        if self.replications < 2:
            errors['replications'] = f'need at least 2 replications, got {self.replications}'
        if not self.sample_sizes or min(self.sample_sizes) < 2:
            errors['sample_sizes'] = f'sample sizes must be at least 2, got {list(self.sample_sizes)}'
        if not self.estimators:
            errors['estimators'] = 'at least one estimator is required'
        elif len({tag.label for tag in self.estimators}) != len(self.estimators):
            errors['estimators'] = 'estimators must be distinct'
        if self.risk.family != RiskFamily.HIGHER_ORDER:
            errors['risk'] = 'bias studies use the higher-order inverse measure'
        if not 0 <= self.master_seed < 2 ** 64:
            errors['master_seed'] = f'seed must be a 64-bit unsigned integer, got {self.master_seed}'
        if errors:
            raise BadParameters(errors)

    def echo(self) -> dict:
        return {
            'dist': self.dist.family.value,
            'dist_params': {
                key: value for key, value in vars(self.dist).items() if value is not None
            },
            'sample_sizes': list(self.sample_sizes),
            'replications': self.replications,
            'estimators': [tag.label for tag in self.estimators],
            'risk': self.risk.token,
            'master_seed': self.master_seed,
        }


class Replication(NamedTuple):
    plugin: float
    estimates: dict
    details: dict
    ordering_violations: frozenset
    bound_violations: frozenset


def run_replication(config, n_obs, replication) -> Replication:
    """All estimators on one sample; failures raise StudyAborted naming the estimator."""
    sample = sample_generator(config.dist, n_obs, replication_seed(config.master_seed, n_obs, replication))
    tolerance = risk_setting('ORDERING_TOL')
    spec = config.risk
    label = 'plugin'
    try:
        plugin = estimate_higher_order_risk(spec, Empirical(), sample)
        estimates, details = {}, {}
        ordering, bounds = set(), set()
        for tag in config.estimators:
            label = tag.label
            estimate = plugin if tag.kind == BackendKind.EMPIRICAL else estimate_higher_order_risk(spec, tag, sample)
            estimates[label] = estimate.theta
            details[label] = estimate.details
            if tag.kind == BackendKind.EMPIRICAL:
                continue
            if plugin.theta > estimate.theta + tolerance:
                ordering.add(label)
            if tag.kind == BackendKind.KERNEL:
                bound = kernel_bias_bound(spec, sample, tag, estimate.details['bandwidth'], plugin.u_star)
                if estimate.theta - plugin.theta > bound + tolerance:
                    bounds.add(label)
    except CompositeRiskError as exc:
        raise StudyAborted(str(exc), n_obs=n_obs, replication=replication, estimator=label) from exc
    return Replication(plugin.theta, estimates, details, frozenset(ordering), frozenset(bounds))


def _mean(values):
    return math.fsum(values) / len(values)


def _variance(values):
    centre = _mean(values)
    return math.fsum((value - centre) ** 2 for value in values) / (len(values) - 1)


def _summarize(config, oracle, n_obs, tag, outcomes) -> BiasRow:
    label = tag.label
    values = [outcome.estimates[label] for outcome in outcomes]
    plugin = [outcome.plugin for outcome in outcomes]
    errors = [value - oracle.theta0 for value in values]
    variance = _variance(values)

    bandwidth = resolution = None
    kernel = ''
    if tag.kind == BackendKind.KERNEL:
        kernel = tag.kernel_id
        bandwidth = _mean([outcome.details[label]['bandwidth'] for outcome in outcomes])
    elif tag.kind == BackendKind.WAVELET:
        kernel = tag.basis_id
        resolution = outcomes[0].details[label]['resolution']

    return BiasRow(
        dist=config.dist.family.value,
        df=config.dist.df,
        n_obs=n_obs,
        estimator=label,
        kernel=kernel,
        bandwidth=bandwidth,
        resolution=resolution,
        bias=_mean(errors),
        variance=variance,
        theta0=oracle.theta0,
        u_star=oracle.u_star,
        reps=config.replications,
        seed=config.master_seed,
        plugin_bias=_mean([value - oracle.theta0 for value in plugin]),
        plugin_variance=_variance(plugin),
        mad=_mean([abs(error) for error in errors]),
        sd=math.sqrt(variance),
        rmse=math.sqrt(_mean([error ** 2 for error in errors])),
        ordering_violations=sum(label in outcome.ordering_violations for outcome in outcomes),
        bound_violations=sum(label in outcome.bound_violations for outcome in outcomes),
    )


def resolution_rounding(config) -> Optional[str]:
    """Roundings of the resolution rule in use by the wavelet estimators, or None."""
    roundings = {
        tag.rounding or risk_setting('RESOLUTION_ROUNDING')
        for tag in config.estimators
        if tag.kind == BackendKind.WAVELET and tag.resolution is None
    }
    return ','.join(sorted(roundings)) or None


def run_bias_study(config, threads=None, oracle=None) -> BiasReport:
    """
    Bias and variance of every estimator at every sample size.

    Replications run on a thread pool; outcomes land in an index-ordered buffer
    so the report does not depend on the worker count.

    Raises:
        StudyAborted: a replication failed; no replication is ever dropped.
    """
    threads = int(threads or risk_setting('THREADS'))
    oracle = oracle or true_value_oracle(config.dist, config.risk)
    logger.info(
        f'Bias study {config.echo()} with {threads} threads: theta0={oracle.theta0:.6f}'
    )

    jobs = [(n_obs, r) for n_obs in config.sample_sizes for r in range(config.replications)]
    buffer = [None] * len(jobs)
    with ThreadPoolExecutor(max_workers=threads) as executor:
        futures = [executor.submit(run_replication, config, n_obs, r) for n_obs, r in jobs]
        try:
            for index, future in enumerate(futures):
                buffer[index] = future.result()
        except StudyAborted as exc:
            for pending in futures:
                pending.cancel()
            logger.error(f'Bias study aborted: {exc}')
            raise

    rows = []
    for position, n_obs in enumerate(config.sample_sizes):
        outcomes = buffer[position * config.replications:(position + 1) * config.replications]
        for tag in config.estimators:
            row = _summarize(config, oracle, n_obs, tag, outcomes)
            if row.ordering_violations or row.bound_violations:
                logger.warning(
                    f'N={n_obs} {row.estimator}: {row.ordering_violations} ordering and '
                    f'{row.bound_violations} bandwidth-bound violations'
                )
            rows.append(row)

    logger.info(f'Bias study finished with {len(rows)} rows')
    return BiasReport(
        rows=rows,
        theta0=oracle.theta0,
        u_star=oracle.u_star,
        seed=config.master_seed,
        reps=config.replications,
        config=config.echo(),
        protocol=PAIRED_PROTOCOL,
        normal_parameter=getattr(config.dist, 'parameter', None),
        resolution_rounding=resolution_rounding(config),
    )


def consistent_trend(report) -> dict:
    """|bias| at the largest N below |bias| at the smallest N, per estimator."""
    trend = {}
    for estimator in dict.fromkeys(row.estimator for row in report.rows):
        rows = sorted((row for row in report.rows if row.estimator == estimator), key=lambda row: row.n_obs)
        trend[estimator] = abs(rows[-1].bias) < abs(rows[0].bias)
    return trend
