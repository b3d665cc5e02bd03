from django.core.management.base import BaseCommand

from cli.decorators import exit_codes
from cli.inputs import (
    add_distribution_arguments, add_risk_arguments, distribution_from_options, int_list, token_list, write_output,
)
from core.conf import risk_setting
from experiments.serializers import load_config
from experiments.study import ExperimentConfig, run_bias_study
from risk.measures import RiskFamily, RiskSpec


class Command(BaseCommand):
    help = 'Run a paired Monte Carlo bias study and write the report as CSV or JSON'

    def add_arguments(self, parser):
        parser.add_argument('--config', default=None, help='JSON configuration file; replaces the study flags')
        add_distribution_arguments(parser)
        add_risk_arguments(parser)
        parser.add_argument('--n', default='100,200,500', help='Comma-separated sample sizes')
        parser.add_argument('--reps', type=int, default=None)
        parser.add_argument('--estimators', default='plugin,uniform', help='Comma-separated estimator tokens')
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--format', choices=['csv', 'json'], default='csv')
        parser.add_argument('--out', default=None)

    @exit_codes
    def handle(self, *args, **options):
        if options['config']:
            config = load_config(options['config'])
        else:
            config = ExperimentConfig(
                dist=distribution_from_options(options),
                sample_sizes=int_list(options['n']),
                estimators=token_list(options['estimators']),
                risk=RiskSpec(RiskFamily.HIGHER_ORDER, q=options['q'], alpha=options['alpha']),
                replications=options['reps'],
                master_seed=options['seed'] if options['seed'] is not None else risk_setting('DEFAULT_SEED'),
            )
        report = run_bias_study(config)
        text = report.to_json().decode() if options['format'] == 'json' else report.to_csv()
        write_output(self, text, options['out'])
        if report.ordering_violations:
            self.stderr.write(f'{report.ordering_violations} paired ordering violations')
