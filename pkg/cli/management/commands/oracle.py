from django.core.management.base import BaseCommand

from cli.decorators import exit_codes
from cli.inputs import add_distribution_arguments, add_risk_arguments, distribution_from_options, write_output
from experiments.oracle import resolve_normal_convention, true_value_oracle
from risk.measures import RiskFamily, RiskSpec


class Command(BaseCommand):
    help = 'Compute the true optimal value of the higher-order measure by numerical integration'

    def add_arguments(self, parser):
        add_distribution_arguments(parser)
        add_risk_arguments(parser)
        parser.add_argument(
            '--check-convention',
            action='store_true',
            help='Evaluate the normal scale as a variance and as a standard deviation',
        )
        parser.add_argument('--out', default=None)

    @exit_codes
    def handle(self, *args, **options):
        spec = RiskSpec(RiskFamily.HIGHER_ORDER, q=options['q'], alpha=options['alpha'])
        if options['check_convention']:
            check = resolve_normal_convention(spec, options['mean'], options['scale'])
            lines = [
                f'{parameter}: theta0={result.theta0:.4f} u_star={result.u_star:.4f}'
                for parameter, result in check.results.items()
            ]
            lines.append(f'adopted={check.parameter} matched={check.matched}')
            write_output(self, '\n'.join(lines), options['out'])
            return

        result = true_value_oracle(distribution_from_options(options), spec)
        write_output(self, f'theta0={result.theta0:.6f}\nu_star={result.u_star:.6f}', options['out'])
