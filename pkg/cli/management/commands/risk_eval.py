import logging

from django.core.management.base import BaseCommand

from rest_framework.renderers import JSONRenderer

import numpy as np

from cli.decorators import exit_codes
from cli.inputs import float_list, read_sample, write_output
from core.exceptions import BadParameters, DimensionMismatch
from experiments.study import parse_estimator_token
from optimize.search import SimplexDomain, minimize_simplex
from risk.estimation import estimate_higher_order_risk, mean_semideviation_objective, portfolio_objective
from risk.measures import RiskFamily, parse_risk_token

logger = logging.getLogger('cli')


class Command(BaseCommand):
    help = 'Estimate a risk measure from a sample file with a chosen expectation backend'

    def add_arguments(self, parser):
        parser.add_argument('--risk', required=True, help='msd:p=2,kappa=0.5 or hor:q=2,alpha=0.05')
        parser.add_argument('--estimator', default='plugin', help='plugin, a kernel token or wavelet:<basis>')
        parser.add_argument('--data', required=True, help='Headerless CSV sample file')
        parser.add_argument('--weights', default=None, help='Comma-separated portfolio weights')
        parser.add_argument('--restarts', type=int, default=5)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--format', choices=['text', 'json'], default='text')
        parser.add_argument('--out', default=None)

    @exit_codes
    def handle(self, *args, **options):
        spec = parse_risk_token(options['risk'])
        tag = parse_estimator_token(options['estimator'])
        sample = read_sample(options['data'])
        weights = None if options['weights'] is None else np.array(float_list(options['weights']))
        if weights is not None and weights.size != sample.dim:
            raise DimensionMismatch(f'{weights.size} weights for a sample with {sample.dim} columns')
        logger.info(f'risk-eval {spec.token} with {tag.label} on {sample.n_obs} observations')

        result = {'risk': spec.token, 'estimator': tag.label, 'n_obs': sample.n_obs}
        if spec.family == RiskFamily.MEAN_SEMIDEVIATION:
            weights = np.full(sample.dim, 1.0 / sample.dim) if weights is None else weights
            evaluator = mean_semideviation_objective(spec, tag, sample)
            result['value'] = evaluator(weights)
            result['weights'] = weights.tolist()
            result['details'] = evaluator.details
        elif sample.dim == 1 and weights is None:
            estimate = estimate_higher_order_risk(spec, tag, sample)
            result.update(theta=estimate.theta, u_star=estimate.u_star, details=estimate.details)
        else:
            objective = portfolio_objective(spec, tag, sample)
            if weights is None:
                if options['restarts'] < 1:
                    raise BadParameters({'restarts': 'at least one restart is required'})
                found = minimize_simplex(objective, SimplexDomain(sample.dim), options['restarts'], options['seed'])
                result.update(theta=found.value, weights=found.u_star.tolist())
            else:
                result.update(theta=objective(weights), weights=weights.tolist())

        if options['format'] == 'json':
            text = JSONRenderer().render(result, renderer_context={'indent': 2}).decode()
        else:
            text = '\n'.join(f'{key}={value}' for key, value in result.items() if key != 'details')
        write_output(self, text, options['out'])
