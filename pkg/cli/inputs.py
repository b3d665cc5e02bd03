"""
Argument helpers shared by the management commands.

Sample files are headerless CSV: one observation per row, one column per
coordinate.
"""
import numpy as np

from core.exceptions import BadParameters
from core.types import Sample
from experiments.distributions import DistributionFamily, Normal, PointMass, ShiftedT


def read_sample(path) -> Sample:
    """
    Raises:
        OSError: the file cannot be read.
        BadParameters: the content is not numeric CSV.
    """
    try:
        data = np.loadtxt(path, delimiter=',', ndmin=2)
    except ValueError as exc:
        raise BadParameters({'data': f'{path} is not a numeric CSV file: {exc}'})
    return Sample(data)


def float_list(value):
    try:
        return [float(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise BadParameters({'list': f'expected comma-separated numbers, got {value!r}'})


def int_list(value):
    try:
        return [int(item) for item in value.split(',') if item.strip()]
    except ValueError:
        raise BadParameters({'list': f'expected comma-separated integers, got {value!r}'})


def token_list(value):
    return [item.strip() for item in value.split(',') if item.strip()]


def add_distribution_arguments(parser):
    parser.add_argument('--dist', choices=DistributionFamily.values, default=DistributionFamily.NORMAL)
    parser.add_argument('--mean', type=float, default=10.0)
    parser.add_argument('--scale', type=float, default=3.0, help='Variance of the normal distribution')
    parser.add_argument('--df', type=int, default=None, help='Degrees of freedom of the t distribution')


def add_risk_arguments(parser):
    parser.add_argument('--alpha', type=float, default=0.05)
    parser.add_argument('--q', type=float, default=2.0)


def distribution_from_options(options):
    family = options['dist']
    if family == DistributionFamily.T:
        if options['df'] is None:
            raise BadParameters({'df': '--df is required with --dist t'})
        return ShiftedT(options['df'], options['mean'])
    if family == DistributionFamily.POINT:
        return PointMass(options['mean'])
    return Normal(options['mean'], options['scale'])


def write_output(command, text, path=None):
    """Write to ``path`` when given, else to the command's stdout."""
    if path:
        with open(path, 'w') as handle:
            handle.write(text)
        command.stdout.write(f'Wrote {path}')
    else:
        command.stdout.write(text.rstrip('\n'))
