from django.core.management.base import BaseCommand

import numpy as np
import pandas as pd

from cli.decorators import exit_codes
from cli.inputs import read_sample, write_output
from core.exceptions import BadParameters, DimensionMismatch
from core.types import BackendKind
from experiments.study import parse_estimator_token
from smoothing.expectation import BandwidthRule, kernel_density
from wavelet.density import wavelet_density


class Command(BaseCommand):
    help = 'Evaluate a kernel or wavelet density estimate of a one-dimensional sample on a grid'

    def add_arguments(self, parser):
        parser.add_argument('--data', required=True, help='Headerless CSV sample file')
        parser.add_argument('--estimator', default='wavelet:linear', help='wavelet:<basis> or a kernel token')
        parser.add_argument('--lo', type=float, default=None)
        parser.add_argument('--hi', type=float, default=None)
        parser.add_argument('--points', type=int, default=201)
        parser.add_argument('--out', default=None)

    @exit_codes
    def handle(self, *args, **options):
        sample = read_sample(options['data'])
        if sample.dim != 1:
            raise DimensionMismatch(f'density-est works on one column, the sample has {sample.dim}')
        tag = parse_estimator_token(options['estimator'])
        if options['points'] < 2:
            raise BadParameters({'points': 'need at least two grid points'})

        spread = float(np.ptp(sample.data)) or 1.0
        lo = options['lo'] if options['lo'] is not None else float(sample.data.min()) - 0.25 * spread
        hi = options['hi'] if options['hi'] is not None else float(sample.data.max()) + 0.25 * spread
        if not lo < hi:
            raise BadParameters({'grid': f'need lo < hi, got [{lo}, {hi}]'})
        grid = np.linspace(lo, hi, options['points'])

        if tag.kind == BackendKind.WAVELET:
            values = wavelet_density(sample, tag.basis_id, tag.resolution, tag.rounding)(grid)
        elif tag.kind == BackendKind.KERNEL:
            bandwidth = tag.bandwidth if tag.bandwidth is not None else BandwidthRule.SILVERMAN_LIKE
            values = kernel_density(sample, tag.kernel_id, bandwidth, grid)
        else:
            raise BadParameters({'estimator': 'density-est needs a kernel or wavelet estimator'})

        frame = pd.DataFrame({'x': grid, 'density': values})
        write_output(self, frame.to_csv(index=False), options['out'])
