"""
Bias-study reports and their CSV and JSON forms.
"""
from dataclasses import asdict, dataclass, field
from typing import Optional

import pandas as pd

CSV_COLUMNS = [
    'dist', 'df', 'N', 'estimator', 'kernel', 'bandwidth', 'resolution',
    'bias', 'variance', 'theta0', 'u_star', 'reps', 'seed',
]

# Columns that may be empty; every other column is always filled
_OPTIONAL_COLUMNS = ('df', 'bandwidth', 'resolution')


@dataclass(frozen=True)
class BiasRow:
    dist: str
    df: Optional[int]
    n_obs: int
    estimator: str
    kernel: str
    bandwidth: Optional[float]
    resolution: Optional[int]
    bias: float
    variance: float
    theta0: float
    u_star: float
    reps: int
    seed: int
    plugin_bias: float = float('nan')
    plugin_variance: float = float('nan')
    mad: float = float('nan')
    sd: float = float('nan')
    rmse: float = float('nan')
    ordering_violations: int = 0
    bound_violations: int = 0

    @property
    def standard_error(self) -> float:
        return self.sd / self.reps ** 0.5


@dataclass
class BiasReport:
    rows: list
    theta0: float
    u_star: float
    seed: int
    reps: int
    config: dict = field(default_factory=dict)
    protocol: str = ''
    normal_parameter: Optional[str] = None
    resolution_rounding: Optional[str] = None

    def row(self, n_obs, estimator) -> BiasRow:
        for row in self.rows:
            if row.n_obs == n_obs and row.estimator == estimator:
                return row
        raise KeyError((n_obs, estimator))

    @property
    def ordering_violations(self) -> int:
        return sum(row.ordering_violations for row in self.rows)

    @property
    def bound_violations(self) -> int:
        return sum(row.bound_violations for row in self.rows)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for row in self.rows:
            record = asdict(row)
            record['N'] = record.pop('n_obs')
            records.append(record)
        frame = pd.DataFrame(records, columns=CSV_COLUMNS)
        return frame.astype({column: 'float64' for column in _OPTIONAL_COLUMNS})

    def to_csv(self, path_or_buf=None):
        return self.to_frame().to_csv(path_or_buf, index=False)

    def to_json(self) -> bytes:
        from .serializers import render_report

        return render_report(self)


def read_report_csv(path_or_buf) -> pd.DataFrame:
    """Read a report CSV back into the frame ``BiasReport.to_frame`` produces."""
    frame = pd.read_csv(
        path_or_buf,
        float_precision='round_trip',
        keep_default_na=False,
        na_values={column: [''] for column in _OPTIONAL_COLUMNS},
        dtype={'kernel': str, 'estimator': str, 'dist': str},
    )
    missing = set(CSV_COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f'report CSV is missing columns {sorted(missing)}')
    return frame[CSV_COLUMNS].astype({column: 'float64' for column in _OPTIONAL_COLUMNS})
