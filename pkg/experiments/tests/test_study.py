import io
import json
import math

from rest_framework import serializers

import pandas as pd
import pytest

from core.exceptions import BadParameters, QuadratureFailure, StudyAborted
from core.types import BackendKind, Empirical, KernelTag, WaveletTag
from experiments import study
from experiments.distributions import DistributionFamily, NormalParameter, ShiftedT
from experiments.oracle import OracleResult
from experiments.reference_tables import (
    POLICIES, RESOLUTION_ROUNDING, TABLES, WAVELET, check_resolution_convention, compare_table, table_configs,
)
from experiments.report import CSV_COLUMNS, read_report_csv
from experiments.serializers import ExperimentConfigSerializer, load_config
from experiments.study import ExperimentConfig, consistent_trend, parse_estimator_token, run_bias_study
from experiments.tests.factories import ExperimentConfigFactory, NormalFactory, ShiftedTFactory
from risk.measures import RiskSpec
from wavelet.scaling import ResolutionRounding

# Precomputed pair for N(10, 3) with variance 3; keeps small studies off the oracle
NORMAL_ORACLE = OracleResult(15.5163, 14.5048)


@pytest.fixture
def small_report():
    return run_bias_study(ExperimentConfigFactory(master_seed=31), threads=2, oracle=NORMAL_ORACLE)


@pytest.mark.unit
class TestEstimatorTokens:
    """Test estimator token parsing"""

    @pytest.mark.parametrize('token,expected', [
        ('plugin', Empirical()),
        ('uniform', KernelTag('uniform')),
        ('gaussian:h=0.4', KernelTag('gaussian', 0.4)),
        ('wavelet:linear', WaveletTag('linear')),
        ('wavelet:quadratic:j=2', WaveletTag('quadratic', 2)),
        ('wavelet:linear:round=floor', WaveletTag('linear', rounding='floor')),
    ])
    def test_tokens(self, token, expected):
        assert parse_estimator_token(token) == expected

    @pytest.mark.parametrize('token', [
        'plugin', 'uniform', 'gaussian:h=0.4', 'wavelet:linear', 'wavelet:quadratic:j=2', 'wavelet:linear:round=floor',
    ])
    def test_label_names_the_estimator(self, token):
        tag = parse_estimator_token(token)
        assert tag.label == token
        assert parse_estimator_token(tag.label) == tag

    @pytest.mark.parametrize('token', ['triweight', 'wavelet:haar', 'uniform:k=2'])
    def test_rejected_tokens(self, token):
        with pytest.raises(BadParameters):
            parse_estimator_token(token)


@pytest.mark.unit
class TestExperimentConfig:
    """Test configuration validation"""

    def test_defaults_from_settings(self):
        config = ExperimentConfig(NormalFactory(), (100,), ('plugin',))
        assert config.replications == 500
        assert config.risk.token == 'hor:q=2,alpha=0.05'

    def test_collects_errors(self):
        with pytest.raises(BadParameters) as excinfo:
            ExperimentConfig(NormalFactory(), (1,), (), replications=1)
        assert set(excinfo.value.errors) == {'replications', 'sample_sizes', 'estimators'}

    def test_rejects_duplicate_estimators(self):
        with pytest.raises(BadParameters):
            ExperimentConfig(NormalFactory(), (10,), ('uniform', 'uniform'), replications=2)

    @pytest.mark.parametrize('estimators', [
        ('uniform', 'uniform:h=0.5'),
        ('gaussian:h=0.2', 'gaussian:h=0.4'),
        ('wavelet:linear:j=0', 'wavelet:linear:j=1'),
        ('wavelet:linear', 'wavelet:linear:round=floor'),
    ])
    def test_accepts_variants_of_one_estimator(self, estimators):
        config = ExperimentConfig(NormalFactory(), (10,), estimators, replications=2)
        assert len({tag.label for tag in config.estimators}) == 2

    def test_rejects_other_risk_families(self):
        with pytest.raises(BadParameters):
            ExperimentConfig(NormalFactory(), (10,), ('plugin',), risk=RiskSpec('msd'), replications=2)

    def test_echo(self):
        echo = ExperimentConfigFactory(master_seed=5).echo()
        assert echo['estimators'] == ['plugin', 'uniform', 'wavelet:linear']
        assert echo['dist'] == 'normal'
        assert echo['master_seed'] == 5


@pytest.mark.unit
class TestConfigSerializer:
    """Test the JSON configuration file"""

    def payload(self, **overrides):
        payload = {
            'dist': 't', 'df': 8, 'n': [100, 200], 'reps': 10,
            'estimators': ['plugin', 'epanechnikov', 'wavelet:linear'], 'seed': 3,
        }
        payload.update(overrides)
        return payload

    def test_valid_payload(self):
        serializer = ExperimentConfigSerializer(data=self.payload())
        assert serializer.is_valid(), serializer.errors
        config = serializer.save()
        assert config.dist == ShiftedT(8, 10.0)
        assert config.sample_sizes == (100, 200)
        assert config.estimators[1] == KernelTag('epanechnikov')
        assert config.master_seed == 3

    def test_t_needs_degrees_of_freedom(self):
        serializer = ExperimentConfigSerializer(data=self.payload(df=None))
        assert not serializer.is_valid()
        assert 'df' in serializer.errors

    def test_unknown_estimator(self):
        serializer = ExperimentConfigSerializer(data=self.payload(estimators=['triweight']))
        assert not serializer.is_valid()
        assert 'estimators' in serializer.errors

    def test_risk_parameters_are_checked(self):
        serializer = ExperimentConfigSerializer(data=self.payload(alpha=2.0))
        assert not serializer.is_valid()
        assert 'alpha' in serializer.errors

    def test_normal_parameter(self):
        serializer = ExperimentConfigSerializer(data=self.payload(dist='normal', parameter='sd'))
        assert serializer.is_valid(), serializer.errors
        assert serializer.save().dist.parameter == NormalParameter.SD

    def test_load_config(self, tmp_path):
        path = tmp_path / 'study.json'
        path.write_text(json.dumps(self.payload()))
        assert load_config(path).dist.family == DistributionFamily.T

    def test_load_config_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_config(tmp_path / 'missing.json')

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / 'broken.json'
        path.write_text('{"dist": ')
        with pytest.raises(serializers.ValidationError):
            load_config(path)


@pytest.mark.integration
class TestRunBiasStudy:
    """Test the paired Monte Carlo protocol"""

    def test_row_per_size_and_estimator(self, small_report):
        assert len(small_report.rows) == 2 * 3
        assert [row.estimator for row in small_report.rows[:3]] == ['plugin', 'uniform', 'wavelet:linear']

    def test_two_replications_have_finite_variance(self):
        config = ExperimentConfigFactory(replications=2, sample_sizes=(15,))
        report = run_bias_study(config, threads=1, oracle=NORMAL_ORACLE)
        for row in report.rows:
            assert math.isfinite(row.bias) and math.isfinite(row.variance)

    def test_plugin_row_matches_plugin_columns(self, small_report):
        row = small_report.row(20, 'plugin')
        assert row.bias == row.plugin_bias
        assert row.variance == row.plugin_variance

    def test_paired_ordering(self, small_report):
        assert small_report.ordering_violations == 0
        assert small_report.bound_violations == 0
        for n_obs in (20, 40):
            plugin = small_report.row(n_obs, 'plugin')
            for estimator in ('uniform', 'wavelet:linear'):
                assert small_report.row(n_obs, estimator).bias >= plugin.bias - 1e-6

    def test_diagnostic_columns(self, small_report):
        uniform = small_report.row(40, 'uniform')
        assert uniform.kernel == 'uniform' and uniform.bandwidth > 0.0
        assert uniform.rmse >= uniform.mad >= 0.0
        assert uniform.sd == pytest.approx(math.sqrt(uniform.variance))
        assert small_report.row(40, 'wavelet:linear').resolution == 1

    def test_independent_of_worker_count(self):
        config = ExperimentConfigFactory(master_seed=8)
        single = run_bias_study(config, threads=1, oracle=NORMAL_ORACLE)
        many = run_bias_study(config, threads=4, oracle=NORMAL_ORACLE)
        pd.testing.assert_frame_equal(single.to_frame(), many.to_frame(), check_exact=True)

    def test_failure_aborts_with_context(self, mocker):
        real = study.estimate_higher_order_risk

        def failing(spec, tag, sample):
            if tag.kind == BackendKind.WAVELET:
                raise QuadratureFailure('did not converge')
            return real(spec, tag, sample)

        mocker.patch('experiments.study.estimate_higher_order_risk', side_effect=failing)
        with pytest.raises(StudyAborted) as excinfo:
            run_bias_study(ExperimentConfigFactory(), threads=2, oracle=NORMAL_ORACLE)
        assert excinfo.value.estimator == 'wavelet:linear'
        assert excinfo.value.n_obs == 20

    def test_oracle_is_attached(self):
        config = ExperimentConfigFactory(dist=ShiftedTFactory(df=60), sample_sizes=(30,), replications=2)
        report = run_bias_study(config, threads=2)
        assert report.theta0 > report.u_star > 10.0
        assert report.normal_parameter is None


@pytest.mark.unit
class TestReportFormats:
    """Test CSV and JSON output"""

    def test_csv_columns(self, small_report):
        header = small_report.to_csv().splitlines()[0]
        assert header == ','.join(CSV_COLUMNS)

    def test_csv_round_trip(self, small_report):
        buffer = io.StringIO()
        small_report.to_csv(buffer)
        buffer.seek(0)
        pd.testing.assert_frame_equal(read_report_csv(buffer), small_report.to_frame(), check_exact=True)

    def test_json_document(self, small_report):
        document = json.loads(small_report.to_json())
        assert document['theta0'] == NORMAL_ORACLE.theta0
        assert document['protocol'].startswith('paired')
        assert document['normal_parameter'] == 'variance'
        assert document['resolution_rounding'] == 'nearest'
        assert len(document['rows']) == 6
        assert document['rows'][1]['N'] == 20
        assert document['rows'][0]['bandwidth'] is None


@pytest.mark.unit
class TestReferenceTables:
    """Test the embedded reference tables"""

    def test_table_shapes(self):
        assert len(TABLES['normal']) == 12
        assert len(TABLES['t']) == 27

    def test_configs(self):
        normal, = table_configs('normal', replications=500)
        assert normal.dist.parameter == NormalParameter.VARIANCE
        assert normal.sample_sizes == (100, 200, 500)
        assert [config.dist.df for config in table_configs('t', replications=500)] == [6, 8, 60]

    def test_unknown_table(self):
        with pytest.raises(KeyError):
            table_configs('cauchy')

    def test_compare_marks_duplicated_rows(self):
        configs = table_configs('normal', replications=2, master_seed=1)
        report = run_bias_study(
            ExperimentConfig(configs[0].dist, (100,), ('plugin', 'gaussian'), replications=2, master_seed=1),
            threads=2,
            oracle=NORMAL_ORACLE,
        )
        frame = compare_table('normal', [report])
        assert list(frame['estimator']) == ['gaussian']
        assert frame['bias_ok'].iloc[0] is None

    def test_wavelet_rows_pin_floor_rounding(self):
        assert RESOLUTION_ROUNDING == ResolutionRounding.FLOOR
        for config in table_configs('t', replications=2):
            assert config.estimators[-1] == WaveletTag('linear', rounding='floor')
            assert config.estimators[-1].label == WAVELET == 'wavelet:linear:round=floor'

    def test_t_tolerance_is_wider(self):
        assert POLICIES['t'].bias_floor > POLICIES['normal'].bias_floor
        assert POLICIES['t'].variance_rel > POLICIES['normal'].variance_rel

    def test_gap_rows_only_compare_against_plugin(self):
        configs = table_configs('normal', replications=2, master_seed=1)
        report = run_bias_study(
            ExperimentConfig(configs[0].dist, (100, 200), ('plugin', WAVELET), replications=2, master_seed=1),
            threads=2,
            oracle=NORMAL_ORACLE,
        )
        assert report.resolution_rounding == 'floor'
        assert report.row(200, WAVELET).resolution == 1
        frame = compare_table('normal', [report]).set_index('N')
        assert frame.loc[100, 'gap']
        assert pd.isna(frame.loc[100, 'bias_ok'])
        assert frame.loc[100, 'improves_plugin'] in (True, False)
        assert frame.loc[200, 'gap'] == ''
        assert frame.loc[200, 'bias_ok'] in (True, False)


@pytest.mark.integration
class TestReducedReproduction:
    """Test the protocol on a reduced normal study"""

    def test_consistency_and_ordering(self):
        config = ExperimentConfig(
            NormalFactory(), (100, 500), ('plugin', 'uniform', 'wavelet:linear'),
            replications=40, master_seed=2024,
        )
        report = run_bias_study(config, oracle=NORMAL_ORACLE)
        assert report.ordering_violations == 0
        assert report.row(100, 'plugin').bias < 0.0
        assert all(consistent_trend(report).values())


@pytest.mark.slow
@pytest.mark.acceptance
class TestFullSizeTables:
    """Test full-size reruns of the reference tables"""

    def test_normal_table(self):
        reports = [run_bias_study(config) for config in table_configs('normal', replications=500)]
        frame = compare_table('normal', reports)
        checked = frame[frame['bias_ok'].notna()]
        assert checked['bias_ok'].all()
        assert checked['variance_ok'].all()
        assert frame['plugin_bias_ok'].all()
        assert frame[frame['gap'] != '']['improves_plugin'].all()
        assert reports[0].resolution_rounding == 'floor'
        assert (frame['ordering_violations'] == 0).all()
        assert all(consistent_trend(reports[0]).values())

    def test_t_table(self):
        reports = [run_bias_study(config) for config in table_configs('t', replications=500)]
        frame = compare_table('t', reports)
        assert (frame['ordering_violations'] == 0).all()
        checked = frame[frame['bias_ok'].notna()]
        assert checked['bias_ok'].all()
        assert checked['variance_ok'].all()
        assert frame[frame['gap'] != '']['improves_plugin'].all()
        wavelet = reports[-1].row(500, WAVELET)
        assert wavelet.bias > 0.0 > wavelet.plugin_bias

    def test_floor_rounding_matches_printed_wavelet_rows(self):
        check = check_resolution_convention('normal', replications=500)
        assert check.matched == ResolutionRounding.FLOOR
        assert check.errors['floor'] < check.errors['nearest']
