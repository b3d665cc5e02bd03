import json
import math

from rest_framework import serializers
from rest_framework.renderers import JSONRenderer

from core.conf import risk_setting
from core.exceptions import BadParameters
from risk.measures import RiskFamily, RiskSpec

from .distributions import DistributionFamily, Normal, NormalParameter, PointMass, ShiftedT
from .study import ExperimentConfig, parse_estimator_token


class ExperimentConfigSerializer(serializers.Serializer):
    """Bias-study configuration as read from a JSON file"""

    dist = serializers.ChoiceField(choices=DistributionFamily.choices)
    mean = serializers.FloatField(default=10.0)
    scale = serializers.FloatField(default=3.0)
    parameter = serializers.ChoiceField(choices=NormalParameter.choices, required=False)
    df = serializers.IntegerField(required=False, allow_null=True)
    n = serializers.ListField(child=serializers.IntegerField(min_value=2), allow_empty=False)
    reps = serializers.IntegerField(min_value=2, required=False)
    estimators = serializers.ListField(child=serializers.CharField(), allow_empty=False)
    alpha = serializers.FloatField(default=0.05)
    q = serializers.FloatField(default=2.0)
    kappa = serializers.FloatField(default=1.0)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1, required=False)

    def validate_scale(self, value):
        if not value > 0.0 or not math.isfinite(value):
            raise serializers.ValidationError('Scale must be positive.')
        return value

    def validate_estimators(self, value):
        try:
            tags = [parse_estimator_token(token) for token in value]
        except BadParameters as exc:
            raise serializers.ValidationError(str(exc))
        if len({tag.label for tag in tags}) != len(tags):
            raise serializers.ValidationError('Estimators must be distinct.')
        return tags

    def validate(self, attrs):
        if attrs['dist'] == DistributionFamily.T:
            df = attrs.get('df')
            if df is None:
                raise serializers.ValidationError({'df': 'The t distribution needs degrees of freedom.'})
            if df <= 2:
                raise serializers.ValidationError({'df': 'Degrees of freedom must exceed 2.'})
        try:
            attrs['risk'] = RiskSpec(RiskFamily.HIGHER_ORDER, q=attrs['q'], alpha=attrs['alpha'], kappa=attrs['kappa'])
        except BadParameters as exc:
            raise serializers.ValidationError(exc.errors)
        return attrs

    def create(self, validated_data):
        family = validated_data['dist']
        if family == DistributionFamily.NORMAL:
            dist = Normal(validated_data['mean'], validated_data['scale'], validated_data.get('parameter'))
        elif family == DistributionFamily.T:
            dist = ShiftedT(validated_data['df'], validated_data['mean'])
        else:
            dist = PointMass(validated_data['mean'])
        return ExperimentConfig(
            dist=dist,
            sample_sizes=validated_data['n'],
            estimators=validated_data['estimators'],
            risk=validated_data['risk'],
            replications=validated_data.get('reps', risk_setting('DEFAULT_REPLICATIONS')),
            master_seed=validated_data.get('seed', risk_setting('DEFAULT_SEED')),
        )


class BiasRowSerializer(serializers.Serializer):
    """One (N, estimator) row with its paired diagnostics"""

    dist = serializers.CharField()
    df = serializers.IntegerField(allow_null=True)
    N = serializers.IntegerField(source='n_obs')
    estimator = serializers.CharField()
    kernel = serializers.CharField(allow_blank=True)
    bandwidth = serializers.FloatField(allow_null=True)
    resolution = serializers.IntegerField(allow_null=True)
    bias = serializers.FloatField()
    variance = serializers.FloatField()
    theta0 = serializers.FloatField()
    u_star = serializers.FloatField()
    reps = serializers.IntegerField()
    seed = serializers.IntegerField()
    plugin_bias = serializers.FloatField()
    plugin_variance = serializers.FloatField()
    mad = serializers.FloatField()
    sd = serializers.FloatField()
    rmse = serializers.FloatField()
    ordering_violations = serializers.IntegerField()
    bound_violations = serializers.IntegerField()


class BiasReportSerializer(serializers.Serializer):
    """Bias report with the oracle values and the configuration echo"""

    theta0 = serializers.FloatField()
    u_star = serializers.FloatField()
    seed = serializers.IntegerField()
    reps = serializers.IntegerField()
    protocol = serializers.CharField()
    normal_parameter = serializers.CharField(allow_null=True)
    resolution_rounding = serializers.CharField(allow_null=True)
    config = serializers.DictField()
    rows = BiasRowSerializer(many=True)


def render_report(report) -> bytes:
    return JSONRenderer().render(BiasReportSerializer(report).data, renderer_context={'indent': 2})


def load_config(path) -> ExperimentConfig:
    """
    Read and validate a JSON experiment configuration.

    Raises:
        OSError: the file cannot be read.
        serializers.ValidationError: the content is not a valid configuration.
    """
    with open(path) as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise serializers.ValidationError({'config': f'not valid JSON: {exc}'})
    serializer = ExperimentConfigSerializer(data=payload)
    serializer.is_valid(raise_exception=True)
    return serializer.save()
