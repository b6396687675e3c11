from rest_framework import serializers

from dispersion.params import parse_distance
from spectral.trajectories import SWEEP_PARAMETERS
from wqed.exceptions import DomainError

FORMATS = ('csv', 'json')


class ModelParamsSerializer(serializers.Serializer):
    omega0 = serializers.FloatField()
    lam = serializers.FloatField(min_value=0.0)
    mass = serializers.FloatField(required=False, default=1.0)
    distance = serializers.CharField(required=False, default='0')

    def validate_mass(self, value):
        if not value > 0:
            raise serializers.ValidationError("mass must be positive")
        return value

    def validate_distance(self, value):
        try:
            distance, _ = parse_distance(value)
        except DomainError as exc:
            raise serializers.ValidationError(str(exc))
        if distance is not None and distance < 0:
            raise serializers.ValidationError("distance must be non-negative")
        return value.strip()


class SweepSerializer(serializers.Serializer):
    sweep = serializers.ChoiceField(choices=SWEEP_PARAMETERS, required=False, default='omega0')
    start = serializers.FloatField()
    stop = serializers.FloatField()
    steps = serializers.IntegerField()

    def validate_steps(self, value):
        if value < 2:
            raise serializers.ValidationError("a sweep needs at least 2 steps")
        return value


class OracleSizingSerializer(serializers.Serializer):
    oracle_modes = serializers.IntegerField(required=False, allow_null=True, default=None)
    oracle_box = serializers.FloatField(required=False, allow_null=True, default=None)
    times = serializers.CharField(required=False, allow_null=True, default=None)

    def validate_oracle_modes(self, value):
        if value is not None and (value < 1 or value % 2 == 0):
            raise serializers.ValidationError("oracle mode count must be a positive odd integer")
        return value

    def validate_oracle_box(self, value):
        if value is not None and not value > 0:
            raise serializers.ValidationError("oracle box length must be positive")
        return value

    def validate_times(self, value):
        if value is None:
            return None
        parts = value.split(':')
        if len(parts) != 3:
            raise serializers.ValidationError("times must read START:STOP:COUNT")
        try:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            raise serializers.ValidationError("times must read START:STOP:COUNT")
        if count < 2 or not stop > start or start < 0:
            raise serializers.ValidationError("times needs 0 <= START < STOP and COUNT >= 2")
        return (start, stop, count)


class RunConfigSerializer(ModelParamsSerializer):
    """Resolved configuration of one CLI run"""
    subcommand = serializers.ChoiceField(choices=(
        'poles', 'trajectory', 'concurrence-scan', 'energy-density', 'offres', 'simulate',
    ))
    out = serializers.CharField(required=False, allow_null=True, default=None)
    format = serializers.CharField(required=False, default='csv')
    jobs = serializers.IntegerField(required=False, default=1)
    exact = serializers.BooleanField(required=False, default=False)
    verbose = serializers.BooleanField(required=False, default=False)
    header = serializers.BooleanField(required=False, default=True)
    n = serializers.IntegerField(required=False, allow_null=True, default=None, min_value=1)
    initial = serializers.ChoiceField(choices=('excited_a', 'excited_b', 'bell'), required=False,
                                      default='excited_a')
    snapshots = serializers.IntegerField(required=False, default=0, min_value=0)
    self_consistent = serializers.BooleanField(required=False, default=False)

    def validate_format(self, value):
        value = value.lower()
        if value not in FORMATS:
            raise serializers.ValidationError(f"format must be one of {FORMATS}")
        return value

    def validate_jobs(self, value):
        if value == 0 or value < -1:
            raise serializers.ValidationError("jobs must be >= 1, or -1 for all cores")
        return value
