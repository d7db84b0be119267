"""
Input Serializers

DRF serializers that check the raw fields coming from config files, the
command line and HTTP bodies before anything physical gets built. They only
check types and ranges; the physics checks live on the parameter records.
"""

from django.conf import settings
from rest_framework import serializers

from .exceptions import ValidationError
from .resonance import ResonanceCondition

RATE_CONVENTIONS = ('linear', 'angular')
OUTPUT_FORMATS = ('json', 'csv')


class ConditionField(serializers.Field):
    """Accepts 7, '7' or 'rc7' and returns the ResonanceCondition."""

    def to_internal_value(self, data):
        try:
            return ResonanceCondition.parse(data)
        except ValidationError as e:
            raise serializers.ValidationError(e.message)

    def to_representation(self, value):
        return value.label


class RunConfigSerializer(serializers.Serializer):
    condition = ConditionField()
    eta_ghz = serializers.FloatField(min_value=0.0)
    omega_c_ghz = serializers.FloatField()
    omega1_ghz = serializers.FloatField()
    omega2_ghz = serializers.FloatField()
    drive1_ghz = serializers.FloatField(required=False)
    drive2_ghz = serializers.FloatField(required=False)
    rabi1_ghz = serializers.FloatField(min_value=0.0)
    rabi2_ghz = serializers.FloatField(min_value=0.0)
    g1_ghz = serializers.FloatField(min_value=0.0)
    g2_ghz = serializers.FloatField(min_value=0.0)
    phase1 = serializers.FloatField(required=False, default=0.0)
    phase2 = serializers.FloatField(required=False, default=0.0)
    m = serializers.IntegerField(min_value=0)

    gamma1_khz = serializers.FloatField(required=False, default=0.0, min_value=0.0)
    gamma2_khz = serializers.FloatField(required=False, default=0.0, min_value=0.0)
    kappa_khz = serializers.FloatField(required=False, default=0.0, min_value=0.0)
    rate_convention = serializers.ChoiceField(choices=RATE_CONVENTIONS, required=False)

    initial_state = serializers.RegexField(r'^[eg]{2}$', required=False)
    dt_ns = serializers.FloatField(required=False, min_value=0.0)
    n_max = serializers.IntegerField(required=False, min_value=0)
    exactify = serializers.BooleanField(required=False, default=False)
    output = serializers.CharField(required=False)
    format = serializers.ChoiceField(choices=OUTPUT_FORMATS, required=False)

    def validate_eta_ghz(self, value):
        if value <= 0:
            raise serializers.ValidationError("must be positive")
        return value

    def validate_dt_ns(self, value):
        if value <= 0:
            raise serializers.ValidationError("must be positive")
        return value

    def validate(self, data):
        data.setdefault('drive1_ghz', data['omega1_ghz'])
        data.setdefault('drive2_ghz', data['omega2_ghz'])
        data.setdefault('rate_convention', settings.SIDEBAND_RATE_CONVENTION)
        data.setdefault('n_max', settings.SIDEBAND_N_MAX)
        return data


class DqdParamsSerializer(serializers.Serializer):
    tunnel_2t_ghz = serializers.FloatField()
    bz_ghz = serializers.FloatField()
    bx_ghz = serializers.FloatField(min_value=0.0)
    g_charge_ghz = serializers.FloatField(min_value=0.0)
    drive_amp_ghz = serializers.FloatField(min_value=0.0)
    drive_freq_ghz = serializers.FloatField()
    drive_phase = serializers.FloatField(required=False, default=0.0)
    eps0_ghz = serializers.FloatField(required=False, default=0.0)
    mode = serializers.ChoiceField(choices=('spin', 'charge'), required=False, default='spin')


class RxParamsSerializer(serializers.Serializer):
    tunnel_ghz = serializers.FloatField()
    hubbard_ghz = serializers.FloatField()
    g_charge_ghz = serializers.FloatField(min_value=0.0)
    exchange_left_ghz = serializers.FloatField(required=False)
    exchange_right_ghz = serializers.FloatField(required=False)
    drive_freq_ghz = serializers.FloatField(required=False)
    rabi_ghz = serializers.FloatField(required=False, default=0.0, min_value=0.0)

    def validate(self, data):
        if ('exchange_left_ghz' in data) != ('exchange_right_ghz' in data):
            raise serializers.ValidationError("give both exchange_left_ghz and exchange_right_ghz or neither")
        return data


class SearchBoundsSerializer(serializers.Serializer):
    condition = ConditionField()
    qmax = serializers.IntegerField(min_value=1)
    pmax = serializers.IntegerField(min_value=1)
    mmax = serializers.IntegerField(min_value=1)
    eta_ghz = serializers.FloatField()
    omega_c_ghz = serializers.FloatField(required=False, default=7.0)
    qmin = serializers.IntegerField(required=False, default=1, min_value=1)
    mmin = serializers.IntegerField(required=False, default=1, min_value=1)
    wmin = serializers.IntegerField(required=False, allow_null=True, default=None)
    wmax = serializers.IntegerField(required=False, allow_null=True, default=None)
    g_min_ghz = serializers.FloatField(required=False, default=0.0, min_value=0.0)
    g_max_ghz = serializers.FloatField(required=False, allow_null=True, default=None)
    max_g_over_w = serializers.FloatField(required=False)
    limit = serializers.IntegerField(required=False, allow_null=True, default=None, min_value=1)

    def validate(self, data):
        data.setdefault('max_g_over_w', settings.SIDEBAND_MAX_G_OVER_W)
        return data


def flatten_errors(errors) -> list:
    """DRF's {field: [messages]} as 'field: message' strings."""
    flat = []
    for key, messages in errors.items():
        if isinstance(messages, dict):
            flat.extend(f"{key}.{line}" for line in flatten_errors(messages))
            continue
        for message in messages:
            if key == 'non_field_errors':
                flat.append(str(message))
            elif str(message) == 'This field is required.':
                flat.append(f"missing required key '{key}'")
            else:
                flat.append(f"{key}: {message}")
    return flat
