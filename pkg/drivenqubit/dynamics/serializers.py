from collections.abc import Mapping
from pathlib import Path

import yaml
from rest_framework import serializers

from .exceptions import SpecError
from .models import Run
from .rwa import SweepSpec
from .waveform import DriveSpec

FIGURES_PATH = Path(__file__).resolve().parent / 'fixtures' / 'figures.yaml'


class StrictSerializer(serializers.Serializer):
    """Сериализатор, отвергающий неизвестные ключи"""

    def to_internal_value(self, data):
        if isinstance(data, Mapping):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError({key: ['Неизвестный ключ.'] for key in unknown})
        return super().to_internal_value(data)


class AHarmonicSerializer(StrictSerializer):
    n = serializers.IntegerField(min_value=1)
    A = serializers.FloatField()


class BHarmonicSerializer(StrictSerializer):
    m = serializers.IntegerField(min_value=1)
    B = serializers.FloatField()


class DHarmonicSerializer(StrictSerializer):
    k = serializers.IntegerField()
    re = serializers.FloatField()
    im = serializers.FloatField(default=0.0)


def drive_spec_from_data(data):
    """DriveSpec из проверенных данных DriveSpecSerializer"""
    return DriveSpec(
        omega=data.get('omega', 1.0),
        eps0=data.get('eps0', 0.0),
        eps_mult=data.get('eps_mult', 1),
        delta_mult=data.get('delta_mult', 1),
        a_coeffs=tuple((item['n'], item['A']) for item in data.get('a_coeffs', [])),
        b_coeffs=tuple((item['m'], item['B']) for item in data.get('b_coeffs', [])),
        d_coeffs=tuple((item['k'], complex(item['re'], item.get('im', 0.0)))
                       for item in data.get('d_coeffs', [])),
    )


class DriveSpecSerializer(StrictSerializer):
    omega = serializers.FloatField(default=1.0)
    eps0 = serializers.FloatField(default=0.0)
    eps_mult = serializers.IntegerField(default=1, min_value=1)
    delta_mult = serializers.IntegerField(default=1, min_value=1)
    a_coeffs = AHarmonicSerializer(many=True, required=False)
    b_coeffs = BHarmonicSerializer(many=True, required=False)
    d_coeffs = DHarmonicSerializer(many=True, required=False)

    def validate(self, data):
        try:
            drive_spec_from_data(data)
        except SpecError as error:
            raise serializers.ValidationError({error.key or 'non_field_errors': [error.message]})
        return data

    def create(self, validated_data):
        return drive_spec_from_data(validated_data)


class SweepSpecSerializer(StrictSerializer):
    template = serializers.JSONField()
    axis1 = serializers.CharField()
    axis2 = serializers.CharField()
    range1 = serializers.ListField(child=serializers.FloatField(), min_length=3, max_length=3)
    range2 = serializers.ListField(child=serializers.FloatField(), min_length=3, max_length=3)

    def validate_template(self, value):
        if isinstance(value, str):
            try:
                return load_drive_spec(value)
            except SpecError as error:
                raise serializers.ValidationError(error.message)
        spec_serializer = DriveSpecSerializer(data=value)
        if not spec_serializer.is_valid():
            raise serializers.ValidationError(spec_serializer.errors)
        return spec_serializer.save()

    def validate(self, data):
        try:
            SweepSpec(**data)
        except SpecError as error:
            raise serializers.ValidationError({error.key or 'non_field_errors': [error.message]})
        return data

    def create(self, validated_data):
        return SweepSpec(**validated_data)


class RunSerializer(serializers.ModelSerializer):
    class Meta:
        model = Run
        fields = ['id', 'command', 'status', 'spec', 'knobs', 'diagnostics', 'artifact',
                  'manifest', 'wall_time', 'error', 'created_at']
        read_only_fields = fields


class GbfRequestSerializer(StrictSerializer):
    spec = DriveSpecSerializer()
    threshold = serializers.FloatField(default=1e-12, min_value=1e-300, max_value=0.5)


class QuasienergyRequestSerializer(StrictSerializer):
    spec = DriveSpecSerializer()
    grid = serializers.IntegerField(default=257, min_value=33, max_value=4097)
    frame = serializers.ChoiceField(choices=['rotated', 'lab'], default='rotated')


def _first_error(errors, prefix=''):
    """Путь к первой ошибке DRF в виде key.0.subkey и её текст"""
    if isinstance(errors, Mapping):
        key, value = next(iter(errors.items()))
        return _first_error(value, f'{prefix}.{key}' if prefix else str(key))
    if isinstance(errors, list):
        for index, value in enumerate(errors):
            if value:
                if isinstance(value, (Mapping, list)):
                    return _first_error(value, f'{prefix}.{index}' if prefix else str(index))
                return prefix, str(value)
    return prefix, str(errors)


def _load_document(source):
    """Разбор JSON/YAML (JSON является подмножеством YAML)"""
    with open(source, encoding='utf-8') as stream:
        return yaml.safe_load(stream)


def _bundled(section, name):
    document = _load_document(FIGURES_PATH)
    try:
        return document[section][name]
    except KeyError:
        raise SpecError(f'Набор @{name} не найден в фикстурах', key=name, path=str(FIGURES_PATH))


def _read(source, section):
    source = str(source)
    if source.startswith('@'):
        return _bundled(section, source[1:]), str(FIGURES_PATH)
    try:
        return _load_document(source), source
    except OSError as error:
        raise SpecError(f'Не удалось прочитать файл: {error.strerror}', path=source)
    except yaml.YAMLError as error:
        raise SpecError(f'Файл не разбирается как JSON/YAML: {error}', path=source)


def load_drive_spec(source) -> DriveSpec:
    """DriveSpec из файла JSON/YAML или из фикстур по имени '@fig2a'"""
    data, path = _read(source, 'sets')
    serializer = DriveSpecSerializer(data=data)
    if not serializer.is_valid():
        key, message = _first_error(serializer.errors)
        raise SpecError(message, key=key, path=path)
    return serializer.save()


def load_sweep(source) -> SweepSpec:
    data, path = _read(source, 'sweeps')
    serializer = SweepSpecSerializer(data=data)
    if not serializer.is_valid():
        key, message = _first_error(serializer.errors)
        raise SpecError(message, key=key, path=path)
    return serializer.save()
