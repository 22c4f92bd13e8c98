"""Периодический драйв двухуровневой системы и его гамильтониан в лабораторной системе."""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import SpecError

AXIS_PATTERN = re.compile(r'^(?P<kind>[ABD])(?P<index>-?\d+)$')


@dataclass(frozen=True)
class DriveSpec:
    """Полное описание драйва.

    Частоты задаются целыми кратностями базовой частоты: omega_eps = eps_mult * omega,
    omega_delta = delta_mult * omega, поэтому T = 2pi/omega всегда общий период.
    Статическое туннелирование хранится как элемент d_coeffs с k = 0.
    """
    omega: float = 1.0
    eps0: float = 0.0
    eps_mult: int = 1
    delta_mult: int = 1
    a_coeffs: tuple = ()
    b_coeffs: tuple = ()
    d_coeffs: tuple = ()

    def __post_init__(self):
        if not math.isfinite(self.omega) or self.omega <= 0:
            raise SpecError('Базовая частота должна быть положительной', key='omega')
        if not math.isfinite(self.eps0):
            raise SpecError('Смещение должно быть конечным', key='eps0')
        for key in ('eps_mult', 'delta_mult'):
            value = getattr(self, key)
            if int(value) != value or value < 1:
                raise SpecError('Кратность частоты должна быть целым числом >= 1', key=key)
            object.__setattr__(self, key, int(value))
        object.__setattr__(self, 'a_coeffs', _harmonics(self.a_coeffs, 'a_coeffs', minimum=1))
        object.__setattr__(self, 'b_coeffs', _harmonics(self.b_coeffs, 'b_coeffs', minimum=1))
        object.__setattr__(self, 'd_coeffs', _harmonics(self.d_coeffs, 'd_coeffs', cast=complex))

    @property
    def period(self):
        return 2 * math.pi / self.omega

    @property
    def omega_eps(self):
        return self.eps_mult * self.omega

    @property
    def omega_delta(self):
        return self.delta_mult * self.omega

    @property
    def is_longitudinally_driven(self):
        return any(value != 0 for _, value in self.a_coeffs + self.b_coeffs)

    @property
    def max_transverse_index(self):
        return max((abs(k) for k, _ in self.d_coeffs), default=0)

    def parameter(self, axis):
        """Текущее значение параметра по идентификатору оси (A1, B2, D-1, eps0)"""
        if axis == 'eps0':
            return self.eps0
        kind, index = _parse_axis(axis)
        for harmonic, value in getattr(self, _AXIS_FIELDS[kind]):
            if harmonic == index:
                return value
        raise SpecError(f'Параметр {axis} отсутствует в шаблоне драйва', key=axis)

    def with_parameter(self, axis, value):
        """Копия драйва с заменённым значением одного параметра"""
        if axis == 'eps0':
            return replace(self, eps0=float(value))
        self.parameter(axis)
        kind, index = _parse_axis(axis)
        field_name = _AXIS_FIELDS[kind]
        updated = tuple(
            (harmonic, value if harmonic == index else current)
            for harmonic, current in getattr(self, field_name)
        )
        return replace(self, **{field_name: updated})

    def to_dict(self):
        return {
            'omega': self.omega,
            'eps0': self.eps0,
            'eps_mult': self.eps_mult,
            'delta_mult': self.delta_mult,
            'a_coeffs': [{'n': n, 'A': value} for n, value in self.a_coeffs],
            'b_coeffs': [{'m': m, 'B': value} for m, value in self.b_coeffs],
            'd_coeffs': [{'k': k, 're': value.real, 'im': value.imag} for k, value in self.d_coeffs],
        }


_AXIS_FIELDS = {'A': 'a_coeffs', 'B': 'b_coeffs', 'D': 'd_coeffs'}


def _parse_axis(axis):
    match = AXIS_PATTERN.match(str(axis))
    if match is None:
        raise SpecError(f'Неизвестный идентификатор оси {axis!r}', key=str(axis))
    return match.group('kind'), int(match.group('index'))


def _harmonics(entries, key, minimum=None, cast=float):
    result = []
    seen = set()
    for index, value in entries:
        if int(index) != index:
            raise SpecError('Номер гармоники должен быть целым', key=key)
        index = int(index)
        if minimum is not None and index < minimum:
            raise SpecError(f'Номер гармоники должен быть >= {minimum}', key=key)
        if index in seen:
            raise SpecError(f'Гармоника {index} указана дважды', key=key)
        value = cast(value)
        if not np.isfinite(value):
            raise SpecError('Амплитуда должна быть конечной', key=key)
        seen.add(index)
        result.append((index, value))
    return tuple(sorted(result))


def _as_result(value):
    return value.item() if np.ndim(value) == 0 else value


def epsilon_at(spec: DriveSpec, t):
    """eps(t) = eps0 + sum A_n cos(n w_eps t) + sum B_m sin(m w_eps t)"""
    t = np.asarray(t, dtype=float)
    value = np.full(t.shape, spec.eps0)
    for n, amplitude in spec.a_coeffs:
        value = value + amplitude * np.cos(n * spec.omega_eps * t)
    for m, amplitude in spec.b_coeffs:
        value = value + amplitude * np.sin(m * spec.omega_eps * t)
    return _as_result(value)


def delta_at(spec: DriveSpec, t):
    """Delta(t) = sum Delta_k exp(i k w_delta t)"""
    t = np.asarray(t, dtype=float)
    value = np.zeros(t.shape, dtype=complex)
    for k, amplitude in spec.d_coeffs:
        value = value + amplitude * np.exp(1j * k * spec.omega_delta * t)
    return _as_result(value)


def hamiltonian_at(spec: DriveSpec, t):
    """(1/2)[[eps, Delta], [conj(Delta), -eps]]; для массива t форма (..., 2, 2)"""
    eps = np.asarray(epsilon_at(spec, t), dtype=float)
    delta = np.asarray(delta_at(spec, t), dtype=complex)
    matrix = np.empty(eps.shape + (2, 2), dtype=complex)
    matrix[..., 0, 0] = eps / 2
    matrix[..., 1, 1] = -eps / 2
    matrix[..., 0, 1] = delta / 2
    matrix[..., 1, 0] = np.conj(delta) / 2
    return matrix


def phase_antiderivative(spec: DriveSpec, t):
    """Первообразная переменной части смещения с Phi_ac(0) = 0"""
    t = np.asarray(t, dtype=float)
    value = np.zeros(t.shape)
    for n, amplitude in spec.a_coeffs:
        frequency = n * spec.omega_eps
        value = value + amplitude / frequency * np.sin(frequency * t)
    for m, amplitude in spec.b_coeffs:
        frequency = m * spec.omega_eps
        value = value + amplitude / frequency * (1 - np.cos(frequency * t))
    return _as_result(value)


def frame_rotation(spec: DriveSpec, t):
    """U0(t) = exp(-(i/2)(eps0 t + Phi_ac(t)) sigma_z)"""
    t = np.asarray(t, dtype=float)
    theta = spec.eps0 * t + np.asarray(phase_antiderivative(spec, t))
    matrix = np.zeros(theta.shape + (2, 2), dtype=complex)
    matrix[..., 0, 0] = np.exp(-0.5j * theta)
    matrix[..., 1, 1] = np.exp(0.5j * theta)
    return matrix


def to_lab_frame(matrix, spec: DriveSpec, t, s):
    """Пересчёт U(t, s) из вращающейся системы в лабораторную"""
    left = frame_rotation(spec, t)
    right = frame_rotation(spec, s)
    return left @ np.asarray(matrix) @ np.conj(np.swapaxes(right, -1, -2))
