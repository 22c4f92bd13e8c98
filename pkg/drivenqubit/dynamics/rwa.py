"""Приближение вращающейся волны и карты по двум амплитудам драйва.

Каждая гармоника J_l рассматривается как независимый канал Раби
с частотой Omega_l = sqrt(|J_l|^2 + (delta_l/2)^2).
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .conf import knob
from .exceptions import BandError, SpecError
from .gbf import GbfTable, build_gbf_table, weighted_coefficients
from .oracle import long_time_average
from .waveform import DriveSpec

logger = logging.getLogger(__name__)

MAP_KINDS = ('rabi', 'avg', 'oracle-avg')


@dataclass(frozen=True)
class SweepSpec:
    """Прямоугольная сетка по двум параметрам шаблона; диапазоны в единицах omega"""
    template: DriveSpec
    axis1: str
    axis2: str
    range1: tuple
    range2: tuple

    def __post_init__(self):
        if self.axis1 == self.axis2:
            raise SpecError('Оси карты должны различаться', key='axis2')
        for key in ('range1', 'range2'):
            bounds = tuple(getattr(self, key))
            if len(bounds) != 3:
                raise SpecError('Диапазон задаётся тройкой (lo, hi, count)', key=key)
            lo, hi, count = bounds
            if int(count) != count or count < 2:
                raise SpecError('В диапазоне должно быть не меньше двух точек', key=key)
            object.__setattr__(self, key, (float(lo), float(hi), int(count)))
        self.template.parameter(self.axis1)
        self.template.parameter(self.axis2)

    @property
    def values1(self):
        lo, hi, count = self.range1
        return np.linspace(lo, hi, count) * self.template.omega

    @property
    def values2(self):
        lo, hi, count = self.range2
        return np.linspace(lo, hi, count) * self.template.omega

    @property
    def shape(self):
        return self.range2[2], self.range1[2]

    def cell_spec(self, row, column):
        """Драйв в узле (axis2 = values2[row], axis1 = values1[column])"""
        spec = self.template.with_parameter(self.axis1, self.values1[column])
        return spec.with_parameter(self.axis2, self.values2[row])

    def to_dict(self):
        return {
            'template': self.template.to_dict(),
            'axis1': self.axis1,
            'axis2': self.axis2,
            'range1': list(self.range1),
            'range2': list(self.range2),
        }


def rwa_hamiltonian(gbf: GbfTable, l):
    if l not in gbf:
        raise BandError(f'Гармоника {l} вне полосы [{gbf.l_min}, {gbf.l_max}]')
    value = complex(gbf[l])
    return np.array([[0, value], [np.conj(value), 0]], dtype=complex)


def _channels(gbf, eps0, omega, detuning_sign):
    if detuning_sign not in (1, -1):
        raise ValueError('detuning_sign должен быть +1 или -1')
    for l, value in gbf.nonzero():
        detuning = eps0 + l * omega if detuning_sign == 1 else l * omega - eps0
        weight = abs(value) ** 2
        yield weight, np.sqrt(weight + (detuning / 2) ** 2)


def rwa_probability(gbf: GbfTable, eps0, omega, t, detuning_sign=1):
    """Сумма независимых осцилляций Раби по всем каналам"""
    t = np.asarray(t, dtype=float)
    value = np.zeros(t.shape)
    for weight, frequency in _channels(gbf, eps0, omega, detuning_sign):
        value = value + weight / frequency ** 2 * np.sin(frequency * t) ** 2
    return value.item() if value.ndim == 0 else value


def rwa_average(gbf: GbfTable, eps0, omega, detuning_sign=1):
    return float(sum(weight / frequency ** 2 / 2
                     for weight, frequency in _channels(gbf, eps0, omega, detuning_sign)))


def rabi_cell(spec: DriveSpec, l):
    return abs(weighted_coefficients(spec, abs(l))[l])


def avg_cell(spec: DriveSpec, detuning_sign=1, threshold=None):
    threshold = knob('GBF_THRESHOLD') if threshold is None else threshold
    return rwa_average(build_gbf_table(spec, threshold), spec.eps0, spec.omega, detuning_sign)


def map_row_values(sweep: SweepSpec, kind, row, **options):
    """Одна строка карты (фиксированное значение axis2)"""
    if kind == 'rabi':
        cell = lambda spec: rabi_cell(spec, options.get('l', 0))
    elif kind == 'avg':
        cell = lambda spec: avg_cell(spec, options.get('detuning_sign', 1), options.get('threshold'))
    elif kind == 'oracle-avg':
        cell = lambda spec: long_time_average(
            spec, options.get('periods', 50), options.get('samples', 64), options.get('tol'))
    else:
        raise ValueError(f'Неизвестный тип карты {kind!r}')
    return [float(cell(sweep.cell_spec(row, column))) for column in range(sweep.shape[1])]


def sweep_map(sweep: SweepSpec, kind, threads=None, **options):
    """Заполнение карты построчно; порядок строк не зависит от числа потоков"""
    threads = knob('THREADS') if threads is None else threads
    rows = range(sweep.shape[0])
    logger.info('Карта %s: %dx%d, потоков %d', kind, sweep.shape[1], sweep.shape[0], threads)
    if threads <= 1:
        values = [map_row_values(sweep, kind, row, **options) for row in rows]
    else:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            values = list(executor.map(lambda row: map_row_values(sweep, kind, row, **options), rows))
    return np.array(values, dtype=float)


def rabi_map(sweep: SweepSpec, l, threads=None):
    return sweep_map(sweep, 'rabi', threads, l=l)


def avg_map(sweep: SweepSpec, threads=None, detuning_sign=1, threshold=None):
    return sweep_map(sweep, 'avg', threads, detuning_sign=detuning_sign, threshold=threshold)


def oracle_avg_map(sweep: SweepSpec, periods=50, samples=64, tol=None, threads=None):
    return sweep_map(sweep, 'oracle-avg', threads, periods=periods, samples=samples, tol=tol)


def local_maxima(values, floor=0.0):
    """Индексы (строка, столбец) локальных максимумов карты в окне 3x3"""
    values = np.asarray(values, dtype=float)
    peaks = (ndimage.maximum_filter(values, size=3, mode='nearest') == values) & (values > floor)
    return [tuple(int(i) for i in index) for index in np.argwhere(peaks)]
