"""Обобщённые функции Бесселя драйва и взвешенные коэффициенты J_l.

Коэффициенты G_p раскладывают exp(i Phi_ac(t)) по гармоникам omega_eps,
а J_l = sum_k (Delta_k / 2) G_p (l = p*a + k*b) собирают весь драйв
во вращающейся системе в один ряд по базовой частоте.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .exceptions import ConvergenceError
from .waveform import DriveSpec, phase_antiderivative

logger = logging.getLogger(__name__)

DEFAULT_THRESHOLD = 1e-12
SELF_CHECK_TOL = 1e-10
FACTOR_TOL = 1e-14
MIN_GRID = 64
BAND_MARGIN = 8


@dataclass(frozen=True)
class GbfTable:
    """Коэффициенты J_l на полосе [l_min, l_max]"""
    l_min: int
    l_max: int
    coeffs: dict
    raw_gbf: dict = field(default_factory=dict)
    threshold: float | None = None

    def __getitem__(self, l):
        return self.coeffs.get(l, 0j)

    def __contains__(self, l):
        return self.l_min <= l <= self.l_max

    @property
    def indices(self):
        return np.arange(self.l_min, self.l_max + 1)

    def values(self):
        return np.array([self[l] for l in range(self.l_min, self.l_max + 1)], dtype=complex)

    def nonzero(self):
        return [(l, self[l]) for l in range(self.l_min, self.l_max + 1) if self[l] != 0]

    def norm_squared(self):
        return float(np.sum(np.abs(self.values()) ** 2))

    def restricted(self, l_min, l_max):
        return GbfTable(
            l_min=l_min,
            l_max=l_max,
            coeffs={l: self[l] for l in range(l_min, l_max + 1)},
            raw_gbf=self.raw_gbf,
            threshold=self.threshold,
        )

    def rows(self):
        return [(l, value.real, value.imag, abs(value)) for l, value in
                ((l, complex(self[l])) for l in range(self.l_min, self.l_max + 1))]


def _modulation(spec: DriveSpec):
    """(гармоника, индекс модуляции z = A/(n omega_eps)) для всех продольных гармоник"""
    terms = [(n, amplitude / (n * spec.omega_eps)) for n, amplitude in spec.a_coeffs]
    terms += [(m, amplitude / (m * spec.omega_eps)) for m, amplitude in spec.b_coeffs]
    return terms


def carson_guess(spec: DriveSpec):
    """Начальная оценка полосы G_p по правилу Карсона"""
    terms = _modulation(spec)
    if not terms:
        return 0
    top = max(harmonic for harmonic, _ in terms)
    return int(math.ceil(sum(abs(z) for _, z in terms) + top))


def _spectral_extent(spec: DriveSpec):
    terms = _modulation(spec)
    if not terms:
        return 0
    top = max(harmonic for harmonic, _ in terms)
    return int(math.ceil(sum(harmonic * abs(z) for harmonic, z in terms))) + top


def _fft_gbf(spec: DriveSpec, size):
    theta = 2 * np.pi * np.arange(size) / size
    samples = np.exp(1j * np.asarray(phase_antiderivative(spec, theta / spec.omega_eps)))
    return np.fft.fft(samples) / size


def gbf_coefficients(spec: DriveSpec, p_max: int):
    """G_p для |p| <= p_max: трапеции (ДПФ) по периоду omega_eps с самопроверкой удвоением сетки"""
    if p_max < 0:
        raise ValueError('p_max должно быть неотрицательным')
    wanted = 8 * (p_max + _spectral_extent(spec))
    size = max(MIN_GRID, 1 << max(wanted - 1, 1).bit_length())
    coarse = _fft_gbf(spec, size)
    fine = _fft_gbf(spec, 2 * size)
    indices = np.arange(-p_max, p_max + 1)
    change = float(np.max(np.abs(coarse[indices % size] - fine[indices % (2 * size)])))
    if change > SELF_CHECK_TOL:
        raise ConvergenceError(
            'Квадратура G_p не сошлась при удвоении сетки', last_norm=change)
    values = fine[indices % (2 * size)]
    return {int(p): complex(value) for p, value in zip(indices, values)}


def _bessel_factor(z, phase):
    """Коэффициенты ряда Якоби-Ангера одной гармоники на индексах q = -Q..Q"""
    order = int(math.ceil(abs(z) + 10 * abs(z) ** (1 / 3) + 25))
    q = np.arange(-order, order + 1)
    values = special.jv(q, z).astype(complex)
    tail = float(max(abs(values[0]), abs(values[1]), abs(values[-1]), abs(values[-2])))
    if tail >= FACTOR_TOL:
        raise ConvergenceError(
            f'Ряд Бесселя для аргумента {z:g} не сошёлся до усечения', last_norm=tail)
    if phase == 'cos':
        values = values * np.exp(1j * z) * (-1j) ** q
    return order, values


def gbf_via_bessel_convolution(spec: DriveSpec, p_max: int):
    """Те же G_p, но как свёртка рядов обычных функций Бесселя по всем гармоникам"""
    if p_max < 0:
        raise ValueError('p_max должно быть неотрицательным')
    sequence = np.ones(1, dtype=complex)
    offset = 0
    factors = [(n, amplitude / (n * spec.omega_eps), 'sin') for n, amplitude in spec.a_coeffs]
    factors += [(m, amplitude / (m * spec.omega_eps), 'cos') for m, amplitude in spec.b_coeffs]
    for harmonic, z, phase in factors:
        order, values = _bessel_factor(z, phase)
        spread = np.zeros(2 * order * harmonic + 1, dtype=complex)
        spread[::harmonic] = values
        sequence = np.convolve(sequence, spread)
        offset += order * harmonic
    result = {}
    for p in range(-p_max, p_max + 1):
        position = p + offset
        result[p] = complex(sequence[position]) if 0 <= position < len(sequence) else 0j
    return result


def weighted_coefficients(spec: DriveSpec, table_band: int) -> GbfTable:
    """J_l = sum_k (Delta_k / 2) G_p по всем k, для которых l = p*a + k*b"""
    if table_band < 0:
        raise ValueError('table_band должно быть неотрицательным')
    a, b = spec.eps_mult, spec.delta_mult
    p_max = int(math.ceil((table_band + spec.max_transverse_index * b) / a))
    gbf = gbf_coefficients(spec, p_max)
    coeffs = {}
    for l in range(-table_band, table_band + 1):
        total = 0j
        for k, amplitude in spec.d_coeffs:
            remainder = l - k * b
            if remainder % a:
                continue
            total += amplitude / 2 * gbf.get(remainder // a, 0j)
        coeffs[l] = total
    return GbfTable(l_min=-table_band, l_max=table_band, coeffs=coeffs, raw_gbf=gbf)


def gbf_band(spec: DriveSpec, threshold: float = DEFAULT_THRESHOLD):
    """Наименьшее p_max, за которым все |G_p| < threshold * max|G|"""
    width = 2 * carson_guess(spec) + 2 * BAND_MARGIN
    while True:
        gbf = gbf_coefficients(spec, width)
        peak = max(abs(value) for value in gbf.values())
        reach = max(abs(p) for p, value in gbf.items() if abs(value) >= threshold * peak)
        if reach + BAND_MARGIN <= width:
            return reach
        width *= 2


def truncation_band(spec: DriveSpec, threshold: float = DEFAULT_THRESHOLD):
    """Полоса [l_min, l_max], вне которой все |J_l| < threshold * max|J|"""
    if not 0 < threshold < 1:
        raise ValueError('Порог усечения должен лежать в (0, 1)')
    if all(amplitude == 0 for _, amplitude in spec.d_coeffs):
        return 0, 0
    a, b = spec.eps_mult, spec.delta_mult
    band = max(a * carson_guess(spec) + b * spec.max_transverse_index, 1)
    while True:
        table = weighted_coefficients(spec, band + BAND_MARGIN * a)
        magnitudes = {l: abs(value) for l, value in table.coeffs.items()}
        peak = max(magnitudes.values())
        if peak == 0:
            return 0, 0
        significant = [l for l, value in magnitudes.items() if value >= threshold * peak]
        l_min, l_max = min(significant), max(significant)
        if max(-l_min, l_max) <= band:
            logger.debug('Полоса J_l: [%d, %d] при пороге %.1e', l_min, l_max, threshold)
            return l_min, l_max
        band *= 2


def build_gbf_table(spec: DriveSpec, threshold: float | None = None) -> GbfTable:
    """Таблица J_l на полосе усечения"""
    threshold = DEFAULT_THRESHOLD if threshold is None else threshold
    l_min, l_max = truncation_band(spec, threshold)
    full = weighted_coefficients(spec, max(-l_min, l_max))
    table = full.restricted(l_min, l_max)
    return GbfTable(l_min, l_max, table.coeffs, full.raw_gbf, threshold)
