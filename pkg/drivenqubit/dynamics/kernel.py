"""Двухвременное ядро K(t, s) во вращающейся системе отсчёта.

D(t) = sum_l J_l exp(i f_l t), f_l = eps0 + l*omega, и K(t, s) = D(t) * int_s^t conj(D).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .divdiff import exp_divided_difference
from .exceptions import CausalityError, ResonanceError
from .gbf import GbfTable, build_gbf_table

logger = logging.getLogger(__name__)

RESONANCE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class KernelSpec:
    gbf: GbfTable
    eps0: float
    omega: float

    def __post_init__(self):
        if not np.all(np.isfinite(self.frequencies)):
            raise ValueError('Частоты f_l должны быть конечными')

    @classmethod
    def from_drive(cls, spec, threshold=None):
        table = build_gbf_table(spec, threshold)
        logger.debug('Ядро: полоса [%d, %d], ненулевых J_l: %d',
                      table.l_min, table.l_max, len(table.nonzero()))
        return cls(gbf=table, eps0=spec.eps0, omega=spec.omega)

    @property
    def band(self):
        return self.gbf.l_min, self.gbf.l_max

    @property
    def period(self):
        return 2 * math.pi / self.omega

    @cached_property
    def indices(self):
        return np.array([l for l, _ in self.gbf.nonzero()], dtype=int)

    @cached_property
    def amplitudes(self):
        return np.array([value for _, value in self.gbf.nonzero()], dtype=complex)

    @cached_property
    def frequencies(self):
        return self.eps0 + self.indices * self.omega

    def frequency(self, l):
        return self.eps0 + l * self.omega

    def strongest(self, count):
        """Ядро, усечённое до count самых сильных гармоник"""
        ranked = sorted(self.gbf.nonzero(), key=lambda item: (-abs(item[1]), item[0]))[:count]
        kept = dict(ranked)
        coeffs = {l: kept.get(l, 0j) for l in range(self.gbf.l_min, self.gbf.l_max + 1)}
        table = GbfTable(self.gbf.l_min, self.gbf.l_max, coeffs, self.gbf.raw_gbf, self.gbf.threshold)
        return KernelSpec(gbf=table, eps0=self.eps0, omega=self.omega)

    def coupling(self, t):
        """Недиагональный элемент гамильтониана во вращающейся системе"""
        t = np.asarray(t, dtype=float)
        value = np.zeros(t.shape, dtype=complex)
        for amplitude, frequency in zip(self.amplitudes, self.frequencies):
            value = value + amplitude * np.exp(1j * frequency * t)
        return value

    def resonance_index(self):
        """alpha при eps0 = -alpha*omega или None"""
        alpha = round(-self.eps0 / self.omega)
        if abs(self.eps0 + alpha * self.omega) <= RESONANCE_TOL * max(1.0, abs(self.eps0)):
            return int(alpha)
        return None


def _result(value):
    return complex(value) if np.ndim(value) == 0 else value


def _causal(t, s):
    t, s = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(s, dtype=float))
    if np.any(t < s):
        raise CausalityError('Ядро определено только при t >= s')
    return t, s


def _sinc_integral(frequency, t, s):
    """int_s^t exp(-i f tau) d tau в форме с sinc"""
    tau = t - s
    return np.exp(-0.5j * frequency * (t + s)) * tau * np.sinc(frequency * tau / (2 * np.pi))


def kernel_at(ks: KernelSpec, t, s):
    """Ядро в форме с sinc"""
    t, s = _causal(t, s)
    inner = np.zeros(t.shape, dtype=complex)
    for amplitude, frequency in zip(ks.amplitudes, ks.frequencies):
        inner = inner + np.conj(amplitude) * _sinc_integral(frequency, t, s)
    return _result(ks.coupling(t) * inner)


def kernel_at_dd(ks: KernelSpec, t, s):
    """Ядро через первые разделённые разности exp(i[f_n, 0](t - s))"""
    t, s = _causal(t, s)
    tau = t - s
    left = np.zeros(t.shape, dtype=complex)
    right = np.zeros(t.shape, dtype=complex)
    for l, amplitude, frequency in zip(ks.indices, ks.amplitudes, ks.frequencies):
        difference = exp_divided_difference((frequency, 0.0), tau)
        left = left + np.conj(amplitude) * np.exp(-1j * l * ks.omega * t) * difference
    for l, amplitude in zip(ks.indices, ks.amplitudes):
        right = right + amplitude * np.exp(1j * l * ks.omega * t)
    return _result(-1j * left * right)


def kernel_grid(ks: KernelSpec, times):
    """K(t_i, t_j) на сетке, нижний треугольник; через первообразную conj(D)"""
    times = np.asarray(times, dtype=float)
    primitive = np.zeros(times.shape, dtype=complex)
    for amplitude, frequency in zip(ks.amplitudes, ks.frequencies):
        primitive = primitive + np.conj(amplitude) * _sinc_integral(frequency, times, 0.0)
    values = ks.coupling(times)[:, None] * (primitive[:, None] - primitive[None, :])
    return np.tril(values)


def _require_resonance(ks, alpha):
    if abs(ks.eps0 + alpha * ks.omega) > RESONANCE_TOL * max(1.0, abs(ks.eps0)):
        raise ResonanceError(
            f'eps0 = {ks.eps0:g} не является целым резонансом для alpha = {alpha}')


def kernel_split(ks: KernelSpec, t, s, alpha: int):
    """Разбиение ядра на вращающуюся, контрвращающуюся и нерезонансную части"""
    _require_resonance(ks, alpha)
    t, s = _causal(t, s)
    tau = t - s
    resonant = ks.gbf[alpha]
    rwa = np.conj(resonant) * resonant * tau
    cr = np.zeros(t.shape, dtype=complex)
    for l, amplitude in zip(ks.indices, ks.amplitudes):
        if l != alpha:
            cr = cr + np.conj(resonant) * amplitude * np.exp(1j * (l - alpha) * ks.omega * t) * tau
    inner = np.zeros(t.shape, dtype=complex)
    for l, amplitude, frequency in zip(ks.indices, ks.amplitudes, ks.frequencies):
        if l != alpha:
            inner = inner + np.conj(amplitude) * _sinc_integral(frequency, t, s)
    off_resonant = ks.coupling(t) * inner
    return _result(rwa), _result(cr), _result(off_resonant)


def kernel_average(ks: KernelSpec, T=None):
    """(2/T^2) * двойной интеграл ядра по треугольнику 0 <= s <= t <= T"""
    T = ks.period if T is None else T
    total = 0j
    for n, amplitude_n in zip(ks.indices, ks.amplitudes):
        for m, amplitude_m in zip(ks.indices, ks.amplitudes):
            shift = (m - n) * ks.omega
            nodes = (ks.frequency(m), shift, shift, 0.0)
            total += np.conj(amplitude_n) * amplitude_m * exp_divided_difference(nodes, T)
    return complex(2j * total / T ** 2)


def cr_average(ks: KernelSpec, T, alpha: int):
    """Среднее по периоду диагональных (m = n != alpha) слагаемых ядра"""
    _require_resonance(ks, alpha)
    total = 0j
    for m, amplitude in zip(ks.indices, ks.amplitudes):
        if m == alpha:
            continue
        detuning = (m - alpha) * ks.omega
        total += abs(amplitude) ** 2 * (2 / (detuning ** 2 * T) + 1j / detuning)
    return complex(total)
