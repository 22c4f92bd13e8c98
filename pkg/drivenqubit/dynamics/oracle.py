"""Независимые эталоны для движков.

Прямое интегрирование уравнения Шрёдингера классическим методом
Рунге-Кутты четвёртого порядка с контролем по удвоению числа шагов
и вложенные квадратуры ⋆-степеней ядра с экстраполяцией Ромберга.
С кодом движков эталон делит только таблицу J_l.
"""
from __future__ import annotations

import logging

import numpy as np
from scipy.integrate import trapezoid

from .conf import knob
from .exceptions import CausalityError, ConvergenceError, StepLimitExceeded
from .gbf import build_gbf_table
from .kernel import KernelSpec, kernel_at
from .propagator import Unitary2
from .waveform import DriveSpec, hamiltonian_at

logger = logging.getLogger(__name__)

FRAMES = ('lab', 'rotated')
INITIAL_STEPS = 16
ORACLE_GBF_THRESHOLD = 1e-12
ROMBERG_TOL = 1e-9


def _rotated_hamiltonian(spec: DriveSpec):
    table = build_gbf_table(spec, ORACLE_GBF_THRESHOLD)
    terms = [(value, spec.eps0 + l * spec.omega) for l, value in table.nonzero()]

    def hamiltonian(t):
        coupling = np.zeros(np.shape(t), dtype=complex)
        for amplitude, frequency in terms:
            coupling = coupling + amplitude * np.exp(1j * frequency * t)
        matrix = np.zeros(np.shape(t) + (2, 2), dtype=complex)
        matrix[..., 0, 1] = coupling
        matrix[..., 1, 0] = np.conj(coupling)
        return matrix

    return hamiltonian


def _hamiltonian(spec, frame):
    if frame not in FRAMES:
        raise ValueError(f'Неизвестная система отсчёта {frame!r}')
    if frame == 'rotated':
        return _rotated_hamiltonian(spec)
    return lambda t: hamiltonian_at(spec, t)


def _tree_product(matrices):
    """M_{n-1} ... M_1 M_0 попарным сворачиванием"""
    while len(matrices) > 1:
        tail = matrices[-1:] if len(matrices) % 2 else matrices[:0]
        paired = matrices[:len(matrices) - len(tail)]
        matrices = np.concatenate([paired[1::2] @ paired[0::2], tail])
    return matrices[0]


def _rk4(hamiltonian, s, t, steps):
    h = (t - s) / steps
    starts = s + h * np.arange(steps)
    identity = np.eye(2)
    b1 = -1j * hamiltonian(starts)
    b2 = -1j * hamiltonian(starts + h / 2)
    b3 = -1j * hamiltonian(starts + h)
    k1 = b1
    k2 = b2 @ (identity + h / 2 * k1)
    k3 = b2 @ (identity + h / 2 * k2)
    k4 = b3 @ (identity + h * k3)
    return _tree_product(identity + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4))


def _defect(matrix):
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(2))))


def _integrate(hamiltonian, s, t, tol, max_steps):
    if t < s:
        raise CausalityError('Эталон интегрирует только вперёд по времени')
    if t == s:
        return np.eye(2, dtype=complex)
    steps = INITIAL_STEPS
    coarse = _rk4(hamiltonian, s, t, steps)
    while True:
        steps *= 2
        if steps > max_steps:
            raise StepLimitExceeded(
                f'Эталону не хватило {max_steps} шагов на [{s:g}, {t:g}]', steps=steps)
        fine = _rk4(hamiltonian, s, t, steps)
        change = float(np.max(np.abs(fine - coarse)))
        defect = _defect(fine)
        logger.debug('Эталон: %d шагов, изменение %.3e, дефект %.3e', steps, change, defect)
        if change < tol and defect < tol:
            return fine
        coarse = fine


def integrate_schrodinger(spec: DriveSpec, s, t, tol=None, frame='lab', max_steps=None) -> Unitary2:
    """U(t, s) прямым интегрированием i dU/dt = H U"""
    tol = knob('TOL') if tol is None else tol
    if tol <= 0:
        raise ValueError('Допуск должен быть положительным')
    max_steps = knob('ORACLE_MAX_STEPS') if max_steps is None else max_steps
    return Unitary2.from_matrix(_integrate(_hamiltonian(spec, frame), s, t, tol, max_steps))


def integrate_schrodinger_trace(spec: DriveSpec, times, s=0.0, tol=None, frame='lab',
                                max_steps=None):
    """U(t_i, s) для возрастающих t_i, по кускам между соседними моментами; форма (n, 2, 2)"""
    tol = knob('TOL') if tol is None else tol
    max_steps = knob('ORACLE_MAX_STEPS') if max_steps is None else max_steps
    times = np.asarray(times, dtype=float)
    if np.any(np.diff(times) < 0):
        raise ValueError('Моменты времени должны возрастать')
    hamiltonian = _hamiltonian(spec, frame)
    result = np.empty((len(times), 2, 2), dtype=complex)
    current = np.eye(2, dtype=complex)
    previous = s
    for i, moment in enumerate(times):
        current = _integrate(hamiltonian, previous, moment, tol, max_steps) @ current
        result[i] = current
        previous = moment
    return result


def long_time_average(spec: DriveSpec, periods=50, samples=64, tol=None, frame='lab',
                      max_steps=None):
    """Среднее p(t, 0) по [0, periods*T): один период интегрируется, дальше степени U(T, 0)"""
    if periods < 1 or samples < 2:
        raise ValueError('Нужен хотя бы один период и две точки на период')
    T = spec.period
    times = T * np.arange(1, samples + 1) / samples
    trace = integrate_schrodinger_trace(spec, times, 0.0, tol, frame, max_steps)
    monodromy = trace[-1]
    offsets = trace[:-1]
    shifted = np.concatenate([np.eye(2, dtype=complex)[None], offsets])
    total = 0.0
    power = np.eye(2, dtype=complex)
    for _ in range(periods):
        total += float(np.sum(np.abs((shifted @ power)[:, 0, 1]) ** 2))
        power = monodromy @ power
    return total / (periods * samples)


def _romberg(estimates, tol, what):
    table = [list(estimates)]
    for order in range(1, len(estimates)):
        factor = 4 ** order
        previous = table[-1]
        table.append([(factor * previous[i + 1] - previous[i]) / (factor - 1)
                      for i in range(len(previous) - 1)])
    best = table[-1][0]
    if len(table) > 1:
        change = abs(best - table[-2][-1])
        if change > tol * max(1.0, abs(best)):
            raise ConvergenceError(f'Квадратура {what} не сошлась', last_norm=change)
    return complex(best)


def _star_power_trapezoid(ks, k, t, s, intervals):
    x = np.linspace(s, t, intervals + 1)
    h = (t - s) / intervals
    if k == 1:
        return complex(ks.coupling(t) * trapezoid(np.conj(ks.coupling(x)), x))
    outer = np.asarray(kernel_at(ks, np.full_like(x, t), x))
    last = np.asarray(kernel_at(ks, x, np.full_like(x, s)))
    if k == 2:
        return complex(trapezoid(outer * last, x))
    later, earlier = np.meshgrid(x, x, indexing='ij')
    middle = np.tril(np.asarray(kernel_at(ks, np.maximum(later, earlier), earlier)))
    running = (middle * last[None, :]).sum(axis=1)
    inner = h * (running - 0.5 * middle[:, 0] * last[0] - 0.5 * np.diag(middle) * last)
    return complex(trapezoid(outer * inner, x))


def nested_quadrature_star_power(ks: KernelSpec, k, t, s, n=64, levels=4, tol=ROMBERG_TOL):
    """K^{⋆k}(t, s) вложенными трапециями, k <= 3"""
    if not 1 <= k <= 3:
        raise ValueError('Вложенная квадратура поддерживает только k = 1, 2, 3')
    if n < 32:
        raise ValueError('Нужно не меньше 32 интервалов')
    if t < s:
        raise CausalityError('⋆-степень определена только при t >= s')
    if t == s:
        return 0j
    estimates = [_star_power_trapezoid(ks, k, t, s, n * 2 ** level) for level in range(levels)]
    return _romberg(estimates, tol, f'⋆-степени порядка {k}')


def kernel_average_quadrature(ks: KernelSpec, T=None, n_points=64, levels=4, tol=ROMBERG_TOL):
    """(2/T^2) * двойной интеграл ядра по треугольнику трапециями с экстраполяцией Ромберга"""
    T = ks.period if T is None else T
    estimates = []
    for level in range(levels):
        intervals = n_points * 2 ** level
        x = np.linspace(0.0, T, intervals + 1)
        h = T / intervals
        later, earlier = np.meshgrid(x, x, indexing='ij')
        values = np.tril(np.asarray(kernel_at(ks, np.maximum(later, earlier), earlier)))
        inner = h * (values.sum(axis=1) - 0.5 * values[:, 0] - 0.5 * np.diag(values))
        estimates.append(2 * trapezoid(inner, x) / T ** 2)
    return _romberg(estimates, tol, 'среднего ядра')
