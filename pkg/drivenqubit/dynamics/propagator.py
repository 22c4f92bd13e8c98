"""Эволюционный оператор U(t, s) во вращающейся системе.

Два независимых движка:

* сеточный: ⋆-произведение на треугольной сетке сводится к произведению
  нижнетреугольных матриц с весами трапеций; функция Грина собирается
  рядом Неймана, значения уточняются экстраполяцией Ричардсона;
* аналитический: ряд по индексным кортежам, каждое слагаемое которого
  есть разделённая разность exp(i[узлы](t - s)).

Тождество 1_⋆ в ряде Неймана не дискретизируется: U11 = 1 + int g11.
Поскольку K22 = conj(K11), U22 = conj(U11) и U21 = -conj(U12).
"""
from __future__ import annotations

import cmath
import logging
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy.integrate import trapezoid

from .conf import knob
from .divdiff import NodeList, exp_divided_difference
from .exceptions import (
    BudgetExceeded, CausalityError, ConvergenceError, DiscretizationError,
    GridMismatch, UnitarityError,
)
from .kernel import KernelSpec, kernel_grid

logger = logging.getLogger(__name__)

PRUNE_RATIO = 1e-16
QUASIENERGY_DEFECT = 1e-6
SERIES_TOL_SCALE = 1e-2


@dataclass(frozen=True)
class Unitary2:
    u11: complex
    u12: complex
    u21: complex
    u22: complex

    @classmethod
    def from_matrix(cls, matrix):
        matrix = np.asarray(matrix, dtype=complex)
        return cls(complex(matrix[0, 0]), complex(matrix[0, 1]),
                   complex(matrix[1, 0]), complex(matrix[1, 1]))

    @classmethod
    def identity(cls):
        return cls(1 + 0j, 0j, 0j, 1 + 0j)

    @property
    def matrix(self):
        return np.array([[self.u11, self.u12], [self.u21, self.u22]], dtype=complex)

    def dagger(self):
        return Unitary2.from_matrix(self.matrix.conj().T)

    def __matmul__(self, other):
        return Unitary2.from_matrix(self.matrix @ other.matrix)

    def unitarity_defect(self):
        matrix = self.matrix
        return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(2))))


@dataclass(frozen=True)
class TwoTimeGrid:
    """Значения F(t_i, t_j) при t_j <= t_i на равномерной сетке [s0, t1]"""
    s0: float
    t1: float
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.ndim != 2 or values.shape[0] != values.shape[1] or values.shape[0] < 2:
            raise GridMismatch('Значения сетки должны быть квадратной матрицей размера >= 2')
        if not self.t1 > self.s0:
            raise GridMismatch('Интервал сетки пуст')
        object.__setattr__(self, 'values', np.tril(values))

    @classmethod
    def from_function(cls, s0, t1, n_points, func):
        times = np.linspace(s0, t1, n_points)
        later, earlier = np.meshgrid(times, times, indexing='ij')
        later = np.maximum(later, earlier)
        return cls(s0, t1, func(later, earlier))

    @property
    def n_points(self):
        return self.values.shape[0]

    @property
    def h(self):
        return (self.t1 - self.s0) / (self.n_points - 1)

    @property
    def times(self):
        return np.linspace(self.s0, self.t1, self.n_points)

    def matches(self, other):
        return (self.n_points == other.n_points
                and math.isclose(self.s0, other.s0, rel_tol=0, abs_tol=1e-12)
                and math.isclose(self.t1, other.t1, rel_tol=0, abs_tol=1e-12))


@dataclass(frozen=True)
class IndexTuple:
    """Мультииндексы (m_1..m_k, n_1..n_k) одного слагаемого k-й ⋆-степени"""
    m: tuple
    n: tuple

    def __post_init__(self):
        if len(self.m) != len(self.n) or not self.m:
            raise ValueError('Кортеж должен содержать k >= 1 пар индексов')
        object.__setattr__(self, 'm', tuple(int(value) for value in self.m))
        object.__setattr__(self, 'n', tuple(int(value) for value in self.n))

    @property
    def k(self):
        return len(self.m)

    def within(self, band):
        low, high = band
        return all(low <= value <= high for value in self.m + self.n)


@dataclass
class UnitaryGrid:
    u11: TwoTimeGrid
    u12: TwoTimeGrid
    u21: TwoTimeGrid
    u22: TwoTimeGrid
    orders_used: int
    discretization_error: float
    unitarity_defect: float

    @property
    def times(self):
        return self.u11.times

    def at(self, i, j):
        return Unitary2(self.u11.values[i, j], self.u12.values[i, j],
                        self.u21.values[i, j], self.u22.values[i, j])

    def probability(self):
        return np.abs(self.u12.values) ** 2


@dataclass
class ColumnSolution:
    """U(t_i, s) для фиксированного s: результат сеточного движка в один столбец"""
    times: np.ndarray
    entries: np.ndarray
    orders_used: int
    discretization_error: float
    unitarity_defect: float

    def at(self, i):
        return Unitary2(*(complex(self.entries[entry, i]) for entry in range(4)))

    def probability(self):
        return np.abs(self.entries[1]) ** 2


@dataclass
class SeriesSolution:
    times: np.ndarray
    s: float
    entries: np.ndarray
    orders_used: int
    tuples_evaluated: int
    last_norm: float

    def at(self, i):
        return Unitary2(*(complex(self.entries[entry, i]) for entry in range(4)))

    def probability(self):
        return np.abs(self.entries[1]) ** 2


# ---------------------------------------------------------------- grid engine

def star_product_grid(F: TwoTimeGrid, G: TwoTimeGrid) -> TwoTimeGrid:
    """(F ⋆ G)(t, s) = int_s^t F(t, tau) G(tau, s) d tau по трапециям"""
    if not F.matches(G):
        raise GridMismatch('⋆-произведение требует одинаковых сеток')
    f, g = F.values, G.values
    product = f @ g - 0.5 * f * np.diag(g)[None, :] - 0.5 * np.diag(f)[:, None] * g
    return TwoTimeGrid(F.s0, F.t1, F.h * product)


def neumann_greens(kernel: TwoTimeGrid, tol: float, k_max: int):
    """sum_{k>=1} A^{⋆k} для порождающего ядра A; тождество 1_⋆ учитывается отдельно"""
    if tol <= 0:
        raise ValueError('Допуск должен быть положительным')
    if not np.any(kernel.values):
        return TwoTimeGrid(kernel.s0, kernel.t1, np.zeros_like(kernel.values)), 0
    term = kernel
    total = kernel.values.copy()
    orders = 1
    norm = float(np.max(np.abs(term.values)))
    while norm >= tol:
        if orders >= k_max:
            raise ConvergenceError(
                f'Ряд Неймана не сошёлся за {k_max} порядков', last_norm=norm, orders=orders)
        term = star_product_grid(term, kernel)
        total += term.values
        orders += 1
        norm = float(np.max(np.abs(term.values)))
        logger.debug('Порядок %d ряда Неймана: норма %.3e', orders, norm)
    return TwoTimeGrid(kernel.s0, kernel.t1, total), orders


def _cumulative_trapezoid(values, h):
    """C[i, j] = int_{t_j}^{t_i} X(tau, t_j) d tau по столбцам нижнего треугольника"""
    values = np.tril(values)
    running = np.cumsum(values, axis=0)
    return np.tril(h * (running - 0.5 * np.diag(values)[None, :] - 0.5 * values))


def _grid_entries(ks, times, series_tol, k_max):
    n = len(times)
    h = times[1] - times[0]
    generator = TwoTimeGrid(times[0], times[-1], -kernel_grid(ks, times))
    greens, orders = neumann_greens(generator, series_tol, k_max)
    u11 = np.tril(1 + _cumulative_trapezoid(greens.values, h))
    u22 = np.conj(u11)
    coupling = ks.coupling(times)
    u21 = -1j * _cumulative_trapezoid(np.conj(coupling)[:, None] * u11, h)
    u12 = -1j * _cumulative_trapezoid(coupling[:, None] * u22, h)
    mask = np.tri(n, dtype=bool)
    return np.stack([u11, u12, u21, u22]) * mask, orders


def _column_entries(ks, times, series_tol, k_max):
    """Первый столбец (s = times[0]) без построения полной функции Грина"""
    h = times[1] - times[0]
    generator = -kernel_grid(ks, times)
    term = generator[:, 0].copy()
    greens = term.copy()
    orders = 0 if not np.any(term) else 1
    norm = float(np.max(np.abs(term)))
    while orders and norm >= series_tol:
        if orders >= k_max:
            raise ConvergenceError(
                f'Ряд Неймана не сошёлся за {k_max} порядков', last_norm=norm, orders=orders)
        term = h * (generator @ term - 0.5 * generator[:, 0] * term[0] - 0.5 * np.diag(generator) * term)
        greens += term
        orders += 1
        norm = float(np.max(np.abs(term)))
    u11 = 1 + _cumulative_column(greens, h)
    coupling = ks.coupling(times)
    u21 = -1j * _cumulative_column(np.conj(coupling) * u11, h)
    u22 = np.conj(u11)
    u12 = -1j * _cumulative_column(coupling * u22, h)
    return np.stack([u11, u12, u21, u22]), orders


def _cumulative_column(values, h):
    running = np.cumsum(values)
    return h * (running - 0.5 * values[0] - 0.5 * values)


def _defect(entries):
    """max ||U^+ U - I|| по всем точкам; entries имеет форму (4, ...)"""
    u11, u12, u21, u22 = entries
    diagonal_1 = np.abs(np.abs(u11) ** 2 + np.abs(u21) ** 2 - 1)
    diagonal_2 = np.abs(np.abs(u12) ** 2 + np.abs(u22) ** 2 - 1)
    off = np.abs(np.conj(u11) * u12 + np.conj(u21) * u22)
    return float(max(diagonal_1.max(), diagonal_2.max(), off.max()))


def _richardson(solve, n_points, tol, self_check):
    coarse, orders = solve(n_points)
    if not self_check:
        return coarse, orders, float('nan')
    fine, orders = solve(2 * n_points - 1)
    fine = fine[(slice(None),) + (slice(None, None, 2),) * (fine.ndim - 1)]
    error = float(np.max(np.abs(fine - coarse))) / 3
    logger.debug('Самопроверка сетки: %d точек, оценка ошибки %.3e', n_points, error)
    if error > tol:
        raise DiscretizationError(
            f'Сетка из {n_points} точек недостаточна: оценка ошибки {error:.2e}',
            estimate=error, tol=tol)
    return fine + (fine - coarse) / 3, orders, error


def unitary_grid(spec, s0, t1, n_points, tol=None, *, series_tol=None, k_max=None,
                 threshold=None, self_check=True, ks=None) -> UnitaryGrid:
    """Все четыре элемента U(t_i, t_j) на треугольной сетке"""
    tol = knob('GRID_TOL') if tol is None else tol
    series_tol = knob('TOL') * SERIES_TOL_SCALE if series_tol is None else series_tol
    k_max = knob('K_MAX') if k_max is None else k_max
    if n_points < 2 or not t1 > s0:
        raise GridMismatch('Нужно не меньше двух точек на непустом интервале')
    ks = KernelSpec.from_drive(spec, threshold) if ks is None else ks

    def solve(count):
        return _grid_entries(ks, np.linspace(s0, t1, count), series_tol, k_max)

    entries, orders, error = _richardson(solve, n_points, tol, self_check)
    defect = _defect(entries[:, np.tri(n_points, dtype=bool)])
    if defect > 10 * tol:
        raise UnitarityError(f'Дефект унитарности {defect:.2e} превышает 10*tol', defect=defect)
    logger.info('Сеточный движок: %d точек, порядков %d, дефект %.2e', n_points, orders, defect)
    grids = [TwoTimeGrid(s0, t1, values) for values in entries]
    return UnitaryGrid(*grids, orders_used=orders, discretization_error=error, unitarity_defect=defect)


def unitary_grid_column(ks: KernelSpec, s, t1, n_points, tol=None, *, series_tol=None,
                        k_max=None, self_check=True) -> ColumnSolution:
    """U(t, s) для t на равномерной сетке [s, t1]"""
    tol = knob('GRID_TOL') if tol is None else tol
    series_tol = knob('TOL') * SERIES_TOL_SCALE if series_tol is None else series_tol
    k_max = knob('K_MAX') if k_max is None else k_max
    if n_points < 2 or not t1 > s:
        raise GridMismatch('Нужно не меньше двух точек на непустом интервале')

    def solve(count):
        return _column_entries(ks, np.linspace(s, t1, count), series_tol, k_max)

    entries, orders, error = _richardson(solve, n_points, tol, self_check)
    defect = _defect(entries)
    if defect > 10 * tol:
        raise UnitarityError(f'Дефект унитарности {defect:.2e} превышает 10*tol', defect=defect)
    return ColumnSolution(np.linspace(s, t1, n_points), entries, orders, error, defect)


# ------------------------------------------------------------ analytic series

def _node_terms(m, n):
    """Узлы как пары (c, j): c*eps0 + j*omega"""
    if not m:
        return []
    nodes = [(1, n[0]), (0, 0)]
    for m_j, n_j in zip(m[1:], n[1:]):
        shift = n_j - m_j
        nodes = [(c, j + shift) for c, j in nodes]
        nodes += [(1, n_j), (0, 0)]
    return nodes


def _values(terms, eps0, omega):
    return tuple(c * eps0 + j * omega for c, j in terms)


def node_list(index_tuple: IndexTuple, eps0: float, omega: float) -> NodeList:
    """Узлы разделённой разности слагаемого k-й ⋆-степени ядра"""
    return NodeList(_values(_node_terms(index_tuple.m, index_tuple.n), eps0, omega))


class _Budget:
    def __init__(self, limit):
        self.limit = limit
        self.spent = 0

    def reserve(self, count):
        if self.spent + count > self.limit:
            raise BudgetExceeded(
                f'Перебор требует {self.spent + count} кортежей при бюджете {self.limit}',
                required=self.spent + count, budget=self.limit)
        self.spent += count


def _index_tuples(ks, k, extra, budget):
    """Кортежи (m, n, коэффициент) порядка k; extra добавляет m_{k+1} для U12"""
    slots = 2 * k + (1 if extra else 0)
    indices = [int(l) for l in ks.indices]
    amplitudes = [complex(value) for value in ks.amplitudes]
    if not indices or slots == 0:
        return
    budget.reserve(len(indices) ** slots)
    peak = max(abs(value) for value in amplitudes)
    floor = PRUNE_RATIO * peak ** slots

    def walk(depth, coefficient, m, n):
        if depth == slots:
            yield tuple(m), tuple(n), coefficient
            return
        remaining = slots - depth - 1
        conjugate = depth < 2 * k and depth % 2 == 0
        for index, amplitude in zip(indices, amplitudes):
            value = coefficient * (amplitude.conjugate() if conjugate else amplitude)
            if abs(value) * peak ** remaining < floor:
                continue
            if conjugate:
                yield from walk(depth + 1, value, m, n + [index])
            else:
                yield from walk(depth + 1, value, m + [index], n)

    yield from walk(0, 1 + 0j, [], [])


def _series_order(ks, k, s, taus, off_diagonal, budget):
    """Вклад порядка k в U11 (off_diagonal=False) или в U12"""
    grouped = defaultdict(complex)
    for m, n, coefficient in _index_tuples(ks, k, off_diagonal, budget):
        nodes = _node_terms(m[:k], n)
        shift = sum(m) - sum(n)
        if off_diagonal:
            last = m[k]
            full = [(0, 0)] + [(c, j - last + shift) for c, j in nodes] + [(1, shift)]
            phase = ks.eps0 + shift * ks.omega
        else:
            full = [(0, 0)] + [(c, j + shift) for c, j in nodes]
            phase = shift * ks.omega
        grouped[tuple(sorted(full))] += coefficient * cmath.exp(1j * phase * s)
    total = np.zeros(taus.shape, dtype=complex)
    for key in sorted(grouped):
        total += grouped[key] * exp_divided_difference(_values(key, ks.eps0, ks.omega), taus)
    return -total if off_diagonal else total


def unitary_analytic_trace(ks: KernelSpec, times, s, tol=None, k_max=None,
                           budget=None) -> SeriesSolution:
    """Аналитический ряд для U(t, s) сразу на массиве моментов t"""
    tol = knob('TOL') if tol is None else tol
    k_max = knob('K_MAX') if k_max is None else k_max
    budget = _Budget(knob('TUPLE_BUDGET') if budget is None else budget)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    taus = times - s
    if np.any(taus < 0):
        raise CausalityError('Ряд определён только при t >= s')
    u11 = np.ones(taus.shape, dtype=complex)
    u12 = _series_order(ks, 0, s, taus, True, budget)
    norm = float(np.max(np.abs(u12), initial=0.0))
    for k in range(1, k_max + 1):
        term11 = _series_order(ks, k, s, taus, False, budget)
        term12 = _series_order(ks, k, s, taus, True, budget)
        u11 += term11
        u12 += term12
        norm = float(max(np.max(np.abs(term11)), np.max(np.abs(term12))))
        logger.debug('Порядок %d аналитического ряда: норма %.3e', k, norm)
        if norm < tol:
            entries = np.stack([u11, u12, -np.conj(u12), np.conj(u11)])
            return SeriesSolution(times, s, entries, k, budget.spent, norm)
    raise ConvergenceError(
        f'Аналитический ряд не сошёлся за {k_max} порядков', last_norm=norm, orders=k_max)


def unitary_analytic(ks: KernelSpec, t, s, tol=None, k_max=None, budget=None) -> Unitary2:
    return unitary_analytic_trace(ks, [t], s, tol, k_max, budget).at(0)


def star_power_analytic(ks: KernelSpec, k: int, t, s, budget=None):
    """K^{⋆k}(t, s) как сумма разделённых разностей по индексным кортежам"""
    if k < 1:
        raise ValueError('Степень должна быть >= 1')
    if t < s:
        raise CausalityError('⋆-степень определена только при t >= s')
    budget = _Budget(knob('TUPLE_BUDGET') if budget is None else budget)
    grouped = defaultdict(complex)
    for m, n, coefficient in _index_tuples(ks, k, False, budget):
        shift = sum(m) - sum(n)
        grouped[(tuple(sorted(_node_terms(m, n))), shift)] += coefficient
    total = 0j
    for key, shift in sorted(grouped):
        nodes = _values(key, ks.eps0, ks.omega)
        total += (grouped[(key, shift)] * cmath.exp(1j * shift * ks.omega * t)
                  * exp_divided_difference(nodes, t - s))
    return complex((-1j) ** (2 * k - 1) * total)


# ---------------------------------------------------------------- observables

def transition_probability(U: Unitary2, clamp=False):
    probability = abs(U.u12) ** 2
    if not clamp:
        return probability
    if probability > 1.0:
        logger.warning('Вероятность %.12g вне [0, 1] до обрезки', probability)
    return min(probability, 1.0)


def quasienergies(U_period: Unitary2, T: float):
    """Квазиэнергии по собственным числам оператора монодромии, ветвь [-omega/2, omega/2)"""
    defect = U_period.unitarity_defect()
    if defect >= QUASIENERGY_DEFECT:
        raise UnitarityError(f'Оператор монодромии неунитарен: дефект {defect:.2e}', defect=defect)
    half_trace = (U_period.u11 + U_period.u22) / 2
    root = 1j * cmath.sqrt(1 - half_trace ** 2)
    omega = 2 * math.pi / T
    energies = []
    for eigenvalue in (half_trace + root, half_trace - root):
        if abs(abs(eigenvalue) - 1) > QUASIENERGY_DEFECT:
            raise UnitarityError('Собственное число монодромии не лежит на единичной окружности',
                                 defect=abs(abs(eigenvalue) - 1))
        energy = -cmath.phase(eigenvalue) / T
        energies.append((energy + omega / 2) % omega - omega / 2)
    return energies[0], energies[1]


def stroboscopic_probability(U_period: Unitary2, periods: int):
    """p(nT, 0) через степени оператора монодромии"""
    power = np.linalg.matrix_power(U_period.matrix, periods)
    return abs(power[0, 1]) ** 2


def _heff_estimate(ks, T, n_quad, k_max):
    times = np.linspace(0.0, T, n_quad)
    entries, _ = _column_entries(ks, times, knob('TOL') * SERIES_TOL_SCALE, k_max)
    unitaries = np.moveaxis(entries.reshape(2, 2, n_quad), -1, 0)
    coupling = ks.coupling(times)
    hamiltonian = np.zeros((n_quad, 2, 2), dtype=complex)
    hamiltonian[:, 0, 1] = coupling
    hamiltonian[:, 1, 0] = np.conj(coupling)
    integrand = np.conj(np.swapaxes(unitaries, -1, -2)) @ hamiltonian @ unitaries
    return trapezoid(integrand, times, axis=0) / T


def effective_hamiltonian(spec, T=None, n_quad=257, tol=None, *, ks=None, k_max=None):
    """(1/T) int_0^T U^+ H_rot U dt с экстраполяцией по удвоению сетки"""
    if n_quad < 64:
        raise ValueError('Для квадратуры нужно не меньше 64 точек')
    tol = knob('GRID_TOL') if tol is None else tol
    k_max = knob('K_MAX') if k_max is None else k_max
    ks = KernelSpec.from_drive(spec) if ks is None else ks
    T = ks.period if T is None else T
    coarse = _heff_estimate(ks, T, n_quad, k_max)
    fine = _heff_estimate(ks, T, 2 * n_quad - 1, k_max)
    error = float(np.max(np.abs(fine - coarse))) / 3
    if error > tol:
        raise ConvergenceError(
            f'Квадратура H_eff не сошлась: оценка ошибки {error:.2e}', last_norm=error)
    result = fine + (fine - coarse) / 3
    return (result + result.conj().T) / 2
