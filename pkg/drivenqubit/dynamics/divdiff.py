"""Разделённые разности функции x -> exp(i x tau) по вещественным узлам.

Основной путь: формула Опица, элемент (0, n) матричной экспоненты exp(i tau Z),
где Z двухдиагональная матрица с узлами на диагонали и единицами над ней.
Повторяющиеся узлы (конфлюэнтный случай) обрабатываются без особых веток.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import groupby

import numpy as np
from scipy.linalg import expm

from .exceptions import NodeError


@dataclass(frozen=True)
class NodeList:
    nodes: tuple

    def __post_init__(self):
        values = tuple(self.nodes)
        if not values:
            raise NodeError('Список узлов пуст')
        for value in values:
            if isinstance(value, complex) or np.iscomplexobj(value):
                raise NodeError('Узлы разделённой разности должны быть вещественными')
            if not math.isfinite(float(value)):
                raise NodeError('Узлы разделённой разности должны быть конечными')
        object.__setattr__(self, 'nodes', tuple(float(value) for value in values))

    def __len__(self):
        return len(self.nodes)

    @property
    def order(self):
        return len(self.nodes) - 1

    def canonical(self):
        return tuple(sorted(self.nodes))

    def distinct(self):
        """[(значение, кратность)] по возрастанию"""
        return [(value, len(list(group))) for value, group in groupby(self.canonical())]


def _as_node_list(nodes):
    return nodes if isinstance(nodes, NodeList) else NodeList(tuple(nodes))


def _opitz(key, taus):
    nodes = np.array(key)
    centre = 0.5 * (nodes.max() + nodes.min())
    size = len(nodes)
    bidiagonal = np.diag(nodes - centre) + np.eye(size, k=1)
    stacked = 1j * taus[:, None, None] * bidiagonal[None, :, :]
    corner = expm(stacked)[:, 0, size - 1]
    return corner * np.exp(1j * centre * taus)


@lru_cache(maxsize=65536)
def _cached(key, tau):
    return complex(_opitz(key, np.array([tau]))[0])


def exp_divided_difference(nodes, tau):
    """exp(i[x_0, ..., x_n] tau); tau может быть массивом, тогда результат той же формы"""
    key = _as_node_list(nodes).canonical()
    taus = np.asarray(tau, dtype=float)
    if not np.all(np.isfinite(taus)):
        raise NodeError('tau должно быть конечным')
    if taus.ndim == 0:
        return _cached(key, float(taus))
    return _opitz(key, taus.ravel()).reshape(taus.shape)


def explicit_divided_difference(nodes, tau):
    """Явная сумма по различным узлам; годится только для хорошо разделённых узлов"""
    values = _as_node_list(nodes).nodes
    if len(set(values)) != len(values):
        raise NodeError('Явная формула требует попарно различных узлов')
    total = 0j
    for k, x_k in enumerate(values):
        denominator = 1.0
        for j, x_j in enumerate(values):
            if j != k:
                denominator *= x_k - x_j
        total += np.exp(1j * x_k * tau) / denominator
    return complex(total)


def divided_difference_recurrence_check(nodes, tau):
    """Невязка стандартной рекуррентной формулы разделённых разностей"""
    values = _as_node_list(nodes).nodes
    if len(values) < 2:
        raise NodeError('Нужно хотя бы два узла')
    if len(set(values)) != len(values):
        raise NodeError('Проверка рекуррентности требует попарно различных узлов')
    whole = exp_divided_difference(values, tau)
    head = exp_divided_difference(values[:-1], tau)
    tail = exp_divided_difference(values[1:], tau)
    return abs(whole - (tail - head) / (values[-1] - values[0]))
