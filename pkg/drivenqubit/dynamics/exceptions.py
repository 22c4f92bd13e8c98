"""Ошибки расчёта динамики.

Каждая ошибка умеет отрисовать себя одной машиночитаемой строкой
``error kind=<slug> key=value ...``: её печатает команда ``floquet``
и её же сохраняет запись ``Run``.
"""


class DynamicsError(Exception):
    kind = 'dynamics-error'

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def as_line(self):
        parts = [f'error kind={self.kind}']
        for key, value in self.details.items():
            parts.append(f'{key}={_compact(value)}')
        parts.append('message=' + ' '.join(str(self.message).split()))
        return ' '.join(parts)


class SpecError(DynamicsError):
    """Некорректное описание драйва"""
    kind = 'spec-error'

    def __init__(self, message, key='', path=''):
        super().__init__(message, path=path or '-', key=key or '-')
        self.key = key
        self.path = path


class ConvergenceError(DynamicsError):
    """Ряд или квадратура не сошлись"""
    kind = 'convergence'

    def __init__(self, message, last_norm=None, orders=None):
        super().__init__(message, last_norm=last_norm, orders=orders)
        self.last_norm = last_norm
        self.orders = orders


class DiscretizationError(DynamicsError):
    """Сетка слишком грубая: удвоение меняет результат сильнее допуска"""
    kind = 'discretization'

    def __init__(self, message, estimate=None, tol=None):
        super().__init__(message, estimate=estimate, tol=tol)
        self.estimate = estimate


class UnitarityError(DynamicsError):
    kind = 'unitarity'

    def __init__(self, message, defect=None):
        super().__init__(message, defect=defect)
        self.defect = defect


class BudgetExceeded(DynamicsError):
    """Перебор индексных кортежей превысил бюджет"""
    kind = 'budget'

    def __init__(self, message, required=None, budget=None):
        super().__init__(message, required=required, budget=budget)
        self.required = required
        self.budget = budget


class GridMismatch(DynamicsError):
    kind = 'grid-mismatch'


class CausalityError(DynamicsError):
    kind = 'causality'


class ResonanceError(DynamicsError):
    kind = 'resonance'


class BandError(DynamicsError):
    kind = 'band'


class NodeError(DynamicsError):
    kind = 'nodes'


class ArtifactError(DynamicsError):
    """Артефакт запуска не удалось записать"""
    kind = 'io'

    def __init__(self, message, path=None):
        super().__init__(message, path=path)
        self.path = path


class StepLimitExceeded(DynamicsError):
    kind = 'step-limit'

    def __init__(self, message, steps=None):
        super().__init__(message, steps=steps)
        self.steps = steps


def _compact(value):
    if isinstance(value, float):
        return f'{value:.3e}'
    if value is None:
        return '-'
    return str(value).replace(' ', '_')
