"""Прогон движков против эталона на наборе параметров.

Для каждого случая эталон (лабораторная система) считает p(t, 0) в точках
сетки, движки сравниваются с ним по max |dp|. Аналитический ряд помечается
``skipped``, если перебор кортежей не помещается в бюджет.
"""
import logging
from pathlib import Path

import numpy as np
import yaml

from .conf import knob
from .exceptions import BudgetExceeded, DynamicsError
from .kernel import KernelSpec
from .oracle import integrate_schrodinger_trace
from .propagator import unitary_analytic_trace, unitary_grid_column

logger = logging.getLogger(__name__)

SUITE_PATH = Path(__file__).resolve().parent / 'fixtures' / 'validation_suite.yaml'
ENGINE_TOLERANCES = {'series': 1e-6, 'grid': 1e-4}
REPORT_HEADER = ['case', 'engine', 'max_dp', 'unitarity_defect', 'orders', 'status', 'detail']


def load_suite(path=None):
    with open(path or SUITE_PATH, encoding='utf-8') as stream:
        document = yaml.safe_load(stream) or {}
    return list(document.get('cases', []))


def _row(case_id, engine, max_dp=None, defect=None, orders=None, status='ok', detail=''):
    return {
        'case': case_id,
        'engine': engine,
        'max_dp': max_dp,
        'unitarity_defect': defect,
        'orders': orders,
        'status': status,
        'detail': detail,
    }


def _defect(matrices):
    products = np.conj(np.swapaxes(matrices, -1, -2)) @ matrices
    return float(np.max(np.abs(products - np.eye(2))))


def run_case(case, knob_values=None):
    """Строки отчёта одного случая: эталон и каждый запрошенный движок"""
    from .serializers import load_drive_spec

    knob_values = knob_values or {}
    value = lambda name: knob_values.get(name, knob(name))
    case_id = case['id']
    spec = load_drive_spec('@' + case['set'])
    periods = case.get('periods', 1)
    n_points = int(round((case.get('grid', value('GRID_POINTS')) - 1) * periods)) + 1
    t_max = periods * spec.period
    indices = np.unique(np.round(np.linspace(0, n_points - 1, case.get('samples', 33))).astype(int))
    times = np.linspace(0.0, t_max, n_points)[indices]

    oracle = integrate_schrodinger_trace(spec, times, 0.0, value('TOL'), 'lab', value('ORACLE_MAX_STEPS'))
    reference = np.abs(oracle[:, 0, 1]) ** 2
    rows = [_row(case_id, 'oracle', 0.0, _defect(oracle))]
    ks = KernelSpec.from_drive(spec, value('GBF_THRESHOLD'))

    for engine in case.get('engines', ['series', 'grid']):
        try:
            if engine == 'series':
                solution = unitary_analytic_trace(ks, times, 0.0, value('TOL'), value('K_MAX'),
                                                  value('TUPLE_BUDGET'))
                probability = solution.probability()
                defect = _defect(np.moveaxis(solution.entries.reshape(2, 2, -1), -1, 0))
            elif engine == 'grid':
                solution = unitary_grid_column(ks, 0.0, t_max, n_points, value('GRID_TOL'),
                                               k_max=value('K_MAX'))
                probability = solution.probability()[indices]
                defect = solution.unitarity_defect
            else:
                raise ValueError(f'Неизвестный движок {engine!r}')
        except BudgetExceeded as error:
            logger.warning('Случай %s: движок %s пропущен, нужно %s кортежей',
                           case_id, engine, error.required)
            rows.append(_row(case_id, engine, status='skipped', detail=error.as_line()))
            continue
        except DynamicsError as error:
            logger.warning('Случай %s: движок %s завершился ошибкой', case_id, engine)
            rows.append(_row(case_id, engine, status='failed', detail=error.as_line()))
            continue
        max_dp = float(np.max(np.abs(probability - reference)))
        status = 'ok' if max_dp < ENGINE_TOLERANCES[engine] else 'failed'
        rows.append(_row(case_id, engine, max_dp, defect, solution.orders_used, status))
        logger.info('Случай %s, движок %s: max |dp| = %.3e', case_id, engine, max_dp)
    return rows


def run_suite(cases, knob_values=None):
    rows = []
    for case in cases:
        rows.extend(run_case(case, knob_values))
    return rows
