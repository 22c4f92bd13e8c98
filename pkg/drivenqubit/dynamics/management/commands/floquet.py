import argparse
import logging
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
from celery import group
from django.core.management.base import BaseCommand, CommandError

from dynamics.artifacts import write_csv, write_manifest
from dynamics.conf import knobs, parse_resolution
from dynamics.exceptions import DynamicsError, SpecError
from dynamics.gbf import build_gbf_table, gbf_band
from dynamics.kernel import KernelSpec, kernel_at, kernel_at_dd, kernel_average, kernel_grid
from dynamics.models import Run
from dynamics.oracle import integrate_schrodinger, integrate_schrodinger_trace
from dynamics.propagator import (
    SERIES_TOL_SCALE, Unitary2, effective_hamiltonian, quasienergies, unitary_analytic,
    unitary_analytic_trace, unitary_grid, unitary_grid_column,
)
from dynamics.rwa import local_maxima, rwa_average, rwa_probability, sweep_map
from dynamics.serializers import load_drive_spec, load_sweep
from dynamics.tasks import map_row, validate_case
from dynamics.validation import REPORT_HEADER, load_suite, run_suite
from dynamics.waveform import to_lab_frame

logger = logging.getLogger(__name__)

SPEC_COMMANDS = ('kernel', 'evolve', 'prob-map', 'quasi', 'heff', 'gbf')
MAP_COMMANDS = ('rabi-map', 'avg-map')


class Command(BaseCommand):
    help = 'Расчёты динамики двухуровневой системы под периодическим драйвом'

    def add_arguments(self, parser):
        common = argparse.ArgumentParser(add_help=False)
        common.add_argument('--spec', help='JSON/YAML с описанием драйва или @имя набора из фикстур')
        common.add_argument('--out', help='Путь к CSV; манифест пишется рядом')
        common.add_argument('--grid', type=int, help='Точек сетки на период')
        common.add_argument('--grid-tol', type=float, help='Допуск самопроверки сетки')
        common.add_argument('--tol', type=float, help='Допуск рядов и эталона')
        common.add_argument('--kmax', type=int, help='Максимальный порядок ряда')
        common.add_argument('--t-max', type=float, default=1.0, help='Горизонт в периодах')
        common.add_argument('--res', help='Разрешение карт, <int>x<int>')
        common.add_argument('--threads', type=int, help='Число потоков при заполнении карт')
        common.add_argument('--frame', choices=['rotated', 'lab'], default='rotated')
        common.add_argument('--threshold', type=float, help='Порог усечения J_l')
        common.add_argument('--budget', type=int, help='Бюджет индексных кортежей')
        common.add_argument('--distributed', action='store_true',
                            help='Раздать строки карт или случаи сверки задачам Celery')

        subparsers = parser.add_subparsers(dest='subcommand', required=True)

        kernel = subparsers.add_parser('kernel', parents=[common])
        kernel.add_argument('--form', choices=['sinc', 'dd', 'antiderivative'], default='sinc')

        evolve = subparsers.add_parser('evolve', parents=[common])
        evolve.add_argument('--engine', choices=['grid', 'series', 'oracle', 'rwa'], default='grid')
        evolve.add_argument('--detuning-sign', type=int, choices=[1, -1], default=1)

        subparsers.add_parser('prob-map', parents=[common])

        for name in MAP_COMMANDS:
            sweep = subparsers.add_parser(name, parents=[common])
            sweep.add_argument('--sweep', required=True, help='YAML развёртки или @имя из фикстур')
        rabi = subparsers.choices['rabi-map']
        rabi.add_argument('--harmonic', type=int, default=1)
        average = subparsers.choices['avg-map']
        average.add_argument('--detuning-sign', type=int, choices=[1, -1], default=1)
        average.add_argument('--oracle', action='store_true', help='Среднее по эталону вместо RWA')
        average.add_argument('--periods', type=int, default=50)
        average.add_argument('--samples', type=int, default=64)

        quasi = subparsers.add_parser('quasi', parents=[common])
        quasi.add_argument('--engine', choices=['grid', 'series', 'oracle'], default='grid')

        heff = subparsers.add_parser('heff', parents=[common])
        heff.add_argument('--quad', type=int, default=257)

        validate = subparsers.add_parser('validate', parents=[common])
        validate.add_argument('--suite', help='YAML со случаями сверки')
        validate.add_argument('--case', action='append', help='Ограничить прогон случаем')

        subparsers.add_parser('gbf', parents=[common])

    def handle(self, *args, **options):
        command = options['subcommand']
        values = knobs(
            grid_points=options['grid'], tol=options['tol'], grid_tol=options['grid_tol'],
            k_max=options['kmax'], map_resolution=options['res'], tuple_budget=options['budget'],
            gbf_threshold=options['threshold'], threads=options['threads'],
        )
        out = Path(options['out'] or Path(values['ARTIFACT_DIR']) / f'{command}.csv')
        run = Run.objects.create(command=command, knobs=values)
        started = time.perf_counter()
        logger.info('Запуск %s #%d', command, run.pk)
        try:
            source = self._load_source(command, options, run)
            handler = getattr(self, '_' + command.replace('-', '_'))
            header, rows, comment, diagnostics = handler(source, values, options)
            write_csv(out, header, rows, comment)
            wall_time = time.perf_counter() - started
            manifest = write_manifest(out, command, run.spec, values, diagnostics, wall_time)
        except DynamicsError as error:
            run.fail(error.as_line(), time.perf_counter() - started)
            logger.error('Запуск %s #%d завершился ошибкой', command, run.pk)
            raise CommandError(error.as_line())

        run.finish(out, manifest, _plain(diagnostics), wall_time)
        logger.info('Запуск %s #%d: %d строк за %.2f с', command, run.pk, len(rows), wall_time)
        self.stdout.write(str(out))

        failed = diagnostics.get('failed', 0) if command == 'validate' else 0
        if failed:
            raise CommandError(f'error kind=validation failed={failed} report={out}')

    def _load_source(self, command, options, run):
        if command in SPEC_COMMANDS:
            if not options['spec']:
                raise SpecError('Не указан --spec', key='spec')
            spec = load_drive_spec(options['spec'])
            run.spec = spec.to_dict()
            run.save(update_fields=['spec'])
            return spec
        if command in MAP_COMMANDS:
            sweep = load_sweep(options['sweep'])
            if options['res']:
                try:
                    count1, count2 = parse_resolution(options['res'])
                except ValueError as error:
                    raise SpecError(str(error), key='res')
                sweep = replace(sweep, range1=sweep.range1[:2] + (count1,),
                                range2=sweep.range2[:2] + (count2,))
            run.spec = sweep.to_dict()
            run.save(update_fields=['spec'])
            return sweep
        return None

    def _kernel(self, spec, values, options):
        ks = KernelSpec.from_drive(spec, values['GBF_THRESHOLD'])
        count = _points(values, options)
        times = np.linspace(0.0, options['t_max'] * spec.period, count)
        if options['form'] == 'antiderivative':
            grid = kernel_grid(ks, times)
        else:
            later, earlier = np.meshgrid(times, times, indexing='ij')
            evaluate = kernel_at if options['form'] == 'sinc' else kernel_at_dd
            grid = np.tril(evaluate(ks, np.maximum(later, earlier), earlier))
        # по s, затем по t >= s
        rows = [(times[i], times[j], grid[i, j].real, grid[i, j].imag)
                for j in range(count) for i in range(j, count)]
        diagnostics = {
            'band': list(ks.band),
            'nonzero': len(ks.indices),
            'kernel_average': kernel_average(ks),
            'resonance_index': ks.resonance_index(),
        }
        return ['t', 's', 're', 'im'], rows, None, diagnostics

    def _evolve(self, spec, values, options):
        t_end = options['t_max'] * spec.period
        n_points = _points(values, options)
        times = np.linspace(0.0, t_end, n_points)
        engine = options['engine']
        diagnostics = {'engine': engine}
        if engine == 'rwa':
            table = build_gbf_table(spec, values['GBF_THRESHOLD'])
            probability = rwa_probability(table, spec.eps0, spec.omega, times, options['detuning_sign'])
            diagnostics.update(band=[table.l_min, table.l_max], channels=len(table.nonzero()),
                               average=rwa_average(table, spec.eps0, spec.omega, options['detuning_sign']))
        elif engine == 'oracle':
            trace = integrate_schrodinger_trace(spec, times, 0.0, values['TOL'], options['frame'],
                                                values['ORACLE_MAX_STEPS'])
            probability = np.abs(trace[:, 0, 1]) ** 2
        else:
            ks = KernelSpec.from_drive(spec, values['GBF_THRESHOLD'])
            diagnostics['band'] = list(ks.band)
            if engine == 'grid':
                solution = unitary_grid_column(
                    ks, 0.0, t_end, n_points, values['GRID_TOL'],
                    series_tol=values['TOL'] * SERIES_TOL_SCALE, k_max=values['K_MAX'])
                diagnostics.update(discretization_error=solution.discretization_error,
                                   unitarity_defect=solution.unitarity_defect)
            else:
                solution = unitary_analytic_trace(ks, times, 0.0, values['TOL'], values['K_MAX'],
                                                  values['TUPLE_BUDGET'])
                diagnostics.update(tuples=solution.tuples_evaluated, last_norm=solution.last_norm)
            diagnostics['orders'] = solution.orders_used
            probability = solution.probability()
        return ['t', 'p'], list(zip(times, probability)), None, diagnostics

    def _prob_map(self, spec, values, options):
        t_end = options['t_max'] * spec.period
        n_points = _points(values, options)
        result = unitary_grid(spec, 0.0, t_end, n_points, values['GRID_TOL'],
                              series_tol=values['TOL'] * SERIES_TOL_SCALE, k_max=values['K_MAX'],
                              threshold=values['GBF_THRESHOLD'])
        times = result.times
        probability = result.probability()
        rows = [(times[i], times[j], probability[i, j])
                for j in range(n_points) for i in range(j, n_points)]
        diagnostics = {
            'orders': result.orders_used,
            'discretization_error': result.discretization_error,
            'unitarity_defect': result.unitarity_defect,
        }
        return ['t', 's', 'p'], rows, None, diagnostics

    def _fill_map(self, sweep, kind, values, options, **cell_options):
        if options['distributed']:
            job = group(map_row.s(sweep.to_dict(), kind, row, cell_options)
                        for row in range(sweep.shape[0]))
            result = job.apply_async()
            return np.array([item.get() for item in result.results], dtype=float)
        return sweep_map(sweep, kind, values['THREADS'], **cell_options)

    def _map_artifact(self, sweep, grid, comment):
        rows = [(sweep.values1[column], sweep.values2[row], grid[row, column])
                for row in range(sweep.shape[0]) for column in range(sweep.shape[1])]
        diagnostics = {
            'min': float(grid.min()),
            'max': float(grid.max()),
            'local_maxima': len(local_maxima(grid)),
        }
        return [sweep.axis1, sweep.axis2, 'value'], rows, comment, diagnostics

    def _rabi_map(self, sweep, values, options):
        grid = self._fill_map(sweep, 'rabi', values, options, l=options['harmonic'])
        comment = {'sweep': sweep.to_dict(), 'kind': 'rabi', 'l': options['harmonic']}
        return self._map_artifact(sweep, grid, comment)

    def _avg_map(self, sweep, values, options):
        if options['oracle']:
            cell_options = {'periods': options['periods'], 'samples': options['samples'],
                            'tol': values['TOL']}
            kind = 'oracle-avg'
        else:
            cell_options = {'detuning_sign': options['detuning_sign'],
                            'threshold': values['GBF_THRESHOLD']}
            kind = 'avg'
        grid = self._fill_map(sweep, kind, values, options, **cell_options)
        comment = {'sweep': sweep.to_dict(), 'kind': kind, **cell_options}
        return self._map_artifact(sweep, grid, comment)

    def _quasi(self, spec, values, options):
        T = spec.period
        engine = options['engine']
        if engine == 'oracle':
            monodromy = integrate_schrodinger(spec, 0.0, T, values['TOL'], options['frame'],
                                              values['ORACLE_MAX_STEPS'])
        else:
            ks = KernelSpec.from_drive(spec, values['GBF_THRESHOLD'])
            if engine == 'grid':
                monodromy = unitary_grid_column(
                    ks, 0.0, T, values['GRID_POINTS'], values['GRID_TOL'],
                    series_tol=values['TOL'] * SERIES_TOL_SCALE, k_max=values['K_MAX']).at(-1)
            else:
                monodromy = unitary_analytic(ks, T, 0.0, values['TOL'], values['K_MAX'],
                                             values['TUPLE_BUDGET'])
            if options['frame'] == 'lab':
                monodromy = Unitary2.from_matrix(to_lab_frame(monodromy.matrix, spec, T, 0.0))
        eps_plus, eps_minus = quasienergies(monodromy, T)
        defect = monodromy.unitarity_defect()
        diagnostics = {'engine': engine, 'frame': options['frame'], 'unitarity_defect': defect}
        return ['eps_plus', 'eps_minus', 'unitarity_defect'], [(eps_plus, eps_minus, defect)], None, diagnostics

    def _heff(self, spec, values, options):
        ks = KernelSpec.from_drive(spec, values['GBF_THRESHOLD'])
        matrix = effective_hamiltonian(spec, None, options['quad'], values['GRID_TOL'],
                                       ks=ks, k_max=values['K_MAX'])
        rows = [(f'h{i + 1}{j + 1}', matrix[i, j].real, matrix[i, j].imag)
                for i in range(2) for j in range(2)]
        return ['entry', 're', 'im'], rows, None, {'quad': options['quad']}

    def _validate(self, _source, values, options):
        cases = load_suite(options['suite'])
        if options['case']:
            cases = [case for case in cases if case['id'] in options['case']]
        if options['distributed']:
            result = group(validate_case.s(case, values) for case in cases).apply_async()
            report = [row for item in result.results for row in item.get()]
        else:
            report = run_suite(cases, values)
        rows = [tuple('' if row[key] is None else row[key] for key in REPORT_HEADER) for row in report]
        statuses = [row['status'] for row in report]
        diagnostics = {status: statuses.count(status) for status in ('ok', 'skipped', 'failed')}
        return REPORT_HEADER, rows, None, diagnostics

    def _gbf(self, spec, values, options):
        table = build_gbf_table(spec, values['GBF_THRESHOLD'])
        diagnostics = {
            'band': [table.l_min, table.l_max],
            'gbf_band': gbf_band(spec, values['GBF_THRESHOLD']) if spec.is_longitudinally_driven else 0,
            'norm_squared': table.norm_squared(),
        }
        return ['l', 're', 'im', 'modulus'], table.rows(), None, diagnostics


def _points(values, options):
    """Точек сетки на горизонте --t-max при GRID_POINTS точках на период"""
    return int(round((values['GRID_POINTS'] - 1) * options['t_max'])) + 1


def _plain(diagnostics):
    """Диагностика в виде, пригодном для JSONField"""
    plain = {}
    for key, value in diagnostics.items():
        if isinstance(value, np.generic):
            value = value.item()
        if isinstance(value, complex):
            value = {'re': value.real, 'im': value.imag}
        elif isinstance(value, float) and not np.isfinite(value):
            value = None
        plain[key] = value
    return plain
