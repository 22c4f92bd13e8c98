from django.conf import settings

DEFAULTS = {
    'GRID_POINTS': 513,
    'TOL': 1e-8,
    'GRID_TOL': 1e-4,
    'K_MAX': 40,
    'MAP_RESOLUTION': '81x81',
    'TUPLE_BUDGET': 10 ** 6,
    'GBF_THRESHOLD': 1e-12,
    'ORACLE_MAX_STEPS': 2 ** 21,
    'THREADS': 1,
    'ARTIFACT_DIR': 'artifacts',
}


def knob(name):
    """Значение числовой настройки: settings.DYNAMICS поверх значений по умолчанию"""
    overrides = getattr(settings, 'DYNAMICS', {})
    if name in overrides and overrides[name] is not None:
        return overrides[name]
    return DEFAULTS[name]


def knobs(**flags):
    """Полный набор настроек запуска; явные флаги CLI имеют приоритет"""
    values = {name: knob(name) for name in DEFAULTS}
    for name, value in flags.items():
        if value is not None:
            values[name.upper()] = value
    return values


def parse_resolution(text):
    try:
        first, second = str(text).lower().split('x')
        count1, count2 = int(first), int(second)
    except ValueError:
        raise ValueError(f'Разрешение должно иметь вид <int>x<int>, получено {text!r}')
    if count1 < 2 or count2 < 2:
        raise ValueError('Разрешение карты должно быть не меньше 2x2')
    return count1, count2
