"""CSV-артефакты и JSON-манифесты запусков."""
import csv
import json
import math
import platform
from pathlib import Path

import numpy as np
import scipy

from .exceptions import ArtifactError


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, np.integer):
        return str(int(value))
    return value


def _jsonable(value):
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return {'re': _jsonable(float(value.real)), 'im': _jsonable(float(value.imag))}
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_csv(path, header, rows, comment=None):
    """Запись таблицы: разделитель ',', точка, одна строка заголовка, LF"""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', newline='', encoding='utf-8') as stream:
            if comment is not None:
                stream.write('# ' + json.dumps(_jsonable(comment), sort_keys=True) + '\n')
            writer = csv.writer(stream, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([_cell(value) for value in row])
    except OSError as error:
        raise ArtifactError(f'Не удалось записать CSV: {error.strerror or error}', path=str(path)) from error
    return path


def manifest_path(out):
    out = Path(out)
    return out.with_name(out.name + '.manifest.json')


def write_manifest(out, command, spec, knobs, diagnostics, wall_time):
    from . import __version__

    document = {
        'command': command,
        'artifact': str(out),
        'spec': spec,
        'knobs': knobs,
        'diagnostics': diagnostics,
        'wall_time': wall_time,
        'version': __version__,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
    }
    path = manifest_path(out)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(_jsonable(document), indent=2, sort_keys=True, allow_nan=False) + '\n',
                        encoding='utf-8')
    except OSError as error:
        raise ArtifactError(f'Не удалось записать манифест: {error.strerror or error}', path=str(path)) from error
    return path
