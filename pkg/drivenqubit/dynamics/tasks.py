from celery import shared_task

from .rwa import map_row_values
from .validation import run_case


@shared_task
def map_row(sweep_data, kind, row, options):
    """Строка карты; описание развёртки передаётся в JSON-форме SweepSpec.to_dict()"""
    from .serializers import SweepSpecSerializer

    serializer = SweepSpecSerializer(data=sweep_data)
    serializer.is_valid(raise_exception=True)
    return map_row_values(serializer.save(), kind, row, **options)


@shared_task
def validate_case(case, knob_values):
    return run_case(case, knob_values)
