import os

from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'drivenqubit.settings')

app = Celery('drivenqubit')

# - namespace='CELERY' means all celery-related configuration keys
# should have a `CELERY_` prefix.
app.config_from_object('django.conf:settings', namespace='CELERY')

app.autodiscover_tasks()
