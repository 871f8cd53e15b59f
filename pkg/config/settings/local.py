# config/settings/local.py
from .base import *

DEBUG = True

APSLAB_LOG_LEVEL = os.getenv('APSLAB_LOG_LEVEL', 'DEBUG')
LOGGING['loggers']['apps']['level'] = APSLAB_LOG_LEVEL

# Run Celery tasks in-process during development
CELERY_TASK_ALWAYS_EAGER = os.getenv('CELERY_TASK_ALWAYS_EAGER', 'True') == 'True'
