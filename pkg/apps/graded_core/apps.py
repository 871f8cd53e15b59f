# apps/graded_core/apps.py
from django.apps import AppConfig


class GradedCoreConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.graded_core'
    verbose_name = 'Graded Linear Algebra'
