# apps/dirac_grid/apps.py
from django.apps import AppConfig


class DiracGridConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.dirac_grid'
    verbose_name = 'Discrete Dirac Operators'
