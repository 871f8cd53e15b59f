# apps/kclass/apps.py
from django.apps import AppConfig


class KclassConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.kclass'
    verbose_name = 'K-Classes and Kasparov Products'
