# apps/signature/apps.py
from django.apps import AppConfig


class SignatureConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'apps.signature'
    verbose_name = 'Twisted Signature Classes'
