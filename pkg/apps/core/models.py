# apps/core/models.py
from django.db import models


class TimeStampedModel(models.Model):
    """Abstract base for stored lab records: creation and last-update times"""
    created_at = models.DateTimeField(auto_now_add=True, db_index=True)
    updated_at = models.DateTimeField(auto_now=True)

    class Meta:
        abstract = True
