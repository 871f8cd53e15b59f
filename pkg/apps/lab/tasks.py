# apps/lab/tasks.py
import logging

from celery import shared_task

from apps.graded_core.exceptions import LabError

logger = logging.getLogger(__name__)


@shared_task(bind=True, max_retries=3, autoretry_for=(Exception,), dont_autoretry_for=(LabError,),
             retry_backoff=True, retry_jitter=True)
def run_check_task(self, config_data, check_id):
    """Run one catalog check on a worker; returns its results as plain dicts.

    Lab errors are deterministic and come back as ERROR results instead of retries.
    """
    from .config import RunConfig
    from .suite import find_check

    config = RunConfig(**config_data)
    check = find_check(config, check_id)
    logger.info(f"Running check {check_id} (attempt {self.request.retries + 1})")
    return [result.to_dict() for result in check.run(config)]


@shared_task(bind=True, max_retries=3, autoretry_for=(Exception,), dont_autoretry_for=(LabError,),
             retry_backoff=True)
def lab_command_task(self, command, *args):
    """Celery task to run a lab management command with retry logic"""
    from django.core.management import call_command
    from django.core.management.base import CommandError

    try:
        call_command(command, *args)
        logger.info(f"{command} passed")
        return 0
    except CommandError as e:
        # failing checks are an outcome, not a reason to retry
        logger.error(f"{command} finished with exit code {e.returncode}: {e}")
        return e.returncode
