# apps/lab/models.py
import uuid

from django.db import models

from apps.core.models import TimeStampedModel


class VerificationRun(TimeStampedModel):
    """One invocation of a lab command and its aggregate outcome"""
    STATUS_CHOICES = [
        ('pending', 'Pending'),
        ('running', 'Running'),
        ('passed', 'Passed'),
        ('failed', 'Failed'),
        ('error', 'Error'),
    ]

    id = models.UUIDField(primary_key=True, default=uuid.uuid4, editable=False)
    command = models.CharField(max_length=32, choices=[
        ('kprod', 'Kasparov products'),
        ('index', 'APS index'),
        ('signature', 'Signature classes'),
        ('verify_suite', 'Verification suite'),
    ])
    seed = models.BigIntegerField()
    config = models.JSONField(default=dict, help_text="Validated RunConfig the run was started with")
    status = models.CharField(max_length=16, choices=STATUS_CHOICES, default='pending')
    exit_code = models.IntegerField(null=True, blank=True)

    check_count = models.IntegerField(default=0)
    passed_count = models.IntegerField(default=0)
    failed_count = models.IntegerField(default=0)
    error_count = models.IntegerField(default=0)
    duration = models.FloatField(null=True, blank=True, help_text="Wall time in seconds")

    report = models.TextField(blank=True)
    error_message = models.TextField(blank=True)

    class Meta:
        ordering = ['-created_at']
        indexes = [
            models.Index(fields=['command', 'status'], name='lab_run_command_status_idx'),
        ]

    def __str__(self):
        return f"{self.command} seed={self.seed} ({self.status})"

    def record_outcome(self, results, exit_code, duration, report):
        self.check_count = len(results)
        self.passed_count = sum(1 for result in results if result.verdict == 'PASS')
        self.failed_count = sum(1 for result in results if result.verdict == 'FAIL')
        self.error_count = sum(1 for result in results if result.verdict == 'ERROR')
        self.exit_code = exit_code
        self.duration = duration
        self.report = report
        if exit_code == 0:
            self.status = 'passed'
        elif exit_code == 1:
            self.status = 'failed'
        else:
            self.status = 'error'
        self.save()
        CheckRecord.objects.bulk_create([
            CheckRecord(run=self, check_id=result.check_id, family=result.family, verdict=result.verdict,
                        expected=result.jsonable('expected'), observed=result.jsonable('observed'),
                        residual=result.residual, details=result.jsonable('details'))
            for result in results
        ])


class CheckRecord(TimeStampedModel):
    VERDICT_CHOICES = [
        ('PASS', 'Pass'),
        ('FAIL', 'Fail'),
        ('ERROR', 'Error'),
    ]

    run = models.ForeignKey(VerificationRun, on_delete=models.CASCADE, related_name='checks')
    check_id = models.CharField(max_length=200)
    family = models.CharField(max_length=50)
    verdict = models.CharField(max_length=8, choices=VERDICT_CHOICES)
    expected = models.JSONField(null=True, blank=True)
    observed = models.JSONField(null=True, blank=True)
    residual = models.FloatField(null=True, blank=True)
    details = models.JSONField(default=dict)

    class Meta:
        ordering = ['run', 'check_id']
        unique_together = ['run', 'check_id']

    def __str__(self):
        return f"{self.check_id}: {self.verdict}"
