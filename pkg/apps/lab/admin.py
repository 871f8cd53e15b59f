# apps/lab/admin.py
import logging

from django.contrib import admin, messages
from django.utils.html import format_html

from .config import RunConfig
from .models import CheckRecord, VerificationRun
from .tasks import lab_command_task

logger = logging.getLogger(__name__)


def rerun_verification(modeladmin, request, queryset):
    """Queue the selected runs again with their stored configuration"""
    queued_count = 0
    skipped_count = 0

    for run in queryset:
        if run.status in ('pending', 'running'):
            skipped_count += 1
            continue
        try:
            arguments = RunConfig(**run.config).to_arguments()
            lab_command_task.delay(run.command, *arguments)
            queued_count += 1
        except Exception as e:
            logger.error(f"Failed to queue rerun of {run.id}: {str(e)}")

    if queued_count > 0:
        messages.success(request, f'Queued {queued_count} runs.')
    if skipped_count > 0:
        messages.info(request, f'Skipped {skipped_count} runs that have not finished.')

rerun_verification.short_description = "🔁 Rerun with stored configuration"


class CheckRecordInline(admin.TabularInline):
    model = CheckRecord
    extra = 0
    can_delete = False
    fields = ['check_id', 'family', 'verdict', 'expected', 'observed', 'residual']
    readonly_fields = fields
    ordering = ['check_id']

    def has_add_permission(self, request, obj=None):
        return False


@admin.register(VerificationRun)
class VerificationRunAdmin(admin.ModelAdmin):
    list_display = ['command', 'seed', 'status_badge', 'passed_summary', 'duration_display', 'created_at']
    list_filter = ['command', 'status', 'created_at']
    search_fields = ['id', 'error_message']
    readonly_fields = ['id', 'created_at', 'updated_at', 'exit_code', 'check_count', 'passed_count',
                       'failed_count', 'error_count', 'duration', 'report', 'error_message', 'config']
    ordering = ['-created_at']
    list_per_page = 25
    inlines = [CheckRecordInline]
    actions = [rerun_verification]

    fieldsets = (
        ('Run', {
            'fields': ('id', 'command', 'seed', 'status', 'exit_code', 'config')
        }),
        ('Outcome', {
            'fields': ('check_count', 'passed_count', 'failed_count', 'error_count', 'duration',
                       'error_message')
        }),
        ('Report', {
            'fields': ('report',),
            'classes': ('collapse',)
        }),
        ('Timestamps', {
            'fields': ('created_at', 'updated_at'),
            'classes': ('collapse',)
        }),
    )

    def status_badge(self, obj):
        colors = {
            'passed': '#10b981',
            'running': '#f59e0b',
            'failed': '#ef4444',
            'error': '#7c3aed',
        }
        color = colors.get(obj.status, '#6b7280')
        return format_html(
            '<span style="color: {}; font-weight: bold;">{}</span>',
            color, obj.get_status_display()
        )
    status_badge.short_description = "Status"

    def passed_summary(self, obj):
        return f"{obj.passed_count}/{obj.check_count}"
    passed_summary.short_description = "Passed"

    def duration_display(self, obj):
        if obj.duration is None:
            return '-'
        return f"{obj.duration:.2f}s"
    duration_display.short_description = "Duration"


@admin.register(CheckRecord)
class CheckRecordAdmin(admin.ModelAdmin):
    list_display = ['check_id', 'family', 'verdict', 'residual', 'run']
    list_filter = ['verdict', 'family']
    search_fields = ['check_id']
    readonly_fields = ['run', 'check_id', 'family', 'verdict', 'expected', 'observed', 'residual', 'details']
    list_select_related = ['run']
