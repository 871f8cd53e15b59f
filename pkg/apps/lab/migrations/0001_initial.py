# Generated by Django 4.2.23

from django.db import migrations, models
import django.db.models.deletion
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='VerificationRun',
            fields=[
                ('created_at', models.DateTimeField(auto_now_add=True, db_index=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('command', models.CharField(choices=[('kprod', 'Kasparov products'), ('index', 'APS index'), ('signature', 'Signature classes'), ('verify_suite', 'Verification suite')], max_length=32)),
                ('seed', models.BigIntegerField()),
                ('config', models.JSONField(default=dict, help_text='Validated RunConfig the run was started with')),
                ('status', models.CharField(choices=[('pending', 'Pending'), ('running', 'Running'), ('passed', 'Passed'), ('failed', 'Failed'), ('error', 'Error')], default='pending', max_length=16)),
                ('exit_code', models.IntegerField(blank=True, null=True)),
                ('check_count', models.IntegerField(default=0)),
                ('passed_count', models.IntegerField(default=0)),
                ('failed_count', models.IntegerField(default=0)),
                ('error_count', models.IntegerField(default=0)),
                ('duration', models.FloatField(blank=True, help_text='Wall time in seconds', null=True)),
                ('report', models.TextField(blank=True)),
                ('error_message', models.TextField(blank=True)),
            ],
            options={
                'ordering': ['-created_at'],
                'indexes': [models.Index(fields=['command', 'status'], name='lab_run_command_status_idx')],
            },
        ),
        migrations.CreateModel(
            name='CheckRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('created_at', models.DateTimeField(auto_now_add=True, db_index=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
                ('check_id', models.CharField(max_length=200)),
                ('family', models.CharField(max_length=50)),
                ('verdict', models.CharField(choices=[('PASS', 'Pass'), ('FAIL', 'Fail'), ('ERROR', 'Error')], max_length=8)),
                ('expected', models.JSONField(blank=True, null=True)),
                ('observed', models.JSONField(blank=True, null=True)),
                ('residual', models.FloatField(blank=True, null=True)),
                ('details', models.JSONField(default=dict)),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='checks', to='lab.verificationrun')),
            ],
            options={
                'ordering': ['run', 'check_id'],
                'unique_together': {('run', 'check_id')},
            },
        ),
    ]
