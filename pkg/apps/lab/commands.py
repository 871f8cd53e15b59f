# apps/lab/commands.py
"""Shared plumbing of the lab management commands."""
import logging
import time

from django.core.management.base import BaseCommand, CommandError

from apps.graded_core.exceptions import LabError

from .config import FORMATS, MUTATIONS, RunConfig
from .reports import render, summarize
from .suite import exit_code_for

logger = logging.getLogger(__name__)


class LabCommand(BaseCommand):
    """Parse options into a RunConfig, run, write the report, map the outcome to an exit code.

    Subclasses set ``command_name`` and implement ``run_checks(config)``
    returning CheckResults.
    """
    command_name = None
    default_inputs = ()

    def add_arguments(self, parser):
        parser.add_argument('--input', action='append',
                            help='Input file; repeatable. Relative names fall back to the fixture directory')
        parser.add_argument('--tol', type=float, help='Structural tolerance for rank decisions')
        parser.add_argument('--identity-tol', type=float, help='Residual bound for operator identities')
        parser.add_argument('--nodes', type=str, help='Mesh resolutions, comma separated (e.g. 64,128)')
        parser.add_argument('--seed', type=int, help='Seed for the randomized suites')
        parser.add_argument('--filter', type=str, help='Families, check-id prefixes or globs, comma separated')
        parser.add_argument('--jobs', type=int, help='Worker threads for independent checks')
        parser.add_argument('--format', choices=FORMATS, help='Report format (default: records)')
        parser.add_argument('--mutate', choices=MUTATIONS, help='Inject a convention error')
        parser.add_argument('--celery', action='store_true', help='Dispatch checks through Celery workers')
        parser.add_argument('--no-persist', action='store_true', help='Do not store a VerificationRun')
        parser.add_argument('--no-progress', action='store_true', help='Hide the progress bar')

    def run_checks(self, config):
        raise NotImplementedError

    def build_config(self, options):
        options = dict(options)
        if not options.get('input') and self.default_inputs:
            options['input'] = list(self.default_inputs)
        return RunConfig.from_options(self.command_name, options)

    def handle(self, *args, **options):
        self.options = options
        self.progress = not options.get('no_progress')
        run = None
        started = time.perf_counter()
        try:
            config = self.build_config(options)
            run = self._start_run(config)
            results = self.run_checks(config)
        except LabError as e:
            logger.error(f"{self.command_name} stopped: {e}")
            if run is not None:
                run.status = 'error'
                run.exit_code = e.exit_code
                run.error_message = str(e)
                run.duration = time.perf_counter() - started
                run.save()
            raise CommandError(str(e), returncode=e.exit_code)

        report = render(results, config.seed, config.format)
        self.stdout.write(report, ending='')
        exit_code = exit_code_for(results)
        if run is not None:
            run.record_outcome(results, exit_code, time.perf_counter() - started, report)

        counts = summarize(results)
        if exit_code:
            raise CommandError(f"{counts['failed']} failed and {counts['errors']} errored of {counts['checks']} checks",
                               returncode=exit_code)
        self.stderr.write(self.style.SUCCESS(f"All {counts['checks']} checks passed"))

    def _start_run(self, config):
        if not config.persist:
            return None
        from .models import VerificationRun

        return VerificationRun.objects.create(command=self.command_name, seed=config.seed, config=config.to_dict(),
                                              status='running')
