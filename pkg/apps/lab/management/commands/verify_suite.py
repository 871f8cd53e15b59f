# apps/lab/management/commands/verify_suite.py
from apps.lab.commands import LabCommand
from apps.lab.suite import run_suite


class Command(LabCommand):
    help = 'Run the full battery of product, index, identity and signature checks'
    command_name = 'verify_suite'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--pairs', type=int, help='Random module pairs per parity combination')

    def run_checks(self, config):
        return run_suite(config, progress=self.progress)
