# apps/lab/management/commands/kprod.py
from apps.kclass.algebra import pair_classes

from apps.lab.commands import LabCommand
from apps.lab.io import read_module
from apps.lab.suite import (
    build_catalog, class_values, compare, gens_for, module_class, parity_of, product_class, run_suite,
)

PARITY_NAMES = {0: 'even', 1: 'odd'}


class Command(LabCommand):
    help = 'Kasparov product of two module files, or the random product-law family with --random'
    command_name = 'kprod'
    default_inputs = ('kprod_even_a.json', 'kprod_even_b.json')

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--random', action='store_true',
                            help='Run the randomized product-law checks for all four parities')
        parser.add_argument('--pairs', type=int, help='Random module pairs per parity (default 100)')

    def run_checks(self, config):
        if self.options.get('random'):
            checks = [check for check in build_catalog(config)
                      if check.family == 'kprod' and check.matches(config.filters)]
            return run_suite(config, checks, progress=self.progress)

        first = read_module(config.input_path(0))
        second = read_module(config.input_path(1))
        tol = config.structural_tol
        left, right = module_class(first, tol), module_class(second, tol)
        expected = pair_classes(left, right)
        observed = product_class(first, second, gens_for(config), tol)
        pair = f"{PARITY_NAMES[parity_of(first)]}-{PARITY_NAMES[parity_of(second)]}"
        check_id = f"kprod/{pair}/{first.label or 'first'}x{second.label or 'second'}"
        self.stderr.write(f"Product {pair}: {left} x {right}")
        return [compare(check_id, 'kprod', class_values(expected), class_values(observed),
                        first=left.to_dict(), second=right.to_dict(), inputs=list(config.inputs))]
