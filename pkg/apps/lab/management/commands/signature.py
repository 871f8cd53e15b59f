# apps/lab/management/commands/signature.py
from apps.signature.classes import signature_class

from apps.lab.commands import LabCommand
from apps.lab.io import read_complex, read_json
from apps.lab.suite import compare, holds


class Command(LabCommand):
    help = 'Signature class of a cell complex, optionally twisted by a flat bundle'
    command_name = 'signature'
    default_inputs = ('cp2.json',)

    def run_checks(self, config):
        path = config.input_path()
        document = read_json(path)
        complex_, bundle = read_complex(path)
        result = signature_class(complex_, bundle=bundle, nodes=config.nodes[0], tol=config.structural_tol)
        label = document.get('label') or path.stem
        check_id = f"signature/{label}"
        self.stderr.write(f"{label}: {result.case} class {list(result.values)}")

        details = result.to_dict()
        expected = document.get('expected')
        if expected is not None:
            results = [compare(check_id, 'signature', expected, list(result.values), **details)]
        else:
            results = [holds(check_id, 'signature', True, list(result.values), **details)]
        if result.form_class is not None:
            results.append(compare(f"{check_id}/form", 'signature', list(result.form_class.multiplicities),
                                   list(result.k_class.multiplicities)))
        if result.twisted is not None and 'expected_twisted' in document:
            results.append(compare(f"{check_id}/twisted", 'signature', document['expected_twisted'], result.twisted))
        return results
