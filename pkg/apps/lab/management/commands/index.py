# apps/lab/management/commands/index.py
import numpy as np

from apps.dirac_grid.boundary import BoundaryOperator, TrivializingOp
from apps.dirac_grid.cylinder import build_cylinder_extension
from apps.dirac_grid.mesh import Mesh1D
from apps.dirac_grid.operators import build_interval_dirac, diagonal_index_oracle, impose_aps, numerical_index
from apps.graded_core.exceptions import InputError

from apps.lab.commands import LabCommand
from apps.lab.io import read_collar
from apps.lab.suite import compare


def _diagonal(matrix):
    if matrix is None:
        return None
    if np.any(np.abs(matrix - np.diag(np.diag(matrix))) > 0):
        raise ValueError
    return [float(value.real) for value in np.diag(matrix)]


def diagonal_oracle(problem):
    """Index from the ODE oracle when B and both end conditions are simultaneously diagonal."""
    if problem['grading'] is not None:
        return None
    try:
        b = _diagonal(problem['boundary'])
        right, left = _diagonal(problem['right']), _diagonal(problem['left'])
    except ValueError:
        return None
    return diagonal_index_oracle(b, right, left)


class Command(LabCommand):
    help = 'APS index of an interval collar at every resolution, optionally against a truncated cylinder'
    command_name = 'index'
    default_inputs = ('collar_scalar.json',)

    def run_checks(self, config):
        problem = read_collar(config.input_path())
        label = problem['label'] or config.input_path().stem
        boundary = BoundaryOperator(problem['boundary'], problem['grading'], label)
        trivializing = None
        if problem['right'] is not None:
            trivializing = TrivializingOp(problem['right'], boundary, config.structural_tol)

        oracle = diagonal_oracle(problem)
        indices = {}
        results = []
        for nodes in config.nodes:
            mesh = Mesh1D(problem['mesh'].kind, nodes, problem['mesh'].length)
            dirac = impose_aps(build_interval_dirac(mesh, boundary, label), right=trivializing, left=problem['left'])
            report = numerical_index(dirac, config.structural_tol)
            indices[nodes] = report.index
            self.stderr.write(f"{label} at {nodes} nodes: index {report.index}")
            details = report.to_dict()
            if problem['extension'] is not None:
                if trivializing is None:
                    raise InputError("a cylinder extension needs the right trivializing operator")
                extended = build_cylinder_extension(dirac, trivializing, float(problem['extension']))
                details['cylinder_index'] = numerical_index(extended, config.structural_tol).index
                results.append(compare(f"index/{label}/n{nodes:03d}/cylinder", 'index', report.index,
                                       details['cylinder_index'], extension=float(problem['extension'])))
            if oracle is not None:
                results.append(compare(f"index/{label}/n{nodes:03d}", 'index', oracle, report.index, **details))
        finest = max(indices)
        results.append(compare(f"index/{label}/refinement", 'index', [indices[finest]] * len(indices),
                               [indices[nodes] for nodes in sorted(indices)], nodes=sorted(indices)))
        return results
