# apps/lab/tests.py
import json
from io import StringIO

import numpy as np
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from apps.graded_core.exceptions import InputError, ParityMismatch, ParseError
from apps.kclass.loops import LoopOperatorFamily

from .config import RunConfig
from .io import (
    complex_from_dict, group_from_dict, module_from_dict, parse_group_table, parse_matrix, read_collar, read_group,
    read_json, read_matrix, resolve_path,
)
from .models import CheckRecord, VerificationRun
from .reports import render, render_records, render_text, summarize
from .suite import (
    APS_MODELS, ERROR, FAIL, PASS, CheckResult, build_catalog, compare, exit_code_for, find_check, select_checks,
    within,
)
from .tasks import lab_command_task, run_check_task
from .utils import check_rng, parse_filter, parse_nodes, to_jsonable


def fixture(name):
    return resolve_path(name, RunConfig.from_settings('index').fixtures)


def run_command(name, *args):
    """call_command with captured streams; returns (stdout, stderr, returncode)."""
    out, err = StringIO(), StringIO()
    try:
        call_command(name, *args, '--no-progress', stdout=out, stderr=err)
        code = 0
    except CommandError as e:
        code = e.returncode
        err.write(str(e))
    return out.getvalue(), err.getvalue(), code


def records(output):
    return [json.loads(line) for line in output.splitlines()]


class MatrixParserTests(SimpleTestCase):
    def test_complex_entries_and_comments(self):
        matrix = parse_matrix("# header next\n2 2\n1 0,-1  # row one\n0,1 2.5\n")
        self.assertEqual(matrix.shape, (2, 2))
        self.assertEqual(matrix[0, 1], -1j)
        self.assertEqual(matrix[1, 1], 2.5)

    def test_bad_entry_reports_position(self):
        with self.assertRaises(ParseError) as ctx:
            read_matrix(fixture('bad_matrix.mat'))
        self.assertEqual(ctx.exception.details['line'], 3)
        self.assertEqual(ctx.exception.details['column'], 3)

    def test_row_count_mismatch(self):
        with self.assertRaises(ParseError) as ctx:
            parse_matrix("3 1\n1\n2\n")
        self.assertEqual(ctx.exception.details['line'], 3)

    def test_column_count_mismatch(self):
        with self.assertRaises(ParseError) as ctx:
            parse_matrix("1 2\n1 2 3\n")
        self.assertEqual(ctx.exception.details['line'], 2)

    def test_empty_matrix_file(self):
        with self.assertRaises(ParseError):
            parse_matrix("# nothing\n")
        self.assertEqual(parse_matrix("0 3\n").shape, (0, 3))

    def test_missing_file(self):
        with self.assertRaises(InputError):
            read_matrix('/nonexistent/operator.mat')


class DocumentTests(SimpleTestCase):
    def test_even_module_from_d_plus(self):
        module = module_from_dict({'parity': 0, 'd_plus': [[1, 0, 0], [0, 0, 0]], 'label': 'a'})
        self.assertEqual(module.parity, 0)
        self.assertEqual(module.label, 'a')

    def test_empty_d_plus_by_shape(self):
        module = module_from_dict({'parity': 0, 'd_plus': None, 'd_plus_shape': [0, 2]})
        self.assertEqual(module.parity, 0)

    def test_odd_module_from_matrix_file(self):
        module = module_from_dict({'parity': 1, 'matrix': 'rotation.mat'}, fixture('rotation.mat').parent)
        self.assertEqual(module.parity, 1)

    def test_loop_family(self):
        family = module_from_dict({'parity': 1, 'loop': {'charges': [1, -2]}})
        self.assertIsInstance(family, LoopOperatorFamily)

    def test_even_module_with_even_matrix(self):
        with self.assertRaises(ParityMismatch):
            module_from_dict({'parity': 0, 'matrix': [[1, 0], [0, 1]], 'grading': [[1, 0], [0, -1]]})

    def test_bad_parity(self):
        with self.assertRaises(InputError):
            module_from_dict({'parity': 2, 'matrix': [[1]]})

    def test_named_and_table_groups(self):
        self.assertEqual(group_from_dict('Z2xZ3').order, 6)
        self.assertEqual(read_group(fixture('s3xz2.json')).order, 12)
        self.assertEqual(read_group(fixture('z3.table')).order, 3)
        with self.assertRaises(InputError):
            group_from_dict('Q8')

    def test_ragged_group_table(self):
        with self.assertRaises(ParseError) as ctx:
            parse_group_table("0 1\n1\n")
        self.assertEqual(ctx.exception.details['line'], 2)

    def test_complex_documents(self):
        complex_, bundle = complex_from_dict({'model': 'cp2'})
        self.assertTrue(complex_.is_closed)
        self.assertIsNone(bundle)
        complex_, bundle = complex_from_dict({'model': 'polygon', 'k': 3,
                                              'bundle': {'group': {'cyclic': 2}, 'edges': [[0, 1, 1]]}})
        self.assertEqual(bundle.group.order, 2)
        with self.assertRaises(InputError):
            complex_from_dict({'model': 'klein-bottle'})

    def test_collar_document(self):
        problem = read_collar(fixture('collar_matrix.json'))
        self.assertEqual(problem['boundary'].shape, (3, 3))
        self.assertIsNone(problem['extension'])

    def test_invalid_json(self):
        with self.assertRaises(InputError):
            read_json(fixture('bad_matrix.mat'))


class RunConfigTests(SimpleTestCase):
    def test_defaults(self):
        config = RunConfig.from_settings('verify_suite')
        self.assertEqual(config.nodes, (64, 128))
        self.assertEqual(config.identity_tol, 1e-10)
        self.assertEqual(config.pairs, 100)
        self.assertFalse(config.flipped_gamma)

    def test_options_override(self):
        config = RunConfig.from_options('verify_suite', {'nodes': '128,64,64', 'filter': 'kprod, odd-odd',
                                                         'mutate': 'gamma2-sign', 'celery': False,
                                                         'no_persist': True})
        self.assertEqual(config.nodes, (64, 128))
        self.assertEqual(config.filters, ('kprod', 'odd-odd'))
        self.assertTrue(config.flipped_gamma)
        self.assertFalse(config.persist)

    def test_invalid_values_are_input_errors(self):
        for overrides in ({'nodes': '4'}, {'nodes': 'many'}, {'jobs': 0}, {'tol': -1.0}, {'seed': -3}):
            with self.assertRaises(InputError, msg=overrides):
                RunConfig.from_options('verify_suite', overrides)

    def test_missing_input(self):
        with self.assertRaises(InputError):
            RunConfig.from_settings('kprod').input_path(1)

    def test_arguments_round_trip(self):
        config = RunConfig.from_options('kprod', {'input': ['a.json', 'b.json'], 'seed': 7, 'pairs': 3,
                                                  'filter': 'kprod/odd-odd'})
        arguments = config.to_arguments()
        self.assertEqual(arguments[:4], ['--input', 'a.json', '--input', 'b.json'])
        self.assertIn('--pairs', arguments)
        self.assertEqual(arguments[arguments.index('--filter') + 1], 'kprod/odd-odd')


class UtilityTests(SimpleTestCase):
    def test_check_rng_depends_on_id_only(self):
        first = check_rng(11, 'kprod/even-even/000').standard_normal(4)
        again = check_rng(11, 'kprod/even-even/000').standard_normal(4)
        other = check_rng(11, 'kprod/even-even/001').standard_normal(4)
        self.assertTrue(np.array_equal(first, again))
        self.assertFalse(np.array_equal(first, other))

    def test_parsers(self):
        self.assertEqual(parse_nodes('64, 128'), (64, 128))
        self.assertEqual(parse_nodes([32]), (32,))
        self.assertEqual(parse_filter(None), ())
        self.assertEqual(parse_filter('kprod,,identities/*'), ('kprod', 'identities/*'))

    def test_to_jsonable(self):
        value = to_jsonable({'a': np.int64(2), 'b': np.array([1.0, 2.0]), 'c': 1 + 2j})
        self.assertEqual(value['a'], 2)
        self.assertEqual(value['b'], [1.0, 2.0])
        json.dumps(value)


class CatalogTests(SimpleTestCase):
    def setUp(self):
        self.config = RunConfig.from_settings('verify_suite', persist=False)

    def test_catalog_sizes(self):
        checks = build_catalog(self.config)
        ids = [check.check_id for check in checks]
        self.assertEqual(len(ids), len(set(ids)))
        families = {}
        for check in checks:
            families[check.family] = families.get(check.family, 0) + 1
        self.assertEqual(families['kprod'], 400)
        self.assertEqual(families['aps-cylinder'], 2 * len(APS_MODELS))
        self.assertEqual(len(APS_MODELS), 12)
        self.assertEqual(families['product-index'], 25)
        self.assertGreaterEqual(sum(1 for i in ids if i.startswith('odd-odd/loop/')), 5)

    def test_filter_semantics(self):
        config = RunConfig.from_settings('verify_suite', filters='odd-odd')
        self.assertEqual({check.family for check in select_checks(config)}, {'odd-odd'})
        config = RunConfig.from_settings('verify_suite', filters='kprod/odd-odd')
        self.assertEqual(len(select_checks(config)), 100)
        config = RunConfig.from_settings('verify_suite', filters='signature/closed/cp2*')
        self.assertEqual([c.check_id for c in select_checks(config)],
                         ['signature/closed/cp2', 'signature/closed/cp2bar', 'signature/closed/cp2-cell',
                          'signature/closed/cp2bar-cell'])

    def test_empty_selection(self):
        with self.assertRaises(InputError):
            select_checks(RunConfig.from_settings('verify_suite', filters='nothing-here'))
        with self.assertRaises(InputError):
            find_check(self.config, 'kprod/odd-odd/999')

    def test_identity_battery_passes(self):
        config = RunConfig.from_settings('verify_suite', filters='identities')
        results = []
        for check in select_checks(config):
            results.extend(check.run(config))
        self.assertGreaterEqual(len(results), 25)
        for result in results:
            self.assertEqual(result.verdict, PASS, result)
            if result.residual is not None:
                self.assertLess(result.residual, 1e-10)

    def test_single_aps_cylinder_check(self):
        config = RunConfig.from_settings('verify_suite', seed=3)
        check = find_check(config, 'aps-cylinder/m01/n064')
        results = check.run(config)
        self.assertEqual([result.verdict for result in results], [PASS])

    def test_triangulated_projective_plane_check(self):
        config = RunConfig.from_settings('verify_suite', nodes='16')
        results = find_check(config, 'signature/closed/cp2').run(config)
        self.assertEqual([result.check_id.rsplit('/', 1)[1] for result in results],
                         ['form', 'b2', 'index', 'punctured', 'agrees_with_form'])
        for result in results:
            self.assertEqual(result.verdict, PASS, result)
        self.assertEqual(results[0].details['cells'], (9, 36, 84, 90, 36))


class ReportTests(SimpleTestCase):
    def setUp(self):
        self.results = [
            compare('b/2', 'b', [1], [1]),
            within('a/1', 'a', 2e-3, 1e-10),
            CheckResult('c/3', 'c', ERROR, details={'error': 'GapViolation'}, exit_code=3),
        ]

    def test_records_sorted_without_timestamps(self):
        lines = records(render_records(self.results, 5))
        self.assertEqual([line['check_id'] for line in lines], ['a/1', 'b/2', 'c/3'])
        self.assertEqual({line['seed'] for line in lines}, {5})
        self.assertEqual(sorted(lines[0]), ['check_id', 'details', 'expected', 'family', 'observed', 'residual',
                                            'seed', 'verdict'])

    def test_text_table(self):
        text = render(self.results, 5, 'text')
        self.assertIn('check', text.splitlines()[0])
        self.assertTrue(text.rstrip().endswith('seed 5: 1/3 passed, 1 failed, 1 errors'))
        self.assertEqual(render_text([], 5).strip().splitlines()[-1], 'seed 5: 0/0 passed, 0 failed, 0 errors')

    def test_exit_codes(self):
        self.assertEqual(summarize(self.results)['errors'], 1)
        self.assertEqual(exit_code_for(self.results), 1)
        self.assertEqual(exit_code_for(self.results[2:]), 3)
        self.assertEqual(exit_code_for(self.results[:1]), 0)
        self.assertEqual(self.results[1].verdict, FAIL)

    def test_result_dict_round_trip(self):
        restored = CheckResult.from_dict(self.results[2].to_dict())
        self.assertEqual(restored.exit_code, 3)
        self.assertEqual(restored.verdict, ERROR)


class KprodCommandTests(TestCase):
    def test_fixture_pair(self):
        out, err, code = run_command('kprod')
        self.assertEqual(code, 0, err)
        lines = records(out)
        self.assertEqual(len(lines), 1)
        self.assertEqual(lines[0]['check_id'], 'kprod/even-even/axb')
        self.assertEqual(lines[0]['verdict'], PASS)

    def test_loop_and_matrix_pairs(self):
        out, err, code = run_command('kprod', '--input', 'kprod_even_a.json', '--input', 'kprod_odd_loop.json',
                                     '--no-persist')
        self.assertEqual(code, 0, err)
        self.assertEqual(records(out)[0]['check_id'], 'kprod/even-odd/axloop')
        out, err, code = run_command('kprod', '--input', 'kprod_odd_matrix.json', '--input', 'kprod_even_b.json',
                                     '--no-persist')
        self.assertEqual(code, 0, err)

    def test_parity_mismatch_is_input_error(self):
        out, err, code = run_command('kprod', '--input', 'kprod_parity_mismatch.json', '--input',
                                     'kprod_even_b.json')
        self.assertEqual(code, 2)
        self.assertEqual(out, '')
        run = VerificationRun.objects.get()
        self.assertEqual(run.status, 'error')
        self.assertEqual(run.exit_code, 2)

    def test_random_pairs_are_deterministic(self):
        args = ('--random', '--pairs', '3', '--seed', '42', '--no-persist')
        first, _, code = run_command('kprod', *args)
        second, _, _ = run_command('kprod', *args)
        self.assertEqual(code, 0)
        self.assertEqual(first, second)
        self.assertEqual(len(records(first)), 12)
        parallel, _, _ = run_command('kprod', *args, '--jobs', '4')
        self.assertEqual(first, parallel)


class IndexCommandTests(TestCase):
    def test_scalar_collar_matches_oracle(self):
        out, err, code = run_command('index')
        self.assertEqual(code, 0, err)
        lines = records(out)
        self.assertEqual([line['check_id'] for line in lines],
                         ['index/scalar/n064', 'index/scalar/n128', 'index/scalar/refinement'])
        self.assertEqual(lines[0]['observed'], 1)

    def test_matrix_collar(self):
        out, err, code = run_command('index', '--input', 'collar_matrix.json', '--nodes', '64', '--no-persist')
        self.assertEqual(code, 0, err)
        self.assertEqual(records(out)[0]['expected'], 0)

    def test_cylinder_agrees(self):
        out, err, code = run_command('index', '--input', 'collar_cylinder.json', '--nodes', '64', '--no-persist')
        self.assertEqual(code, 0, err)
        lines = {line['check_id']: line for line in records(out)}
        self.assertEqual(lines['index/cylinder/n064/cylinder']['observed'], 1)

    def test_short_cylinder_is_precondition_error(self):
        out, err, code = run_command('index', '--input', 'collar_short.json')
        self.assertEqual(code, 3)
        self.assertIn('eight decay lengths', err)
        self.assertEqual(VerificationRun.objects.get().exit_code, 3)

    def test_too_few_nodes(self):
        _, _, code = run_command('index', '--nodes', '4', '--no-persist')
        self.assertEqual(code, 2)


class SignatureCommandTests(TestCase):
    def test_projective_plane(self):
        out, err, code = run_command('signature')
        self.assertEqual(code, 0, err)
        lines = {line['check_id']: line for line in records(out)}
        self.assertEqual(lines['signature/cp2']['observed'], [1])
        self.assertEqual(lines['signature/cp2/form']['verdict'], PASS)

    def test_disk_and_torus(self):
        for name, expected in (('disk.json', [0]), ('torus.json', [0])):
            out, err, code = run_command('signature', '--input', name, '--no-persist')
            self.assertEqual(code, 0, err)
            self.assertEqual(records(out)[0]['observed'], expected)

    def test_flat_bundle_cover(self):
        out, err, code = run_command('signature', '--input', 'circle3_z2.json', '--no-persist')
        self.assertEqual(code, 0, err)
        self.assertEqual(records(out)[0]['observed'], [0, 0])

    def test_punctured_triangulated_projective_plane(self):
        out, err, code = run_command('signature', '--input', 'cp2_punctured.json', '--nodes', '16', '--no-persist')
        self.assertEqual(code, 0, err)
        lines = {line['check_id']: line for line in records(out)}
        self.assertEqual(lines['signature/cp2-punctured']['observed'], [1])
        self.assertEqual(lines['signature/cp2-punctured/form']['verdict'], PASS)

    def test_unknown_input(self):
        _, _, code = run_command('signature', '--input', 'missing.json', '--no-persist')
        self.assertEqual(code, 2)


class VerifySuiteCommandTests(TestCase):
    def test_odd_odd_filter(self):
        out, err, code = run_command('verify_suite', '--filter=odd-odd')
        self.assertEqual(code, 0, err)
        lines = records(out)
        self.assertGreaterEqual(len(lines), 6)
        self.assertEqual({line['family'] for line in lines}, {'odd-odd'})

        run = VerificationRun.objects.get()
        self.assertEqual(run.status, 'passed')
        self.assertEqual(run.check_count, len(lines))
        self.assertEqual(CheckRecord.objects.filter(run=run, verdict=PASS).count(), len(lines))

    def test_byte_identical_reruns(self):
        args = ('--filter', 'product-index/f+1/*,identities/gamma-model,kprod/even-odd/00*', '--pairs', '4',
                '--seed', '9', '--no-persist')
        first, _, code = run_command('verify_suite', *args)
        second, _, _ = run_command('verify_suite', *args)
        self.assertEqual(code, 0)
        self.assertEqual(first, second)

    def test_gamma_sign_mutation_fails(self):
        for target in ('identities/clifford', 'product-index/f+1/w+1'):
            out, err, code = run_command('verify_suite', '--filter', target, '--mutate', 'gamma2-sign',
                                         '--no-persist')
            self.assertEqual(code, 1, target)
            self.assertIn(FAIL, {line['verdict'] for line in records(out)})
            self.assertTrue(all(line['details'].get('gamma2_sign', -1) == -1 for line in records(out)))

    def test_text_format(self):
        out, err, code = run_command('verify_suite', '--filter', 'identities/clifford', '--format', 'text',
                                     '--no-persist')
        self.assertEqual(code, 0, err)
        self.assertIn('identities/clifford/grading_is_swap', out)
        self.assertIn('passed', out.splitlines()[-1])

    def test_unmatched_filter(self):
        _, _, code = run_command('verify_suite', '--filter', 'no-such-family')
        self.assertEqual(code, 2)


class TaskTests(TestCase):
    def test_run_check_task(self):
        config = RunConfig.from_settings('verify_suite', persist=False)
        data = run_check_task.apply(args=(config.to_dict(), 'odd-odd/loop/+1_+1')).get()
        self.assertEqual(len(data), 1)
        self.assertEqual(CheckResult.from_dict(data[0]).verdict, PASS)

    def test_unknown_check_is_not_retried(self):
        config = RunConfig.from_settings('verify_suite', persist=False)
        result = run_check_task.apply(args=(config.to_dict(), 'nope/000'))
        self.assertTrue(result.failed())
        self.assertIsInstance(result.result, InputError)

    def test_command_task_returns_exit_code(self):
        code = lab_command_task.apply(args=('verify_suite', '--filter', 'identities/clifford', '--mutate',
                                            'gamma2-sign', '--no-persist', '--no-progress')).get()
        self.assertEqual(code, 1)
