# apps/lab/reports.py
"""Report rendering: one JSON record per line, or a tabulate table for people."""
import json

from tabulate import tabulate

from .suite import ERROR, FAIL, PASS

TEXT_HEADERS = ['check', 'family', 'verdict', 'expected', 'observed', 'residual']


def _compact(value):
    if value is None:
        return ''
    if isinstance(value, float):
        return f"{value:.3e}"
    return json.dumps(value, sort_keys=True, separators=(',', ':'))


def render_records(results, seed):
    """Sorted by check id, keys sorted, no timestamps: identical runs give identical bytes."""
    lines = [json.dumps(result.to_record(seed), sort_keys=True, separators=(', ', ': '))
             for result in sorted(results, key=lambda result: result.check_id)]
    return '\n'.join(lines) + ('\n' if lines else '')


def summarize(results):
    return {
        'checks': len(results),
        'passed': sum(1 for result in results if result.verdict == PASS),
        'failed': sum(1 for result in results if result.verdict == FAIL),
        'errors': sum(1 for result in results if result.verdict == ERROR),
    }


def render_text(results, seed):
    rows = [[result.check_id, result.family, result.verdict, _compact(result.expected),
             _compact(result.observed), _compact(result.residual)]
            for result in sorted(results, key=lambda result: result.check_id)]
    table = tabulate(rows, headers=TEXT_HEADERS, tablefmt='simple')
    counts = summarize(results)
    footer = (f"seed {seed}: {counts['passed']}/{counts['checks']} passed, "
              f"{counts['failed']} failed, {counts['errors']} errors")
    return f"{table}\n\n{footer}\n"


def render(results, seed, fmt='records'):
    if fmt == 'text':
        return render_text(results, seed)
    return render_records(results, seed)
