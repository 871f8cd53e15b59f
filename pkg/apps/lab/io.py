# apps/lab/io.py
"""Readers for the lab input formats.

Matrix files are dense complex text: a ``rows cols`` header, then one row per
line with ``re,im`` (or plain ``re``) entries separated by whitespace. ``#``
starts a comment. Modules, cell complexes, mesh descriptors and group tables
are JSON documents; matrices inside them are nested lists of numbers or
``[re, im]`` pairs, or the name of a matrix file next to the document.
"""
import json
import logging
from pathlib import Path

import numpy as np

from apps.dirac_grid.mesh import Mesh1D
from apps.graded_core.exceptions import InputError, ParseError
from apps.graded_core.graded import ODD, GradedOperator, GradedSpace
from apps.kclass.algebra import BlockAlgebra
from apps.kclass.loops import LoopOperatorFamily
from apps.kclass.modules import KasparovModule
from apps.signature import complexes, groups

logger = logging.getLogger(__name__)


def resolve_path(name, fixtures):
    """A path as given if it exists, otherwise relative to the fixture directory."""
    path = Path(name)
    if path.exists():
        return path
    candidate = Path(fixtures) / name
    if candidate.exists():
        return candidate
    raise InputError("input file not found", path=str(name), fixtures=str(fixtures))


def _read_text(path):
    try:
        return Path(path).read_text(encoding='utf-8')
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}", path=str(path))


# Matrix files

def _parse_entry(token, line, column):
    parts = token.split(',')
    if len(parts) > 2:
        raise ParseError(f"bad matrix entry {token!r}", line=line, column=column)
    try:
        values = [float(part) for part in parts]
    except ValueError:
        raise ParseError(f"bad matrix entry {token!r}", line=line, column=column)
    return complex(values[0], values[1] if len(values) == 2 else 0.0)


def _tokens(text):
    """(line, column, token) for every token outside comments, 1-based."""
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split('#', 1)[0]
        position = 0
        for token in content.split():
            position = content.index(token, position)
            yield number, position + 1, token
            position += len(token)


def parse_matrix(text):
    rows_by_line = {}
    for line, column, token in _tokens(text):
        rows_by_line.setdefault(line, []).append((column, token))
    if not rows_by_line:
        raise ParseError("empty matrix file", line=1, column=1)
    lines = sorted(rows_by_line)
    header = rows_by_line[lines[0]]
    if len(header) != 2:
        raise ParseError("header must be 'rows cols'", line=lines[0], column=header[0][0])
    try:
        rows, cols = (int(token) for _, token in header)
    except ValueError:
        raise ParseError("header must hold two integers", line=lines[0], column=header[0][0])
    if rows < 0 or cols < 0:
        raise ParseError("matrix dimensions must be non-negative", line=lines[0], column=header[0][0])
    body = lines[1:]
    if len(body) != rows:
        where = body[rows] if len(body) > rows else (body[-1] if body else lines[0])
        raise ParseError(f"expected {rows} rows, found {len(body)}", line=where, column=1)
    matrix = np.zeros((rows, cols), dtype=np.complex128)
    for i, line in enumerate(body):
        entries = rows_by_line[line]
        if len(entries) != cols:
            column = entries[min(len(entries), cols) - 1][0] if entries else 1
            raise ParseError(f"expected {cols} entries, found {len(entries)}", line=line, column=column)
        for j, (column, token) in enumerate(entries):
            matrix[i, j] = _parse_entry(token, line, column)
    return matrix


def read_matrix(path):
    matrix = parse_matrix(_read_text(path))
    logger.debug(f"read {matrix.shape[0]}x{matrix.shape[1]} matrix from {path}")
    return matrix


def _matrix_value(value, base, what):
    """Inline nested list or the name of a matrix file beside the JSON document."""
    if isinstance(value, str):
        return read_matrix(resolve_path(value, base))
    if not isinstance(value, list):
        raise InputError(f"{what} must be a matrix", got=type(value).__name__)
    rows = []
    for row in value:
        if not isinstance(row, list):
            raise InputError(f"{what} rows must be lists")
        entries = []
        for entry in row:
            if isinstance(entry, list) and len(entry) == 2:
                entries.append(complex(float(entry[0]), float(entry[1])))
            elif isinstance(entry, (int, float)) and not isinstance(entry, bool):
                entries.append(complex(entry))
            else:
                raise InputError(f"bad entry in {what}", entry=entry)
        rows.append(entries)
    widths = {len(row) for row in rows}
    if len(widths) > 1:
        raise InputError(f"{what} rows have different lengths", widths=sorted(widths))
    if not rows:
        return np.zeros((0, 0), dtype=np.complex128)
    return np.array(rows, dtype=np.complex128)


def _shape(value, base, what, shape):
    """An explicit empty matrix is given by its shape."""
    if value is None and shape is not None:
        return np.zeros(tuple(shape), dtype=np.complex128)
    return _matrix_value(value, base, what)


def read_json(path):
    text = _read_text(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON in {path}: {e.msg}", line=e.lineno, column=e.colno)


def _require(document, key, what):
    if key not in document:
        raise InputError(f"{what} is missing '{key}'")
    return document[key]


# Kasparov modules

def module_from_dict(document, base='.'):
    """Even or odd module; odd modules may instead be twisted-circle loop families."""
    if not isinstance(document, dict):
        raise InputError("module document must be an object")
    parity = _require(document, 'parity', 'module')
    label = str(document.get('label', ''))
    algebra = BlockAlgebra(tuple(document['algebra'])) if 'algebra' in document else BlockAlgebra.trivial()
    if parity == 1 and 'loop' in document:
        loop = document['loop']
        extra = {'label': label} if label else {}
        return LoopOperatorFamily.twisted_circle(_require(loop, 'charges', 'loop'), loop.get('cutoff'),
                                                 loop.get('mixing_seed'), **extra)
    if parity == 0 and 'd_plus' in document:
        d_plus = _shape(document['d_plus'], base, 'd_plus', document.get('d_plus_shape'))
        return KasparovModule.even(d_plus, algebra, document.get('plus_sectors'), document.get('minus_sectors'),
                                   label)
    matrix = _matrix_value(_require(document, 'matrix', 'module'), base, 'matrix')
    if parity == 0:
        grading = _matrix_value(_require(document, 'grading', 'even module'), base, 'grading')
        if grading.shape != matrix.shape:
            raise InputError("grading and operator shapes differ", grading=grading.shape, operator=matrix.shape)
        operator = GradedOperator(matrix, GradedSpace(grading), ODD)
        return KasparovModule(operator, 0, algebra, document.get('sectors'), label)
    if parity == 1:
        return KasparovModule.odd(matrix, algebra, document.get('sectors'), label)
    raise InputError("module parity must be 0 or 1", parity=parity)


def read_module(path):
    path = Path(path)
    return module_from_dict(read_json(path), path.parent)


# Finite groups

def group_from_dict(document):
    if isinstance(document, str):
        return _named_group(document)
    if not isinstance(document, dict):
        raise InputError("group must be a name or an object")
    if 'cyclic' in document:
        return groups.cyclic(int(document['cyclic']))
    if 'symmetric' in document:
        return groups.symmetric(int(document['symmetric']))
    if 'dihedral' in document:
        return groups.dihedral(int(document['dihedral']))
    if 'product' in document:
        first, second = document['product']
        return groups.direct_product(group_from_dict(first), group_from_dict(second))
    if 'permutations' in document:
        return groups.permutation_group(document['permutations'], int(_require(document, 'degree', 'group')),
                                        document.get('label', ''))
    if 'table' in document:
        return groups.FiniteGroup(np.array(document['table'], dtype=int), tuple(document.get('generators', ())),
                                  document.get('label', ''))
    raise InputError("unknown group description", keys=sorted(document))


def _named_group(name):
    """'Z3', 'S3', 'D4' and products written 'Z2xZ3'."""
    if 'x' in name:
        first, _, rest = name.partition('x')
        return groups.direct_product(_named_group(first), _named_group(rest))
    builders = {'Z': groups.cyclic, 'S': groups.symmetric, 'D': groups.dihedral}
    if name[:1] not in builders or not name[1:].isdigit():
        raise InputError("unknown group name", name=name)
    return builders[name[0]](int(name[1:]))


def parse_group_table(text):
    """Whitespace table, one row per line, entries are element indices."""
    rows = {}
    for line, column, token in _tokens(text):
        try:
            rows.setdefault(line, []).append(int(token))
        except ValueError:
            raise ParseError(f"bad group element {token!r}", line=line, column=column)
    if not rows:
        raise ParseError("empty group table", line=1, column=1)
    lines = sorted(rows)
    width = len(rows[lines[0]])
    for line in lines:
        if len(rows[line]) != width:
            raise ParseError(f"expected {width} entries, found {len(rows[line])}", line=line, column=1)
    return groups.FiniteGroup(np.array([rows[line] for line in lines]))


def read_group(path):
    path = Path(path)
    if path.suffix == '.json':
        return group_from_dict(read_json(path))
    return parse_group_table(_read_text(path))


# Cell complexes and flat bundles

MODELS = {
    'point': lambda doc: complexes.point(int(doc.get('orientation', 1))),
    'polygon': lambda doc: complexes.polygon(int(doc.get('k', 4))),
    'circle': lambda doc: complexes.polygon(int(doc.get('k', 4))),
    'interval': lambda doc: complexes.interval(int(doc.get('segments', 1))),
    'disk': lambda doc: complexes.disk(int(doc.get('k', 4))),
    'tetrahedron': lambda doc: complexes.tetrahedron_sphere(),
    's2': lambda doc: complexes.cw_sphere(),
    'cp2': lambda doc: complexes.cw_projective_plane(int(doc.get('orientation', 1))),
    'cp2bar': lambda doc: complexes.cw_projective_plane(-1),
    'cp2-minimal': lambda doc: complexes.minimal_projective_plane(int(doc.get('orientation', 1))),
    'torus': lambda doc: complexes.grid_torus(int(doc.get('k', 3)), int(doc.get('l', 3))),
}


def bundle_from_dict(document, base='.'):
    group = group_from_dict(_require(document, 'group', 'bundle'))
    labels = {}
    for entry in document.get('edges', ()):
        if len(entry) != 3:
            raise InputError("edge labels are [tail, head, element]", entry=entry)
        tail, head, element = (int(value) for value in entry)
        labels[(tail, head)] = element
    representation = None
    if 'representation' in document:
        representation = {int(g): _matrix_value(matrix, base, 'representation')
                          for g, matrix in document['representation'].items()}
    return complexes.FlatBundleRep(group, labels, representation, document.get('label', ''))


def complex_from_dict(document, base='.'):
    """Returns (complex, bundle or None)."""
    if not isinstance(document, dict):
        raise InputError("cell complex document must be an object")
    bundle = bundle_from_dict(document['bundle'], base) if 'bundle' in document else None
    if 'model' in document:
        name = str(document['model']).lower()
        if name not in MODELS:
            raise InputError("unknown complex model", model=name, known=sorted(MODELS))
        return MODELS[name](document), bundle
    if 'product' in document:
        first, second = (complex_from_dict(part, base)[0] for part in document['product'])
        return complexes.product_complex(first, second), bundle
    if 'union' in document:
        first, second = (complex_from_dict(part, base)[0] for part in document['union'])
        return complexes.disjoint_union(first, second), bundle
    if 'puncture' in document:
        return complexes.puncture(complex_from_dict(document['puncture'], base)[0]), bundle
    simplices = _require(document, 'simplices', 'cell complex')
    boundary_model = None
    if 'boundary_model' in document:
        boundary_model = complex_from_dict(document['boundary_model'], base)[0]
    orientation = document.get('orientation')
    built = complexes.simplicial_complex(
        simplices, None if orientation is None else np.array(orientation, dtype=int),
        tuple(tuple(cells) for cells in document.get('boundary_cells', ())), boundary_model,
        label=document.get('label', ''))
    return built, bundle


def read_complex(path):
    path = Path(path)
    return complex_from_dict(read_json(path), path.parent)


# Collar problems for the index command

def collar_from_dict(document, base='.'):
    """Interval collar with boundary operator B, APS data at each end and an
    optional cylinder extension length for the trivializing operator A_R."""
    mesh_doc = document.get('mesh', {})
    mesh = Mesh1D(mesh_doc.get('kind', 'interval'), int(mesh_doc.get('nodes', 64)),
                  float(mesh_doc.get('length', 1.0)))
    problem = {
        'mesh': mesh,
        'boundary': _matrix_value(_require(document, 'boundary', 'collar'), base, 'boundary'),
        'grading': None,
        'right': None,
        'left': None,
        'extension': document.get('extension'),
        'label': document.get('label', ''),
    }
    for key in ('grading', 'right', 'left'):
        if document.get(key) is not None:
            problem[key] = _matrix_value(document[key], base, key)
    return problem


def read_collar(path):
    path = Path(path)
    return collar_from_dict(read_json(path), path.parent)
