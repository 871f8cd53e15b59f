# apps/signature/complexes.py
"""Finite oriented cell complexes with integer boundary matrices.

Cochains of degree p are functions on the p-cells with the cells as an
orthonormal basis; the coboundary is the transpose of ∂. The total cochain
space is ordered by degree, then by cell index.

Simplicial models (Δ-complexes, cells stored as vertex tuples) carry the
Alexander–Whitney cup product; ring models declare their cup product; products
inherit one through the Koszul rule (α×β)∪(γ×δ) = (−1)^{|β||γ|}(α∪γ)×(β∪δ).
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Dict, Optional, Tuple

import numpy as np

from apps.graded_core.exceptions import DimensionMismatch, InputError

logger = logging.getLogger(__name__)

HALF_SHIFT = 'half-shift'
PRODUCT = 'product'
UNION = 'union'
RING = 'ring'
SYNTHESIZED = 'synthesized'


def _integer_matrix(matrix, rows, cols, name):
    array = np.asarray(matrix)
    if array.size == 0:
        return np.zeros((rows, cols), dtype=np.int64)
    if array.shape != (rows, cols):
        raise DimensionMismatch(f"{name} has the wrong shape", expected=(rows, cols), got=array.shape)
    rounded = np.rint(array.astype(float))
    if np.any(rounded != array):
        raise InputError(f"{name} must be an integer matrix")
    return rounded.astype(np.int64)


@dataclass(frozen=True, eq=False)
class CellComplex:
    cell_counts: Tuple[int, ...]
    boundaries: Tuple[np.ndarray, ...]
    orientation: Optional[np.ndarray] = None
    boundary_cells: Tuple[Tuple[int, ...], ...] = ()
    boundary_model: Optional['CellComplex'] = None
    simplices: Optional[Tuple[Tuple[tuple, ...], ...]] = None
    cup: Optional[Dict[Tuple[int, int], np.ndarray]] = None
    chirality_rule: str = SYNTHESIZED
    factors: Tuple['CellComplex', ...] = ()
    kron_positions: Optional[np.ndarray] = None
    group: Optional[object] = None
    deck: Optional[Tuple[np.ndarray, ...]] = None
    label: str = ''

    def __post_init__(self):
        counts = tuple(int(count) for count in self.cell_counts)
        if not counts or any(count < 0 for count in counts):
            raise InputError("cell counts must be non-negative, one per dimension", counts=counts)
        if len(self.boundaries) != len(counts) - 1:
            raise DimensionMismatch("one boundary matrix per positive dimension",
                                    expected=len(counts) - 1, got=len(self.boundaries))
        boundaries = tuple(_integer_matrix(matrix, counts[p - 1], counts[p], f"∂_{p}")
                           for p, matrix in zip(range(1, len(counts)), self.boundaries))
        for p in range(2, len(counts)):
            if np.any(boundaries[p - 2] @ boundaries[p - 1]):
                raise InputError("∂∘∂ does not vanish", degree=p)
        object.__setattr__(self, 'cell_counts', counts)
        object.__setattr__(self, 'boundaries', boundaries)

        marked = tuple(tuple(sorted(int(c) for c in cells)) for cells in self.boundary_cells)
        if marked and len(marked) != len(counts):
            raise DimensionMismatch("boundary marker needs one cell list per dimension")
        for p, cells in enumerate(marked):
            if cells and (cells[0] < 0 or cells[-1] >= counts[p]):
                raise InputError("boundary cell outside the complex", degree=p)
            if p and cells:
                faces = np.flatnonzero(np.any(boundaries[p - 1][:, list(cells)] != 0, axis=1))
                if not set(faces.tolist()) <= set(marked[p - 1]):
                    raise InputError("boundary marker is not a subcomplex", degree=p)
        object.__setattr__(self, 'boundary_cells', marked)

        if self.orientation is not None:
            orientation = _integer_matrix(np.asarray(self.orientation).reshape(1, -1), 1, counts[-1],
                                          'orientation').reshape(-1)
            if len(counts) > 1:
                cycle = boundaries[-1] @ orientation
                allowed = set(marked[-2]) if marked else set()
                outside = [c for c in np.flatnonzero(cycle) if c not in allowed]
                if outside:
                    raise InputError("orientation class is not a (relative) cycle", cells=outside[:5])
            object.__setattr__(self, 'orientation', orientation)

        if self.deck is not None:
            deck = tuple(np.asarray(matrix, dtype=np.complex128) for matrix in self.deck)
            if self.group is None or len(deck) != self.group.order:
                raise DimensionMismatch("deck action needs one matrix per group element")
            for matrix in deck:
                if matrix.shape != (self.total_dim, self.total_dim):
                    raise DimensionMismatch("deck matrix does not act on the cochains", shape=matrix.shape)
            object.__setattr__(self, 'deck', deck)

    @property
    def dimension(self):
        return len(self.cell_counts) - 1

    @property
    def total_dim(self):
        return sum(self.cell_counts)

    @cached_property
    def offsets(self):
        return np.concatenate([[0], np.cumsum(self.cell_counts)]).astype(int)

    @cached_property
    def degrees(self):
        return np.concatenate([np.full(count, p, dtype=int) for p, count in enumerate(self.cell_counts)])

    def block(self, p):
        return slice(int(self.offsets[p]), int(self.offsets[p + 1]))

    def boundary(self, p):
        """∂_p : C_p → C_{p−1}."""
        return self.boundaries[p - 1]

    @cached_property
    def coboundary(self):
        """Total d with blocks d_p = ∂_{p+1}ᵀ."""
        d = np.zeros((self.total_dim, self.total_dim), dtype=np.complex128)
        for p in range(self.dimension):
            d[self.block(p + 1), self.block(p)] = self.boundary(p + 1).T
        return d

    @cached_property
    def parity_grading(self):
        """Γ = (−1)^p on C^p."""
        return np.diag((-1.0) ** self.degrees).astype(np.complex128)

    @property
    def is_closed(self):
        return not any(self.boundary_cells)

    @property
    def is_oriented(self):
        return self.orientation is not None

    @property
    def euler_characteristic(self):
        return sum((-1) ** p * count for p, count in enumerate(self.cell_counts))

    @cached_property
    def boundary_mask(self):
        mask = np.zeros(self.total_dim, dtype=bool)
        for p, cells in enumerate(self.boundary_cells):
            mask[[int(self.offsets[p]) + c for c in cells]] = True
        return mask

    def cup_tensor(self, p, q):
        """T with (α∪β)(σ) = Σ T[σ, i, j] α_i β_j for α ∈ C^p, β ∈ C^q."""
        if p + q > self.dimension:
            raise DimensionMismatch("cup product leaves the complex", p=p, q=q)
        if self.cup is None:
            raise InputError("complex carries no cup product", label=self.label)
        shape = (self.cell_counts[p + q], self.cell_counts[p], self.cell_counts[q])
        return self.cup.get((p, q), np.zeros(shape))

    def group_action(self, g):
        if self.deck is None:
            return np.eye(self.total_dim)
        return self.deck[g]

    def describe(self):
        return {'label': self.label, 'cells': list(self.cell_counts), 'closed': self.is_closed,
                'euler': self.euler_characteristic, 'chirality': self.chirality_rule,
                'group': self.group.label if self.group is not None else None}


# Simplicial (Δ-complex) models

def _faces(simplex):
    return [simplex[:j] + simplex[j + 1:] for j in range(len(simplex))]


def alexander_whitney(simplices):
    """Cup tensors of a Δ-complex: front p-face times back q-face."""
    index = [{cell: position for position, cell in enumerate(cells)} for cells in simplices]
    cup = {}
    top = len(simplices) - 1
    for p in range(top + 1):
        for q in range(top + 1 - p):
            tensor = np.zeros((len(simplices[p + q]), len(simplices[p]), len(simplices[q])))
            for position, simplex in enumerate(simplices[p + q]):
                front, back = simplex[:p + 1], simplex[p:]
                if front in index[p] and back in index[q]:
                    tensor[position, index[p][front], index[q][back]] = 1.0
            cup[(p, q)] = tensor
    return cup


def simplicial_complex(simplices, orientation=None, boundary_cells=(), boundary_model=None,
                       chirality_rule=SYNTHESIZED, label=''):
    """Δ-complex from vertex tuples per dimension; faces must be present as cells."""
    simplices = tuple(tuple(tuple(cell) for cell in cells) for cells in simplices)
    index = [{cell: position for position, cell in enumerate(cells)} for cells in simplices]
    boundaries = []
    for p in range(1, len(simplices)):
        matrix = np.zeros((len(simplices[p - 1]), len(simplices[p])), dtype=np.int64)
        for position, simplex in enumerate(simplices[p]):
            for j, face in enumerate(_faces(simplex)):
                if face not in index[p - 1]:
                    raise InputError("face of a simplex is missing", simplex=simplex, face=face)
                matrix[index[p - 1][face], position] += (-1) ** j
        boundaries.append(matrix)
    return CellComplex(tuple(len(cells) for cells in simplices), tuple(boundaries), orientation,
                       boundary_cells, boundary_model, simplices, alexander_whitney(simplices),
                       chirality_rule, label=label)


def point(orientation=1):
    return CellComplex((1,), (), np.array([orientation]), simplices=(((0,),),),
                       cup={(0, 0): np.ones((1, 1, 1))}, chirality_rule=RING, label='pt')


def polygon(k=4):
    """Circle with k vertices and edges e_i = (v_i, v_{i+1})."""
    if k < 3:
        raise InputError("a polygon needs at least three vertices", k=k)
    vertices = tuple((i,) for i in range(k))
    edges = tuple((i, (i + 1) % k) for i in range(k))
    return simplicial_complex((vertices, edges), np.ones(k, dtype=int), chirality_rule=HALF_SHIFT,
                              label=f"circle{k}")


def interval(segments=1):
    vertices = tuple((i,) for i in range(segments + 1))
    edges = tuple((i, i + 1) for i in range(segments))
    ends = disjoint_union(point(-1), point(1))
    return simplicial_complex((vertices, edges), np.ones(segments, dtype=int),
                              boundary_cells=((0, segments), ()), boundary_model=ends,
                              label=f"interval{segments}")


def disk(k=4):
    """Cone on the k-gon; boundary cells are the polygon's vertices and edges."""
    center = k
    vertices = tuple((i,) for i in range(k + 1))
    edges = tuple((i, (i + 1) % k) for i in range(k)) + tuple((i, center) for i in range(k))
    triangles = tuple((i, (i + 1) % k, center) for i in range(k))
    return simplicial_complex((vertices, edges, triangles), np.ones(k, dtype=int),
                              boundary_cells=(tuple(range(k)), tuple(range(k)), ()),
                              boundary_model=polygon(k), label=f"disk{k}")


def tetrahedron_sphere():
    """Boundary of the 3-simplex, oriented as ∂[0123]."""
    vertices = tuple((i,) for i in range(4))
    edges = tuple(combinations(range(4), 2))
    triangles = tuple(combinations(range(4), 3))
    orientation = [(-1) ** next(iter(set(range(4)) - set(t))) for t in triangles]
    return simplicial_complex((vertices, edges, triangles), np.array(orientation), label='S2(simplicial)')


def orientation_cycle(complex_):
    """Integer top cycle with +1 on the first facet, propagated across shared codimension-one faces."""
    top = complex_.boundary(complex_.dimension)
    signs = np.zeros(top.shape[1], dtype=np.int64)
    signs[0] = 1
    stack = [0]
    while stack:
        facet = stack.pop()
        for face in np.flatnonzero(top[:, facet]):
            for other in np.flatnonzero(top[face]):
                if other == facet:
                    continue
                wanted = -signs[facet] * top[face, facet] * top[face, other]
                if not signs[other]:
                    signs[other] = wanted
                    stack.append(other)
                elif signs[other] != wanted:
                    raise InputError("complex is not orientable", label=complex_.label, facet=int(other))
    if not signs.all():
        raise InputError("facets are not connected through codimension-one faces", label=complex_.label)
    return signs


def _closure(facets):
    """All faces of the given facets, one sorted layer per dimension; facets keep their order."""
    top = len(facets[0]) - 1
    layers = [sorted({face for facet in facets for face in combinations(facet, p + 1)}) for p in range(top)]
    return tuple(tuple(layer) for layer in layers) + (tuple(tuple(facet) for facet in facets),)


# The vertices are the points of Z₃², v = 3x + y; the facets are four orbits under translation.
MINIMAL_CP2_FACETS = (
    (0, 1, 2, 3, 5), (0, 1, 2, 3, 4), (0, 1, 2, 4, 5), (3, 4, 5, 6, 7), (3, 4, 5, 7, 8), (3, 4, 5, 6, 8),
    (0, 1, 6, 7, 8), (1, 2, 6, 7, 8), (0, 2, 6, 7, 8), (0, 1, 3, 4, 6), (1, 2, 4, 5, 7), (0, 2, 3, 5, 8),
    (0, 3, 4, 6, 7), (1, 4, 5, 7, 8), (2, 3, 5, 6, 8), (0, 1, 3, 6, 7), (1, 2, 4, 7, 8), (0, 2, 5, 6, 8),
    (0, 1, 3, 5, 7), (1, 2, 3, 4, 8), (0, 2, 4, 5, 6), (1, 3, 4, 6, 8), (2, 4, 5, 6, 7), (0, 3, 5, 7, 8),
    (0, 2, 4, 6, 7), (0, 1, 5, 7, 8), (1, 2, 3, 6, 8), (0, 1, 4, 5, 6), (1, 2, 3, 5, 7), (0, 2, 3, 4, 8),
    (0, 3, 4, 7, 8), (1, 4, 5, 6, 8), (2, 3, 5, 6, 7), (1, 2, 3, 6, 7), (0, 2, 4, 7, 8), (0, 1, 5, 6, 8),
)


def minimal_projective_plane(orientation=1):
    """The 9-vertex triangulation of CP², f-vector (9, 36, 84, 90, 36).

    The cup product is Alexander–Whitney on the simplicial cochains; with
    orientation=1 the generator of H² squares to +[CP²].
    """
    simplices = _closure(MINIMAL_CP2_FACETS)
    bare = simplicial_complex(simplices, label='CP2(9)')
    return simplicial_complex(simplices, orientation * orientation_cycle(bare),
                              label='CP2(9)' if orientation == 1 else 'CP2bar(9)')


def puncture(complex_, facet=0):
    """Remove one open top simplex; the sphere bounding it becomes ∂M."""
    if complex_.simplices is None or not complex_.is_closed or not complex_.is_oriented:
        raise InputError("punctures need a closed oriented simplicial model", label=complex_.label)
    n = complex_.dimension
    removed = complex_.simplices[n][facet]
    keep = [c for c in range(complex_.cell_counts[n]) if c != facet]
    simplices = complex_.simplices[:n] + (tuple(complex_.simplices[n][c] for c in keep),)
    index = [{cell: position for position, cell in enumerate(cells)} for cells in simplices]
    sphere_cells = tuple(tuple(combinations(removed, p + 1)) for p in range(n))
    boundary_cells = tuple(tuple(index[p][cell] for cell in cells) for p, cells in enumerate(sphere_cells)) + ((),)
    orientation = complex_.orientation[keep]
    chain = complex_.boundary(n)[:, keep] @ orientation
    sphere_orientation = np.array([chain[index[n - 1][cell]] for cell in sphere_cells[-1]], dtype=np.int64)
    sphere = simplicial_complex(sphere_cells, sphere_orientation, label=f"S{n - 1}(simplicial)")
    return simplicial_complex(simplices, orientation, boundary_cells, sphere, label=f"{complex_.label}-pt")


def cone_cap(complex_):
    """The closed complex M ∪ C(∂M): one new apex joined to every boundary simplex.

    Cells of M keep their positions; cone cells follow them in each degree.
    A deck action on M extends with the apex fixed.
    """
    if complex_.is_closed:
        return complex_
    if complex_.simplices is None or not complex_.is_oriented:
        raise InputError("capping needs an oriented simplicial model", label=complex_.label)
    n = complex_.dimension
    apex = 1 + max(cell[0] for cell in complex_.simplices[0])
    layers = [list(cells) for cells in complex_.simplices]
    layers[0].append((apex,))
    cone_of = {}
    for p, cells in enumerate(complex_.boundary_cells[:n]):
        for c in cells:
            cone_of[(p, c)] = len(layers[p + 1])
            layers[p + 1].append(tuple(complex_.simplices[p][c]) + (apex,))
    label = f"{complex_.label}+cone"
    bare = simplicial_complex(layers, label=label)
    chain = complex_.boundary(n) @ complex_.orientation
    cone_part = np.zeros(bare.cell_counts[n] - complex_.cell_counts[n], dtype=np.int64)
    for c in complex_.boundary_cells[n - 1]:
        cone_part[cone_of[(n - 1, c)] - complex_.cell_counts[n]] = chain[c]
    for sign in (1, -1):
        orientation = np.concatenate([complex_.orientation, sign * cone_part])
        if not np.any(bare.boundary(n) @ orientation):
            break
    else:
        raise InputError("orientation of M does not extend over the cone", label=complex_.label)
    deck = _cone_deck(complex_, bare, cone_of) if complex_.deck is not None else None
    logger.debug(f"capped {complex_.label}: {bare.cell_counts} cells")
    return CellComplex(bare.cell_counts, bare.boundaries, orientation, (), None, bare.simplices, bare.cup,
                       SYNTHESIZED, group=complex_.group, deck=deck, label=label)


def _cone_deck(complex_, capped, cone_of):
    """Extend degree-preserving permutation deck matrices over the cone cells."""
    deck = []
    for matrix in complex_.deck:
        moved = np.zeros((capped.total_dim, capped.total_dim), dtype=np.complex128)
        for p in range(complex_.dimension + 1):
            rows = capped.offsets[p] + np.arange(complex_.cell_counts[p])
            moved[np.ix_(rows, rows)] = matrix[complex_.block(p), complex_.block(p)]
        apex = capped.offsets[0] + complex_.cell_counts[0]
        moved[apex, apex] = 1.0
        for (p, c), position in cone_of.items():
            column = matrix[complex_.block(p), complex_.offsets[p] + c]
            target = int(np.argmax(np.abs(column)))
            moved[capped.offsets[p + 1] + cone_of[(p, target)], capped.offsets[p + 1] + position] = column[target]
        deck.append(moved)
    return tuple(deck)


# Ring models: minimal CW structures with d = 0 and a declared cup product

def cw_sphere():
    """S² with one cell in degrees 0 and 2."""
    unit = np.ones((1, 1, 1))
    cup = {(0, 0): unit, (0, 2): unit, (2, 0): unit}
    return CellComplex((1, 0, 1), (np.zeros((1, 0)), np.zeros((0, 1))), np.array([1]), cup=cup,
                       chirality_rule=RING, label='S2')


def cw_projective_plane(orientation=1):
    """CP² with cells in degrees 0, 2, 4 and x∪x = orientation·[pt]."""
    unit = np.ones((1, 1, 1))
    cup = {(0, 0): unit, (0, 2): unit, (2, 0): unit, (0, 4): unit, (4, 0): unit,
           (2, 2): unit * orientation}
    return CellComplex((1, 0, 1, 0, 1), (np.zeros((1, 0)), np.zeros((0, 1)), np.zeros((1, 0)), np.zeros((0, 1))),
                       np.array([1]), cup=cup, chirality_rule=RING,
                       label='CP2' if orientation == 1 else 'CP2bar')


# Products, unions, covers

def _product_positions(first, second):
    """Position in X×Y (degree-sorted) of the Kronecker index a·|C(Y)| + b."""
    n2 = second.total_dim
    entries = []
    for a in range(first.total_dim):
        for b in range(n2):
            p, q = int(first.degrees[a]), int(second.degrees[b])
            entries.append((p + q, p, a, b))
    order = sorted(range(len(entries)), key=lambda i: entries[i])
    positions = np.empty(len(entries), dtype=int)
    positions[order] = np.arange(len(entries))
    return positions


def kron_to_total(matrix, positions):
    """Conjugate an operator on C(X)⊗C(Y) into the degree-sorted basis of X×Y."""
    size = positions.size
    result = np.zeros((size, size), dtype=np.asarray(matrix).dtype)
    result[np.ix_(positions, positions)] = matrix
    return result


def _product_cup(first, second, positions):
    n1, n2 = first.total_dim, second.total_dim
    top = first.dimension + second.dimension
    local = np.empty(n1 * n2, dtype=int)
    degrees = np.empty(n1 * n2, dtype=int)
    for kron in range(n1 * n2):
        degrees[kron] = int(first.degrees[kron // n2] + second.degrees[kron % n2])
    offsets = np.concatenate([[0], np.cumsum(np.bincount(degrees, minlength=top + 1))])
    for kron in range(n1 * n2):
        local[kron] = positions[kron] - offsets[degrees[kron]]
    counts = np.diff(offsets)

    cup = {}
    for r in range(top + 1):
        for s in range(top + 1 - r):
            tensor = np.zeros((counts[r + s], counts[r], counts[s]))
            for p1 in range(max(0, r - second.dimension), min(r, first.dimension) + 1):
                p2 = r - p1
                for q1 in range(max(0, s - second.dimension), min(s, first.dimension) + 1):
                    q2 = s - q1
                    if p1 + q1 > first.dimension or p2 + q2 > second.dimension:
                        continue
                    t1 = first.cup_tensor(p1, q1)
                    t2 = second.cup_tensor(p2, q2)
                    if not t1.any() or not t2.any():
                        continue
                    sign = (-1) ** (p2 * q1)
                    for (a, i, k) in zip(*np.nonzero(t1)):
                        for (b, j, l) in zip(*np.nonzero(t2)):
                            out = local[(first.offsets[p1 + q1] + a) * n2 + second.offsets[p2 + q2] + b]
                            left = local[(first.offsets[p1] + i) * n2 + second.offsets[p2] + j]
                            right = local[(first.offsets[q1] + k) * n2 + second.offsets[q2] + l]
                            tensor[out, left, right] += sign * t1[a, i, k] * t2[b, j, l]
            cup[(r, s)] = tensor
    return cup


def product_complex(first, second):
    """X × Y with ∂(σ×τ) = ∂σ×τ + (−1)^{|σ|} σ×∂τ, i.e. d = d_X⊗1 + Γ_X⊗d_Y."""
    positions = _product_positions(first, second)
    d = kron_to_total(np.kron(first.coboundary, np.eye(second.total_dim))
                      + np.kron(first.parity_grading, second.coboundary), positions)
    top = first.dimension + second.dimension
    counts = [0] * (top + 1)
    for a in range(first.total_dim):
        for b in range(second.total_dim):
            counts[int(first.degrees[a] + second.degrees[b])] += 1
    offsets = np.concatenate([[0], np.cumsum(counts)]).astype(int)
    boundaries = tuple(np.rint(d[offsets[p + 1]:offsets[p + 2], offsets[p]:offsets[p + 1]].real.T).astype(np.int64)
                       for p in range(top))

    orientation = None
    if first.is_oriented and second.is_oriented:
        top_kron = np.kron(np.concatenate([np.zeros(first.total_dim - first.cell_counts[-1]), first.orientation]),
                           np.concatenate([np.zeros(second.total_dim - second.cell_counts[-1]),
                                           second.orientation]))
        total = np.zeros(positions.size)
        total[positions] = top_kron
        orientation = np.rint(total[offsets[top]:]).astype(np.int64)

    boundary_cells = ()
    if not (first.is_closed and second.is_closed):
        mask = np.zeros(positions.size, dtype=bool)
        mask[positions] = np.logical_or.outer(first.boundary_mask, second.boundary_mask).reshape(-1)
        boundary_cells = tuple(tuple(np.flatnonzero(mask[offsets[p]:offsets[p + 1]]).tolist())
                               for p in range(top + 1))

    boundary_model = None
    if first.boundary_model is not None and second.is_closed:
        boundary_model = product_complex(first.boundary_model, second)

    cup = _product_cup(first, second, positions) if first.cup is not None and second.cup is not None else None

    group, deck = _product_deck(first, second, positions)
    return CellComplex(tuple(counts), boundaries, orientation, boundary_cells, boundary_model, None, cup,
                       PRODUCT, (first, second), positions, group, deck, f"{first.label}x{second.label}")


def _product_deck(first, second, positions):
    if first.group is None and second.group is None:
        return None, None
    from .groups import direct_product, trivial_group

    first_group = first.group or trivial_group()
    second_group = second.group or trivial_group()
    group = direct_product(first_group, second_group)
    deck = []
    for a in range(first_group.order):
        for b in range(second_group.order):
            deck.append(kron_to_total(np.kron(first.group_action(a), second.group_action(b)), positions))
    return group, tuple(deck)


def disjoint_union(first, second):
    if first.dimension != second.dimension:
        raise DimensionMismatch("disjoint unions need equal dimensions",
                                first=first.dimension, second=second.dimension)
    if (first.group is None) != (second.group is None) or (first.group is not None and first.group is not second.group):
        raise InputError("disjoint union needs the same covering group on both parts")
    counts = tuple(a + b for a, b in zip(first.cell_counts, second.cell_counts))
    boundaries = tuple(np.block([[f, np.zeros((f.shape[0], s.shape[1]), dtype=np.int64)],
                                 [np.zeros((s.shape[0], f.shape[1]), dtype=np.int64), s]])
                       for f, s in zip(first.boundaries, second.boundaries))
    orientation = None
    if first.is_oriented and second.is_oriented:
        orientation = np.concatenate([first.orientation, second.orientation])
    boundary_cells = ()
    if first.boundary_cells or second.boundary_cells:
        boundary_cells = tuple(
            tuple(first.boundary_cells[p] if first.boundary_cells else ())
            + tuple(first.cell_counts[p] + c for c in (second.boundary_cells[p] if second.boundary_cells else ()))
            for p in range(len(counts)))
    simplices = None
    cup = None
    if first.cup is not None and second.cup is not None:
        cup = {}
        for (p, q) in first.cup:
            t1, t2 = first.cup_tensor(p, q), second.cup_tensor(p, q)
            tensor = np.zeros((counts[p + q], counts[p], counts[q]))
            tensor[:t1.shape[0], :t1.shape[1], :t1.shape[2]] = t1
            tensor[t1.shape[0]:, t1.shape[1]:, t1.shape[2]:] = t2
            cup[(p, q)] = tensor
    union = CellComplex(counts, boundaries, orientation, boundary_cells, None, simplices, cup, UNION,
                        (first, second), None, first.group, None, f"{first.label}+{second.label}")
    if first.deck is not None:
        deck = tuple(_union_matrix(union, first, second, a, b) for a, b in zip(first.deck, second.deck))
        union = CellComplex(counts, boundaries, orientation, boundary_cells, None, simplices, cup, UNION,
                            (first, second), None, first.group, deck, union.label)
    return union


def _union_matrix(union, first, second, first_matrix, second_matrix):
    """Block-diagonal operator in the degree-sorted basis of a disjoint union."""
    index_first, index_second = union_positions(union, first, second)
    result = np.zeros((union.total_dim, union.total_dim), dtype=np.complex128)
    result[np.ix_(index_first, index_first)] = first_matrix
    result[np.ix_(index_second, index_second)] = second_matrix
    return result


def union_positions(union, first, second):
    index_first = np.concatenate([np.arange(first.cell_counts[p]) + union.offsets[p]
                                  for p in range(union.dimension + 1)]).astype(int)
    index_second = np.concatenate([np.arange(second.cell_counts[p]) + union.offsets[p] + first.cell_counts[p]
                                   for p in range(union.dimension + 1)]).astype(int)
    return index_first, index_second


def union_operator(union, first_matrix, second_matrix):
    first, second = union.factors
    return _union_matrix(union, first, second, first_matrix, second_matrix)


@dataclass(frozen=True, eq=False)
class FlatBundleRep:
    """Flat C[G]-bundle on a Δ-complex: group labels on oriented edges and,
    optionally, a unitary representation given on the generators."""
    group: object
    edge_labels: Dict[Tuple[int, int], int] = field(default_factory=dict)
    representation: Optional[Dict[int, np.ndarray]] = None
    label: str = ''

    def label_of(self, tail, head):
        if (tail, head) in self.edge_labels:
            return int(self.edge_labels[(tail, head)])
        if (head, tail) in self.edge_labels:
            return int(self.group.inverses[int(self.edge_labels[(head, tail)])])
        return self.group.identity

    def check_flat(self, complex_):
        """Products of labels around every 2-simplex must be trivial."""
        if complex_.simplices is None:
            raise InputError("flat bundles are defined on simplicial models")
        for vertices in (complex_.simplices[2] if complex_.dimension >= 2 else ()):
            a, b, c = vertices[:3]
            around = self.group.multiply(self.label_of(a, b), self.label_of(b, c))
            if around != self.label_of(a, c):
                raise InputError("inconsistent cocycle: holonomy around a 2-simplex", simplex=vertices)
        for (tail, head), g in self.edge_labels.items():
            if (tail, head) not in set(complex_.simplices[1]) and (head, tail) not in set(complex_.simplices[1]):
                raise InputError("label on an edge that is not in the complex", edge=(tail, head))
            if not 0 <= int(g) < self.group.order:
                raise InputError("edge label outside the group", edge=(tail, head), label=g)

    @cached_property
    def matrices(self):
        if self.representation is None:
            return None
        from .groups import extend_representation

        return extend_representation(self.group, self.representation)

    def character(self):
        if self.matrices is None:
            raise InputError("bundle carries no fiber representation")
        return np.array([np.trace(self.matrices[g]) for g in range(self.group.order)])


def cover(complex_, bundle):
    """The |G|-sheeted cover of a Δ-complex with deck action by left multiplication.

    The lift of (v₀,…,v_p) to sheet h is ((v₀,h), (v₁,h·g₀₁), …, (v_p,h·g₀ₚ)).
    """
    bundle.check_flat(complex_)
    group = bundle.group
    order = group.order
    lifted = []
    for cells in complex_.simplices:
        layer = []
        for simplex in cells:
            for h in range(order):
                sheets = [h] + [group.multiply(h, bundle.label_of(simplex[0], v)) for v in simplex[1:]]
                layer.append(tuple(v * order + s for v, s in zip(simplex, sheets)))
        lifted.append(tuple(layer))
    orientation = None
    if complex_.is_oriented:
        orientation = np.repeat(complex_.orientation, order)
    boundary_cells = ()
    if complex_.boundary_cells:
        boundary_cells = tuple(tuple(c * order + h for c in cells for h in range(order))
                               for cells in complex_.boundary_cells)
    rule = HALF_SHIFT if complex_.chirality_rule == HALF_SHIFT else SYNTHESIZED
    covered = simplicial_complex(lifted, orientation, boundary_cells, None, rule,
                                 f"{complex_.label}~{group.label}")
    index = [{cell: position for position, cell in enumerate(cells)} for cells in lifted]
    deck = []
    for g in range(order):
        matrix = np.zeros((covered.total_dim, covered.total_dim))
        for p, cells in enumerate(lifted):
            for position, simplex in enumerate(cells):
                base, sheet = position // order, position % order
                moved = complex_.simplices[p][base]
                target_sheet = group.multiply(g, sheet)
                sheets = [target_sheet] + [group.multiply(target_sheet, bundle.label_of(moved[0], v))
                                           for v in moved[1:]]
                image = tuple(v * order + s for v, s in zip(moved, sheets))
                matrix[covered.offsets[p] + index[p][image], covered.offsets[p] + position] = 1.0
        deck.append(matrix)
    logger.debug(f"cover {covered.label}: {covered.cell_counts} cells")
    return CellComplex(covered.cell_counts, covered.boundaries, covered.orientation, covered.boundary_cells,
                       _cover_boundary(complex_, bundle), covered.simplices, covered.cup, rule, group=group,
                       deck=tuple(deck), label=covered.label)


def grid_torus(k=3, l=3):
    return product_complex(polygon(k), polygon(l))


def _cover_boundary(complex_, bundle):
    """Cover of the boundary model by the restricted bundle, when the model is simplicial."""
    model = complex_.boundary_model
    if model is None or model.simplices is None:
        return None
    edges = set(model.simplices[1]) if model.dimension >= 1 else set()
    labels = {edge: g for edge, g in bundle.edge_labels.items() if edge in edges or edge[::-1] in edges}
    return cover(model, FlatBundleRep(bundle.group, labels, bundle.representation, bundle.label))
