# apps/dirac_grid/products.py
"""Collars of M × N for an interval-based M and a closed N.

The product keeps the collar coordinate of M, so near the boundary it is
again a collar operator, with boundary operator and trivializing lift

    even × even   B⊗z_N + 1⊗D_N                    A⊗z_N
    even × odd    Γ₁⊗B⊗1 + Γ₂⊗1⊗D_N   (graded by the Γ-model grading)   Γ₁⊗A⊗1
    odd × even    B⊗1 − i z_∂M⊗z_N D_N (graded by z_∂M⊗z_N)            A⊗1
    odd × odd     B⊗1 + ẑ·z_∂M⊗D_N   on v₁⊗E_∂M⊗E_N                      A⊗1

where ẑ = ⟨v₁, −iΓ₁Γ₂ v₁⟩ is 1 for a consistent Γ-model. For a twisted
circle N everything splits over Fourier modes.
"""
import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable, NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg, sparse

from apps.graded_core.clifford import CliffordGens, gamma_basis, standard_clifford
from apps.graded_core.exceptions import DimensionMismatch, GapViolation, InputError, ParityMismatch
from apps.graded_core.graded import as_matrix, spectral_norm
from apps.kclass.loops import TWO_PI, LoopOperatorFamily, spectral_flow, unitary_flow
from apps.kclass.modules import KasparovModule, k0_of_kernel
from apps.kclass.products import det_winding

from .boundary import BoundaryOperator, TrivializingOp, graph_basis, negative_basis, spectral_gap
from .circle import fourier_matrix, grid_operator, is_separable, mode_values
from .mesh import Mesh1D
from .operators import (
    ODD_CASE, DiscreteDirac, build_interval_dirac, impose_aps, matching_determinant, numerical_index,
    pairing_unitary,
)

logger = logging.getLogger(__name__)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
PAULI_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def _parity_of(factor):
    if isinstance(factor, LoopOperatorFamily):
        return 1
    if isinstance(factor, KasparovModule):
        return factor.parity
    if isinstance(factor, DiscreteDirac):
        return 1 if factor.parity_case == ODD_CASE else 0
    raise InputError("unsupported product factor", factor=type(factor).__name__)


@dataclass(frozen=True, eq=False)
class ProductCollar:
    """Boundary data of M × N as a function of the N operator (or one of its modes)."""
    parity_pair: Tuple[int, int]
    boundary: BoundaryOperator
    second_grading: Optional[np.ndarray] = None
    gens: CliffordGens = field(default_factory=standard_clifford)

    def __post_init__(self):
        if (self.parity_pair[0] == 1) != self.boundary.is_odd_collar:
            raise ParityMismatch("boundary operator does not match the parity of M",
                                 parity=self.parity_pair[0])
        if self.parity_pair[1] == 0 and self.second_grading is None:
            raise ParityMismatch("an even N needs its grading")

    def boundary_for(self, second_matrix):
        second = as_matrix(second_matrix, 'N operator')
        b = self.boundary.matrix
        first_identity, second_identity = np.eye(b.shape[0]), np.eye(second.shape[0])
        pair = tuple(self.parity_pair)
        if pair == (0, 0):
            return BoundaryOperator(np.kron(b, self.second_grading) + np.kron(first_identity, second))
        if pair == (0, 1):
            matrix = (np.kron(self.gens.gamma1, np.kron(b, second_identity))
                      + np.kron(self.gens.gamma2, np.kron(first_identity, second)))
            return BoundaryOperator(matrix, np.kron(self.gens.grading, np.eye(b.shape[0] * second.shape[0])))
        z = self.boundary.grading
        if pair == (1, 0):
            matrix = np.kron(b, second_identity) - 1j * np.kron(z, self.second_grading @ second)
            return BoundaryOperator(matrix, np.kron(z, self.second_grading))
        full = (np.kron(np.eye(2), np.kron(b, second_identity))
                + np.kron(self.gens.product_grading, np.kron(z, second)))
        v1, _ = gamma_basis(self.gens)
        frame = np.kron(v1[:, None], np.eye(b.shape[0] * second.shape[0]))
        return BoundaryOperator(frame.conj().T @ full @ frame)

    def lift(self, perturbation, second_dim):
        """The trivializing operator of M transported to the product boundary."""
        a = as_matrix(perturbation, 'trivializing operator')
        pair = tuple(self.parity_pair)
        if pair == (0, 0):
            return np.kron(a, self.second_grading)
        if pair == (0, 1):
            return np.kron(self.gens.gamma1, np.kron(a, np.eye(second_dim)))
        return np.kron(a, np.eye(second_dim))


def _stencil_from_mass(mesh, mass):
    """Constant-mass stencil assembled with Kronecker products."""
    cells, h = mesh.cells, mesh.spacing
    here = sparse.eye(cells, cells + 1, format='csr')
    ahead = sparse.eye(cells, cells + 1, k=1, format='csr')
    identity = sparse.identity(mass.shape[0])
    return (-1j * (sparse.kron((ahead - here) / h, identity) - sparse.kron((ahead + here) / 2, mass))).tocsr()


@dataclass(frozen=True, eq=False)
class ProductDirac:
    collar: ProductCollar
    first: DiscreteDirac
    second: object
    tau: float = 0.0
    separable: bool = True

    @property
    def parity_pair(self):
        return self.collar.parity_pair

    def second_matrices(self):
        """One N matrix per collar: Fourier modes, or the whole operator."""
        if isinstance(self.second, KasparovModule):
            return [self.second.matrix]
        if self.separable:
            return [np.array([[value]]) for value in mode_values(self.second, self.tau)]
        return [self.second.at(self.tau)]

    def collars(self):
        return [build_interval_dirac(self.first.mesh, self.collar.boundary_for(matrix),
                                     label=f"{self.first.label}×mode{index}")
                for index, matrix in enumerate(self.second_matrices())]

    def grid_stencil(self):
        """The product operator on mesh × circle grid, nodes major and circle points last."""
        if isinstance(self.second, KasparovModule):
            second = self.second.matrix
        elif is_separable(self.second, self.tau):
            second = grid_operator(self.second, self.tau)
        else:
            second = self.second.at(self.tau)
        return _stencil_from_mass(self.first.mesh, self.collar.boundary_for(second).matrix)

    def mode_block_residual(self):
        """max_n ‖Δ_grid(1⊗e_n) − (1⊗e_n)Δ_n‖ over Fourier modes."""
        if not isinstance(self.second, LoopOperatorFamily) or not self.separable:
            raise DimensionMismatch("mode blocks need a separable circle factor")
        stencil = self.grid_stencil()
        transform = fourier_matrix(self.second.dim)
        residual = 0.0
        for index, collar in enumerate(self.collars()):
            mode = transform[:, index][:, None]
            fiber = collar.fiber_dim
            nodes_in = sparse.kron(sparse.identity(collar.mesh.nodes * fiber), mode)
            cells_out = sparse.kron(sparse.identity(collar.mesh.cells * fiber), mode)
            difference = stencil @ nodes_in - cells_out @ collar.stencil()
            residual = max(residual, float(np.max(np.abs(difference.toarray()))))
        return residual


def build_product_dirac(first, second, parity_pair=None, tau=0.0, gens=None, separable=True):
    """Product collar of an interval operator with a closed N factor."""
    inferred = (_parity_of(first), _parity_of(second))
    if parity_pair is not None and tuple(parity_pair) != inferred:
        raise ParityMismatch("declared parities disagree with the factors", declared=parity_pair,
                             inferred=inferred)
    second_grading = second.grading if isinstance(second, KasparovModule) and second.parity == 0 else None
    collar = ProductCollar(inferred, first.boundary, second_grading, gens or standard_clifford())
    if isinstance(second, LoopOperatorFamily) and separable and not is_separable(second, tau):
        separable = False
    return ProductDirac(collar, first, second, tau, separable)


def lift_trivializing(product, perturbation, second_matrix=None):
    """Â for one collar of the product, with the gap check gap(B̂ + Â) ≥ gap(B + A)."""
    second_matrix = product.second_matrices()[0] if second_matrix is None else as_matrix(second_matrix)
    boundary = product.collar.boundary_for(second_matrix)
    lifted = product.collar.lift(perturbation, second_matrix.shape[0])
    base_gap = spectral_gap(product.first.boundary.matrix + as_matrix(perturbation))
    gap = spectral_gap(boundary.matrix + lifted)
    if gap < base_gap * (1 - 1e-9):
        raise GapViolation("lifted operator closes the gap", gap=gap, factor_gap=base_gap)
    return TrivializingOp(lifted, boundary)


# Factor models for the product index checks.

@dataclass(frozen=True, eq=False)
class EvenCollarModel:
    mesh: Mesh1D
    boundary: BoundaryOperator
    right: np.ndarray
    left: Optional[np.ndarray] = None
    label: str = ''

    @classmethod
    def scalar(cls, b, a_right, a_left=None, mesh=None):
        mesh = mesh or Mesh1D.interval(32)
        left = None if a_left is None else [[a_left]]
        return cls(mesh, BoundaryOperator([[b]]), as_matrix([[a_right]]),
                   None if left is None else as_matrix(left), f"even(b={b},aR={a_right},aL={a_left})")

    def dirac(self):
        return impose_aps(build_interval_dirac(self.mesh, self.boundary, self.label),
                          right=self.right, left=self.left)

    def index(self):
        return numerical_index(self.dirac()).index


def _scalar_right_path(s, flow, b, radius):
    theta = math.pi / 2 - TWO_PI * flow * s
    a = radius * complex(math.cos(theta), math.sin(theta)) - b
    return np.array([[0, np.conj(a)], [a, 0]], dtype=np.complex128)


@dataclass(frozen=True, eq=False)
class OddCollarPath:
    """Odd collar with a fixed left condition and a loop s ↦ A_R(s) of trivializing operators."""
    mesh: Mesh1D
    boundary: BoundaryOperator
    left: np.ndarray
    right_path: Callable[[float], np.ndarray]
    label: str = ''

    @classmethod
    def scalar(cls, flow, b=-1.0, radius=1.5, mesh=None):
        """B = bσ_x, A_R(s) with b + a(s) = r·e^{i(π/2 − 2π·flow·s)}; its flow is `flow`."""
        mesh = mesh or Mesh1D.interval(32)
        boundary = BoundaryOperator(b * PAULI_X, PAULI_Z)
        return cls(mesh, boundary, np.zeros((2, 2), dtype=np.complex128),
                   partial(_scalar_right_path, flow=flow, b=b, radius=radius), f"odd(flow={flow})")

    def dirac(self, s):
        b = self.boundary.matrix
        return DiscreteDirac(self.mesh, self.boundary, np.repeat(b[None], self.mesh.cells, axis=0),
                             left_basis=negative_basis(-b + self.left),
                             right_basis=negative_basis(b + as_matrix(self.right_path(s))),
                             label=self.label)

    def flow(self, samples=257):
        return unitary_flow(lambda s: pairing_unitary(self.dirac(s)), 0.0, 1.0, samples)


class ProductIndexReport(NamedTuple):
    parity_pair: Tuple[int, int]
    first: int
    second: int
    product: int
    expected: int

    @property
    def ok(self):
        return self.product == self.expected

    def to_dict(self):
        return {'parity_pair': list(self.parity_pair), 'first': self.first, 'second': self.second,
                'product': self.product, 'expected': self.expected, 'ok': self.ok}


def _even_index(module):
    return sum(k0_of_kernel(module).multiplicities)


def _product_collar(mesh, boundary, left, right, label=''):
    b = boundary.matrix
    return DiscreteDirac(mesh, boundary, np.repeat(b[None], mesh.cells, axis=0),
                         left_basis=left, right_basis=right, label=label)


def _even_even(first, second, gens):
    collar = ProductCollar((0, 0), first.boundary, second.grading, gens)
    boundary = collar.boundary_for(second.matrix)
    right = collar.lift(first.right, second.dim)
    left = None if first.left is None else collar.lift(first.left, second.dim)
    dirac = impose_aps(build_interval_dirac(first.mesh, boundary), right=right, left=left)
    return first.index(), _even_index(second), numerical_index(dirac).index


def _even_odd(first, second, gens, samples):
    if first.left is None:
        raise InputError("an odd product needs a trivializing operator at both ends")
    collar = ProductCollar((0, 1), first.boundary, None, gens)
    right, left = collar.lift(first.right, 1), collar.lift(first.left, 1)

    def pairing(tau):
        blocks = []
        for value in mode_values(second, tau):
            boundary = collar.boundary_for([[value]])
            dirac = _product_collar(first.mesh, boundary, negative_basis(-boundary.matrix + left),
                                    negative_basis(boundary.matrix + right))
            blocks.append(pairing_unitary(dirac))
        return linalg.block_diag(*blocks)

    product = unitary_flow(pairing, 0.0, TWO_PI, samples)
    return first.index(), spectral_flow(second).flow, product


def _odd_even(first, second, gens, samples):
    collar = ProductCollar((1, 0), first.boundary, second.grading, gens)
    boundary = collar.boundary_for(second.matrix)
    left = collar.lift(first.left, second.dim)

    def pairing(s):
        right = collar.lift(first.right_path(s), second.dim)
        dirac = _product_collar(first.mesh, boundary, negative_basis(-boundary.matrix + left),
                                negative_basis(boundary.matrix + right))
        return pairing_unitary(dirac)

    product = unitary_flow(pairing, 0.0, 1.0, samples)
    return first.flow(samples), _even_index(second), product


def _odd_odd(first, second, gens, samples):
    collar = ProductCollar((1, 1), first.boundary, None, gens)
    z = first.boundary.grading
    left = collar.lift(first.left, 1)

    def block(sigma, tau):
        right = collar.lift(first.right_path(sigma / TWO_PI), 1)
        determinants = []
        for value in mode_values(second, tau):
            boundary = collar.boundary_for([[value]])
            dirac = _product_collar(first.mesh, boundary,
                                    graph_basis(negative_basis(-boundary.matrix + left), z),
                                    graph_basis(negative_basis(boundary.matrix + right), z))
            determinants.append(matching_determinant(dirac))
        return np.diag(determinants)

    product = det_winding(block, samples)
    return first.flow(samples), spectral_flow(second).flow, product


def verify_product_index(first, second, gens=None, samples=129):
    """Compare the index of the product collar with the product of the factor indices.

    Even factors contribute their index, odd ones their flow: an odd
    collar along its loop of trivializing operators, a twisted circle along
    its period. Odd products are measured by the flow of the pairing
    unitary, the odd × odd product by the winding of the matching
    determinant over the parameter square.
    """
    gens = gens or standard_clifford()
    pair = (1 if isinstance(first, OddCollarPath) else 0, 1 if isinstance(second, LoopOperatorFamily) else 0)
    if pair[1] == 1 and not is_separable(second):
        raise DimensionMismatch("product index checks need a separable circle factor")
    if pair == (0, 0):
        values = _even_even(first, second, gens)
    elif pair == (0, 1):
        values = _even_odd(first, second, gens, samples)
    elif pair == (1, 0):
        values = _odd_even(first, second, gens, samples)
    else:
        values = _odd_odd(first, second, gens, samples)
    first_index, second_index, product = values
    report = ProductIndexReport(pair, int(first_index), int(second_index), int(product),
                                int(first_index) * int(second_index))
    logger.info(f"product index {pair}: {first_index} × {second_index} -> {product}")
    return report


def product_gap_residual(boundary, perturbation, second_matrix, parity_pair, second_grading=None, gens=None):
    """‖(B̂ + Â)² − (B + A)²⊗1 − 1⊗D_N²‖ for the lifted pair."""
    gens = gens or standard_clifford()
    collar = ProductCollar(tuple(parity_pair), boundary, second_grading, gens)
    second = as_matrix(second_matrix)
    total = collar.boundary_for(second).matrix + collar.lift(perturbation, second.shape[0])
    base = boundary.matrix + as_matrix(perturbation)
    expected = np.kron(base @ base, np.eye(second.shape[0])) + np.kron(np.eye(base.shape[0]), second @ second)
    if tuple(parity_pair) == (0, 1):
        expected = np.kron(np.eye(2), expected)
    return spectral_norm(total @ total - expected)
