# apps/signature/involutions.py
"""Involutions on W, Lagrangians in the middle harmonic space and the
canonical symmetric trivializing operators built from them.

Even case (boundary of an even-dimensional manifold, so odd dimension):
ℐ anticommutes with τ and 𝒟^{bd} = dτ + τd, and A_ℐ = iℐτ.
Odd case (even-dimensional boundary): ℐ anticommutes with τ, commutes with
𝒟^{sign} = d + d* and Γ, and A_ℐ = ℐΓ on the collar graded by τ.
Both satisfy (B + A_ℐ)² = B² + P_W.
"""
import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import linalg

from apps.dirac_grid.boundary import BoundaryOperator, TrivializingOp, grading_bases, lagrangian_unitary
from apps.dirac_grid.mesh import Mesh1D
from apps.dirac_grid.operators import EVEN_CASE, ODD_CASE, build_interval_dirac, impose_aps, numerical_index, path_flow
from apps.graded_core.exceptions import InvolutionError, LagrangianError
from apps.graded_core.graded import spectral_norm

from .hodge import IDENTITY_TOL, _complement, _orth

logger = logging.getLogger(__name__)

PATH_SAMPLES = 32
PATH_TOL = 1e-8


def case_of(hodge):
    """Even case on odd-dimensional boundaries, odd case on even-dimensional ones."""
    return EVEN_CASE if hodge.dimension % 2 else ODD_CASE


@dataclass(frozen=True, eq=False)
class Lagrangian:
    """L ⊂ ℋ with τL = L^⊥; `basis` and `harmonic` are columns in the package coordinates."""
    basis: np.ndarray
    harmonic: np.ndarray
    tau: np.ndarray

    @cached_property
    def complement(self):
        inside = self.harmonic.conj().T @ self.basis
        rest = _complement(_orth(inside), self.harmonic.shape[1])
        return self.harmonic @ rest

    @property
    def dim(self):
        return self.basis.shape[1]

    def residuals(self):
        tau_l = self.tau @ self.basis
        perp = self.complement
        return {
            'isotropic': spectral_norm(self.basis.conj().T @ tau_l) if self.dim else 0.0,
            'tau_maps_to_complement': spectral_norm(tau_l - perp @ (perp.conj().T @ tau_l)) if self.dim else 0.0,
            'half_dimension': float(abs(2 * self.dim - self.harmonic.shape[1])),
        }

    def check(self, tol=IDENTITY_TOL):
        failing = {name: value for name, value in self.residuals().items() if value > tol}
        if failing:
            raise LagrangianError("subspace is not Lagrangian", **failing)
        return self

    def swapped(self):
        """L^⊥ is Lagrangian as well."""
        return Lagrangian(self.complement, self.harmonic, self.tau)

    def unitary(self):
        """Graph unitary ℋ⁺ → ℋ⁻ in the τ-eigenbases of the harmonic space."""
        grading = self.harmonic.conj().T @ self.tau @ self.harmonic
        return lagrangian_unitary(self.harmonic.conj().T @ self.basis, grading)


def middle_tau_bases(hodge):
    """Orthonormal bases of ℋ^± = ±1 eigenspaces of τ on the middle harmonic space."""
    harmonic = hodge.middle_harmonic
    if harmonic.shape[1] == 0:
        return harmonic, harmonic
    plus, minus = grading_bases(harmonic.conj().T @ hodge.tau @ harmonic)
    return harmonic @ plus, harmonic @ minus


def lagrangian_from_unitary(hodge, unitary=None):
    """L = {x + Gx : x ∈ ℋ⁺} for a unitary G : ℋ⁺ → ℋ⁻ (default: match the bases in order)."""
    plus, minus = middle_tau_bases(hodge)
    if plus.shape[1] != minus.shape[1]:
        raise LagrangianError("ℋ⁺ and ℋ⁻ differ in dimension; stabilize first",
                              plus=plus.shape[1], minus=minus.shape[1])
    size = plus.shape[1]
    unitary = np.eye(size) if unitary is None else np.asarray(unitary, dtype=np.complex128)
    if unitary.shape != (size, size) or spectral_norm(unitary.conj().T @ unitary - np.eye(size)) > 1e-9:
        raise LagrangianError("graph map must be a unitary ℋ⁺ → ℋ⁻", shape=unitary.shape)
    basis = (plus + minus @ unitary) / math.sqrt(2)
    return Lagrangian(basis, hodge.middle_harmonic, hodge.tau).check()


def assumptions_hold(hodge):
    """Whether a Lagrangian exists inside the harmonic space itself."""
    positive, negative = hodge.middle_balance()
    return positive == negative


@dataclass(frozen=True, eq=False)
class InvolutionSpec:
    hodge: object
    matrix: np.ndarray
    case: str
    lagrangian: Optional[Lagrangian] = None
    label: str = ''

    @cached_property
    def w_projector(self):
        return self.hodge.projector(self.hodge.w_space)

    def residuals(self):
        h, matrix = self.hodge, self.matrix
        report = {
            'selfadjoint': spectral_norm(matrix - matrix.conj().T),
            'squares_to_w': spectral_norm(matrix @ matrix - self.w_projector),
            'zero_on_v': spectral_norm(matrix @ h.projector(h.v_space)),
            'anticommutes_tau': spectral_norm(matrix @ h.tau + h.tau @ matrix),
        }
        if self.case == EVEN_CASE:
            b = h.boundary_operator
            report['anticommutes_boundary'] = spectral_norm(matrix @ b + b @ matrix)
        else:
            s = h.signature_operator
            report['commutes_signature'] = spectral_norm(matrix @ s - s @ matrix)
            report['commutes_gamma'] = spectral_norm(matrix @ h.gamma - h.gamma @ matrix)
        return report

    def check(self, tol=IDENTITY_TOL):
        failing = {name: value for name, value in self.residuals().items() if value > tol}
        if failing:
            raise InvolutionError(f"{self.case} involution fails its compatibility conditions",
                                  label=self.label, **failing)
        return self

    def opposite(self):
        """ℐ^{opp} = −iℐτ."""
        if self.case != EVEN_CASE:
            raise InvolutionError("the opposite involution is defined in the even case")
        return replace(self, matrix=-1j * self.matrix @ self.hodge.tau, label=f"{self.label}^opp")

    def negated(self):
        lagrangian = self.lagrangian.swapped() if self.lagrangian is not None else None
        return replace(self, matrix=-self.matrix, lagrangian=lagrangian, label=f"-{self.label}")

    def to_dict(self):
        return {'label': self.label, 'case': self.case,
                'residuals': {name: float(value) for name, value in self.residuals().items()}}


def build_alpha(hodge, lagrangian=None, tol=IDENTITY_TOL):
    """α = +1 on Ω^< (⊕ L), −1 on Ω^> (⊕ L^⊥), 0 on V."""
    case = case_of(hodge)
    lower = hodge.projector(hodge.omega_lower)
    upper = hodge.projector(hodge.omega_upper)
    matrix = lower - upper
    if case == ODD_CASE:
        if lagrangian is None:
            if hodge.middle_harmonic.shape[1]:
                raise LagrangianError("the odd case needs a Lagrangian in the middle harmonic space")
        else:
            matrix = matrix + hodge.projector(lagrangian.basis) - hodge.projector(lagrangian.complement)
    elif lagrangian is not None:
        raise LagrangianError("the even case takes no Lagrangian")
    spec = InvolutionSpec(hodge, matrix, case, lagrangian, f"alpha[{hodge.label}]")
    return spec.check(tol)


def boundary_operator_of(spec):
    """B on the collar fiber: 𝒟^{bd} in the even case, 𝒟^{sign} graded by τ in the odd case."""
    h = spec.hodge
    if spec.case == EVEN_CASE:
        return BoundaryOperator(h.boundary_operator, label=f"Dbd[{h.label}]")
    return BoundaryOperator(h.signature_operator, grading=h.tau, label=f"Dsign[{h.label}]")


def trivializing_matrix(spec):
    if spec.case == EVEN_CASE:
        return 1j * spec.matrix @ spec.hodge.tau
    return spec.matrix @ spec.hodge.gamma


def canonical_trivializing(spec):
    """A_ℐ = iℐτ (even) or ℐΓ (odd); B + A_ℐ is invertible with gap² ≥ min(1, gap(B|_V)²)."""
    trivializing = TrivializingOp(trivializing_matrix(spec), boundary_operator_of(spec))
    logger.debug(f"trivializing {spec.label}: gap {trivializing.gap:.4f}")
    return trivializing


def square_identity_residual(spec):
    """‖(B + A)² − B² − P_W‖."""
    trivializing = canonical_trivializing(spec)
    b, perturbed = trivializing.boundary.matrix, trivializing.perturbed
    return spectral_norm(perturbed @ perturbed - b @ b - spec.w_projector)


def collar_index(spec, trivializing_matrix_, reference, nodes=64):
    """Index on the collar [0, 1] × ∂M with APS conditions from B + A at the right end
    and −B − A_ref at the left end."""
    boundary = boundary_operator_of(spec)
    dirac = build_interval_dirac(Mesh1D.interval(nodes), boundary, label=f"collar[{spec.label}]")
    constrained = impose_aps(dirac, right=trivializing_matrix_, left=-reference)
    return numerical_index(constrained).index


def independence_operators(spec):
    """Three distinct symmetric trivializing operators for the same involution."""
    base = trivializing_matrix(spec)
    w = spec.w_projector
    b = boundary_operator_of(spec).matrix
    return {'canonical': base, 'scaled': 2 * base, 'shifted': base + 0.5 * w @ b @ w}


def independence_suite(spec, nodes=64):
    """Collar indices (even case) or relative flows (odd case) for the three operators and ℐ^{opp}.

    Every entry must agree.
    """
    operators = independence_operators(spec)
    reference = trivializing_matrix(spec)
    boundary = boundary_operator_of(spec)
    for name, matrix in operators.items():
        TrivializingOp(matrix, boundary)
    if spec.case == EVEN_CASE:
        operators['opposite'] = trivializing_matrix(spec.opposite())
        TrivializingOp(operators['opposite'], boundary)
        alpha = build_alpha(spec.hodge)
        anchor = trivializing_matrix(alpha)
        return {name: collar_index(spec, matrix, anchor, nodes) for name, matrix in operators.items()}
    mesh = Mesh1D.interval(nodes)
    dirac = build_interval_dirac(mesh, boundary, label=f"collar[{spec.label}]")

    def relative_flow(target):
        def build(s):
            return impose_aps(dirac, right=(1 - s) * reference + s * target, left=-reference)
        return path_flow(build, samples=33)

    return {name: relative_flow(matrix) for name, matrix in operators.items()}


# Involution paths ℐ_t = [[0, u_t*], [u_t, 0]] with u_t = u e^{ita}

def _tau_frame(spec):
    """Bases of the ±1 eigenspaces of τ restricted to W."""
    h = spec.hodge
    w = h.w_space
    plus, minus = grading_bases(w.conj().T @ h.tau @ w)
    return w @ plus, w @ minus


def path_generator(spec, rng=None):
    """Hermitian a on τ⁺ ∩ W keeping every compatibility condition along u e^{ita}.

    Even case: a = B⁺² + P₀KP₀ commutes with the τ⁺ block of 𝒟^{bd}.
    Odd case: a = P₀KP₀ with P₀ the harmonic part, where 𝒟^{sign} vanishes.
    """
    rng = rng or np.random.default_rng(0)
    plus, _ = _tau_frame(spec)
    size = plus.shape[1]
    h = spec.hodge
    if size == 0:
        return np.zeros((0, 0))
    if spec.case == EVEN_CASE:
        block = plus.conj().T @ h.boundary_operator @ plus
    else:
        block = plus.conj().T @ (h.signature_operator @ h.signature_operator) @ plus
    values, vectors = linalg.eigh((block + block.conj().T) / 2)
    scale = max(1.0, float(np.max(np.abs(values))))
    kernel = vectors[:, np.abs(values) <= 1e-9 * scale]
    random = rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size))
    projector = kernel @ kernel.conj().T
    generator = projector @ (random + random.conj().T) @ projector / 2
    if spec.case == EVEN_CASE:
        generator = generator + block @ block
    return generator


def involution_path(spec, generator=None, samples=PATH_SAMPLES, nodes=64, rng=None):
    """Sample ℐ_t for t ∈ [0, 1] and report the worst compatibility residual and the indices.

    The odd case reports the number of negative eigenvalues of B + A_{ℐ_t}.
    """
    plus, minus = _tau_frame(spec)
    if plus.shape[1] != minus.shape[1]:
        raise InvolutionError("τ is unbalanced on W", plus=plus.shape[1], minus=minus.shape[1])
    generator = path_generator(spec, rng) if generator is None else generator
    u = minus.conj().T @ spec.matrix @ plus
    worst, indices = 0.0, []
    anchor = trivializing_matrix(build_alpha(spec.hodge)) if spec.case == EVEN_CASE else None
    for t in np.linspace(0.0, 1.0, samples):
        u_t = u @ linalg.expm(1j * t * generator)
        matrix = minus @ u_t @ plus.conj().T + plus @ u_t.conj().T @ minus.conj().T
        moved = replace(spec, matrix=matrix, label=f"{spec.label}@{t:.3f}")
        worst = max(worst, max(moved.residuals().values()))
        if spec.case == EVEN_CASE:
            indices.append(collar_index(moved, trivializing_matrix(moved), anchor, nodes))
        else:
            values = linalg.eigvalsh(canonical_trivializing(moved).perturbed)
            indices.append(int(np.sum(values < 0)))
    logger.debug(f"involution path {spec.label}: residual {worst:.2e}, indices {sorted(set(indices))}")
    return {'samples': samples, 'residual': worst, 'indices': indices,
            'constant': len(set(indices)) == 1, 'ok': worst < PATH_TOL and len(set(indices)) == 1}
