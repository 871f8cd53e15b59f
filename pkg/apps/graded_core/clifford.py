# apps/graded_core/clifford.py
"""Concrete matrices for C₁, the 2×2 Γ-model and the regular representation of C₁′⊗C₁″."""
from dataclasses import dataclass, field

import numpy as np

from .graded import GradedOperator, GradedSpace, ODD, spectral_norm

SWAP = np.array([[0, 1], [1, 0]], dtype=np.complex128)

# basis of C₁′⊗C₁″ as bit pairs (a, b) for σ′^a σ″^b
CLIFFORD_BASIS = ((0, 0), (1, 0), (0, 1), (1, 1))


@dataclass(frozen=True, eq=False)
class CliffordGens:
    sigma: np.ndarray
    sigma_grading: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    grading: np.ndarray = field(default_factory=lambda: SWAP.copy())

    @property
    def product_grading(self):
        """−iΓ₁Γ₂."""
        return -1j * self.gamma1 @ self.gamma2

    def sigma_operator(self):
        return GradedOperator(self.sigma, GradedSpace(self.sigma_grading), ODD)

    def residuals(self):
        identity = np.eye(2)
        z = self.product_grading
        return {
            'sigma_squared': spectral_norm(self.sigma @ self.sigma - identity),
            'gamma1_squared': spectral_norm(self.gamma1 @ self.gamma1 - identity),
            'gamma2_squared': spectral_norm(self.gamma2 @ self.gamma2 - identity),
            'gammas_anticommute': spectral_norm(self.gamma1 @ self.gamma2 + self.gamma2 @ self.gamma1),
            'grading_squared': spectral_norm(z @ z - identity),
            'grading_anticommutes_gamma1': spectral_norm(z @ self.gamma1 + self.gamma1 @ z),
            'grading_anticommutes_gamma2': spectral_norm(z @ self.gamma2 + self.gamma2 @ z),
            'grading_is_swap': spectral_norm(z - self.grading),
        }


def standard_clifford(gamma2_sign=1):
    """σ on ℂ¹⊕ℂ¹, Γ₁ = diag(1,−1), Γ₂ = [[0,i],[−i,0]], grading [[0,1],[1,0]].

    gamma2_sign=-1 produces the sign-flipped Γ₂ used by the mutation check.
    """
    return CliffordGens(
        sigma=np.array([[0, 1], [1, 0]], dtype=np.complex128),
        sigma_grading=np.diag([1.0, -1.0]).astype(np.complex128),
        gamma1=np.diag([1.0, -1.0]).astype(np.complex128),
        gamma2=gamma2_sign * np.array([[0, 1j], [-1j, 0]], dtype=np.complex128),
    )


def gamma_basis(gens=None):
    """Unit v₁ in the positive eigenspace of the Γ-model grading and v₂ = Γ₁v₁."""
    gens = gens or standard_clifford()
    values, vectors = np.linalg.eigh(gens.grading)
    v1 = vectors[:, np.argmax(values)]
    pivot = v1[np.argmax(np.abs(v1))]
    v1 = v1 * (abs(pivot) / pivot)
    return v1, gens.gamma1 @ v1


def _clifford_product(left, right):
    # σ″^b σ′^c = (−1)^{bc} σ′^c σ″^b
    sign = -1 if left[1] and right[0] else 1
    return sign, (left[0] ^ right[0], left[1] ^ right[1])


def _multiplication(element, side):
    matrix = np.zeros((4, 4), dtype=np.complex128)
    for column, basis in enumerate(CLIFFORD_BASIS):
        if side == 'left':
            sign, result = _clifford_product(element, basis)
        else:
            sign, result = _clifford_product(basis, element)
        matrix[CLIFFORD_BASIS.index(result), column] = sign
    return matrix


def regular_representation():
    """Left and right multiplication by σ′, σ″ on C₁′⊗C₁″ ≅ ℂ⁴, with its parity grading."""
    return {
        'left': (_multiplication((1, 0), 'left'), _multiplication((0, 1), 'left')),
        'right': (_multiplication((1, 0), 'right'), _multiplication((0, 1), 'right')),
        'grading': np.diag([1.0, -1.0, -1.0, 1.0]).astype(np.complex128),
    }


def morita_frame():
    """Orthonormal columns spanning the left ideal of ½(1 − iσ′σ″), ordered (p, σ′p).

    This ordering matches (v₁, v₂ = Γ₁v₁) for the standard Γ-model.
    """
    projection = np.array([0.5, 0, 0, -0.5j], dtype=np.complex128)
    left_sigma1, _ = regular_representation()['left']
    frame = np.column_stack([projection, left_sigma1 @ projection])
    return frame * np.sqrt(2.0)
