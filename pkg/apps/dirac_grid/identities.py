# apps/dirac_grid/identities.py
"""Boundary-reduction identities checked as matrix equations on random fibers.

Collar operators are written D = c(dx₁)∂₁ + T with T tangential, so the
boundary operator of a collar is c(dx₁)·T. On the full bundles:

    even M   E = ℂ²⊗ℂ^k, z = σ_z⊗1, c = −iσ_x⊗1, T = σ_y⊗B
    odd M    E = ℂ^{2k} graded by z_∂M, c = −iz_∂M, T = −cB

and the products are D_M + z_M D_N, D_M z_N + D_N or Γ₁D_M + Γ₂D_N. Each
identity compares the boundary operator read off the full product with the
reduced form used by ProductCollar.
"""
import numpy as np

from apps.graded_core.clifford import gamma_basis, standard_clifford
from apps.graded_core.graded import spectral_norm

from .boundary import BoundaryOperator
from .products import ProductCollar, product_gap_residual

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.diag([1.0, -1.0]).astype(np.complex128)


def _hermitian(rng, dim):
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return (raw + raw.conj().T) / 2


def _odd(rng, plus, minus):
    block = rng.normal(size=(minus, plus)) + 1j * rng.normal(size=(minus, plus))
    matrix = np.zeros((plus + minus, plus + minus), dtype=np.complex128)
    matrix[plus:, :plus] = block
    matrix[:plus, plus:] = block.conj().T
    return matrix


def _grading(plus, minus):
    return np.diag(np.concatenate([np.ones(plus), -np.ones(minus)])).astype(np.complex128)


def even_collar_symbols(b):
    k = b.shape[0]
    identity = np.eye(k)
    return np.kron(SIGMA_Z, identity), -1j * np.kron(SIGMA_X, identity), np.kron(SIGMA_Y, b)


def odd_collar_symbols(b, z):
    clifford = -1j * z
    return clifford, -clifford @ b


def boundary_identities(rng=None, k=2, gens=None):
    """Residuals of the collar and product boundary identities, keyed by name."""
    rng = rng or np.random.default_rng(20240607)
    gens = gens or standard_clifford()
    residuals = {}

    b_even = _hermitian(rng, k)
    z_m, c_even, t_even = even_collar_symbols(b_even)
    residuals['even-collar/boundary-form'] = spectral_norm(t_even + c_even @ z_m @ np.kron(np.eye(2), b_even))
    residuals['even-collar/clifford-square'] = spectral_norm(c_even @ c_even + np.eye(2 * k))
    residuals['even-collar/operator-odd'] = (spectral_norm(c_even @ z_m + z_m @ c_even)
                                             + spectral_norm(t_even @ z_m + z_m @ t_even))

    z_boundary = _grading(k, k)
    b_odd = _odd(rng, k, k)
    c_odd, t_odd = odd_collar_symbols(b_odd, z_boundary)
    residuals['odd-collar/tangential-selfadjoint'] = spectral_norm(t_odd - t_odd.conj().T)
    residuals['odd-collar/clifford-anticommutes'] = spectral_norm(c_odd @ b_odd + b_odd @ c_odd)

    z_n = _grading(2, 1)
    d_even_n = _odd(rng, 2, 1)
    d_odd_n = _hermitian(rng, 3)
    n = 3
    a_even, a_odd = _hermitian(rng, k), _odd(rng, k, k)

    # even × even
    collar = ProductCollar((0, 0), BoundaryOperator(b_even), z_n, gens)
    product_c = np.kron(c_even, np.eye(n))
    product_t = np.kron(t_even, np.eye(n)) + np.kron(z_m, d_even_n)
    boundary = product_c @ product_t
    plus_n, minus_n = (np.eye(n) + z_n) / 2, (np.eye(n) - z_n) / 2
    e_plus, e_minus = np.array([[1], [0]], dtype=np.complex128), np.array([[0], [1]], dtype=np.complex128)
    psi = (np.kron(e_plus, np.kron(np.eye(k), plus_n)) - 1j * np.kron(e_minus, np.kron(np.eye(k), minus_n)))
    residuals['even-even/boundary-reduction'] = spectral_norm(
        boundary @ psi - psi @ collar.boundary_for(d_even_n).matrix)
    product_z = np.kron(z_m, z_n)
    residuals['even-even/boundary-preserves-grading'] = spectral_norm(boundary @ product_z - product_z @ boundary)

    # even × odd
    collar = ProductCollar((0, 1), BoundaryOperator(b_even), None, gens)
    product_t = np.kron(t_even, np.eye(n)) + np.kron(z_m, d_odd_n)
    boundary = product_c @ product_t
    residuals['even-odd/boundary-reduction'] = spectral_norm(boundary - collar.boundary_for(d_odd_n).matrix)
    residuals['even-odd/clifford-normal'] = spectral_norm(
        product_c + 1j * collar.boundary_for(d_odd_n).grading)

    # odd × even
    collar = ProductCollar((1, 0), BoundaryOperator(b_odd, z_boundary), z_n, gens)
    product_c = np.kron(c_odd, z_n)
    product_t = np.kron(t_odd, z_n) + np.kron(np.eye(2 * k), d_even_n)
    boundary = product_c @ product_t
    reduced = collar.boundary_for(d_even_n)
    residuals['odd-even/boundary-reduction'] = spectral_norm(boundary - reduced.matrix)
    residuals['odd-even/clifford-normal'] = spectral_norm(product_c + 1j * reduced.grading)

    # odd × odd on ℂ² ⊗ E_∂M ⊗ E_N with the fixed Γ-model of the full bundle
    collar = ProductCollar((1, 1), BoundaryOperator(b_odd, z_boundary), None, gens)
    reference = standard_clifford()
    product_c = np.kron(reference.gamma1, np.kron(c_odd, np.eye(n)))
    product_t = (np.kron(reference.gamma1, np.kron(t_odd, np.eye(n)))
                 + np.kron(reference.gamma2, np.kron(np.eye(2 * k), d_odd_n)))
    boundary = product_c @ product_t
    v1, _ = gamma_basis(reference)
    psi = np.kron(v1[:, None], np.eye(2 * k * n))
    residuals['odd-odd/boundary-reduction'] = spectral_norm(
        boundary @ psi - psi @ collar.boundary_for(d_odd_n).matrix)
    product_z = np.kron(reference.grading, np.eye(2 * k * n))
    residuals['odd-odd/boundary-preserves-grading'] = spectral_norm(boundary @ product_z - product_z @ boundary)

    residuals['even-even/lift-squares-add'] = product_gap_residual(
        BoundaryOperator(b_even), a_even, d_even_n, (0, 0), z_n, gens)
    residuals['even-odd/lift-squares-add'] = product_gap_residual(
        BoundaryOperator(b_even), a_even, d_odd_n, (0, 1), None, gens)
    residuals['odd-even/lift-squares-add'] = product_gap_residual(
        BoundaryOperator(b_odd, z_boundary), a_odd, d_even_n, (1, 0), z_n, gens)
    residuals['odd-odd/lift-squares-add'] = product_gap_residual(
        BoundaryOperator(b_odd, z_boundary), a_odd, d_odd_n, (1, 1), None, gens)
    return residuals
