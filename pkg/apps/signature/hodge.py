# apps/signature/hodge.py
"""Combinatorial Hodge packages: d, d*, Δ, the chirality τ, the parity Γ and
the splittings V ⊕ W, Ω^< ⊕ Ω^> used by the boundary constructions.

τ maps C^p to C^{n−p}, is a selfadjoint unitary involution and satisfies
τdτ = ε(n)d* with ε(n) = −(−1)^n. It is exact on polygons (half shift),
on ring models (polar part of the cup pairing), on products and unions of
such; on other complexes a model τ is synthesized from paired singular
value decompositions and flagged.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Optional

import numpy as np
from scipy import linalg

from apps.graded_core.exceptions import HodgeError, InputError
from apps.graded_core.graded import STRUCTURAL_TOL, spectral_norm

from .complexes import HALF_SHIFT, PRODUCT, RING, SYNTHESIZED, UNION, kron_to_total, union_operator

logger = logging.getLogger(__name__)

IDENTITY_TOL = 1e-10


def chirality_sign(n):
    """ε(n) in τdτ = ε(n)d*."""
    return -((-1) ** n)


def form_phase(m):
    """i^{m²}: the factor turning the middle cup pairing into a hermitian form."""
    return 1j ** ((m * m) % 4)


def unitary_square_root(unitary):
    """A square root of a unitary that is a function of it; the branch cut avoids
    every root of unity of order at most the dimension."""
    size = unitary.shape[0]
    triangular, vectors = linalg.schur(np.asarray(unitary, dtype=np.complex128), output='complex')
    eigenvalues = np.diag(triangular)
    shift = math.pi / (2 * size)
    phases = np.angle(eigenvalues * np.exp(-1j * shift)) + shift
    return vectors @ np.diag(np.exp(0.5j * phases)) @ vectors.conj().T


def polar_part(matrix):
    """Unitary factor of the polar decomposition."""
    left, _, right = linalg.svd(np.asarray(matrix, dtype=np.complex128))
    return left @ right


def _range_basis(matrix, tol):
    """Left and right singular vectors with singular value above tol·max(1, ‖·‖), and the values."""
    if 0 in matrix.shape:
        return np.zeros((matrix.shape[0], 0)), np.zeros((matrix.shape[1], 0)), np.zeros(0)
    left, values, right_h = linalg.svd(matrix)
    keep = values > tol * max(1.0, values[0] if values.size else 0.0)
    return left[:, :keep.sum()], right_h.conj().T[:, :keep.sum()], values[keep]


def middle_form(complex_, m, basis=None):
    """Matrix of h(a, b) = i^{m²}⟨ā ∪ b, [X]⟩ on C^m (or on the columns of `basis`)."""
    tensor = complex_.cup_tensor(m, m)
    pairing = np.tensordot(complex_.orientation, tensor, axes=1)
    form = form_phase(m) * pairing
    if basis is not None:
        form = basis.conj().T @ form @ basis
    return form


def cup_pairing(complex_, p):
    """⟨α ∪ β, [X]⟩ as a matrix on C^p × C^{n−p}."""
    n = complex_.dimension
    return np.tensordot(complex_.orientation, complex_.cup_tensor(p, n - p), axes=1)


# Chirality rules

def _half_shift(complex_):
    if complex_.dimension != 1 or complex_.cell_counts[0] != complex_.cell_counts[1]:
        raise HodgeError("half-shift chirality needs a one-dimensional cycle model", label=complex_.label)
    k = complex_.cell_counts[0]
    shift = complex_.boundary(1).T + np.eye(k)
    if np.any(np.abs(shift.sum(axis=0) - 1) > 0) or np.any(np.abs(shift.sum(axis=1) - 1) > 0):
        raise HodgeError("edges do not define a shift of the vertices", label=complex_.label)
    unitary = 1j * unitary_square_root(shift)
    tau = np.zeros((2 * k, 2 * k), dtype=np.complex128)
    tau[:k, k:] = unitary.conj().T
    tau[k:, :k] = unitary
    return tau


def _ring(complex_):
    if np.any(complex_.coboundary):
        raise HodgeError("ring chirality needs d = 0", label=complex_.label)
    n = complex_.dimension
    tau = np.zeros((complex_.total_dim, complex_.total_dim), dtype=np.complex128)
    for p in range(n // 2 + 1):
        q = n - p
        if p == q:
            form = middle_form(complex_, p)
            if spectral_norm(form - form.conj().T) > IDENTITY_TOL:
                raise HodgeError("middle cup pairing is not hermitian", label=complex_.label)
            tau[complex_.block(p), complex_.block(p)] = polar_part((form + form.conj().T) / 2)
            continue
        pairing = cup_pairing(complex_, p)
        if pairing.shape[0] != pairing.shape[1]:
            raise HodgeError("cells in complementary degrees do not match", p=p, q=q)
        unitary = polar_part(pairing.T)
        tau[complex_.block(q), complex_.block(p)] = unitary
        tau[complex_.block(p), complex_.block(q)] = unitary.conj().T
    return tau


@lru_cache(maxsize=128)
def exact_chirality(complex_):
    """τ on the whole cochain space for complexes with an exact rule, else None."""
    rule = complex_.chirality_rule
    if rule == HALF_SHIFT:
        return _half_shift(complex_)
    if rule == RING:
        return _ring(complex_)
    if rule == PRODUCT:
        first, second = complex_.factors
        tau_first, tau_second = exact_chirality(first), exact_chirality(second)
        if tau_first is None or tau_second is None:
            return None
        return product_chirality(first, second, tau_first, tau_second, complex_.kron_positions)
    if rule == UNION:
        first, second = complex_.factors
        tau_first, tau_second = exact_chirality(first), exact_chirality(second)
        if tau_first is None or tau_second is None:
            return None
        return union_operator(complex_, tau_first, tau_second)
    return None


def tensor_chirality(tau_first, gamma_first, tau_second, first_dimension, second_dimension):
    """τ_{X×Y} = c·(τ_X Γ_X^{dim Y}) ⊗ τ_Y with c = −i when both dimensions are odd, in Kronecker order."""
    factor = -1j if first_dimension % 2 and second_dimension % 2 else 1.0
    parity = np.linalg.matrix_power(gamma_first, second_dimension)
    return factor * np.kron(tau_first @ parity, tau_second)


def product_chirality(first, second, tau_first, tau_second, positions):
    return kron_to_total(tensor_chirality(tau_first, first.parity_grading, tau_second,
                                          first.dimension, second.dimension), positions)


def synthesize_chirality(d, degrees, n, pairing=None, tol=STRUCTURAL_TOL):
    """Model τ from paired singular value decompositions.

    For d_p = Σ s u_i v_i* and d_q = Σ s u′_i v′_i* with q = n − p − 1, τ
    swaps u_i ↔ v′_i and u′_i ↔ ε v_i. Harmonic spaces in complementary
    degrees are matched by the polar part of `pairing(p)` (sesquilinear, on
    the harmonic bases) or, without one, by any unitary.
    """
    size = d.shape[0]
    epsilon = chirality_sign(n)
    tau = np.zeros((size, size), dtype=np.complex128)
    blocks = [np.flatnonzero(degrees == p) for p in range(n + 1)]

    def d_block(p):
        if p < 0 or p >= n:
            return np.zeros((0, 0))
        return d[np.ix_(blocks[p + 1], blocks[p])]

    def embed(indices, vectors):
        full = np.zeros((size, vectors.shape[1]), dtype=np.complex128)
        full[indices] = vectors
        return full

    for p in range(n):
        q = n - p - 1
        if q < p:
            continue
        u, v, s = _range_basis(d_block(p), tol)
        u2, v2, s2 = _range_basis(d_block(q), tol)
        if s.size != s2.size or (s.size and np.max(np.abs(s - s2)) > tol * max(1.0, s[0]) * 1e3):
            raise HodgeError("no duality structure: singular values of d in complementary degrees differ",
                             p=p, q=q, first=s.tolist(), second=s2.tolist())
        u_full, v_full = embed(blocks[p + 1], u), embed(blocks[p], v)
        u2_full, v2_full = embed(blocks[q + 1], u2), embed(blocks[q], v2)
        tau += v2_full @ u_full.conj().T + u_full @ v2_full.conj().T
        if q != p:
            tau += epsilon * (v_full @ u2_full.conj().T + u2_full @ v_full.conj().T)
        elif epsilon != 1:
            raise HodgeError("self-paired degree needs ε = +1", p=p, n=n)

    laplacian = d @ d.conj().T + d.conj().T @ d
    for p in range(n // 2 + 1):
        q = n - p
        harmonic_p = _kernel(laplacian[np.ix_(blocks[p], blocks[p])], tol)
        harmonic_q = _kernel(laplacian[np.ix_(blocks[q], blocks[q])], tol)
        if harmonic_p.shape[1] != harmonic_q.shape[1]:
            raise HodgeError("Betti numbers in complementary degrees differ", p=p, q=q,
                             first=harmonic_p.shape[1], second=harmonic_q.shape[1])
        if harmonic_p.shape[1] == 0:
            continue
        matrix = pairing(p, harmonic_p, harmonic_q) if pairing is not None else None
        if p == q:
            if matrix is None:
                raise HodgeError("middle harmonic space needs a cup pairing", p=p)
            local = polar_part((matrix + matrix.conj().T) / 2)
            hp = embed(blocks[p], harmonic_p)
            tau += hp @ local @ hp.conj().T
            continue
        local = polar_part(matrix.T) if matrix is not None else np.eye(harmonic_p.shape[1])
        hp, hq = embed(blocks[p], harmonic_p), embed(blocks[q], harmonic_q)
        tau += hq @ local @ hp.conj().T + hp @ local.conj().T @ hq.conj().T
    return tau


def _kernel(matrix, tol):
    if matrix.shape[0] == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    values, vectors = linalg.eigh((matrix + matrix.conj().T) / 2)
    scale = max(1.0, float(np.max(np.abs(values))))
    return vectors[:, np.abs(values) <= tol * scale]


def _orth(columns, tol=STRUCTURAL_TOL):
    if columns.shape[1] == 0:
        return columns
    left, values, _ = linalg.svd(columns, full_matrices=False)
    return left[:, values > tol * max(1.0, values[0])]


def _complement(basis, size, tol=STRUCTURAL_TOL):
    if basis.shape[1] == 0:
        return np.eye(size, dtype=np.complex128)
    left, values, _ = linalg.svd(basis, full_matrices=True)
    rank = int(np.sum(values > tol * max(1.0, values[0])))
    return left[:, rank:]


@dataclass(frozen=True, eq=False)
class HodgeDecomposition:
    """Hodge package of a closed complex, possibly restricted to an isotypic block.

    All matrices are written in the orthonormal columns `basis` of the
    (block of the) cochain space; `degrees` gives the degree of each column.
    """
    d: np.ndarray
    tau: np.ndarray
    degrees: np.ndarray
    dimension: int
    tau_source: str = ''
    label: str = ''
    tol: float = STRUCTURAL_TOL
    basis: Optional[np.ndarray] = None

    @property
    def size(self):
        return self.d.shape[0]

    @property
    def epsilon(self):
        return chirality_sign(self.dimension)

    @cached_property
    def d_adjoint(self):
        return self.d.conj().T

    @cached_property
    def gamma(self):
        return np.diag((-1.0) ** self.degrees).astype(np.complex128)

    @cached_property
    def dirac(self):
        """d + d*."""
        return self.d + self.d_adjoint

    @cached_property
    def laplacian(self):
        return self.d @ self.d_adjoint + self.d_adjoint @ self.d

    @cached_property
    def boundary_operator(self):
        """𝒟^{bd} = dτ + τd; commutes with τ, squares to Δ."""
        return self.d @ self.tau + self.tau @ self.d

    @cached_property
    def signature_operator(self):
        """d − τdτ: d + d* in even dimensions (odd for τ), 𝒟^{bd}-type in odd ones."""
        if self.dimension % 2 == 0:
            return self.dirac
        return self.boundary_operator

    def degree_projector(self, selector):
        return np.diag(np.where(selector(self.degrees), 1.0, 0.0)).astype(np.complex128)

    @cached_property
    def harmonic(self):
        return _kernel(self.laplacian, self.tol)

    def harmonic_in(self, p):
        basis = self.harmonic
        if basis.shape[1] == 0:
            return basis
        rows = self.degrees == p
        restricted = basis.copy()
        restricted[~rows] = 0
        return _orth(restricted, self.tol)

    @cached_property
    def betti(self):
        return tuple(self.harmonic_in(p).shape[1] for p in range(self.dimension + 1))

    @property
    def middle(self):
        """m with V built from degrees m−1, m (odd dimension n = 2m − 1) or m−1..m+1 (n = 2m)."""
        n = self.dimension
        return (n + 1) // 2 if n % 2 else n // 2

    def _d_between(self, p):
        rows, cols = self.degrees == p + 1, self.degrees == p
        block = np.zeros_like(self.d)
        block[np.ix_(rows, cols)] = self.d[np.ix_(rows, cols)]
        return block

    @cached_property
    def v_space(self):
        """d*C^m ⊕ dC^{m−1}, plus d*C^{m+1} ⊕ dC^m in even dimensions."""
        m = self.middle
        degrees = [m - 1] if self.dimension % 2 else [m - 1, m]
        columns = []
        for p in degrees:
            if p < 0 or p >= self.dimension:
                continue
            u, v, _ = _range_basis(self._d_between(p), self.tol)
            columns.extend([u, v])
        if not columns:
            return np.zeros((self.size, 0), dtype=np.complex128)
        return _orth(np.hstack(columns), self.tol)

    @cached_property
    def w_space(self):
        return _complement(self.v_space, self.size, self.tol)

    def _w_part(self, selector):
        projector = self.degree_projector(selector)
        return _orth(projector @ self.w_space, self.tol)

    @cached_property
    def omega_lower(self):
        m = self.middle
        if self.dimension % 2:
            return self._w_part(lambda degrees: degrees <= m - 1)
        return self._w_part(lambda degrees: degrees < m)

    @cached_property
    def omega_upper(self):
        m = self.middle
        if self.dimension % 2:
            return self._w_part(lambda degrees: degrees >= m)
        return self._w_part(lambda degrees: degrees > m)

    @cached_property
    def middle_harmonic(self):
        """ℋ^m for even n; empty in odd dimensions."""
        if self.dimension % 2:
            return np.zeros((self.size, 0), dtype=np.complex128)
        return self.harmonic_in(self.middle)

    def projector(self, basis):
        return basis @ basis.conj().T

    def residuals(self):
        identity = np.eye(self.size)
        tau, d = self.tau, self.d
        v, w = self.v_space, self.w_space
        report = {
            'tau_involution': spectral_norm(tau @ tau - identity),
            'tau_selfadjoint': spectral_norm(tau - tau.conj().T),
            'tau_d_tau': spectral_norm(tau @ d @ tau - self.epsilon * self.d_adjoint),
            'd_squared': spectral_norm(d @ d),
            'laplacian_square': spectral_norm(self.laplacian - self.dirac @ self.dirac),
            'v_perp_w': spectral_norm(v.conj().T @ w),
            'v_plus_w': float(abs(v.shape[1] + w.shape[1] - self.size)),
            'gamma_tau': spectral_norm(tau @ self.gamma - ((-1) ** self.dimension) * self.gamma @ tau),
        }
        if self.dimension % 2:
            b = self.boundary_operator
            report['boundary_commutes_tau'] = spectral_norm(b @ tau - tau @ b)
            report['boundary_square'] = spectral_norm(b @ b - self.laplacian)
        else:
            s = self.signature_operator
            report['signature_anticommutes_tau'] = spectral_norm(s @ tau + tau @ s)
        return report

    def check(self, tol=IDENTITY_TOL):
        report = self.residuals()
        failing = {name: value for name, value in report.items() if value > tol}
        if failing:
            raise HodgeError("Hodge package violates its identities", label=self.label, **failing)
        return report

    def assumptions(self):
        """Closed range of d near the middle degrees; always true in finite dimensions, reported with the gap."""
        m = self.middle
        degrees = [m - 1] if self.dimension % 2 else [m - 1, m]
        gaps = []
        for p in degrees:
            if 0 <= p < self.dimension:
                _, _, values = _range_basis(self._d_between(p), self.tol)
                if values.size:
                    gaps.append(float(values.min()))
        return {'closed_range': True, 'gap': min(gaps) if gaps else math.inf}

    def middle_balance(self):
        """(dim ℋ⁺, dim ℋ⁻) of τ on ℋ^m."""
        basis = self.middle_harmonic
        if basis.shape[1] == 0:
            return (0, 0)
        values = linalg.eigvalsh(basis.conj().T @ self.tau @ basis)
        return int(np.sum(values > 0)), int(np.sum(values < 0))

    def star(self):
        """⋆ recovered from τ = i^{p(p−1)+m}⋆ (even n = 2m)."""
        if self.dimension % 2:
            raise HodgeError("star recovery is set up for even dimensions")
        m = self.dimension // 2
        phases = np.array([1j ** ((-(p * (p - 1) + m)) % 4) for p in self.degrees])
        return self.tau @ np.diag(phases)

    def to_dict(self):
        return {'label': self.label, 'dimension': self.dimension, 'size': self.size,
                'betti': list(self.betti), 'tau_source': self.tau_source,
                'v_dim': int(self.v_space.shape[1]), 'w_dim': int(self.w_space.shape[1])}


def isotypic_bases(complex_, group, tol=STRUCTURAL_TOL):
    """Per irrep: orthonormal columns, degree by degree, spanning the image of P_ρ."""
    bases = []
    for irrep in range(len(group.irrep_dims)):
        projector = group.isotypic_projector(complex_.group_action, irrep)
        columns = []
        for p in range(complex_.dimension + 1):
            block = np.zeros((complex_.total_dim, complex_.cell_counts[p]), dtype=np.complex128)
            block[:, :] = projector[:, complex_.block(p)]
            restricted = np.zeros_like(block)
            restricted[complex_.block(p)] = block[complex_.block(p)]
            columns.append(_orth(restricted, tol))
        bases.append(np.hstack(columns) if columns else np.zeros((complex_.total_dim, 0)))
    return bases


def hodge_package(complex_, basis=None, tol=STRUCTURAL_TOL):
    """Hodge package of a closed complex, on the whole cochain space or on `basis`.

    `basis` must consist of degree-homogeneous orthonormal columns spanning a
    d-invariant, τ-invariant subspace (an isotypic block).
    """
    if not complex_.is_closed:
        raise InputError("Hodge packages are built on closed complexes", label=complex_.label)
    if basis is None:
        basis = np.eye(complex_.total_dim, dtype=np.complex128)
    degrees = np.array([int(complex_.degrees[np.argmax(np.abs(column))]) for column in basis.T], dtype=int)
    d_local = basis.conj().T @ complex_.coboundary @ basis
    tau = exact_chirality(complex_)
    source = complex_.chirality_rule
    if tau is not None:
        tau_local = basis.conj().T @ tau @ basis
    else:
        pairing = None
        if complex_.cup is not None and complex_.is_oriented:
            def pairing(p, harmonic_p, harmonic_q):
                n = complex_.dimension
                if p == n - p:
                    return middle_form(complex_, p, _lift(basis, degrees, p, harmonic_p, complex_))
                full = cup_pairing(complex_, p)
                left = _lift(basis, degrees, p, harmonic_p, complex_)
                right = _lift(basis, degrees, n - p, harmonic_q, complex_)
                return left.conj().T @ full @ right
        tau_local = synthesize_chirality(d_local, degrees, complex_.dimension, pairing, tol)
        source = SYNTHESIZED
        logger.warning(f"model chirality synthesized for {complex_.label or 'complex'}")
    package = HodgeDecomposition(d_local, tau_local, degrees, complex_.dimension, source,
                                 complex_.label, tol, basis)
    logger.debug(f"Hodge package {complex_.label}: betti {package.betti}, tau {source}")
    return package


def _lift(basis, degrees, p, local_vectors, complex_):
    """Cell coordinates in degree p of vectors given in the local basis."""
    columns = basis[:, degrees == p]
    return (columns @ local_vectors)[complex_.block(p)]
