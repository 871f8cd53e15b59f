# apps/signature/stabilization.py
"""Stabilization of the odd case by an interval.

The ends of X = [0, 1] contribute ℂ² ⊗ ℂ^k to the middle harmonic space of
the boundary, with a Lagrangian L₀ ⊗ ℂ^k. A Lagrangian of the enlarged
space may mix both parts. For products with an even-dimensional N the two
stabilized Lagrangians L₁, L₂ differ by swapping two copies of ℂ^{2k}⊗ℋ_N,
and U(t) connects them through Lagrangians.
"""
import logging
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from apps.dirac_grid.boundary import grading_bases
from apps.graded_core.exceptions import InputError, LagrangianError
from apps.graded_core.graded import spectral_norm
from apps.kclass.algebra import BlockAlgebra, K1Class

from .classes import BOUNDARY_ODD, SignatureResult, lagrangian_witness, signature_class
from .complexes import interval
from .hodge import HodgeDecomposition, _complement, hodge_package
from .involutions import PATH_SAMPLES, PATH_TOL, Lagrangian, assumptions_hold, build_alpha, lagrangian_from_unitary
from .products import lagrangian_tensor, product_package

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class IntervalStabilizer:
    """ℂ² ⊗ ℂ^k from the two ends of [0, 1], with τ and the Lagrangian L₀ ⊗ ℂ^k."""
    k: int
    tau: np.ndarray
    lagrangian: np.ndarray

    @property
    def dim(self):
        return 2 * self.k

    def check(self):
        return Lagrangian(self.lagrangian, np.eye(self.dim), self.tau).check()


def interval_stabilizer(k=1):
    if k < 1:
        raise InputError("the stabilizer needs k ≥ 1", k=k)
    ends = hodge_package(interval(1).boundary_model)
    harmonic = ends.middle_harmonic
    tau_ends = harmonic.conj().T @ ends.tau @ harmonic
    plus, minus = grading_bases(tau_ends)
    base = (plus + minus) / math.sqrt(2)
    stabilizer = IntervalStabilizer(k, np.kron(tau_ends, np.eye(k)), np.kron(base, np.eye(k)))
    stabilizer.check()
    return stabilizer


def stabilized_package(hodge, stabilizer):
    """The boundary package with ℂ^{2k} attached in the middle degree (d = 0 there)."""
    if hodge.dimension % 2:
        raise InputError("stabilization concerns even-dimensional boundaries", dimension=hodge.dimension)
    size, extra = hodge.size, stabilizer.dim
    d = linalg.block_diag(hodge.d, np.zeros((extra, extra)))
    tau = linalg.block_diag(hodge.tau, stabilizer.tau)
    degrees = np.concatenate([hodge.degrees, np.full(extra, hodge.middle, dtype=int)])
    package = HodgeDecomposition(d, tau, degrees, hodge.dimension, hodge.tau_source,
                                 f"{hodge.label}+X{stabilizer.k}", hodge.tol)
    package.check()
    logger.debug(f"stabilized {hodge.label} by C^{extra}; harmonic {size} -> {package.size}")
    return package


@dataclass(frozen=True, eq=False)
class StabilizedBoundary:
    hodge: object
    stabilizer: IntervalStabilizer
    package: HodgeDecomposition
    lagrangian: Lagrangian
    unitary: np.ndarray

    @cached_property
    def split(self):
        """L_∂M ⊕ L₀⊗ℂ^k as a Lagrangian of the stabilized space."""
        inner = lagrangian_from_unitary(self.hodge)
        size, rank = inner.basis.shape
        basis = np.zeros((self.package.size, rank + self.stabilizer.k), dtype=np.complex128)
        basis[:size, :rank] = inner.basis
        basis[size:, rank:] = self.stabilizer.lagrangian
        lagrangian = Lagrangian(basis, self.package.middle_harmonic, self.package.tau).check()
        return lagrangian, lagrangian.unitary()

    @property
    def mixing(self):
        """‖P_S P_L P_ℋ‖: how strongly L couples the stabilizer to the boundary harmonics."""
        size = self.hodge.size
        projector = self.package.projector(self.lagrangian.basis)
        return spectral_norm(projector[size:, :size])

    def to_dict(self):
        return {'k': self.stabilizer.k, 'dim': self.lagrangian.dim, 'mixing': self.mixing,
                'residual': max(self.lagrangian.residuals().values())}


def _random_unitary(rng, size):
    unitary, upper = np.linalg.qr(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))
    return unitary @ np.diag(np.exp(1j * np.angle(np.diag(upper))))


def stabilize(hodge, k=1, rng=None):
    """A Lagrangian of ℋ ⊕ ℂ^{2k} that mixes the stabilizer with the boundary harmonics.

    Raises LagrangianError when τ is unbalanced on ℋ: the stabilizer is
    balanced, so it cannot repair a nonzero index.
    """
    rng = rng or np.random.default_rng(0)
    stabilizer = interval_stabilizer(k)
    package = stabilized_package(hodge, stabilizer)
    if not assumptions_hold(package):
        positive, negative = hodge.middle_balance()
        raise LagrangianError("τ is unbalanced on the middle harmonic space; no stabilization exists",
                              plus=positive, minus=negative)
    unitary = _random_unitary(rng, package.middle_balance()[0])
    lagrangian = lagrangian_from_unitary(package, unitary)
    build_alpha(package, lagrangian)
    result = StabilizedBoundary(hodge, stabilizer, package, lagrangian, unitary)
    logger.info(f"stabilized Lagrangian on {package.label}: dim {lagrangian.dim}, mixing {result.mixing:.3f}")
    return result


def stabilized_signature_class(complex_, k=1, rng=None, samples=PATH_SAMPLES):
    """σ^L(M ⊔ X) for a mixed L, compared with σ(M) through a Lagrangian path to the split one."""
    if complex_.is_closed or complex_.dimension % 2 == 0:
        raise InputError("stabilization applies to odd-dimensional complexes with boundary",
                         label=complex_.label)
    if complex_.group is not None:
        raise InputError("stabilization is set up for untwisted complexes", label=complex_.label)
    base = signature_class(complex_)
    hodge = hodge_package(complex_.boundary_model)
    stabilized = stabilize(hodge, k, rng)
    _, split_unitary = stabilized.split
    witness = lagrangian_witness(stabilized.package, stabilized.unitary, split_unitary, samples)
    witness['mixing'] = stabilized.mixing
    result = SignatureResult(f"{complex_.label}+X{k}", BOUNDARY_ODD, K1Class.zero(BlockAlgebra.trivial()),
                             None, ({'k': k},), stabilized.package.tau_source, witness)
    return base, result


def _embed(columns, rows, offset, total):
    full = np.zeros((total, columns.shape[1]), dtype=np.complex128)
    full[offset:offset + rows] = columns
    return full


def _projector_distance(first, second):
    return spectral_norm(first @ first.conj().T - second @ second.conj().T)


def swap_unitary(y, z, t):
    """Identity off span(y, z); [[e^{2it}cos t, sin t], [−e^{2it}sin t, cos t]] ⊗ 1 on (y, z)."""
    phase = np.exp(2j * t)
    block = np.array([[phase * math.cos(t), math.sin(t)], [-phase * math.sin(t), math.cos(t)]])
    frame = np.hstack([y, z])
    middle = np.kron(block, np.eye(y.shape[1]))
    return np.eye(y.shape[0]) - frame @ frame.conj().T + frame @ middle @ frame.conj().T


def stabilization_path(stabilized, second, samples=PATH_SAMPLES):
    """Check that U(t)L₁ stays Lagrangian on [0, π/2] and that U(π/2)L₁ = L₂.

    The space is ℋ_{∂M×N} ⊕ (ℂ^{2k}⊗ℋ_N) ⊕ (ℂ^{2k}⊗ℋ_N): the product middle
    harmonic space, whose stabilizer part is the y copy, plus a z copy
    carrying the same τ.
    """
    if second.dimension % 2:
        raise InputError("the swap path is built for even-dimensional N", dimension=second.dimension)
    package, stabilizer = stabilized.package, stabilized.stabilizer
    spec = build_alpha(package, stabilized.lagrangian)
    product = product_package(package, second)
    tensor = lagrangian_tensor(spec, second, product)

    harmonic_n = second.middle_harmonic
    selector = np.eye(package.size)[:, stabilized.hodge.size:]
    y = np.kron(selector, harmonic_n)
    harmonic = product.middle_harmonic
    x = harmonic @ _complement(harmonic.conj().T @ y, harmonic.shape[1])
    size, extra = product.size, y.shape[1]
    total = size + extra
    tau_z = y.conj().T @ product.tau @ y
    tau = linalg.block_diag(product.tau, tau_z)
    x_hat, y_hat = _embed(x, size, 0, total), _embed(y, size, 0, total)
    z_hat = _embed(np.eye(extra), extra, size, total)
    frame = np.hstack([x_hat, y_hat, z_hat])

    z_lagrangian = z_hat @ np.kron(stabilizer.lagrangian, np.eye(harmonic_n.shape[1]))
    first = np.hstack([_embed(tensor.basis, size, 0, total), z_lagrangian])
    Lagrangian(first, frame, tau).check()
    second_lagrangian = swap_unitary(y_hat, z_hat, math.pi / 2) @ first

    worst, drift = 0.0, 0.0
    for t in np.linspace(0.0, math.pi / 2, samples):
        unitary = swap_unitary(y_hat, z_hat, t)
        drift = max(drift, spectral_norm(unitary @ tau - tau @ unitary))
        moved = Lagrangian(unitary @ first, frame, tau)
        worst = max(worst, max(moved.residuals().values()))
    report = {
        'samples': samples,
        'residual': worst,
        'tau_commutator': drift,
        'start': _projector_distance(swap_unitary(y_hat, z_hat, 0.0) @ first, first),
        'end_is_swap': _projector_distance(second_lagrangian,
                                           _swap(y_hat, z_hat) @ first),
        'tensor_dim': tensor.dim,
        'dim': first.shape[1],
    }
    report['ok'] = max(worst, drift, report['start'], report['end_is_swap']) < PATH_TOL
    logger.info(f"stabilization path on {product.label}: residual {worst:.2e}")
    return report


def _swap(y, z):
    frame = np.hstack([y, z])
    exchange = np.kron(np.array([[0.0, 1.0], [1.0, 0.0]]), np.eye(y.shape[1]))
    return np.eye(y.shape[0]) - frame @ frame.conj().T + frame @ exchange @ frame.conj().T
