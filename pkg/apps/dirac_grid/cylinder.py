# apps/dirac_grid/cylinder.py
"""Truncated cylinder ends and the explicit inverse on a half-cylinder."""
import logging
import math
from dataclasses import replace
from typing import NamedTuple

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import spsolve

from apps.graded_core.exceptions import DimensionMismatch, ExtensionTooShort, RefineRequired

from .boundary import BoundaryOperator, aps_projection, negative_basis
from .operators import DiscreteDirac

logger = logging.getLogger(__name__)

MIN_DECAY_LENGTHS = 8.0


def cutoff(x, length, collar):
    """χ = 0 before the collar, 1 on its last three quarters, smooth in between."""
    start, stop = length - collar, length - 0.75 * collar
    if x <= start:
        return 0.0
    if x >= stop:
        return 1.0
    u = (x - start) / (stop - start)
    return u * u * (3 - 2 * u)


def build_cylinder_extension(dirac, trivializing, extension_length, collar=None):
    """Attach [L, L+ℓ] × ∂M with mass B + A and the APS condition of B + A at the far end.

    Inside M the mass is B + χA. ℓ must cover eight decay lengths 1/gap(B + A).
    """
    gap = trivializing.gap
    required = MIN_DECAY_LENGTHS / gap
    if extension_length < required:
        raise ExtensionTooShort("cylinder shorter than eight decay lengths",
                                length=extension_length, required=required)
    mesh = dirac.mesh
    collar = collar or mesh.length / 4
    extra = int(math.ceil(extension_length / mesh.spacing))
    extended = mesh.extended(extra)
    boundary, perturbation = dirac.boundary.matrix, trivializing.matrix
    masses = [boundary + cutoff(x, mesh.length, collar) * perturbation if x < mesh.length
              else boundary + perturbation for x in extended.cell_centers()]
    far_end = negative_basis(boundary + perturbation)
    logger.debug(f"cylinder extension of {dirac.label or 'collar'}: {extra} cells, gap {gap:.3f}")
    return replace(dirac, mesh=extended, masses=np.array(masses), right_basis=far_end,
                   label=f"{dirac.label}+cyl")


class HalfCylinderReport(NamedTuple):
    discrete_residual: float
    continuum_residual: float
    solution_norm: float
    nodes: int

    def to_dict(self):
        return self._asdict()


def default_source(mesh, dim):
    """Smooth bump in the middle half of the mesh times a fixed complex vector."""
    vector = (np.arange(1, dim + 1) + 1j * np.arange(dim, 0, -1)) / math.sqrt(2 * dim)
    rows = []
    for x in mesh.cell_centers():
        u = (x - mesh.length / 4) / (mesh.length / 2)
        bump = math.sin(math.pi * u) ** 2 if 0 < u < 1 else 0.0
        rows.append(bump * vector)
    return np.array(rows, dtype=np.complex128)


def _duhamel(mass, projection, source, h):
    """Discrete inverse: the (1−P) part forward from 0, the P part backward from the far end."""
    dim, cells = mass.shape[0], source.shape[0]
    identity = np.eye(dim)
    forward_resolvent = linalg.inv(identity - h * mass / 2)
    forward = forward_resolvent @ (identity + h * mass / 2)
    backward_resolvent = linalg.inv(identity + h * mass / 2)
    backward = backward_resolvent @ (identity - h * mass / 2)
    complement = identity - projection
    lower = np.zeros((cells + 1, dim), dtype=np.complex128)
    upper = np.zeros((cells + 1, dim), dtype=np.complex128)
    for j in range(cells):
        lower[j + 1] = forward @ lower[j] + h * forward_resolvent @ (complement @ source[j])
    for j in range(cells - 1, -1, -1):
        upper[j] = backward @ upper[j + 1] - h * backward_resolvent @ (projection @ source[j])
    return lower + upper


def _continuum(mass, source, mesh):
    """∫ e^{(x−y)X}(1−P)g over y < x minus ∫ e^{(x−y)X}P g over y > x, midpoint rule."""
    values, vectors = linalg.eigh(mass)
    coefficients = source @ vectors.conj()
    nodes = np.arange(mesh.nodes) * mesh.spacing
    centers = np.array(mesh.cell_centers())
    offsets = nodes[:, None] - centers[None, :]
    solution = np.zeros((mesh.nodes, values.size), dtype=np.complex128)
    for index, value in enumerate(values):
        if value < 0:
            kernel = np.where(offsets > 0, np.exp(value * np.clip(offsets, 0, None)), 0.0)
        else:
            kernel = -np.where(offsets < 0, np.exp(value * np.clip(offsets, None, 0)), 0.0)
        solution[:, index] = mesh.spacing * kernel @ coefficients[:, index]
    return solution @ vectors.T


def verify_zl_inverse(trivializing, mesh, source=None):
    """Compare the explicit half-cylinder inverse with a sparse solve of the same problem.

    The problem is Δu = −ig on [0, L] with mass X = B + A, (1−P)u(0) = 0 and
    Pu(L) = 0 for P = 1_{≥0}(X).
    """
    mass = trivializing.perturbed
    dim = mass.shape[0]
    source = default_source(mesh, dim) if source is None else np.asarray(source, dtype=np.complex128)
    if source.shape != (mesh.cells, dim):
        raise DimensionMismatch("source needs one fiber vector per cell", expected=(mesh.cells, dim),
                                got=source.shape)
    radius = float(np.max(np.abs(linalg.eigvalsh(mass))))
    if mesh.spacing * radius / 2 >= 0.5:
        raise RefineRequired("mesh too coarse for the half-cylinder mass", suggested_samples=2 * mesh.nodes - 1)
    projection = aps_projection(mass)
    values, vectors = linalg.eigh(mass)
    operator = DiscreteDirac(mesh, BoundaryOperator(mass), np.repeat(mass[None], mesh.cells, axis=0),
                             left_basis=vectors[:, values > 0], right_basis=vectors[:, values < 0],
                             label='half-cylinder')
    reduced = spsolve(operator.constrained().tocsc(), (-1j * source).reshape(-1))
    direct = (operator.embedding() @ reduced).reshape(mesh.nodes, dim)
    discrete = _duhamel(mass, projection, source, mesh.spacing)
    continuum = _continuum(mass, source, mesh)
    scale = max(1.0, float(np.max(np.abs(direct))))
    report = HalfCylinderReport(float(np.max(np.abs(discrete - direct))) / scale,
                                float(np.max(np.abs(continuum - direct))) / scale,
                                float(np.linalg.norm(direct)), mesh.nodes)
    logger.debug(f"half-cylinder inverse at {mesh.nodes} nodes: {report}")
    return report
