# apps/dirac_grid/circle.py
"""Circle factors: Fourier modes of a twisted circle and their grid realization."""
import numpy as np

from apps.graded_core.exceptions import DimensionMismatch
from apps.graded_core.graded import STRUCTURAL_TOL


def fourier_matrix(size):
    """Unitary F with F[x, n] = e^{2πi x m_n / N}/√N for the centered modes m_n = n − ⌊N/2⌋."""
    points = np.arange(size)
    modes = points - size // 2
    return np.exp(2j * np.pi * np.outer(points, modes) / size) / np.sqrt(size)


def is_separable(family, t=0.0):
    matrix = family.at(t)
    off_diagonal = matrix - np.diag(np.diag(matrix))
    return not np.any(np.abs(off_diagonal) > STRUCTURAL_TOL)


def mode_values(family, t):
    """Eigenvalue of every Fourier mode at parameter t; the family must be diagonal."""
    if not is_separable(family, t):
        raise DimensionMismatch("family does not separate into Fourier modes", label=family.label)
    return np.real(np.diag(family.at(t)))


def grid_operator(family, t):
    """The circle operator on the grid of dim(family) points, F·diag(μ)·F*."""
    transform = fourier_matrix(family.dim)
    return transform @ np.diag(mode_values(family, t)) @ transform.conj().T
