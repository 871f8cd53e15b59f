# apps/kclass/loops.py
"""Trigonometric loop families and their spectral flow.

K₁ of a block algebra vanishes, so odd classes are realized over loop
coefficients: a family H(t) = Σ_k C_k e^{ikt} + (t/2π)·Q on one period.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np
from scipy import linalg

from apps.graded_core.exceptions import DimensionMismatch, GapViolation, InputError, NotSelfAdjoint, RefineRequired
from apps.graded_core.graded import STRUCTURAL_TOL, as_matrix, spectral_norm

from .algebra import BlockAlgebra, K1Class
from .modules import sector_leakage, validate_sectors

logger = logging.getLogger(__name__)

TWO_PI = 2 * math.pi
DEFAULT_SAMPLES = 257
MAX_BISECTIONS = 24
CERTIFICATE_SLACK = 1e-9
LOOP_TOL = 1e-8
NUDGES = (0.154508, -0.154508, 0.309017, -0.309017)
SPLITS = (0.5, 0.381966, 0.618034)


@dataclass(frozen=True, eq=False)
class LoopOperatorFamily:
    coefficients: Dict[int, np.ndarray]
    drift: Optional[np.ndarray] = None
    sample_count: int = DEFAULT_SAMPLES
    algebra: BlockAlgebra = field(default_factory=BlockAlgebra.trivial)
    sectors: Optional[np.ndarray] = None
    label: str = ''

    def __post_init__(self):
        if not self.coefficients:
            raise DimensionMismatch("a loop family needs at least one coefficient")
        coefficients = {int(k): as_matrix(value, f"C_{k}") for k, value in self.coefficients.items()}
        dims = {matrix.shape for matrix in coefficients.values()}
        if len(dims) != 1:
            raise DimensionMismatch("coefficients disagree in shape", shapes=sorted(dims))
        shape = dims.pop()
        if shape[0] != shape[1]:
            raise DimensionMismatch("coefficients must be square", shape=shape)
        for k, matrix in coefficients.items():
            partner = coefficients.get(-k, np.zeros(shape))
            residual = spectral_norm(matrix - partner.conj().T)
            if residual > STRUCTURAL_TOL * max(1.0, spectral_norm(matrix)):
                raise NotSelfAdjoint("C_{-k} must equal C_k*", k=k, residual=residual)
        drift = np.zeros(shape, dtype=np.complex128) if self.drift is None else as_matrix(self.drift, 'drift')
        if drift.shape != shape:
            raise DimensionMismatch("drift does not match the coefficients", drift=drift.shape, shape=shape)
        if spectral_norm(drift - drift.conj().T) > STRUCTURAL_TOL * max(1.0, spectral_norm(drift)):
            raise NotSelfAdjoint("drift must be selfadjoint")
        if self.sample_count < 8:
            raise DimensionMismatch("at least 8 samples per period", sample_count=self.sample_count)
        sectors = validate_sectors(self.sectors, shape[0], self.algebra)
        leakage = max([sector_leakage(matrix, sectors) for matrix in coefficients.values()]
                      + [sector_leakage(drift, sectors)])
        if leakage > STRUCTURAL_TOL:
            raise DimensionMismatch("family couples different blocks", leakage=leakage)
        object.__setattr__(self, 'coefficients', coefficients)
        object.__setattr__(self, 'drift', drift)
        object.__setattr__(self, 'sectors', sectors)

    @classmethod
    def constant(cls, matrix, **kwargs):
        return cls({0: as_matrix(matrix)}, **kwargs)

    @classmethod
    def twisted_circle(cls, charges, cutoff=None, mixing_seed=None, offset=0.5, **kwargs):
        """Fourier truncation of −i∂_θ + α(t) with α drifting by one charge per period.

        Each charge c contributes the modes n = −K..K with eigenvalues
        n + offset + c·t/2π; the flow over one period is Σ charges as long as
        K ≥ max|c| + 1.
        """
        charges = [int(charge) for charge in charges]
        cutoff = cutoff if cutoff is not None else max([abs(c) for c in charges] + [0]) + 1
        if charges and cutoff < max(abs(c) for c in charges) + 1:
            raise DimensionMismatch("Fourier cutoff too small for the charges", cutoff=cutoff)
        modes = np.arange(-cutoff, cutoff + 1, dtype=float)
        base = np.concatenate([modes + offset for _ in charges])
        drift = np.concatenate([np.full(modes.size, float(charge)) for charge in charges])
        base_matrix, drift_matrix = np.diag(base).astype(np.complex128), np.diag(drift).astype(np.complex128)
        if mixing_seed is not None:
            # conjugation by a fixed unitary keeps every spectrum and couples the modes
            rng = np.random.default_rng(mixing_seed)
            size = base.size
            unitary, _ = np.linalg.qr(rng.normal(size=(size, size)) + 1j * rng.normal(size=(size, size)))
            base_matrix = unitary @ base_matrix @ unitary.conj().T
            drift_matrix = unitary @ drift_matrix @ unitary.conj().T
        kwargs.setdefault('label', f"twisted_circle{tuple(charges)}")
        return cls({0: base_matrix}, drift=drift_matrix, **kwargs)

    @property
    def dim(self):
        return next(iter(self.coefficients.values())).shape[0]

    def at(self, t):
        matrix = (t / TWO_PI) * self.drift
        for k, coefficient in self.coefficients.items():
            matrix = matrix + coefficient * np.exp(1j * k * t)
        return matrix

    def lipschitz(self):
        """Bound on ‖H′(t)‖."""
        total = spectral_norm(self.drift) / TWO_PI
        for k, coefficient in self.coefficients.items():
            total += abs(k) * spectral_norm(coefficient)
        return total

    def restrict(self, block):
        indices = np.flatnonzero(self.sectors == block)
        coefficients = {k: matrix[np.ix_(indices, indices)] for k, matrix in self.coefficients.items()}
        return LoopOperatorFamily(coefficients, self.drift[np.ix_(indices, indices)], self.sample_count,
                                  label=f"{self.label}[{block}]")

    def endpoint_mismatch(self, t0=0.0, window=1.0):
        """Largest distance from an eigenvalue of H(t0) or H(t0+2π) in [−window, window] to the other spectrum."""
        first = linalg.eigvalsh(self.at(t0))
        last = linalg.eigvalsh(self.at(t0 + TWO_PI))
        mismatch = 0.0
        for inner, outer in ((first, last), (last, first)):
            for value in inner[np.abs(inner) <= window]:
                mismatch = max(mismatch, float(np.min(np.abs(outer - value))) if outer.size else math.inf)
        return mismatch


class FlowReport(NamedTuple):
    flow: int
    up: int
    down: int
    crossings: List[Tuple[float, int]]
    samples: int


def _negative_count(values):
    return int(np.sum(values < 0))


def _gap(values):
    return float(np.min(np.abs(values))) if values.size else math.inf


def _clear_grid(family, points, spectra, threshold):
    """Move interior samples sitting on a crossing off it, keeping the grid ordered."""
    spacing = points[1] - points[0]
    for index in range(1, len(points) - 1):
        if _gap(spectra[index]) > threshold:
            continue
        for fraction in NUDGES:
            t = points[index] + fraction * spacing
            values = linalg.eigvalsh(family.at(t))
            if _gap(values) > threshold:
                points[index], spectra[index] = t, values
                break
        else:
            raise RefineRequired("sample point lands on a crossing", t=float(points[index]),
                                 suggested_samples=_refined(len(points) - 1))


def _refined(intervals):
    """Next sample count; 2n+1 shares no factor with n."""
    return 2 * intervals + 1


def spectral_flow(family, tol=STRUCTURAL_TOL, t0=0.0, t1=None, sample_count=None):
    """Signed count of eigenvalues crossing 0 from below along [t0, t1].

    Sampling is certified interval by interval with the Lipschitz bound; an
    uncertified interval is bisected to locate its crossings. Interior
    samples that land on a crossing are moved off it.
    """
    t1 = t0 + TWO_PI if t1 is None else t1
    intervals = sample_count or family.sample_count
    lipschitz = family.lipschitz()
    points = np.linspace(t0, t1, intervals + 1)
    spectra = [linalg.eigvalsh(family.at(t)) for t in points]
    scale = max(1.0, max(float(np.max(np.abs(values))) if values.size else 0.0 for values in spectra))
    threshold = tol * scale

    for end, values in ((t0, spectra[0]), (t1, spectra[-1])):
        if _gap(values) <= threshold:
            raise GapViolation("family is not invertible at an endpoint", t=end, threshold=threshold)
    _clear_grid(family, points, spectra, threshold)

    crossings = []

    def certified(a, b, values_a, values_b):
        return _gap(values_a) + _gap(values_b) > lipschitz * (b - a) * (1 + CERTIFICATE_SLACK) + threshold

    def resolve(a, b, values_a, values_b, depth):
        delta = _negative_count(values_a) - _negative_count(values_b)
        if not delta and certified(a, b, values_a, values_b):
            return
        if depth >= MAX_BISECTIONS or (b - a) < 1e-12 * abs(t1 - t0):
            if delta:
                crossings.append(((a + b) / 2, delta))
            return
        for split in SPLITS:
            middle = a + split * (b - a)
            values_m = linalg.eigvalsh(family.at(middle))
            if _gap(values_m) > threshold:
                break
        else:
            # every split point sits on the crossing
            if delta:
                crossings.append((middle, delta))
            return
        resolve(a, middle, values_a, values_m, depth + 1)
        resolve(middle, b, values_m, values_b, depth + 1)

    for index in range(intervals):
        resolve(points[index], points[index + 1], spectra[index], spectra[index + 1], 0)

    flow = _negative_count(spectra[0]) - _negative_count(spectra[-1])
    up = sum(delta for _, delta in crossings if delta > 0)
    down = -sum(delta for _, delta in crossings if delta < 0)
    if up - down != flow:
        raise RefineRequired("crossing bookkeeping does not add up", flow=flow, up=up, down=down,
                             suggested_samples=_refined(intervals))
    logger.debug(f"spectral flow of {family.label or 'family'} over [{t0:.3f}, {t1:.3f}]: {flow}")
    return FlowReport(flow, up, down, crossings, intervals)


def k1_of_family(family, tol=STRUCTURAL_TOL):
    """Spectral flow per block of the coefficient algebra."""
    mismatch = family.endpoint_mismatch()
    if mismatch > LOOP_TOL * max(1.0, spectral_norm(family.at(0.0))):
        raise InputError("family does not close up: the spectra at 0 and 2π differ",
                         label=family.label, mismatch=mismatch)
    windings = []
    for block in range(family.algebra.rank):
        if not np.any(family.sectors == block):
            windings.append(0)
            continue
        windings.append(spectral_flow(family.restrict(block), tol).flow)
    return K1Class(family.algebra, tuple(windings))


def _eigenphases(unitary):
    return np.angle(linalg.eigvals(unitary))


def _cut_angle(phases):
    """Angle in (0, π) as far as possible from every phase in [0, π] and from 0, π."""
    inside = np.sort(phases[(phases > 0) & (phases < math.pi)])
    marks = np.concatenate([[0.0], inside, [math.pi]])
    gaps = np.diff(marks)
    best = int(np.argmax(gaps))
    return (marks[best] + marks[best + 1]) / 2, gaps[best] / 2


def _count_below(phases, cut):
    return int(np.sum((phases >= 0) & (phases < cut)))


def unitary_flow(path, t0=0.0, t1=1.0, samples=DEFAULT_SAMPLES, tol=STRUCTURAL_TOL):
    """Net counter-clockwise crossings of eigenphases of a unitary path through 1."""
    points = np.linspace(t0, t1, samples + 1)
    matrices = [as_matrix(path(t)) for t in points]
    dim = matrices[0].shape[0]
    movement_limit = math.pi / (4 * dim + 4)
    for end, matrix in ((t0, matrices[0]), (t1, matrices[-1])):
        phases = _eigenphases(matrix)
        if np.min(np.abs(phases)) <= tol:
            raise GapViolation("unitary has eigenvalue 1 at an endpoint", t=end)

    def step(a, b, start, stop, depth):
        movement = (math.pi / 2) * np.linalg.norm(stop - start)
        if movement >= movement_limit:
            if depth >= MAX_BISECTIONS:
                raise RefineRequired("unitary path moves too fast to resolve",
                                     suggested_samples=2 * samples + 1)
            middle = (a + b) / 2
            matrix = as_matrix(path(middle))
            return step(a, middle, start, matrix, depth + 1) + step(middle, b, matrix, stop, depth + 1)
        phases_a, phases_b = _eigenphases(start), _eigenphases(stop)
        cut, _ = _cut_angle(np.concatenate([phases_a, phases_b]))
        return _count_below(phases_b, cut) - _count_below(phases_a, cut)

    total = sum(step(points[i], points[i + 1], matrices[i], matrices[i + 1], 0) for i in range(samples))
    logger.debug(f"unitary flow over [{t0}, {t1}]: {total}")
    return total
