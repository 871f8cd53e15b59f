# apps/kclass/samples.py
"""Random finite-dimensional modules and loop families for the product-law suites."""
import numpy as np
from scipy import linalg

from .algebra import BlockAlgebra
from .loops import LoopOperatorFamily
from .modules import KasparovModule


def random_algebra(rng, max_blocks=2, max_size=3):
    blocks = int(rng.integers(1, max_blocks + 1))
    return BlockAlgebra(tuple(int(size) for size in rng.integers(1, max_size + 1, size=blocks)))


def _low_rank(rng, rows, cols):
    rank = int(rng.integers(0, min(rows, cols) + 1)) if rows and cols else 0
    left = rng.normal(size=(rows, rank)) + 1j * rng.normal(size=(rows, rank))
    right = rng.normal(size=(rank, cols)) + 1j * rng.normal(size=(rank, cols))
    return left @ right


def random_even_module(rng, algebra=None, max_dim=2, label='even'):
    """Block-diagonal D⁺ with a random rank in every block."""
    algebra = algebra or random_algebra(rng)
    plus_dims = rng.integers(0, max_dim + 1, size=algebra.rank)
    minus_dims = rng.integers(0, max_dim + 1, size=algebra.rank)
    if not plus_dims.sum() + minus_dims.sum():
        plus_dims[0] = 1
    blocks = [_low_rank(rng, int(q), int(p)) for p, q in zip(plus_dims, minus_dims)]
    d_plus = linalg.block_diag(*blocks) if blocks else np.zeros((0, 0))
    d_plus = d_plus.reshape(int(minus_dims.sum()), int(plus_dims.sum()))
    plus_sectors = np.repeat(np.arange(algebra.rank), plus_dims)
    minus_sectors = np.repeat(np.arange(algebra.rank), minus_dims)
    return KasparovModule.even(d_plus, algebra, plus_sectors, minus_sectors, label)


def random_odd_module(rng, algebra=None, max_dim=3, label='odd'):
    algebra = algebra or random_algebra(rng)
    dims = rng.integers(1, max_dim + 1, size=algebra.rank)
    blocks = []
    for dim in dims:
        raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        blocks.append(raw + raw.conj().T)
    return KasparovModule.odd(linalg.block_diag(*blocks), algebra, np.repeat(np.arange(algebra.rank), dims), label)


def random_loop_family(rng, algebra=None, charge_range=2, sample_count=257, label='loop'):
    """One twisted circle per block with a random charge, mixed by a random unitary."""
    algebra = algebra or random_algebra(rng)
    charges = [int(rng.integers(-charge_range, charge_range + 1)) for _ in range(algebra.rank)]
    parts = [LoopOperatorFamily.twisted_circle([charge], mixing_seed=int(rng.integers(1 << 31)))
             for charge in charges]
    base = linalg.block_diag(*[part.coefficients[0] for part in parts])
    drift = linalg.block_diag(*[part.drift for part in parts])
    sectors = np.repeat(np.arange(algebra.rank), [part.dim for part in parts])
    family = LoopOperatorFamily({0: base}, drift, sample_count, algebra, sectors, label)
    return family, charges
