# apps/dirac_grid/mesh.py
from dataclasses import dataclass

from apps.graded_core.exceptions import DimensionMismatch, InputError

INTERVAL = 'interval'
CIRCLE = 'circle'
MIN_NODES = 8


@dataclass(frozen=True)
class Mesh1D:
    """Uniform mesh; an interval owns two boundary traces, a circle none."""
    kind: str = INTERVAL
    nodes: int = 64
    length: float = 1.0

    def __post_init__(self):
        if self.kind not in (INTERVAL, CIRCLE):
            raise InputError("mesh kind must be interval or circle", kind=self.kind)
        if self.nodes < MIN_NODES:
            raise DimensionMismatch("mesh needs at least 8 nodes", nodes=self.nodes)
        if self.length <= 0:
            raise InputError("mesh length must be positive", length=self.length)

    @classmethod
    def interval(cls, nodes=64, length=1.0):
        return cls(INTERVAL, nodes, length)

    @classmethod
    def circle(cls, nodes=64, length=1.0):
        return cls(CIRCLE, nodes, length)

    @property
    def cells(self):
        return self.nodes - 1 if self.kind == INTERVAL else self.nodes

    @property
    def spacing(self):
        return self.length / self.cells

    @property
    def boundary_traces(self):
        return 2 if self.kind == INTERVAL else 0

    def cell_centers(self):
        return [(index + 0.5) * self.spacing for index in range(self.cells)]

    def extended(self, extra_cells):
        """Same spacing, `extra_cells` more cells on the right."""
        return Mesh1D(self.kind, self.nodes + extra_cells, self.length + extra_cells * self.spacing)

    def refined(self):
        """Twice the cells on the same length."""
        return Mesh1D(self.kind, 2 * self.cells + (1 if self.kind == INTERVAL else 0), self.length)

    def to_dict(self):
        return {'kind': self.kind, 'nodes': self.nodes, 'length': self.length}
