# apps/lab/config.py
"""Run configuration: command options merged over the APSLAB_* settings."""
from pathlib import Path
from typing import Literal, Optional, Tuple

from django.conf import settings
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from apps.dirac_grid.mesh import MIN_NODES
from apps.graded_core.exceptions import InputError

from .io import resolve_path
from .utils import parse_filter, parse_nodes

COMMANDS = ('kprod', 'index', 'signature', 'verify_suite')
MUTATIONS = ('gamma2-sign',)
FORMATS = ('text', 'records')

# option name -> RunConfig field
OPTION_FIELDS = {
    'input': 'inputs',
    'tol': 'structural_tol',
    'identity_tol': 'identity_tol',
    'nodes': 'nodes',
    'seed': 'seed',
    'pairs': 'pairs',
    'filter': 'filters',
    'jobs': 'jobs',
    'format': 'format',
    'mutate': 'mutate',
    'celery': 'use_celery',
}


def default_fixtures():
    return str(Path(__file__).resolve().parent / 'fixtures')


class RunConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra='forbid')

    command: Literal['kprod', 'index', 'signature', 'verify_suite']
    inputs: Tuple[str, ...] = ()
    structural_tol: float = Field(default=1e-9, gt=0, lt=1e-3)
    algebraic_tol: float = Field(default=1e-12, gt=0, lt=1e-3)
    identity_tol: float = Field(default=1e-10, gt=0, lt=1e-3)
    nodes: Tuple[int, ...] = (64, 128)
    seed: int = Field(default=20240101, ge=0)
    pairs: int = Field(default=100, ge=1, le=10000)
    filters: Tuple[str, ...] = ()
    jobs: int = Field(default=1, ge=1, le=64)
    format: Literal['text', 'records'] = 'records'
    mutate: Optional[Literal['gamma2-sign']] = None
    fixtures: str = Field(default_factory=default_fixtures)
    use_celery: bool = False
    persist: bool = True

    @field_validator('nodes', mode='before')
    @classmethod
    def split_nodes(cls, value):
        try:
            return parse_nodes(value)
        except ValueError:
            raise ValueError(f"mesh resolutions must be integers, got {value!r}")

    @field_validator('nodes')
    @classmethod
    def check_resolutions(cls, value):
        if not value:
            raise ValueError("at least one mesh resolution is required")
        small = [n for n in value if n < MIN_NODES]
        if small:
            raise ValueError(f"mesh resolutions below {MIN_NODES} nodes: {small}")
        return tuple(sorted(set(value)))

    @field_validator('filters', mode='before')
    @classmethod
    def split_filters(cls, value):
        return parse_filter(value)

    @field_validator('inputs', mode='before')
    @classmethod
    def listify_inputs(cls, value):
        if value is None:
            return ()
        if isinstance(value, str):
            return (value,)
        return tuple(value)

    @classmethod
    def from_settings(cls, command, **overrides):
        data = {
            'command': command,
            'structural_tol': getattr(settings, 'APSLAB_STRUCTURAL_TOL', 1e-9),
            'algebraic_tol': getattr(settings, 'APSLAB_ALGEBRAIC_TOL', 1e-12),
            'identity_tol': getattr(settings, 'APSLAB_IDENTITY_TOL', 1e-10),
            'nodes': getattr(settings, 'APSLAB_DEFAULT_NODES', '64,128'),
            'seed': getattr(settings, 'APSLAB_DEFAULT_SEED', 20240101),
            'jobs': getattr(settings, 'APSLAB_JOBS', 1),
            'fixtures': getattr(settings, 'APSLAB_FIXTURES', None) or default_fixtures(),
            'use_celery': getattr(settings, 'APSLAB_USE_CELERY', False),
            'persist': getattr(settings, 'APSLAB_PERSIST_RUNS', True),
        }
        data.update(overrides)
        try:
            return cls(**data)
        except ValidationError as e:
            problems = '; '.join(f"{'.'.join(str(part) for part in error['loc'])}: {error['msg']}"
                                 for error in e.errors())
            raise InputError(f"invalid run configuration: {problems}")

    @classmethod
    def from_options(cls, command, options):
        """Command-line options win over settings; unset options are skipped."""
        overrides = {}
        for option, name in OPTION_FIELDS.items():
            value = options.get(option)
            if value is not None and value is not False:
                overrides[name] = value
        if options.get('no_persist'):
            overrides['persist'] = False
        return cls.from_settings(command, **overrides)

    @property
    def flipped_gamma(self):
        return self.mutate == 'gamma2-sign'

    def input_path(self, position=0):
        if len(self.inputs) <= position:
            raise InputError(f"{self.command} needs at least {position + 1} --input file(s)")
        return resolve_path(self.inputs[position], self.fixtures)

    def to_dict(self):
        return self.model_dump(mode='json')

    def to_arguments(self):
        """Command-line arguments reproducing this run."""
        arguments = []
        for name in self.inputs:
            arguments += ['--input', name]
        arguments += ['--tol', repr(self.structural_tol), '--identity-tol', repr(self.identity_tol),
                      '--nodes', ','.join(str(n) for n in self.nodes), '--seed', str(self.seed),
                      '--format', self.format]
        if self.command in ('kprod', 'verify_suite'):
            arguments += ['--pairs', str(self.pairs)]
        if self.filters:
            arguments += ['--filter', ','.join(self.filters)]
        if self.mutate:
            arguments += ['--mutate', self.mutate]
        return arguments
