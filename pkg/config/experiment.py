"""Experiment configuration files.

An experiment file is a plain ``KEY=value`` file, read with python-dotenv:

    OMEGA=2pi
    DEGREE=2
    SCHEDULE=4,8,16,32,64
    MU=auto
    MODE=1,1

Command-line flags override file values; ``to_text`` writes the same format,
so a resolved configuration can be read back unchanged.
"""

import io
import logging
import math
from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple, Union

from dotenv import dotenv_values

from analysis.grading import mode_grading, strong_grading
from config.settings import settings
from core.exceptions import ConfigError

logger = logging.getLogger(__name__)

MESH_KINDS = ('tensor', 'hierarchical')
HIERARCHICAL_BASES = ('bspline', 'nurbs')
MU_RULES = ('auto', 'mode')
RATE_NAMES = ('h1', 'l2', 'eigenvalue')

Variant = Tuple[int, int, Union[float, str]]


def parse_angle(text: str) -> float:
    """Angle from '2pi', '2*pi', 'pi/2', 'pi' or a plain number."""
    s = str(text).strip().lower().replace(' ', '')
    if 'pi' not in s:
        return float(s)
    before, after = s.split('pi', 1)
    before = before.rstrip('*')
    factor = float(before) if before else 1.0
    divisor = float(after.lstrip('/')) if after else 1.0
    return factor * math.pi / divisor


def _parse_mu(text: str) -> Union[float, str]:
    s = str(text).strip().lower()
    return s if s in MU_RULES else float(s)


def _format_mu(mu: Union[float, str]) -> str:
    return mu if isinstance(mu, str) else f"{mu:.17g}"


def _parse_ints(text: str) -> Tuple[int, ...]:
    return tuple(int(part) for part in str(text).split(',') if part.strip())


def _parse_mode(text: str) -> Optional[Tuple[int, int]]:
    s = str(text).strip().lower()
    if s == 'spectrum':
        return None
    k, m = _parse_ints(s)
    return (k, m)


def _parse_targets(text: str) -> Tuple[Tuple[str, float], ...]:
    targets = []
    for part in str(text).split(','):
        if not part.strip():
            continue
        name, value = part.split(':')
        targets.append((name.strip().lower(), float(value)))
    return tuple(targets)


def _parse_variants(text: str) -> Tuple[Variant, ...]:
    variants = []
    for part in str(text).split(','):
        if not part.strip():
            continue
        p, k, mu = part.strip().split(':')
        variants.append((int(p), int(k), _parse_mu(mu)))
    return tuple(variants)


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved settings of one experiment run.

    ``regularity`` None means C^{p-1}; ``mode`` None means a whole-spectrum
    comparison; ``n_ev`` 0 means half of the free DOFs.
    """

    omega: float = 2.0 * math.pi
    degree: int = 2
    regularity: Optional[int] = None
    schedule: Tuple[int, ...] = (4, 8, 16, 32, 64)
    mu: Union[float, str] = 'auto'
    mesh: str = 'tensor'
    hierarchical_basis: str = 'bspline'
    quadrature: int = settings.QUADRATURE_POINTS
    n_ev: int = 1
    mode: Optional[Tuple[int, int]] = (1, 1)
    angular_ratio: int = 4
    rate_targets: Tuple[Tuple[str, float], ...] = ()
    rate_tolerance: float = 0.15
    variants: Tuple[Variant, ...] = ()
    target_dofs: int = 1000
    output: str = ''

    @property
    def k(self) -> int:
        return self.degree - 1 if self.regularity is None else self.regularity

    @property
    def hierarchical(self) -> bool:
        return self.mesh == 'hierarchical'

    @property
    def targets(self) -> Dict[str, float]:
        return dict(self.rate_targets)

    def resolved_mu(self, degree: int = None, mu: Union[float, str] = None) -> float:
        """Numeric grading parameter for ``degree`` (defaults to this config's)."""
        degree = degree or self.degree
        mu = self.mu if mu is None else mu
        if mu == 'auto':
            return strong_grading(self.omega, degree)
        if mu == 'mode':
            k = self.mode[0] if self.mode is not None else 1
            return mode_grading(self.omega, degree, k)
        return float(mu)

    def hierarchy_levels(self, J1: int) -> int:
        """L = log2(ANGULAR_RATIO * J1): levels above n_arc angular cells per ring."""
        return int(round(math.log2(self.angular_ratio * J1)))

    def validate(self) -> 'ExperimentConfig':
        """Check ranges and consistency.

        Raises:
            ConfigError: On the first violated constraint
        """
        problems = []
        if not 0.0 < self.omega <= 2.0 * math.pi + 1e-12:
            problems.append(f"OMEGA={self.omega} outside (0, 2pi]")
        if self.degree < 2:
            problems.append(f"DEGREE={self.degree} must be >= 2")
        if not 0 <= self.k <= self.degree - 1:
            problems.append(f"REGULARITY={self.k} must lie in [0, DEGREE-1]")
        if not self.schedule:
            problems.append("SCHEDULE is empty")
        elif any(j < 1 for j in self.schedule) or \
                any(b <= a for a, b in zip(self.schedule, self.schedule[1:])):
            problems.append(f"SCHEDULE={list(self.schedule)} must be positive and strictly increasing")
        if self.mesh not in MESH_KINDS:
            problems.append(f"MESH={self.mesh!r} not in {MESH_KINDS}")
        if self.hierarchical_basis not in HIERARCHICAL_BASES:
            problems.append(f"HIERARCHICAL_BASIS={self.hierarchical_basis!r} not in {HIERARCHICAL_BASES}")
        if isinstance(self.mu, str):
            if self.mu not in MU_RULES:
                problems.append(f"MU={self.mu!r} must be a number or one of {MU_RULES}")
        elif not 0.0 < self.mu <= 1.0:
            problems.append(f"MU={self.mu} outside (0, 1]")
        if self.quadrature < 1:
            problems.append(f"QUADRATURE={self.quadrature} must be >= 1")
        if self.n_ev < 0:
            problems.append(f"N_EV={self.n_ev} must be >= 0")
        if self.mode is not None and (self.mode[0] < 0 or self.mode[1] < 1):
            problems.append(f"MODE={self.mode} needs k >= 0 and m >= 1")
        if self.angular_ratio < 1:
            problems.append(f"ANGULAR_RATIO={self.angular_ratio} must be >= 1")
        for name, _ in self.rate_targets:
            if name not in RATE_NAMES:
                problems.append(f"Unknown rate target {name!r}, expected one of {RATE_NAMES}")
        if self.rate_tolerance <= 0:
            problems.append(f"RATE_TOLERANCE={self.rate_tolerance} must be > 0")
        for p, k, mu in self.variants:
            if p < 2 or not 0 <= k <= p - 1:
                problems.append(f"Variant {p}:{k} needs p >= 2 and 0 <= k <= p-1")
            if (mu not in MU_RULES) if isinstance(mu, str) else not 0.0 < mu <= 1.0:
                problems.append(f"Variant mu {mu} invalid")
        if self.target_dofs < 1:
            problems.append(f"TARGET_DOFS={self.target_dofs} must be >= 1")

        if self.hierarchical and self.schedule and not problems:
            for J1 in self.schedule:
                levels = math.log2(self.angular_ratio * J1)
                if abs(levels - round(levels)) > 1e-12:
                    problems.append(
                        f"Hierarchical SCHEDULE entry {J1}: ANGULAR_RATIO * J1 must be a power of two"
                    )
                elif self.hierarchy_levels(J1) >= J1:
                    problems.append(f"Hierarchical level L={self.hierarchy_levels(J1)} needs J1 > L")

        if problems:
            logger.error(f"Invalid experiment configuration: {problems[0]}")
            raise ConfigError("; ".join(problems))
        return self

    def with_overrides(self, **overrides) -> 'ExperimentConfig':
        """Copy with every non-None override applied."""
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> Dict[str, str]:
        return {
            'OMEGA': f"{self.omega:.17g}",
            'DEGREE': str(self.degree),
            'REGULARITY': '' if self.regularity is None else str(self.regularity),
            'SCHEDULE': ','.join(str(j) for j in self.schedule),
            'MU': _format_mu(self.mu),
            'MESH': self.mesh,
            'HIERARCHICAL_BASIS': self.hierarchical_basis,
            'QUADRATURE': str(self.quadrature),
            'N_EV': str(self.n_ev),
            'MODE': 'spectrum' if self.mode is None else f"{self.mode[0]},{self.mode[1]}",
            'ANGULAR_RATIO': str(self.angular_ratio),
            'RATE_TARGETS': ','.join(f"{n}:{v:.17g}" for n, v in self.rate_targets),
            'RATE_TOLERANCE': f"{self.rate_tolerance:.17g}",
            'VARIANTS': ','.join(f"{p}:{k}:{_format_mu(mu)}" for p, k, mu in self.variants),
            'TARGET_DOFS': str(self.target_dofs),
            'OUTPUT': self.output,
        }

    def to_text(self) -> str:
        return ''.join(f"{key}={value}\n" for key, value in self.to_dict().items())

    @classmethod
    def from_mapping(cls, values: Dict[str, Optional[str]]) -> 'ExperimentConfig':
        """Build from string values keyed like the file format.

        Raises:
            ConfigError: On unknown keys or unparsable values
        """
        parsers = {
            'OMEGA': ('omega', parse_angle),
            'DEGREE': ('degree', int),
            'REGULARITY': ('regularity', int),
            'SCHEDULE': ('schedule', _parse_ints),
            'MU': ('mu', _parse_mu),
            'MESH': ('mesh', lambda s: s.strip().lower()),
            'HIERARCHICAL_BASIS': ('hierarchical_basis', lambda s: s.strip().lower()),
            'QUADRATURE': ('quadrature', int),
            'N_EV': ('n_ev', int),
            'MODE': ('mode', _parse_mode),
            'ANGULAR_RATIO': ('angular_ratio', int),
            'RATE_TARGETS': ('rate_targets', _parse_targets),
            'RATE_TOLERANCE': ('rate_tolerance', float),
            'VARIANTS': ('variants', _parse_variants),
            'TARGET_DOFS': ('target_dofs', int),
            'OUTPUT': ('output', str),
        }
        kwargs = {}
        for key, raw in values.items():
            key = key.strip().upper()
            if key not in parsers:
                raise ConfigError(f"Unknown configuration key {key!r}")
            name, parse = parsers[key]
            if raw is None or (raw.strip() == '' and name not in ('output', 'rate_targets', 'variants')):
                continue
            try:
                kwargs[name] = parse(raw)
            except (TypeError, ValueError) as e:
                raise ConfigError(f"Cannot parse {key}={raw!r}: {e}") from e
        return cls(**kwargs)

    @classmethod
    def from_text(cls, text: str) -> 'ExperimentConfig':
        return cls.from_mapping(dotenv_values(stream=io.StringIO(text)))

    @classmethod
    def load(cls, path: str) -> 'ExperimentConfig':
        """Read an experiment file.

        Raises:
            ConfigError: If the file is missing or malformed
        """
        try:
            with open(path, 'r') as handle:
                text = handle.read()
        except OSError as e:
            logger.error(f"Cannot read experiment file {path}: {e}")
            raise ConfigError(f"Cannot read experiment file {path}: {e}") from e
        config = cls.from_text(text)
        logger.info(f"Loaded experiment configuration from {path}")
        return config
