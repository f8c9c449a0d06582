"""Exception hierarchy and command-line exit codes."""


class SectorIGAError(Exception):
    """Base class for all solver errors."""

    exit_code = 1


class ConfigError(SectorIGAError):
    """Invalid experiment configuration."""

    exit_code = 2


class SolverError(SectorIGAError):
    """Factorization failure, non-convergence or size guard violation."""

    exit_code = 3


class RateTargetMissed(SectorIGAError):
    """A declared convergence-rate target was missed."""

    exit_code = 4


class SingularPointError(SectorIGAError, ValueError):
    """Evaluation requested at a singular point of the map or the field."""


class QuadratureError(SectorIGAError):
    """A non-finite value was met at a quadrature point."""


class AlignmentError(SectorIGAError):
    """Discrete and exact eigenfunctions are nearly orthogonal."""
