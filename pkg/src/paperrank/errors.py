"""Exception hierarchy shared across the toolkit.

``DataError`` subclasses signal bad inputs (exit code 2 in the CLI);
``ComputationError`` subclasses signal failures while computing (exit code 3).
"""


class PaperRankError(Exception):
    """Base class for all toolkit errors."""


class DataError(PaperRankError):
    """Invalid input data or configuration."""


class ParseError(DataError):
    """A record in an input file could not be parsed."""


class IntegrityError(DataError):
    """Referential integrity of a dataset is broken (dangling ids, duplicates)."""


class ValidationError(DataError):
    """A value violates a declared constraint (e.g. score outside its scale)."""


class ConfigError(DataError):
    """An unusable configuration value."""


class SchemaError(DataError):
    """A file or feature layout does not match the expected schema."""


class CoverageError(DataError):
    """A required per-paper input is missing for some paper."""


class ComputationError(PaperRankError):
    """A computation failed (numerical breakdown, undefined quantity)."""


class TrainingError(ComputationError):
    """Model fitting could not proceed on the given inputs."""
