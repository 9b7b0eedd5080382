"""Common types and exceptions shared across mirage services."""

from .exceptions import ConfigError, MirageError
from .types import ArchitectureFamily, AttackKind, SplitTag, TrainingRegime

__all__ = [
    "MirageError",
    "ConfigError",
    "ArchitectureFamily",
    "AttackKind",
    "SplitTag",
    "TrainingRegime",
]
