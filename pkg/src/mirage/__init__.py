__version__ = "0.1.0"

from .common.exceptions import ConfigError, MirageError
from .common.types import ArchitectureFamily, AttackKind, TrainingRegime

__all__ = [
    #
    "ArchitectureFamily",
    "AttackKind",
    "ConfigError",
    "MirageError",
    "TrainingRegime",
]
