from .base import DatasetSource, RawSplit
from .cache import NpzCacheSource, write_cache_split
from .cifar import CifarBinarySource, CifarPickleSource
from .in_memory import InMemorySource

__all__ = [
    "DatasetSource",
    "RawSplit",
    "CifarBinarySource",
    "CifarPickleSource",
    "NpzCacheSource",
    "InMemorySource",
    "write_cache_split",
]
