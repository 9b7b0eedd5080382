from .base import ArtifactStore
from .filesystem import FilesystemStore
from .in_memory import InMemoryStore

__all__ = ["ArtifactStore", "FilesystemStore", "InMemoryStore"]
