from __future__ import annotations

from typing import Protocol

__all__ = ["ArtifactStore"]


class ArtifactStore(Protocol):
    """Persistence abstraction for experiment artifacts, keyed by relative path.

    Writes are all-or-nothing: a reader never observes a partially written
    artifact.
    """

    def exists(self, key: str) -> bool: ...

    def write_bytes(self, key: str, data: bytes) -> None: ...

    def read_bytes(self, key: str) -> bytes: ...

    def keys(self, prefix: str = "") -> list[str]: ...

    def describe(self, key: str) -> str: ...
