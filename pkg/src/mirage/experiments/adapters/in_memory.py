from __future__ import annotations

from .base import ArtifactStore

__all__ = ["InMemoryStore"]


class InMemoryStore(ArtifactStore):
    """In-memory implementation for tests and demos."""

    def __init__(self) -> None:
        self._blobs: dict[str, bytes] = {}

    def exists(self, key: str) -> bool:
        return key in self._blobs

    def write_bytes(self, key: str, data: bytes) -> None:
        self._blobs[key] = bytes(data)

    def read_bytes(self, key: str) -> bytes:
        try:
            return self._blobs[key]
        except KeyError:
            raise FileNotFoundError(key) from None

    def keys(self, prefix: str = "") -> list[str]:
        return sorted(k for k in self._blobs if k.startswith(prefix))

    def describe(self, key: str) -> str:
        return f"memory://{key}"
