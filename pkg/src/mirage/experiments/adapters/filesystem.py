from __future__ import annotations

from pathlib import Path, PurePosixPath

from ...common.atomic import atomic_write_bytes
from ...common.exceptions import ConfigError
from .base import ArtifactStore

__all__ = ["FilesystemStore"]


class FilesystemStore(ArtifactStore):
    """Artifacts under one output directory, written temp-then-rename."""

    def __init__(self, root: Path | str) -> None:
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise ConfigError(
                f"Output directory {self.root} is not writable: {exc}"
            ) from exc

    def _path(self, key: str) -> Path:
        relative = PurePosixPath(key)
        if relative.is_absolute() or ".." in relative.parts:
            raise ConfigError(f"Artifact key must be a relative path, got: {key!r}")
        return self.root.joinpath(*relative.parts)

    def exists(self, key: str) -> bool:
        return self._path(key).is_file()

    def write_bytes(self, key: str, data: bytes) -> None:
        atomic_write_bytes(self._path(key), data)

    def read_bytes(self, key: str) -> bytes:
        return self._path(key).read_bytes()

    def keys(self, prefix: str = "") -> list[str]:
        found = (
            p.relative_to(self.root).as_posix()
            for p in self.root.rglob("*")
            if p.is_file() and not p.name.startswith(".")
        )
        return sorted(k for k in found if k.startswith(prefix))

    def describe(self, key: str) -> str:
        return str(self._path(key))
