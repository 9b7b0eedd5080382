from __future__ import annotations

import io
from pathlib import Path
from typing import Any, Final

import torch

from .exceptions import CheckpointVersionError

__all__ = [
    "CHECKPOINT_FORMAT_VERSION",
    "encode_checkpoint",
    "read_checkpoint",
]

CHECKPOINT_FORMAT_VERSION: Final = 1


def encode_checkpoint(
    kind: str, header: dict[str, Any], state: dict[str, Any]
) -> bytes:
    """Serialize a self-describing checkpoint (header + state dict)."""

    buffer = io.BytesIO()
    torch.save(
        {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "kind": kind,
            "header": header,
            "state_dict": state,
        },
        buffer,
    )
    return buffer.getvalue()


def read_checkpoint(
    source: Path | str | bytes, kind: str
) -> tuple[dict[str, Any], dict[str, Any]]:
    """Return ``(header, state_dict)``; refuse any other format version or kind.

    ``source`` is a file path or the encoded bytes.
    """

    handle = io.BytesIO(source) if isinstance(source, bytes) else Path(source)
    payload = torch.load(handle, map_location="cpu", weights_only=True)
    version = payload.get("format_version") if isinstance(payload, dict) else None
    if version != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointVersionError(version, CHECKPOINT_FORMAT_VERSION, kind)
    if payload.get("kind") != kind:
        raise CheckpointVersionError(
            payload.get("kind"), CHECKPOINT_FORMAT_VERSION, kind
        )
    return payload["header"], payload["state_dict"]
