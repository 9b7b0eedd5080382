from __future__ import annotations

from pathlib import Path

from ..common.atomic import atomic_write_bytes
from ..common.types import ImageTensor
from ..data.images import image_filename, load_image, save_image
from .models import InversionRecord, InversionResult

__all__ = ["load_inversion", "save_inversion", "sidecar_path"]


def sidecar_path(image_path: Path | str) -> Path:
    return Path(image_path).with_suffix(".json")


def save_inversion(result: InversionResult, directory: Path | str) -> Path:
    """Write the reconstruction PNG, its JSON sidecar and any octave images.

    Returns the PNG path; the sidecar sits next to it with a ``.json`` suffix.
    """

    directory = Path(directory)
    name = image_filename(
        result.model_id, result.attack_id, result.target_class, result.seed
    )
    path = save_image(result.image, directory / name)
    atomic_write_bytes(
        sidecar_path(path), result.record().model_dump_json(indent=2).encode()
    )
    for level, octave in enumerate(result.octave_images):
        save_image(octave, path.with_name(f"{path.stem}__octave{level}.png"))
    return path


def load_inversion(image_path: Path | str) -> tuple[InversionRecord, ImageTensor]:
    record = InversionRecord.model_validate_json(sidecar_path(image_path).read_text())
    return record, load_image(image_path)
