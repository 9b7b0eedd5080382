from __future__ import annotations

from typing import Any

import torch
from pydantic import BaseModel, ConfigDict, Field

from ..common.types import AttackKind

__all__ = ["InversionRecord", "InversionResult", "TrajectoryPoint"]


class TrajectoryPoint(BaseModel):
    iteration: int = Field(..., ge=0)
    activation: float


class InversionRecord(BaseModel):
    """Serializable part of an inversion result (the image sidecar)."""

    attack_id: str
    attack_kind: AttackKind
    model_id: str
    target_class: int
    seed: int
    lr: float
    iterations_run: int
    iterations_to_target: int | None = None
    initial_activation: float
    final_activation: float
    displacement_l2: float | None = None
    trajectory: list[TrajectoryPoint] = Field(default_factory=list)
    config: dict[str, Any] = Field(default_factory=dict)
    extras: dict[str, float] = Field(default_factory=dict)


class InversionResult(InversionRecord):
    """A reconstruction and how the optimization got there.

    ``iterations_to_target`` is the number of steps after which the image
    was first classified as ``target_class`` (0 if the start image already
    was), or ``None`` if that never happened.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    image: torch.Tensor
    octave_images: list[torch.Tensor] = Field(default_factory=list)

    def record(self) -> InversionRecord:
        return InversionRecord.model_validate(
            self.model_dump(exclude={"image", "octave_images"})
        )
