from __future__ import annotations

import hashlib

from pydantic import BaseModel, Field, model_validator

__all__ = ["FeatureConfig", "RadiusConfig"]


class RadiusConfig(BaseModel):
    """Budget search for the smallest successful iterated sign-gradient attack.

    The max-norm budget grows geometrically from ``initial_epsilon`` until
    the prediction flips, then is refined by bisection. The reported radius
    is the L2 norm of the perturbation found at the smallest successful
    budget.
    """

    initial_epsilon: float = Field(default=0.5, gt=0.0)
    growth: float = Field(default=2.0, gt=1.0)
    max_epsilon: float = Field(default=64.0, gt=0.0, le=255.0)
    bisection_steps: int = Field(default=8, ge=0)
    iterations: int = Field(default=10, ge=1)
    step_fraction: float = Field(
        default=0.25,
        gt=0.0,
        le=1.0,
        description="Sign-step size as a fraction of the current budget.",
    )
    batch_size: int = Field(default=128, ge=1)
    max_images: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _initial_within_max(self) -> RadiusConfig:
        if self.initial_epsilon > self.max_epsilon:
            raise ValueError("initial_epsilon must not exceed max_epsilon")
        return self

    def config_hash(self) -> str:
        return hashlib.sha256(self.model_dump_json().encode()).hexdigest()


class FeatureConfig(BaseModel):
    batch_size: int = Field(default=256, ge=1)
