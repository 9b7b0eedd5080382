"""Declarative experiment specs: what to train, attack and measure."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Final, Literal

from pydantic import BaseModel, Field, model_validator

from ..common.exceptions import ConfigError
from ..common.types import AttackKind
from ..data.config import DatasetConfig
from ..inversion.config import DreamConfig, GanInversionConfig, PgdInversionConfig
from ..privacy.config import RadiusConfig
from ..training.presets import PRESETS, ModelRecipe, get_preset

__all__ = [
    "AttackSpec",
    "CrossModelPair",
    "EXPERIMENT_PRESETS",
    "ExperimentSpec",
    "MetricSuite",
    "ModelSpec",
    "SPEC_VERSION",
    "get_experiment_preset",
    "load_spec",
]

SPEC_VERSION: Final = 1
_ID_PATTERN: Final = r"^[A-Za-z0-9][A-Za-z0-9_.-]*$"

type AttackConfig = PgdInversionConfig | DreamConfig | GanInversionConfig


class ModelSpec(BaseModel):
    """A target model: a named preset or an explicit recipe.

    Checkpoint epochs of the recipe become extra models named
    ``{model_id}@{epoch}``.
    """

    model_id: str = Field(..., pattern=_ID_PATTERN)
    preset: str | None = None
    recipe: ModelRecipe | None = None

    @model_validator(mode="after")
    def validate_source(self) -> ModelSpec:
        if (self.preset is None) == (self.recipe is None):
            raise ValueError(f"{self.model_id}: give exactly one of preset or recipe")
        if self.preset is not None and self.preset not in PRESETS:
            raise ValueError(
                f"{self.model_id}: unknown preset {self.preset!r}; "
                f"expected one of {sorted(PRESETS)}"
            )
        return self

    def resolve(self) -> ModelRecipe:
        if self.recipe is not None:
            return self.recipe
        assert self.preset is not None
        return get_preset(self.preset)

    def snapshot_ids(self) -> dict[str, int]:
        epochs = self.resolve().train.checkpoint_epochs
        return {f"{self.model_id}@{epoch}": epoch for epoch in epochs}


class AttackSpec(BaseModel):
    """One inversion attack run against some models, classes and seeds.

    ``seed_from_train`` starts input-space attacks from a training image of
    the target class (the ``seed``-th one) instead of the configured init.
    """

    attack_id: str = Field(..., pattern=_ID_PATTERN)
    kind: AttackKind
    config: dict[str, Any] = Field(default_factory=dict)
    model_ids: list[str] = Field(..., min_length=1)
    classes: list[int] = Field(default_factory=lambda: list(range(10)))
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    seed_from_train: bool = False

    @model_validator(mode="after")
    def validate_config(self) -> AttackSpec:
        self.typed_config()
        if self.seed_from_train and self.kind is AttackKind.GAN:
            raise ValueError(f"{self.attack_id}: GAN attacks cannot start from images")
        return self

    def typed_config(self) -> AttackConfig:
        if self.kind is AttackKind.PGD:
            return PgdInversionConfig.model_validate(self.config)
        if self.kind is AttackKind.DEEPDREAM:
            return DreamConfig.model_validate(self.config)
        return GanInversionConfig.model_validate(self.config)


class CrossModelPair(BaseModel):
    """Score reconstructions made on ``source`` with ``evaluator`` as well."""

    source: str
    evaluator: str


class MetricSuite(BaseModel):
    similarity: bool = Field(
        default=True,
        description="Nearest training image, privacy loss and activation gap.",
    )
    radius: bool = True
    radius_config: RadiusConfig = Field(default_factory=RadiusConfig)
    radius_images: int = Field(
        default=100, ge=1, description="Validation images the radius is measured on."
    )
    cross_model: list[CrossModelPair] = Field(default_factory=list)


class ExperimentSpec(BaseModel):
    """Full experiment: dataset, models, attacks and metrics."""

    version: Literal[1] = 1
    name: str = Field(default="experiment", pattern=_ID_PATTERN)
    dataset: DatasetConfig = Field(default_factory=DatasetConfig)
    models: list[ModelSpec] = Field(..., min_length=1)
    attacks: list[AttackSpec] = Field(default_factory=list)
    metrics: MetricSuite = Field(default_factory=MetricSuite)
    output_dir: Path = Field(default=Path("runs"))
    seed: int = Field(default=0, description="Seed for training and GAN runs.")
    device: str = Field(default="cpu")

    @model_validator(mode="after")
    def validate_references(self) -> ExperimentSpec:
        ids = [m.model_id for m in self.models]
        if len(set(ids)) != len(ids):
            raise ValueError(f"Duplicate model ids in {ids}")
        attack_ids = [a.attack_id for a in self.attacks]
        if len(set(attack_ids)) != len(attack_ids):
            raise ValueError(f"Duplicate attack ids in {attack_ids}")

        known = set(self.all_model_ids())
        resolution = self.dataset.downscale or 32
        for model in self.models:
            recipe = model.resolve()
            if recipe.architecture.input_resolution != resolution:
                raise ValueError(
                    f"{model.model_id} expects "
                    f"{recipe.architecture.input_resolution}px "
                    f"inputs but the dataset provides {resolution}px"
                )
            if recipe.architecture.num_classes != self.dataset.num_classes:
                raise ValueError(f"{model.model_id} disagrees on the class count")
        for attack in self.attacks:
            missing = set(attack.model_ids) - known
            if missing:
                raise ValueError(
                    f"Attack {attack.attack_id} references undeclared models "
                    f"{sorted(missing)}"
                )
            bad = [c for c in attack.classes if not 0 <= c < self.dataset.num_classes]
            if bad:
                raise ValueError(f"Attack {attack.attack_id} has invalid classes {bad}")
        for pair in self.metrics.cross_model:
            if not {pair.source, pair.evaluator} <= known:
                raise ValueError(f"Cross-model pair {pair} references unknown models")
        return self

    def all_model_ids(self) -> list[str]:
        """Declared models followed by their checkpoint snapshots."""

        ids = [m.model_id for m in self.models]
        for model in self.models:
            ids += list(model.snapshot_ids())
        return ids

    def with_overrides(
        self, *, seed: int | None = None, output_dir: Path | None = None
    ) -> ExperimentSpec:
        update: dict[str, Any] = {}
        if seed is not None:
            update["seed"] = seed
        if output_dir is not None:
            update["output_dir"] = Path(output_dir)
        return self.model_copy(update=update)


def _benchmark_desk() -> ExperimentSpec:
    # Reduced iteration counts so the whole matrix runs at desk scale.
    classes = list(range(10))
    return ExperimentSpec(
        name="benchmark-desk",
        dataset=DatasetConfig(subset_size=10_000, validation_subset_size=2_000),
        models=[
            ModelSpec(model_id="ttm-res-desk", preset="ttm-res-desk"),
            ModelSpec(model_id="atm-res-desk", preset="atm-res-desk"),
        ],
        attacks=[
            AttackSpec(
                attack_id="pgd",
                kind=AttackKind.PGD,
                config={"max_iterations": 300},
                model_ids=["ttm-res-desk", "atm-res-desk@5", "atm-res-desk"],
                classes=classes,
            ),
            AttackSpec(
                attack_id="pgd-seeded",
                kind=AttackKind.PGD,
                config={"max_iterations": 100},
                model_ids=["ttm-res-desk", "atm-res-desk"],
                classes=classes,
                seed_from_train=True,
            ),
            AttackSpec(
                attack_id="deepdream",
                kind=AttackKind.DEEPDREAM,
                config={"octaves": 3, "steps_per_octave": 10, "outer_iterations": 2},
                model_ids=["ttm-res-desk", "atm-res-desk"],
                classes=classes,
            ),
            AttackSpec(
                attack_id="gan",
                kind=AttackKind.GAN,
                config={"epochs": 5, "progress": False},
                model_ids=["ttm-res-desk", "atm-res-desk"],
                classes=classes,
            ),
        ],
        metrics=MetricSuite(
            radius_images=100,
            cross_model=[
                CrossModelPair(source="atm-res-desk", evaluator="ttm-res-desk")
            ],
        ),
        output_dir=Path("runs/benchmark-desk"),
    )


def _benchmark_full() -> ExperimentSpec:
    """Full-scale matrix: three recipes plus the epoch-10 ATM snapshot."""

    models = ["ttm-vgg", "ttm-res", "atm-res@10", "atm-res"]
    classes = list(range(10))
    return ExperimentSpec(
        name="benchmark-full",
        models=[
            ModelSpec(model_id="ttm-vgg", preset="ttm-vgg"),
            ModelSpec(model_id="ttm-res", preset="ttm-res"),
            ModelSpec(model_id="atm-res", preset="atm-res"),
        ],
        attacks=[
            AttackSpec(
                attack_id="pgd", kind=AttackKind.PGD, model_ids=models, classes=classes
            ),
            AttackSpec(
                attack_id="deepdream",
                kind=AttackKind.DEEPDREAM,
                model_ids=models,
                classes=classes,
            ),
            AttackSpec(
                attack_id="gan",
                kind=AttackKind.GAN,
                config={"progress": False},
                model_ids=models,
                classes=classes,
            ),
        ],
        metrics=MetricSuite(
            radius_images=1_000,
            cross_model=[CrossModelPair(source="atm-res", evaluator="ttm-res")],
        ),
        output_dir=Path("runs/benchmark-full"),
    )


def _diversity_desk() -> ExperimentSpec:
    """Five random starts per class, to compare reconstructions of one class."""

    models = ["ttm-res-desk", "atm-res-desk"]
    classes = list(range(10))
    seeds = list(range(5))
    init = {"mode": "random", "random_spread": 64.0}
    return ExperimentSpec(
        name="diversity-desk",
        dataset=DatasetConfig(subset_size=10_000, validation_subset_size=2_000),
        models=[ModelSpec(model_id=m, preset=m) for m in models],
        attacks=[
            AttackSpec(
                attack_id="pgd-random",
                kind=AttackKind.PGD,
                config={"max_iterations": 300, "init": init},
                model_ids=models,
                classes=classes,
                seeds=seeds,
            ),
            AttackSpec(
                attack_id="deepdream-random",
                kind=AttackKind.DEEPDREAM,
                config={
                    "octaves": 3,
                    "steps_per_octave": 10,
                    "outer_iterations": 2,
                    "init": init,
                },
                model_ids=models,
                classes=classes,
                seeds=seeds,
            ),
        ],
        metrics=MetricSuite(radius=False),
        output_dir=Path("runs/diversity-desk"),
    )


EXPERIMENT_PRESETS: Final = {
    "benchmark-desk": _benchmark_desk,
    "benchmark-full": _benchmark_full,
    "diversity-desk": _diversity_desk,
}


def get_experiment_preset(name: str) -> ExperimentSpec:
    try:
        return EXPERIMENT_PRESETS[name]()
    except KeyError:
        raise ConfigError(
            f"Unknown experiment preset {name!r}; "
            f"expected one of {sorted(EXPERIMENT_PRESETS)}"
        ) from None


def load_spec(source: Path | str) -> ExperimentSpec:
    """Parse a JSON spec file, or build the named experiment preset."""

    if str(source) in EXPERIMENT_PRESETS:
        return get_experiment_preset(str(source))
    path = Path(source)
    if not path.is_file():
        raise ConfigError(f"Experiment spec {path} not found")
    return ExperimentSpec.model_validate_json(path.read_text())
