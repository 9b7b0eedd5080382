from pathlib import Path

import numpy as np
import pytest

from mirage.classifiers import ArchitectureConfig
from mirage.common.types import AttackKind, SplitTag
from mirage.data import DatasetConfig
from mirage.data.adapters import InMemorySource, RawSplit, write_cache_split
from mirage.experiments import (
    AttackSpec,
    CrossModelPair,
    Experiments,
    ExperimentSpec,
    InMemoryStore,
    MetricSuite,
    ModelSpec,
)
from mirage.privacy import RadiusConfig
from mirage.training import (
    AdvTrainConfig,
    LrPhase,
    ModelRecipe,
    OptimizerSpec,
    TrainConfig,
)

IMAGE_SIZE = 8


def _raw_split(n: int, seed: int) -> RawSplit:
    rng = np.random.default_rng(seed)
    return RawSplit(
        images=rng.integers(0, 256, (n, 3, IMAGE_SIZE, IMAGE_SIZE), dtype=np.uint8),
        labels=(np.arange(n) % 10).astype(np.int64),
    )


def _splits() -> dict[SplitTag, RawSplit]:
    return {SplitTag.TRAIN: _raw_split(40, 1), SplitTag.VALIDATION: _raw_split(20, 2)}


def _recipe(*, adversarial: bool = False, checkpoints: tuple[int, ...] = ()):
    return ModelRecipe(
        architecture=ArchitectureConfig(
            depth=10, width=1, input_resolution=IMAGE_SIZE
        ),
        train=TrainConfig(
            optimizer=OptimizerSpec(schedule=[LrPhase(epochs=2, lr=0.01)]),
            epochs=2,
            batch_size=16,
            checkpoint_epochs=list(checkpoints),
            progress=False,
        ),
        adversarial=(
            AdvTrainConfig(epsilon=4.0, step_size=2.0, attack_iterations=1)
            if adversarial
            else None
        ),
    )


def _small_metrics(**update) -> MetricSuite:
    suite = MetricSuite(
        radius_config=RadiusConfig(max_epsilon=8.0, bisection_steps=1, iterations=2),
        radius_images=4,
    )
    return suite.model_copy(update=update)


def _minimal_spec(**update) -> ExperimentSpec:
    """One model and one PGD attack on one class."""

    spec = ExperimentSpec(
        name="minimal",
        dataset=DatasetConfig(downscale=IMAGE_SIZE),
        models=[ModelSpec(model_id="ttm", recipe=_recipe())],
        attacks=[
            AttackSpec(
                attack_id="pgd",
                kind=AttackKind.PGD,
                config={"max_iterations": 3},
                model_ids=["ttm"],
                classes=[3],
            )
        ],
        metrics=_small_metrics(),
    )
    return spec.model_copy(update=update)


def _matrix_spec() -> ExperimentSpec:
    """TTM, ATM and its epoch-1 snapshot under every attack kind."""

    return ExperimentSpec(
        name="matrix",
        dataset=DatasetConfig(downscale=IMAGE_SIZE),
        models=[
            ModelSpec(model_id="ttm", recipe=_recipe()),
            ModelSpec(
                model_id="atm", recipe=_recipe(adversarial=True, checkpoints=(1,))
            ),
        ],
        attacks=[
            AttackSpec(
                attack_id="pgd",
                kind=AttackKind.PGD,
                config={"max_iterations": 3},
                model_ids=["ttm", "atm@1", "atm"],
                classes=[0, 1],
            ),
            AttackSpec(
                attack_id="pgd-seeded",
                kind=AttackKind.PGD,
                config={"max_iterations": 2},
                model_ids=["ttm"],
                classes=[0],
                seed_from_train=True,
            ),
            AttackSpec(
                attack_id="deepdream",
                kind=AttackKind.DEEPDREAM,
                config={
                    "octaves": 1,
                    "steps_per_octave": 2,
                    "outer_iterations": 1,
                    "keep_octave_images": True,
                },
                model_ids=["atm"],
                classes=[0],
            ),
            AttackSpec(
                attack_id="gan",
                kind=AttackKind.GAN,
                config={
                    "epochs": 1,
                    "batch_size": 8,
                    "generator_width": 4,
                    "discriminator_width": 4,
                    "samples_per_class": 1,
                    "progress": False,
                },
                model_ids=["ttm"],
                classes=[0, 1],
            ),
        ],
        metrics=_small_metrics(
            cross_model=[CrossModelPair(source="atm", evaluator="ttm")]
        ),
    )


@pytest.fixture
def source() -> InMemorySource:
    return InMemorySource(_splits())


@pytest.fixture(scope="module")
def matrix_run() -> InMemoryStore:
    store = InMemoryStore()
    Experiments(_matrix_spec(), store, source=InMemorySource(_splits())).run()
    return store


@pytest.fixture
def matrix_store(matrix_run: InMemoryStore) -> InMemoryStore:
    copied = InMemoryStore()
    for key in matrix_run.keys():
        copied.write_bytes(key, matrix_run.read_bytes(key))
    return copied


@pytest.fixture
def make_spec():
    return _minimal_spec


@pytest.fixture
def make_metrics():
    return _small_metrics


@pytest.fixture
def matrix() -> ExperimentSpec:
    return _matrix_spec()


@pytest.fixture
def cache_dir(tmp_path: Path) -> Path:
    directory = tmp_path / "cache"
    for split, raw in _splits().items():
        write_cache_split(directory, split, raw)
    return directory
