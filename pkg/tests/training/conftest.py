import pytest

from mirage.classifiers import ArchitectureConfig, Classifier, build_model
from mirage.training import LrPhase, OptimizerSpec, TrainConfig


@pytest.fixture
def small_model() -> Classifier:
    cfg = ArchitectureConfig(depth=10, width=1, input_resolution=8)
    return build_model(cfg, seed=0, model_id="small")


@pytest.fixture
def short_schedule() -> TrainConfig:
    return TrainConfig(
        optimizer=OptimizerSpec(schedule=[LrPhase(epochs=2, lr=0.01)]),
        epochs=2,
        batch_size=8,
        checkpoint_epochs=[1],
        progress=False,
    )
