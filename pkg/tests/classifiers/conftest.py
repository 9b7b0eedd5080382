import pytest

from mirage.classifiers import ArchitectureConfig


@pytest.fixture
def small_wrn() -> ArchitectureConfig:
    return ArchitectureConfig(depth=10, width=1, input_resolution=8)
