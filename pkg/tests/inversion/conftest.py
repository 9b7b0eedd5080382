import pytest

from mirage.inversion import GanInversionConfig


@pytest.fixture
def gan_config() -> GanInversionConfig:
    return GanInversionConfig(
        epochs=2,
        batch_size=8,
        generator_width=8,
        discriminator_width=4,
        samples_per_class=2,
        progress=False,
    )
