import copy
import math

import pytest
import torch
from torch import nn

from mirage.common.exceptions import ConfigError, EmptyDatasetError
from mirage.common.types import AttackKind, SplitTag
from mirage.inversion import GanInversionConfig
from mirage.inversion.gan import (
    AuxDiscriminator,
    ConditionalGenerator,
    discriminator_losses,
    encode_generator,
    generate_samples,
    generator_losses,
    invert_class_gan,
    load_generator,
    read_loss_curve,
    sample_grid,
    target_confidence,
    train_inversion_gan,
)


@pytest.fixture
def generator() -> ConditionalGenerator:
    torch.manual_seed(0)
    return ConditionalGenerator(noise_dim=16, image_size=8, width=8)


@pytest.fixture
def discriminator() -> AuxDiscriminator:
    torch.manual_seed(0)
    return AuxDiscriminator(image_size=8, width=4)


@pytest.fixture
def shadow(make_dataset):
    return make_dataset(16, size=8, seed=3, split=SplitTag.VALIDATION)


def _zero(layer: nn.Linear) -> None:
    with torch.no_grad():
        layer.weight.zero_()
        layer.bias.zero_()


@pytest.mark.parametrize("size", [4, 8, 16, 32])
def test_should_emit_images_of_requested_size_when_generating(size):
    gen = ConditionalGenerator(noise_dim=4, image_size=size, width=4)

    images = gen(torch.randn(3, 4), torch.tensor([0, 5, 9]))

    assert images.shape == (3, 3, size, size)
    assert sum(isinstance(m, nn.ConvTranspose2d) for m in gen.modules()) == 7


def test_should_stay_in_pixel_domain_when_generator_weights_are_large(generator):
    with torch.no_grad():
        for param in generator.parameters():
            param.mul_(50)

    images = generate_samples(generator, 3, 4, seed=0)

    assert float(images.min()) >= 0.0
    assert float(images.max()) <= 255.0


def test_should_return_empty_batch_when_no_samples_are_requested(generator):
    assert generate_samples(generator, 0, 0, seed=0).shape == (0, 3, 8, 8)


def test_should_draw_same_samples_when_seed_is_fixed(generator):
    first = generate_samples(generator, 2, 3, seed=11)

    assert torch.equal(first, generate_samples(generator, 2, 3, seed=11))


def test_should_score_each_image_when_discriminating(discriminator):
    score, classes = discriminator(torch.rand(5, 3, 8, 8) * 255)

    assert score.shape == (5,)
    assert classes.shape == (5, 10)
    convs = [m for m in discriminator.modules() if isinstance(m, nn.Conv2d)]
    assert len(convs) == 7
    assert all(conv.kernel_size == (5, 5) for conv in convs)


@pytest.mark.parametrize("size", [2, 12])
def test_should_raise_config_error_when_image_size_is_not_power_of_two(size):
    with pytest.raises(ConfigError):
        ConditionalGenerator(image_size=size)


def test_should_give_ln2_realfake_loss_when_discriminator_is_at_chance(
    generator, discriminator
):
    _zero(discriminator.realfake)
    _zero(discriminator.classes)
    real = torch.rand(4, 3, 8, 8) * 255
    fake = generate_samples(generator, 1, 4, seed=0)

    losses = discriminator_losses(discriminator, real, torch.arange(4), fake)

    assert float(losses.realfake) == pytest.approx(math.log(2), rel=1e-6)
    assert float(losses.classification) == pytest.approx(math.log(10), rel=1e-6)


def test_should_ignore_generated_batch_when_computing_class_loss(
    generator, discriminator
):
    real = torch.rand(6, 3, 8, 8) * 255
    labels = torch.arange(6)
    fake_a = generate_samples(generator, 1, 6, seed=1)
    fake_b = generate_samples(generator, 7, 6, seed=2)
    discriminator.train()

    torch.manual_seed(5)
    first = discriminator_losses(discriminator, real, labels, fake_a)
    torch.manual_seed(5)
    second = discriminator_losses(discriminator, real, labels, fake_b)

    assert torch.equal(first.classification, second.classification)
    assert not torch.equal(first.realfake, second.realfake)


def test_should_raise_empty_dataset_error_when_real_batch_is_empty(
    generator, discriminator
):
    with pytest.raises(EmptyDatasetError):
        discriminator_losses(
            discriminator,
            torch.empty(0, 3, 8, 8),
            torch.empty(0, dtype=torch.long),
            generate_samples(generator, 0, 2, seed=0),
        )


def test_should_give_ln10_class_loss_when_target_final_layer_is_zero(
    generator, discriminator, tiny_model
):
    _zero(tiny_model.final_layer)
    _zero(discriminator.realfake)

    losses = generator_losses(
        generator,
        discriminator,
        tiny_model,
        torch.randn(4, 16),
        torch.tensor([0, 3, 6, 9]),
        1.0,
    )

    assert float(losses.adversarial) == pytest.approx(math.log(2), rel=1e-6)
    assert float(losses.target_class) == pytest.approx(math.log(10), rel=1e-6)


def test_should_never_call_target_when_class_weight_is_zero(
    generator, discriminator, tiny_model, monkeypatch
):
    def refuse(*_args, **_kwargs):
        raise AssertionError("target model was consulted")

    monkeypatch.setattr(tiny_model, "forward", refuse)

    losses = generator_losses(
        generator,
        discriminator,
        tiny_model,
        torch.randn(2, 16),
        torch.tensor([1, 2]),
        0.0,
    )

    assert losses.target_class is None


def test_should_train_without_target_when_class_weight_is_zero(
    tiny_model, shadow, gan_config, monkeypatch
):
    def refuse(*_args, **_kwargs):
        raise AssertionError("target model was consulted")

    monkeypatch.setattr(tiny_model, "forward", refuse)
    cfg = gan_config.model_copy(update={"target_class_weight": 0.0, "epochs": 1})

    outcome = train_inversion_gan(tiny_model, shadow, cfg)

    assert outcome.losses[0].generator_target_class is None
    assert outcome.losses[0].target_confidence is None


def test_should_leave_target_parameters_bit_identical_when_training_gan(
    tiny_model, shadow, gan_config, tmp_path
):
    tiny_model.train()
    before = copy.deepcopy(tiny_model.state_dict())

    outcome = train_inversion_gan(
        tiny_model, shadow, gan_config, output_dir=tmp_path, run_id="run"
    )

    after = tiny_model.state_dict()
    assert all(torch.equal(before[name], after[name]) for name in before)
    assert all(p.requires_grad for p in tiny_model.parameters())
    assert tiny_model.training
    assert [record.epoch for record in outcome.losses] == [1, 2]
    assert read_loss_curve(tmp_path / "run-losses.jsonl") == outcome.losses
    assert sorted(outcome.sample_grids) == [1, 2]
    assert outcome.sample_grids[2].is_file()
    assert (tmp_path / "run-generator.pt").is_file()
    assert 0.0 <= outcome.losses[-1].target_confidence <= 1.0


def test_should_reproduce_loss_curve_when_seed_is_fixed(tiny_model, shadow, gan_config):
    cfg = gan_config.model_copy(update={"epochs": 1})

    first = train_inversion_gan(tiny_model, shadow, cfg)
    second = train_inversion_gan(tiny_model, shadow, cfg)

    assert first.losses == second.losses


def test_should_raise_empty_dataset_error_when_shadow_is_empty(
    tiny_model, shadow, gan_config
):
    with pytest.raises(EmptyDatasetError):
        train_inversion_gan(tiny_model, shadow.subset([]), gan_config)


def test_should_restore_generator_when_loading_encoded_checkpoint(generator):
    restored = load_generator(encode_generator(generator))

    assert torch.equal(
        generate_samples(restored, 4, 2, seed=1),
        generate_samples(generator, 4, 2, seed=1),
    )


def test_should_describe_sample_like_other_attacks_when_inverting_with_gan(
    generator, tiny_model, gan_config
):
    result = invert_class_gan(generator, tiny_model, 3, gan_config, seed=2)

    assert result.attack_kind is AttackKind.GAN
    assert result.image.shape == (3, 8, 8)
    assert result.target_class == 3
    assert result.iterations_run == gan_config.epochs
    predicted = int(tiny_model.predict(result.image))
    assert result.iterations_to_target == (0 if predicted == 3 else None)
    assert 0.0 <= result.extras["target_confidence"] <= 1.0
    assert torch.equal(result.image, generate_samples(generator, 3, 1, seed=2)[0])


def test_should_average_softmax_of_own_class_when_measuring_confidence(
    generator, tiny_model
):
    _zero(tiny_model.final_layer)

    confidence = target_confidence(generator, tiny_model, samples_per_class=2)

    assert confidence == pytest.approx(0.1)


def test_should_hand_curve_and_grids_to_hook_when_training(
    tiny_model, shadow, gan_config
):
    cfg = gan_config.model_copy(update={"epochs": 3, "sample_every": 2})
    seen: list[tuple[int, tuple[int, ...] | None]] = []

    outcome = train_inversion_gan(
        tiny_model,
        shadow,
        cfg,
        on_epoch=lambda curve, grid: seen.append(
            (curve[-1].epoch, None if grid is None else tuple(grid.shape))
        ),
    )

    grid = sample_grid(outcome.generator, cfg.samples_per_class, cfg.seed)
    assert seen == [(1, None), (2, tuple(grid.shape)), (3, None)]
    assert outcome.sample_grids == {}


def test_should_tell_real_from_generated_when_discriminator_is_trained(
    tiny_model, make_dataset
):
    """Scored as trained: real and generated images in separate batches."""

    shadow = make_dataset(32, size=8, seed=4, split=SplitTag.VALIDATION)
    cfg = GanInversionConfig(
        epochs=10,
        batch_size=8,
        lr=1e-3,
        generator_width=8,
        discriminator_width=4,
        samples_per_class=2,
        target_class_weight=0.0,
        progress=False,
    )

    outcome = train_inversion_gan(tiny_model, shadow, cfg)

    disc = outcome.discriminator.train()
    real = shadow.batch(range(16))
    fake = torch.cat(
        [generate_samples(outcome.generator, c, 2, seed=c) for c in range(8)]
    )
    with torch.no_grad():
        real_score, _ = disc(real)
        fake_score, _ = disc(fake)
    correct = int((real_score > 0).sum()) + int((fake_score < 0).sum())
    assert correct / (len(real) + len(fake)) > 0.5


def test_should_raise_target_confidence_when_class_weight_grows(
    make_linear_model, make_dataset
):
    generator = torch.Generator().manual_seed(0)
    target = make_linear_model(
        torch.randn(10, 192, generator=generator) * 0.2, torch.zeros(10)
    )
    shadow = make_dataset(32, size=8, seed=5, split=SplitTag.VALIDATION)

    confidence = {}
    for weight in (0.0, 1.0, 10.0):
        cfg = GanInversionConfig(
            epochs=5,
            batch_size=8,
            lr=1e-3,
            generator_width=8,
            discriminator_width=4,
            target_class_weight=weight,
            progress=False,
        )
        outcome = train_inversion_gan(target, shadow, cfg)
        confidence[weight] = target_confidence(outcome.generator, target)

    assert confidence[1.0] > confidence[0.0]
    assert confidence[10.0] > confidence[0.0]
