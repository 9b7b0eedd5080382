import math

import pytest
import torch

from mirage.common.exceptions import ConfigError, InvalidClassError
from mirage.common.types import AttackKind, InitMode
from mirage.inversion import (
    InitSpec,
    PgdInversionConfig,
    calibrate_lr,
    initial_image,
    invert_class,
    invert_from_seed_image,
    pgd_step,
)

SHAPE = (3, 4, 4)


@pytest.fixture
def rising_model(make_linear_model):
    """Class 1 gains 0.01/127.5 per pixel count everywhere; class 0 is flat."""

    weight = torch.stack([torch.zeros(48), torch.full((48,), 0.01)])
    return make_linear_model(weight, torch.tensor([0.0, -0.2]))


def test_should_stay_in_pixel_domain_when_taking_random_steps(tiny_model):
    generator = torch.Generator().manual_seed(0)

    for _ in range(1000):
        x = torch.rand(3, 8, 8, generator=generator, dtype=torch.float64) * 255
        lr = float(10 ** (torch.rand(1, generator=generator) * 12 - 2))
        class_id = int(torch.randint(0, 10, (1,), generator=generator))

        stepped = pgd_step(x, tiny_model, class_id, lr=lr)

        assert float(stepped.min()) >= 0.0
        assert float(stepped.max()) <= 255.0


def test_should_keep_image_fixed_when_gradient_is_zero(make_linear_model):
    model = make_linear_model(torch.zeros(2, 48), torch.tensor([0.0, 1.0]))
    x = torch.rand(SHAPE, dtype=torch.float64) * 255

    assert torch.equal(pgd_step(x, model, 1, lr=1e6), x)


def test_should_move_at_most_one_count_when_lr_is_tiny(tiny_model):
    x = torch.rand(3, 8, 8, dtype=torch.float64) * 255

    stepped = pgd_step(x, tiny_model, 7, lr=1e-6)

    assert float((stepped - x).abs().max()) <= 1.0


def test_should_not_move_when_gradient_pushes_into_saturated_pixels(rising_model):
    x = torch.full(SHAPE, 255.0, dtype=torch.float64)

    assert torch.equal(pgd_step(x, rising_model, 1, lr=50.0), x)


def test_should_add_scaled_gradient_when_pixels_are_interior(rising_model):
    x = torch.full(SHAPE, 100.0, dtype=torch.float64)

    stepped = pgd_step(x, rising_model, 1, lr=127.5)

    assert torch.allclose(stepped, x + 0.01)


def test_should_increase_activation_when_learning_rate_is_small(tiny_model):
    generator = torch.Generator().manual_seed(2)
    x = 64 + torch.rand(3, 8, 8, generator=generator, dtype=torch.float64) * 128

    stepped = pgd_step(x, tiny_model, 5, lr=1e-2)

    assert tiny_model.class_activation(stepped, 5) > tiny_model.class_activation(x, 5)


def test_should_scale_largest_change_to_target_when_calibrating():
    grad = torch.tensor([0.5, -2.0, 1.0])

    assert calibrate_lr(grad, 4.0) == pytest.approx(2.0)
    assert calibrate_lr(torch.zeros(3), 4.0) == 4.0


def test_should_return_start_image_when_max_iterations_is_zero(rising_model):
    cfg = PgdInversionConfig(target_class=1, max_iterations=0)

    result = invert_class(rising_model, cfg, image_shape=SHAPE)

    assert torch.equal(result.image, torch.full(SHAPE, 128.0))
    assert result.iterations_run == 0
    assert result.trajectory == []
    assert result.iterations_to_target is None
    assert result.final_activation == pytest.approx(result.initial_activation)


def test_should_report_first_iteration_classified_as_target_when_inverting(
    rising_model,
):
    """Each calibrated step adds one count per pixel, raising the logit by
    48 * 0.01 / 127.5; the class-1 logit overtakes class 0 after 53 steps."""

    cfg = PgdInversionConfig(target_class=1, max_iterations=60)

    result = invert_class(rising_model, cfg, image_shape=SHAPE)

    assert result.attack_kind is AttackKind.PGD
    assert result.iterations_to_target == 53
    assert [p.iteration for p in result.trajectory] == list(range(1, 61))
    activations = [p.activation for p in result.trajectory]
    assert all(b > a for a, b in zip(activations, activations[1:]))
    assert torch.allclose(result.image, torch.full(SHAPE, 188.0), atol=1e-3)
    assert result.lr == pytest.approx(127.5 / 0.01, rel=1e-5)


def test_should_report_zero_when_start_image_is_already_target(rising_model):
    cfg = PgdInversionConfig(target_class=0, max_iterations=3)

    result = invert_class(rising_model, cfg, image_shape=SHAPE)

    assert result.iterations_to_target == 0


def test_should_record_displacement_when_starting_from_seed_image(rising_model):
    seed = torch.full(SHAPE, 100.0)
    cfg = PgdInversionConfig(target_class=1, max_iterations=5)

    result = invert_from_seed_image(rising_model, seed, cfg)

    assert result.attack_id == "pgd-seeded"
    assert result.displacement_l2 == pytest.approx(5 * math.sqrt(48), rel=1e-4)


def test_should_skip_trajectory_when_recording_is_disabled(rising_model):
    cfg = PgdInversionConfig(target_class=1, max_iterations=4, record_trajectory=False)

    assert invert_class(rising_model, cfg, image_shape=SHAPE).trajectory == []


def test_should_raise_invalid_class_error_when_target_is_out_of_range(rising_model):
    cfg = PgdInversionConfig(target_class=2, max_iterations=1)

    with pytest.raises(InvalidClassError):
        invert_class(rising_model, cfg, image_shape=SHAPE)


def test_should_raise_config_error_when_shape_is_unknown(tiny_model):
    with pytest.raises(ConfigError):
        invert_class(tiny_model, PgdInversionConfig(max_iterations=1))


def test_should_draw_same_noise_when_seed_is_fixed():
    spec = InitSpec(mode=InitMode.RANDOM, random_spread=200.0)

    first = initial_image(spec, SHAPE, seed=4)

    assert torch.equal(first, initial_image(spec, SHAPE, seed=4))
    assert not torch.equal(first, initial_image(spec, SHAPE, seed=5))
    assert float(first.min()) >= 0.0
    assert float(first.max()) <= 255.0


def test_should_raise_config_error_when_seed_mode_has_no_image():
    with pytest.raises(ConfigError):
        initial_image(InitSpec(mode=InitMode.SEED_IMAGE), SHAPE)
