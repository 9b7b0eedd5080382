from .networks import AuxDiscriminator, ConditionalGenerator
from .service import (
    DiscriminatorLosses,
    GanEpochHook,
    GanEpochLosses,
    GanTrainingOutcome,
    GeneratorLosses,
    discriminator_losses,
    discriminator_step,
    encode_generator,
    encode_loss_curve,
    generate_samples,
    generator_losses,
    generator_step,
    invert_class_gan,
    load_generator,
    read_loss_curve,
    sample_grid,
    save_generator,
    target_confidence,
    train_inversion_gan,
)

__all__ = [
    "AuxDiscriminator",
    "ConditionalGenerator",
    "DiscriminatorLosses",
    "GanEpochHook",
    "GanEpochLosses",
    "GanTrainingOutcome",
    "GeneratorLosses",
    "discriminator_losses",
    "discriminator_step",
    "encode_generator",
    "encode_loss_curve",
    "generate_samples",
    "generator_losses",
    "generator_step",
    "invert_class_gan",
    "load_generator",
    "read_loss_curve",
    "sample_grid",
    "save_generator",
    "target_confidence",
    "train_inversion_gan",
]
