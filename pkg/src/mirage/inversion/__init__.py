"""Model-inversion attacks: clipped gradient ascent, multi-scale ascent and a GAN."""

from .config import (
    TARGET_WEIGHT_SWEEP,
    DreamConfig,
    GanInversionConfig,
    InitSpec,
    NoiseDistribution,
    PgdInversionConfig,
)
from .deepdream import (
    build_octave_pyramid,
    calibrate_tv_weight,
    dream_step,
    invert_class_multiscale,
    octave_sizes,
    total_variation,
)
from .models import InversionRecord, InversionResult, TrajectoryPoint
from .persistence import load_inversion, save_inversion, sidecar_path
from .initialization import initial_image, model_image_shape
from .pgd import calibrate_lr, invert_class, invert_from_seed_image, pgd_step

__all__ = [
    "DreamConfig",
    "GanInversionConfig",
    "InitSpec",
    "InversionRecord",
    "InversionResult",
    "NoiseDistribution",
    "PgdInversionConfig",
    "TARGET_WEIGHT_SWEEP",
    "TrajectoryPoint",
    "build_octave_pyramid",
    "calibrate_lr",
    "calibrate_tv_weight",
    "dream_step",
    "initial_image",
    "invert_class",
    "invert_class_multiscale",
    "invert_from_seed_image",
    "load_inversion",
    "model_image_shape",
    "octave_sizes",
    "pgd_step",
    "save_inversion",
    "sidecar_path",
    "total_variation",
]
