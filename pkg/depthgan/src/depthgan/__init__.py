"""Conditional GAN that reconstructs depth-maps from radar heat-maps.

Consumes datasets produced by the radar simulator through its external
file formats (.hwke heat-maps, .hwkd depth-maps, manifest.json) and
writes predictions back as .hwkd so the simulator's perception metrics
evaluate them unmodified.
"""

from .errors import ConfigError, DepthGanError, FileFormatError, TrainingError
from .formats import (
    depth_file_to_grid,
    depth_grid_to_file,
    load_depth_map,
    load_heat_map,
    load_manifest,
    save_depth_map,
)
from .losses import (
    LossWeights,
    PerceptualLoss,
    compute_loss,
    discriminator_loss,
    generator_adversarial_loss,
    l1_loss,
)
from .models import (
    Discriminator,
    DiscriminatorConfig,
    Generator,
    GeneratorConfig,
    parameter_count,
    scaled_discriminator_config,
    scaled_generator_config,
    top_m_projection,
)
from .train import (
    DEPTH_SCALE,
    PairedDataset,
    TrainConfig,
    Trainer,
    held_out_l1,
    predict_to_hwkd,
    train,
    train_eval_folds,
)

__all__ = [
    "ConfigError", "DepthGanError", "FileFormatError", "TrainingError",
    "depth_file_to_grid", "depth_grid_to_file", "load_depth_map",
    "load_heat_map", "load_manifest", "save_depth_map",
    "LossWeights", "PerceptualLoss", "compute_loss", "discriminator_loss",
    "generator_adversarial_loss", "l1_loss",
    "Discriminator", "DiscriminatorConfig", "Generator", "GeneratorConfig",
    "parameter_count", "scaled_discriminator_config",
    "scaled_generator_config", "top_m_projection",
    "DEPTH_SCALE", "PairedDataset", "TrainConfig", "Trainer", "held_out_l1",
    "predict_to_hwkd", "train", "train_eval_folds",
]
