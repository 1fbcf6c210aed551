from ._alloc import tune_allocator

tune_allocator()

from .model import (
    LayerSpec,
    ModelParams,
    NetworkSpec,
    backward,
    default_network_spec,
    forward,
    he_init,
    infer_shapes,
    load_model,
    mse_loss,
    outputs_to_features,
    predict_features,
    save_model,
)
from .adam import adam_step
from .train import TrainConfig, EpochStats, evaluate_mse, parse_config_file, train, write_train_log

__all__ = [
    "LayerSpec", "NetworkSpec", "ModelParams",
    "default_network_spec", "infer_shapes", "he_init",
    "forward", "backward", "mse_loss",
    "outputs_to_features", "predict_features",
    "save_model", "load_model",
    "adam_step",
    "TrainConfig", "EpochStats", "train", "evaluate_mse",
    "parse_config_file", "write_train_log",
]
