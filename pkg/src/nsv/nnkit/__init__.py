"""Minimal deterministic differentiable-network engine (float64 throughout)."""

from .errors import NnkitError, NonFiniteGradient, ShapeError, TrainingDiverged
from .layers import (Conv2d, Dense, Flatten, Relu, Reshape, Sigmoid,
                     UpsampleNearest, layer_from_spec)
from .network import Network
from .optim import AdamState, adam_step
from .train import TrainConfig, grad_check, mse, mse_grad, train
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "NnkitError", "NonFiniteGradient", "ShapeError", "TrainingDiverged",
    "Conv2d", "Dense", "Flatten", "Relu", "Reshape", "Sigmoid",
    "UpsampleNearest", "layer_from_spec", "Network",
    "AdamState", "adam_step", "TrainConfig", "grad_check", "mse", "mse_grad",
    "train", "load_checkpoint", "save_checkpoint",
]
