"""Coordinate-free backpropagation for MLPs and tied-weight autoencoders."""

from .elementwise import Nonlinearity
from .engine import (BatchResult, ConfigError, Example, Grads, Loss, LossConfig, TangentTarget,
                     backprop_higher, backprop_standard, batch_grads, descent_step, grad_R_multi,
                     halving_probe, loss_value, seed_error, train)
from .layers import Layer, LayerCache, xi
from .linalg import DimensionError
from .network import Kind, Network, PassState, forward, init_network, tangent_forward

__all__ = [
    "BatchResult", "ConfigError", "DimensionError", "Example", "Grads", "Kind", "Layer", "LayerCache",
    "Loss", "LossConfig", "Network", "Nonlinearity", "PassState", "TangentTarget", "backprop_higher",
    "backprop_standard", "batch_grads", "descent_step", "forward", "grad_R_multi", "halving_probe",
    "init_network", "loss_value", "seed_error", "tangent_forward", "train", "xi",
]
