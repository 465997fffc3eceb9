"""Minimal numpy neural-network engine."""
from .functional import cross_entropy, softmax, softmax_cross_entropy
from .gradcheck import GradCheckReport, SoftmaxCrossEntropyHead, grad_check
from .layers import (
    Conv2D, Dense, Dropout, Flatten, LayerConfig, MaxPool, Param, ReLU, Residual,
    Sequential, Softmax, build_stack, config_from_dict, config_to_dict, infer_shapes,
    param_count,
)
from .optim import AdamState, adam_step, zero_grad

__all__ = [
    "AdamState", "Conv2D", "Dense", "Dropout", "Flatten", "GradCheckReport", "LayerConfig",
    "MaxPool", "Param", "ReLU", "Residual", "Sequential", "Softmax", "SoftmaxCrossEntropyHead",
    "adam_step", "build_stack", "config_from_dict", "config_to_dict", "cross_entropy",
    "grad_check", "infer_shapes", "param_count", "softmax", "softmax_cross_entropy", "zero_grad",
]
