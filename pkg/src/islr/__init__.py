"""Hand-sign character recognition: preprocessing, a numpy CNN, training, and a CLI."""
from .data import LABELS
from .model import IslCnnConfig, Model, build_isl_cnn, load_checkpoint, save_checkpoint

__version__ = "0.1.0"

__all__ = ["IslCnnConfig", "LABELS", "Model", "build_isl_cnn", "load_checkpoint",
           "save_checkpoint"]
