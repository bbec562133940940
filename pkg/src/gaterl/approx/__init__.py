"""Function approximation: dense network, Adam, checkpoint I/O, kernels."""

from .backend import backend_name
from .checkpoint import Checkpoint, load_checkpoint, restore_optimizer, save_checkpoint
from .network import FeedforwardApproximator
from .optim import Adam

__all__ = [
    "Adam",
    "Checkpoint",
    "FeedforwardApproximator",
    "backend_name",
    "load_checkpoint",
    "restore_optimizer",
    "save_checkpoint",
]
