"""Hyperbolic graph convolutional networks on the hyperboloid model."""

from . import autodiff, decoders, layers, manifold, optim
from .kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["autodiff", "decoders", "layers", "manifold", "optim", "KERNEL_BACKEND"]
