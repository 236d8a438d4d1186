from . import autodiff, linalg
from .nn import FeedForwardNet, Layer, DimensionMismatchError
from .optim import AdamState
from .linalg import NotPositiveDefiniteError, cholesky, jittered_cholesky

__all__ = ["autodiff", "linalg", "FeedForwardNet", "Layer", "AdamState",
           "DimensionMismatchError", "NotPositiveDefiniteError", "cholesky",
           "jittered_cholesky"]
