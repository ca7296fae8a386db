"""Input validation helpers shared by the public functions and estimators."""

import numpy as np

from .exceptions import ShapeError


def check_tensor(a, name="tensor", allow_nonfinite=False):
    """Return ``a`` as a float64 order-3 array, validating shape and values."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim != 3:
        raise ShapeError(f"{name} must be an order-3 tensor, got ndim={arr.ndim}")
    if min(arr.shape) < 1:
        raise ShapeError(f"{name} has an empty mode: shape={arr.shape}")
    if not allow_nonfinite and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")
    return arr


def check_same_shape(a, b, names=("a", "b")):
    if a.shape != b.shape:
        raise ShapeError(
            f"shape mismatch: {names[0]}{a.shape} vs {names[1]}{b.shape}"
        )


def check_dims(dims):
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ShapeError(f"dims must be three positive integers, got {dims}")
    return dims
