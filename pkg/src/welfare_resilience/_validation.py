"""Small input-validation helpers shared across modules."""

import numbers

import numpy as np

from .exceptions import EmptyInput, InvalidInput


def as_float_array(values, name="values", allow_empty=False):
    """Return ``values`` as a finite 1-D float64 array (copied)."""
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidInput(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0 and not allow_empty:
        raise EmptyInput(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return arr


def check_int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidInput(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise InvalidInput(f"{name} must be >= {minimum}, got {value}")
    return value


def check_probability(value, name):
    value = float(value)
    if not 0.0 < value < 1.0:
        raise InvalidInput(f"{name} must lie in (0, 1), got {value}")
    return value


def frozen(arr):
    """Mark an array read-only so dataclass containers stay immutable."""
    arr.setflags(write=False)
    return arr
