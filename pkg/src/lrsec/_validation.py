"""Input validation helpers shared by the public modules."""

import numbers

import numpy as np

from .exceptions import DimensionError


def check_binary_matrix(m, name="matrix", allow_empty=True):
    """Return ``m`` as a 2-D uint8 array with entries in {0, 1}."""
    arr = np.asarray(m)
    if arr.ndim == 1 and arr.size == 0:
        arr = arr.reshape(0, 0)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 entries")
    if not allow_empty and arr.size == 0:
        raise DimensionError(f"{name} must be non-empty")
    return np.ascontiguousarray(arr, dtype=np.uint8)


def check_binary_vector(v, length=None, name="vector"):
    arr = np.asarray(v)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError(f"{name} must contain only 0/1 entries")
    if length is not None and arr.shape[0] != length:
        raise DimensionError(f"{name} has length {arr.shape[0]}, expected {length}")
    return np.ascontiguousarray(arr, dtype=np.uint8)


def check_probability(p, name="p", low=0.0, high=1.0, inclusive=True):
    if not isinstance(p, numbers.Real):
        raise TypeError(f"{name} must be a real number")
    ok = low <= p <= high if inclusive else low < p < high
    if not ok:
        raise ValueError(f"{name}={p} outside [{low}, {high}]")
    return float(p)


def check_positive_int(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)
