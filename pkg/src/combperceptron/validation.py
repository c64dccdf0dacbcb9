"""Input validation helpers used by the estimators and the signal chain."""

import numpy as np

from .errors import DomainError


def as_float_vector(x, name="x"):
    """Coerce to a 1-D float64 array, rejecting anything non-finite."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def as_feature_matrix(X, name="X"):
    """Coerce to a 2-D float64 array (n_samples, n_features)."""
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise DomainError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} contains non-finite values")
    return arr


def as_binary_labels(y, n_expected=None, name="y"):
    """Coerce to an int array of 0/1 labels."""
    arr = np.asarray(y)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional, got shape {arr.shape}")
    values = set(np.unique(arr).tolist())
    if not values <= {0, 1}:
        raise DomainError(f"{name} must contain only 0/1 labels, got {sorted(values)}")
    if n_expected is not None and arr.shape[0] != n_expected:
        raise DomainError(
            f"{name} has {arr.shape[0]} entries, expected {n_expected}"
        )
    return arr.astype(np.int64)


def check_unit_range(x, name="x"):
    """Require every entry of x to lie in [0, 1]."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.size and (arr.min() < 0.0 or arr.max() > 1.0):
        bad = int(np.argmax((arr < 0.0) | (arr > 1.0)))
        raise DomainError(
            f"{name}[{bad}] = {arr.flat[bad]} is outside [0, 1]"
        )
    return arr


def check_positive(value, name):
    if not value > 0:
        raise DomainError(f"{name} must be positive, got {value}")
    return value


def check_nonnegative(value, name):
    if value < 0:
        raise DomainError(f"{name} must be nonnegative, got {value}")
    return value
