"""Input validation helpers used by estimators and the CLI."""

import numpy as np

from sensorprint.errors import ValidationError


def check_array_2d(X, *, name="X", dtype=np.float64):
    """Coerce ``X`` to a 2-D float array and reject non-finite values."""
    X = np.asarray(X, dtype=dtype)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValidationError(f"{name} must be 2-dimensional, got shape {X.shape}")
    if X.shape[0] == 0 or X.shape[1] == 0:
        raise ValidationError(f"{name} must be non-empty, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValidationError(f"{name} contains NaN or infinite values")
    return X


def check_labels(y, n_samples, *, name="y"):
    """Coerce ``y`` to a 1-D label array matching ``n_samples`` rows."""
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValidationError(f"{name} must be 1-dimensional, got shape {y.shape}")
    if y.shape[0] != n_samples:
        raise ValidationError(
            f"{name} has {y.shape[0]} entries but X has {n_samples} rows"
        )
    if y.shape[0] == 0:
        raise ValidationError(f"{name} must be non-empty")
    return y


def check_X_y(X, y, *, dtype=np.float64):
    """Validate a feature matrix / label vector pair."""
    X = check_array_2d(X, dtype=dtype)
    y = check_labels(y, X.shape[0])
    return X, y


def check_fitted(estimator, attributes):
    """Raise if any of ``attributes`` is missing from ``estimator``."""
    missing = [a for a in attributes if not hasattr(estimator, a)]
    if missing:
        raise ValidationError(
            f"{type(estimator).__name__} is not fitted (missing {', '.join(missing)}); "
            "call fit() first"
        )


def check_positive(value, *, name, strict=True):
    """Validate a scalar is positive (or non-negative when strict=False)."""
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{name} must be a number, got {value!r}") from None
    if not np.isfinite(value):
        raise ValidationError(f"{name} must be finite, got {value!r}")
    if strict and value <= 0:
        raise ValidationError(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise ValidationError(f"{name} must be >= 0, got {value!r}")
    return value


def check_probability(value, *, name):
    """Validate a scalar lies in [0, 1]."""
    value = check_positive(value, name=name, strict=False)
    if value > 1.0:
        raise ValidationError(f"{name} must be in [0, 1], got {value!r}")
    return value
