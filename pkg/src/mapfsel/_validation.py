"""Input validation helpers shared by the estimators."""

from __future__ import annotations

import numpy as np

from .errors import DataError, ValidationError


def check_feature_matrix(X) -> np.ndarray:
    """Coerce to a 2D float64 matrix. Missing or non-finite values are an
    error: the extractors never produce them, so their presence means the
    input is corrupt rather than something to impute around."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValidationError(f"expected a 2D feature matrix, got shape {X.shape}")
    if not np.isfinite(X).all():
        bad = np.argwhere(~np.isfinite(X))[0]
        raise DataError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
    return X


def check_labels(y, n_classes: int | None = None, n_rows: int | None = None) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValidationError(f"labels must be 1D, got shape {y.shape}")
    if y.size and not np.issubdtype(y.dtype, np.integer):
        as_int = y.astype(np.int64)
        if not np.array_equal(as_int, y):
            raise ValidationError("labels must be integer class indices")
        y = as_int
    y = y.astype(np.int64)
    if n_rows is not None and y.size != n_rows:
        raise ValidationError(f"got {y.size} labels for {n_rows} rows")
    if y.size:
        if y.min() < 0:
            raise ValidationError("labels must be non-negative")
        if n_classes is not None and y.max() >= n_classes:
            raise ValidationError(f"label {y.max()} out of range for {n_classes} classes")
    return y
