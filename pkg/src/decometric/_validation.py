"""Input validation helpers shared by the metric layer and the estimator."""

from __future__ import annotations

import numpy as np

__all__ = ["as_codeword", "as_codeword_matrix", "as_diff_vector", "as_square_matrix"]


def as_codeword(word, n: int | None = None) -> np.ndarray:
    """Coerce to a length-n vector with entries in {-1, +1}."""
    arr = np.asarray(word)
    if arr.ndim != 1:
        raise ValueError(f"codeword must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"codeword length {arr.shape[0]} does not match dimension {n}")
    out = arr.astype(np.int8, copy=True)
    if not np.array_equal(out, arr) or not np.all(np.abs(out) == 1):
        raise ValueError("codeword entries must be -1 or +1")
    return out


def as_codeword_matrix(words, n: int | None = None) -> np.ndarray:
    """Coerce to an (m, n) matrix of codeword rows."""
    arr = np.asarray(words)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"expected a matrix of codeword rows, got shape {arr.shape}")
    if n is not None and arr.shape[1] != n:
        raise ValueError(f"codeword length {arr.shape[1]} does not match dimension {n}")
    out = arr.astype(np.int8, copy=True)
    if not np.array_equal(out, arr) or not np.all(np.abs(out) == 1):
        raise ValueError("codeword entries must be -1 or +1")
    return out


def as_diff_vector(delta, n: int | None = None, require_nonzero: bool = False) -> np.ndarray:
    """Coerce to a length-n vector with entries in {-1, 0, +1}."""
    arr = np.asarray(delta)
    if arr.ndim != 1:
        raise ValueError(f"difference vector must be one-dimensional, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"difference vector length {arr.shape[0]} does not match dimension {n}")
    out = arr.astype(np.int8, copy=True)
    if not np.array_equal(out, arr) or not np.all(np.abs(out) <= 1):
        raise ValueError("difference vector entries must be -1, 0, or +1")
    if require_nonzero and not np.any(out):
        raise ValueError("difference vector must have at least one nonzero entry")
    return out


def as_square_matrix(m, n: int | None = None) -> np.ndarray:
    arr = np.asarray(m, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"matrix dimension {arr.shape[0]} does not match {n}")
    return arr
