"""Dense float64 matrix and vector primitives.

Matrices are plain numpy arrays (row-major, 64-bit). The constructors
validate shape and finiteness once so downstream code can assume
well-formed operands. All operations are pure functions.
"""

import numpy as np

from .exceptions import ShapeError


def as_matrix(values) -> np.ndarray:
    """Validate and return a 2-D float64 array (finite entries only)."""
    a = np.asarray(values, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeError(f"expected a 2-D matrix, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix contains non-finite entries")
    return a


def as_vector(values) -> np.ndarray:
    """Validate and return a 1-D float64 array (finite entries only)."""
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1:
        raise ShapeError(f"expected a 1-D vector, got ndim={v.ndim}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector contains non-finite entries")
    return v


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product with a fixed accumulation order.

    Unoptimized einsum accumulates each output entry over the shared
    index in ascending order, keeping results reproducible run to run.
    """
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("matmul operands must be 2-D")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape} by {b.shape}")
    return np.einsum("ij,jk->ik", a, b)


def softmax_rows(u: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilized by subtracting each row's maximum."""
    shifted = u - u.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def frobenius_sq(a: np.ndarray) -> float:
    """Sum of squared entries, ||A||_F^2."""
    return float(np.sum(a * a))


def argmax_row(v: np.ndarray) -> int:
    """Index of the maximum entry; ties break to the lowest index."""
    if v.shape[0] == 0:
        raise ShapeError("argmax of an empty vector")
    return int(np.argmax(v))
