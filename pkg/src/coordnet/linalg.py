"""Dense float64 vectors and matrices with Euclidean and trace inner products.

Vectors are 1-D ``numpy.ndarray`` objects and matrices are 2-D C-ordered
(row-major) arrays. Every operation checks shapes and raises
:class:`DimensionError` instead of broadcasting, and never mutates its inputs.
"""

import numpy as np

Vec = np.ndarray
Mat = np.ndarray


class DimensionError(ValueError):
    """Operands live in spaces of different dimension."""


def _finite(a, what):
    if not np.isfinite(a).all():
        raise FloatingPointError(f"{what}: non-finite entries")
    return a


def vec(data) -> Vec:
    """Build a finite, non-empty float64 vector (copies the data)."""
    a = np.array(data, dtype=np.float64)
    if a.ndim != 1 or a.size == 0:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {a.shape}")
    return _finite(a, "vec")


def mat(data) -> Mat:
    """Build a finite float64 matrix in row-major order (copies the data)."""
    a = np.array(data, dtype=np.float64, order="C")
    if a.ndim != 2 or a.size == 0:
        raise DimensionError(f"expected a non-empty 2-D matrix, got shape {a.shape}")
    return _finite(a, "mat")


def zeros_like(a):
    return np.zeros_like(a, dtype=np.float64)


def _same_shape(a, b, op):
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shapes {a.shape} and {b.shape} differ")


def inner_vec(a: Vec, b: Vec) -> float:
    if a.ndim != 1:
        raise DimensionError(f"inner_vec: expected vectors, got shape {a.shape}")
    _same_shape(a, b, "inner_vec")
    return float(np.dot(a, b))


def inner_mat(A: Mat, B: Mat) -> float:
    """Trace inner product tr(A^T B)."""
    if A.ndim != 2:
        raise DimensionError(f"inner_mat: expected matrices, got shape {A.shape}")
    _same_shape(A, B, "inner_mat")
    return float(np.dot(A.ravel(), B.ravel()))


def inner(a, b) -> float:
    """Inner product on whichever space ``a`` belongs to."""
    return inner_mat(a, b) if np.ndim(a) == 2 else inner_vec(a, b)


def hadamard(v: Vec, w: Vec) -> Vec:
    _same_shape(v, w, "hadamard")
    return _finite(v * w, "hadamard")


def matvec(W: Mat, x: Vec) -> Vec:
    if W.ndim != 2 or x.ndim != 1 or W.shape[1] != x.shape[0]:
        raise DimensionError(f"matvec: {W.shape} @ {x.shape}")
    return _finite(W @ x, "matvec")


def matvec_adjoint(W: Mat, u: Vec) -> Vec:
    """W^T u, the adjoint of ``x -> W x`` under the Euclidean inner product."""
    if W.ndim != 2 or u.ndim != 1 or W.shape[0] != u.shape[0]:
        raise DimensionError(f"matvec_adjoint: {W.shape}^T @ {u.shape}")
    return _finite(W.T @ u, "matvec_adjoint")


def outer(u: Vec, x: Vec) -> Mat:
    if u.ndim != 1 or x.ndim != 1:
        raise DimensionError(f"outer: expected vectors, got {u.shape}, {x.shape}")
    return _finite(np.outer(u, x), "outer")


def transpose(W: Mat) -> Mat:
    # materialized so callers always see a fresh row-major array
    return np.ascontiguousarray(W.T)


def norm(a) -> float:
    """Norm induced by :func:`inner` (Frobenius for matrices)."""
    return float(np.sqrt(inner(a, a))) if np.ndim(a) else abs(float(a))
