"""Norms and small-matrix helpers.

The state space is R^d with the max norm; operators use the induced
max-row-sum norm.  Both are exactly computable, which is what makes the
certificates in the rest of the package honest.
"""

import numpy as np


def vec_norm(v):
    """Max-norm of a vector (or of each row of a stack of vectors)."""
    v = np.asarray(v, dtype=float)
    if v.size == 0:
        return 0.0
    return float(np.max(np.abs(v)))


def op_norm(m):
    """Induced max-norm of a d x d matrix: the maximum absolute row sum."""
    m = np.asarray(m, dtype=float)
    return float(np.max(np.sum(np.abs(m), axis=-1)))


def op_norms(stack):
    """Row-sum norms of a stack of matrices, shape (..., d, d) -> (...)."""
    stack = np.asarray(stack, dtype=float)
    return np.max(np.sum(np.abs(stack), axis=-1), axis=-1)


def seq_norm(values):
    """Sup norm of a sequence of states, shape (n, d)."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values)))


def as_matrix(a, dim, what="matrix"):
    """Coerce to a (dim, dim) float array, accepting scalars when dim == 1."""
    arr = np.asarray(a, dtype=float)
    if arr.shape == () and dim == 1:
        arr = arr.reshape(1, 1)
    if arr.shape != (dim, dim):
        raise ValueError(f"{what} has shape {arr.shape}, expected ({dim}, {dim})")
    return arr


def as_vector(a, dim, what="vector"):
    """Coerce to a (dim,) float array, accepting scalars when dim == 1."""
    arr = np.asarray(a, dtype=float)
    if arr.shape == () and dim == 1:
        arr = arr.reshape(1)
    if arr.shape != (dim,):
        raise ValueError(f"{what} has shape {arr.shape}, expected ({dim},)")
    return arr
