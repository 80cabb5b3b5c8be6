"""Shared numerical kernels."""

from __future__ import annotations

from typing import Callable

import numpy as np
import scipy.linalg

from dcflow.config import NormOrder, norm_ord
from dcflow.exceptions import NotSymmetricError, SingularGError

SYMMETRY_TOL = 1e-12


def vector_norm(x: np.ndarray, q: NormOrder) -> float:
    """Return the q-norm of a vector, 0 for an empty one."""
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, ord=norm_ord(q)))


def _is_symmetric(m: np.ndarray, tol: float = SYMMETRY_TOL) -> bool:
    return bool(np.max(np.abs(m - m.T), initial=0.0) <= tol)


def induced_norm(m: np.ndarray, q: NormOrder) -> float:
    """Induced matrix norm.

    :param m: A square matrix.
    :param q: 1 (max absolute column sum), 2 (largest singular value) or "inf"
        (max absolute row sum).
    :return: The norm, 0 for an empty matrix.
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        return 0.0
    if q == 1:
        return float(np.abs(m).sum(axis=0).max())
    if q == "inf":
        return float(np.abs(m).sum(axis=1).max())
    if _is_symmetric(m):
        return float(np.abs(scipy.linalg.eigvalsh(m)).max())
    return float(np.sqrt(max(scipy.linalg.eigvalsh(m.T @ m).max(), 0.0)))


def _check_symmetric(m: np.ndarray) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NotSymmetricError(f"Expected a square matrix, got shape {m.shape}")
    if not _is_symmetric(m):
        raise NotSymmetricError(
            f"Matrix is not symmetric: max |M - M^T| = {np.max(np.abs(m - m.T)):.3e}"
        )
    return 0.5 * (m + m.T)


def min_eigenvalue_sym(m: np.ndarray) -> float:
    """Smallest eigenvalue of a symmetric matrix."""
    m = _check_symmetric(m)
    return float(scipy.linalg.eigvalsh(m, subset_by_index=[0, 0])[0])


def max_eigenvalue_sym(m: np.ndarray) -> float:
    """Largest eigenvalue of a symmetric matrix."""
    m = _check_symmetric(m)
    n = m.shape[0]
    return float(scipy.linalg.eigvalsh(m, subset_by_index=[n - 1, n - 1])[0])


def spd_inverse(m: np.ndarray) -> np.ndarray:
    """Invert a symmetric positive definite matrix through its Cholesky factor."""
    try:
        factor = scipy.linalg.cho_factor(m)
    except np.linalg.LinAlgError as e:
        raise SingularGError(f"Matrix is not positive definite: {e}")
    return scipy.linalg.cho_solve(factor, np.eye(m.shape[0]))


def fd_gradient(
    f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Central-difference gradient of a scalar field."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for n in range(x.size):
        step = np.zeros_like(x)
        step[n] = h
        grad[n] = (f(x + step) - f(x - step)) / (2 * h)
    return grad


def fd_jacobian(
    f: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float = 1e-6
) -> np.ndarray:
    """Central-difference Jacobian of a vector field; column m is the derivative along x_m."""
    x = np.asarray(x, dtype=float)
    columns = []
    for m in range(x.size):
        step = np.zeros_like(x)
        step[m] = h
        columns.append((np.asarray(f(x + step)) - np.asarray(f(x - step))) / (2 * h))
    return np.column_stack(columns)
