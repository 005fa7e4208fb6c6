"""Dense complex linear algebra helpers used throughout the package."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

# relative singular-value cutoff for the pseudo-inverse
PINV_RCOND = 1e-12


@lru_cache(maxsize=16)
def _dft_cached(n: int) -> np.ndarray:
    k = np.arange(n)
    m = np.exp(-2j * np.pi * np.outer(k, k) / n)
    m.setflags(write=False)
    return m


def dft_matrix(n: int) -> np.ndarray:
    """Return the ``n x n`` DFT matrix with entries ``exp(-2j*pi*k*l/n)``.

    The returned array is read-only and shared between callers.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"DFT size must be a positive integer, got {n!r}")
    return _dft_cached(int(n))


@lru_cache(maxsize=16)
def _idft_cached(n: int) -> np.ndarray:
    m = dft_matrix(n).conj().T / n
    m.setflags(write=False)
    return m


def idft_matrix(n: int) -> np.ndarray:
    """Inverse DFT matrix, ``dft_matrix(n).conj().T / n``."""
    if int(n) != n or n < 1:
        raise ValueError(f"DFT size must be a positive integer, got {n!r}")
    return _idft_cached(int(n))


def pseudo_inverse(m: np.ndarray, rcond: float = PINV_RCOND) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via SVD.

    Singular values below ``rcond * s_max`` are treated as zero, which yields
    the minimum-norm least-squares solution operator.

    Raises
    ------
    ValueError
        If ``m`` has non-finite entries.
    np.linalg.LinAlgError
        If the SVD does not converge.
    """
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError("pseudo_inverse expects a 2-D array")
    if not np.all(np.isfinite(m)):
        raise ValueError("pseudo_inverse input contains non-finite entries")
    u, s, vh = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((m.shape[1], m.shape[0]), dtype=np.result_type(m, float))
    keep = s > rcond * s[0]
    s_inv = np.zeros_like(s)
    s_inv[keep] = 1.0 / s[keep]
    return (vh.conj().T * s_inv) @ u.conj().T


def block_partition(m: np.ndarray, row_split: int, col_split: int):
    """Split ``m`` into ``(M11, M12, M21, M22)`` at the given row/column."""
    m = np.asarray(m)
    rows, cols = m.shape
    if not 0 < row_split < rows:
        raise ValueError(f"row_split {row_split} outside (0, {rows})")
    if not 0 < col_split < cols:
        raise ValueError(f"col_split {col_split} outside (0, {cols})")
    return (
        m[:row_split, :col_split],
        m[:row_split, col_split:],
        m[row_split:, :col_split],
        m[row_split:, col_split:],
    )


def hermitian(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def wrap_angle(x):
    """Map angles to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2 * np.pi) - np.pi
    y = np.where(y == -np.pi, np.pi, y)
    return y if np.ndim(y) else float(y)
