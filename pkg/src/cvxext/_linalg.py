"""Batched small symmetric eigenvalue helpers."""
import numpy as np


def min_eigenvalue(H: np.ndarray) -> np.ndarray:
    """Smallest eigenvalue of each symmetric matrix in the trailing two axes."""
    n = H.shape[-1]
    if n == 1:
        return H[..., 0, 0].copy()
    if n == 2:
        a, b, c = H[..., 0, 0], H[..., 0, 1], H[..., 1, 1]
        return 0.5 * (a + c) - np.hypot(0.5 * (a - c), b)
    return np.linalg.eigvalsh(H)[..., 0]


def min_eigenpair(H: np.ndarray):
    lam, vec = np.linalg.eigh(H)
    return lam[0], vec[:, 0]
