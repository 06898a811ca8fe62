"""Gaussian kernel evaluation and kernelized-input vectors.

The kernel is the unit-norm Gaussian kappa(a, b) = exp(-||a - b||^2 / (2 xi^2))
with bandwidth xi > 0. A "kernelized input" is the vector of kernel values
between the current input and every dictionary center; it plays the role of
the regressor in all the LMS machinery built on top.
"""

from __future__ import annotations

import numpy as np

__all__ = ["gaussian_kernel", "kernel_vector", "as_centers"]


def _as_vector(x) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D input vector, got shape {v.shape}")
    return v


def as_centers(centers, q: int | None = None) -> np.ndarray:
    """Normalize a center collection to a (M, q) float array.

    Accepts a list of 1-D vectors, a 2-D array, or an empty sequence. With an
    empty input, ``q`` must be given (or defaults to 1) so the result still
    has a definite width.
    """
    if isinstance(centers, np.ndarray) and centers.ndim == 2:
        return centers.astype(float, copy=False)
    rows = [_as_vector(c) for c in centers]
    if not rows:
        return np.empty((0, q if q is not None else 1))
    width = rows[0].size
    for r in rows:
        if r.size != width:
            raise ValueError("dictionary centers have inconsistent dimensions")
    return np.vstack(rows)


def gaussian_kernel(a, b, xi: float) -> float:
    """Unit-norm Gaussian kernel exp(-||a-b||^2 / (2 xi^2)).

    Symmetric in (a, b), equal to 1 at zero distance, and in (0, 1] for all
    finite inputs (underflow to exactly 0 at extreme distances is accepted).
    """
    if xi <= 0:
        raise ValueError("kernel bandwidth xi must be positive")
    av, bv = _as_vector(a), _as_vector(b)
    if av.size != bv.size:
        raise ValueError(f"input dimensions differ: {av.size} vs {bv.size}")
    diff = av - bv
    return float(np.exp(-(diff @ diff) / (2.0 * xi * xi)))


def kernel_vector(u, centers, xi: float) -> np.ndarray:
    """Kernel values between ``u`` and every dictionary center.

    Returns a length-M vector; an empty dictionary yields an empty vector
    (a valid state for a filter that has not been initialized yet).
    """
    if xi <= 0:
        raise ValueError("kernel bandwidth xi must be positive")
    uv = _as_vector(u)
    C = as_centers(centers, q=uv.size)
    if C.shape[0] == 0:
        return np.empty(0)
    if C.shape[1] != uv.size:
        raise ValueError(
            f"input dimension {uv.size} does not match centers of dimension {C.shape[1]}"
        )
    d2 = ((C - uv[None, :]) ** 2).sum(axis=1)
    return np.exp(-d2 / (2.0 * xi * xi))
