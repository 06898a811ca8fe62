"""Closed-form Gaussian moments of kernelized input vectors.

For a Gaussian input u and a dictionary whose elements are themselves
Gaussian (some sharing the input distribution, some not), every entry of
the kernelized correlation matrix R_kk = E{k(u) k(u)^T} and of the
fourth-order tensor K = E{k_i k_j k_l k_p} is the moment generating
function of a Gaussian quadratic form evaluated at s = -1/(2 xi^2), i.e. a
determinant. This module evaluates those determinants exactly.

Conventions: a dictionary of M elements has its first L elements "matched"
(element covariance equal to the input covariance R_uu) and the remaining
M - L elements drawn with covariance R_uu_tilde. Elements are mutually
independent and independent of the input.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

__all__ = [
    "DictionaryStatistics",
    "KernelizedMoments",
    "quadratic_mgf",
    "compute_rkk",
    "compute_k_entry",
    "k_tensor",
]


def _check_cov(name: str, R: np.ndarray, q: int) -> np.ndarray:
    R = np.asarray(R, dtype=float)
    if R.shape != (q, q):
        raise ValueError(f"{name} must have shape ({q}, {q}), got {R.shape}")
    if np.abs(R - R.T).max() > 1e-12 * max(np.abs(R).max(), 1.0):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(R)[0] < -1e-12 * max(np.abs(R).max(), 1.0):
        raise ValueError(f"{name} must be positive semidefinite")
    return R


@dataclass
class DictionaryStatistics:
    """Second-order description of a partially matched random dictionary.

    q: input dimension; M: dictionary size; L: number of elements whose
    covariance equals the input covariance R_uu (listed first); the other
    M - L elements have covariance R_uu_tilde.
    """

    q: int
    M: int
    L: int
    R_uu: np.ndarray
    R_uu_tilde: np.ndarray = None

    def __post_init__(self):
        if self.q < 1:
            raise ValueError("q must be at least 1")
        if self.M < 1:
            raise ValueError("M must be at least 1")
        if not 0 <= self.L <= self.M:
            raise ValueError("L must satisfy 0 <= L <= M")
        self.R_uu = _check_cov("R_uu", self.R_uu, self.q)
        if self.R_uu_tilde is None:
            self.R_uu_tilde = self.R_uu.copy()
        self.R_uu_tilde = _check_cov("R_uu_tilde", self.R_uu_tilde, self.q)

    def element_cov(self, m: int) -> np.ndarray:
        """Covariance of dictionary element m (0-based)."""
        if not 0 <= m < self.M:
            raise ValueError(f"element index {m} out of range for M={self.M}")
        return self.R_uu if m < self.L else self.R_uu_tilde


@dataclass
class KernelizedMoments:
    """Moment bundle of the kernelized regression problem: correlation
    matrix R_kk, cross-correlation p_kd, desired-signal power E{d^2}, and
    the induced optimum (alpha_opt, J_min)."""

    Rkk: np.ndarray
    p_kd: np.ndarray
    d2: float
    J_min: float
    alpha_opt: np.ndarray


def quadratic_mgf(Q: np.ndarray, Ry: np.ndarray, s: float) -> float:
    """E{exp(s * y^T Q y)} for zero-mean Gaussian y with covariance Ry:
    det(I - 2 s Q Ry)^(-1/2).

    Raises ValueError when the determinant is not positive (the expectation
    diverges for such s).
    """
    Q = np.asarray(Q, dtype=float)
    Ry = np.asarray(Ry, dtype=float)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError("Q must be square")
    if Ry.shape != Q.shape:
        raise ValueError("Ry must have the same shape as Q")
    A = np.eye(Q.shape[0]) - 2.0 * s * (Q @ Ry)
    det = np.linalg.det(A)
    if det <= 0:
        raise ValueError("moment generating function diverges at this s (det <= 0)")
    return float(det ** -0.5)


def _blkdiag(*blocks: np.ndarray) -> np.ndarray:
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n))
    pos = 0
    for b in blocks:
        out[pos : pos + b.shape[0], pos : pos + b.shape[0]] = b
        pos += b.shape[0]
    return out


def _pair_moment(R_in: np.ndarray, C: np.ndarray, xi: float) -> float:
    """E{kappa(u, c)^2} for independent u ~ N(0, R_in), c ~ N(0, C)."""
    q = R_in.shape[0]
    eye = np.eye(q)
    Q = np.block([[2 * eye, -2 * eye], [-2 * eye, 2 * eye]])
    return quadratic_mgf(Q, _blkdiag(R_in, C), -1.0 / (2.0 * xi * xi))


def _cross_moment(R_in: np.ndarray, Ci: np.ndarray, Cj: np.ndarray, xi: float) -> float:
    """E{kappa(u, c_i) kappa(u, c_j)} for independent u, c_i, c_j."""
    q = R_in.shape[0]
    eye = np.eye(q)
    zero = np.zeros((q, q))
    Q = np.block([[2 * eye, -eye, -eye], [-eye, eye, zero], [-eye, zero, eye]])
    return quadratic_mgf(Q, _blkdiag(R_in, Ci, Cj), -1.0 / (2.0 * xi * xi))


def compute_rkk(stats: DictionaryStatistics, xi: float) -> np.ndarray:
    """Kernelized correlation matrix R_kk (M x M), averaged over the input
    and the random dictionary elements.

    With only two element covariances the matrix has at most five distinct
    entries: two diagonal values (matched / mismatched element) and three
    off-diagonal ones (matched-matched, matched-mismatched,
    mismatched-mismatched).
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    L, M = stats.L, stats.M
    Rm, Rt = stats.R_uu, stats.R_uu_tilde
    R = np.empty((M, M))
    R[:L, :L] = _cross_moment(Rm, Rm, Rm, xi)
    R[:L, L:] = R[L:, :L] = _cross_moment(Rm, Rm, Rt, xi)
    R[L:, L:] = _cross_moment(Rm, Rt, Rt, xi)
    diag_m = _pair_moment(Rm, Rm, xi)
    diag_t = _pair_moment(Rm, Rt, xi)
    for i in range(M):
        R[i, i] = diag_m if i < L else diag_t
    return R


def _k_value(key: tuple, stats: DictionaryStatistics, xi: float) -> float:
    """Fourth-order moment for a canonical index pattern.

    ``key`` is a sorted tuple of (multiplicity, is_mismatched) pairs, one per
    distinct dictionary element among the four kernel factors. The joint
    vector y = (u, c_a, c_b, c_c, c_d) uses one block per kernel factor;
    factors referring to the same element get fully correlated blocks, which
    encodes the repetition without changing the quadratic form.
    """
    q = stats.q
    eye = np.eye(q)
    group_of = []
    covs = []
    for g, (count, mism) in enumerate(key):
        group_of.extend([g] * count)
        covs.append(stats.R_uu_tilde if mism else stats.R_uu)
    n = 5 * q
    Q = np.zeros((n, n))
    Q[:q, :q] = 4 * eye
    for a in range(4):
        s0 = (1 + a) * q
        Q[:q, s0 : s0 + q] = -eye
        Q[s0 : s0 + q, :q] = -eye
        Q[s0 : s0 + q, s0 : s0 + q] = eye
    Ry = np.zeros((n, n))
    Ry[:q, :q] = stats.R_uu
    for a in range(4):
        for b in range(4):
            if group_of[a] == group_of[b]:
                Ry[(1 + a) * q : (2 + a) * q, (1 + b) * q : (2 + b) * q] = covs[group_of[a]]
    return quadratic_mgf(Q, Ry, -1.0 / (2.0 * xi * xi))


def _pattern_key(idx: tuple, L: int) -> tuple:
    counts = {}
    for v in idx:
        counts[v] = counts.get(v, 0) + 1
    return tuple(sorted((c, v >= L) for v, c in counts.items()))


def compute_k_entry(
    stats: DictionaryStatistics, xi: float, i: int, j: int, l: int, p: int
) -> float:
    """Single entry K[i, j, l, p] = E{k_i k_j k_l k_p} (0-based element
    indices; repeated indices denote the same element). Invariant under any
    permutation of the four indices."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    for v in (i, j, l, p):
        if not 0 <= v < stats.M:
            raise ValueError(f"element index {v} out of range for M={stats.M}")
    return _k_value(_pattern_key((i, j, l, p), stats.L), stats, xi)


def k_tensor(stats: DictionaryStatistics, xi: float) -> np.ndarray:
    """Full fourth-order moment tensor (M, M, M, M).

    The value of an entry depends only on how the four indices group into
    repeated elements and on each group's covariance class, so the tensor is
    filled from a small cache of distinct patterns.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    M, L = stats.M, stats.L
    cache = {}
    K = np.empty((M, M, M, M))
    for idx in product(range(M), repeat=4):
        key = _pattern_key(idx, L)
        val = cache.get(key)
        if val is None:
            val = _k_value(key, stats, xi)
            cache[key] = val
        K[idx] = val
    return K
