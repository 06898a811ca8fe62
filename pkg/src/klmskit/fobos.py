"""Forward-backward splitting on top of KLMS: proximity operators, the
regularized update with online dictionary pruning, and the mean-sense
step-size stability bound.

Each step is a plain KLMS gradient step followed by a soft-threshold
proximity step; coefficients driven to exactly zero have their centers
removed from the dictionary, which is what lets the filter discard stale
atoms after the input statistics change.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .klms import FilterState, StepOutcome, klms_step

__all__ = [
    "RegularizerSpec",
    "StabilityBound",
    "prox_l1",
    "prox_adaptive_l1",
    "fobos_klms_step",
    "stability_bound",
]

_KINDS = ("none", "l1", "adaptive_l1")


@dataclass
class RegularizerSpec:
    """Sparsity penalty: ``none`` (plain KLMS), ``l1`` (uniform soft
    threshold lam*eta) or ``adaptive_l1`` (per-entry threshold
    lam*eta / (|alpha_prev| + epsilon_alpha))."""

    kind: str = "none"
    lam: float = 0.0
    epsilon_alpha: float = 1e-2

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"reg.kind must be one of {_KINDS}, got {self.kind!r}")
        if self.lam < 0:
            raise ValueError("lam must be nonnegative")
        if self.kind == "adaptive_l1" and self.epsilon_alpha <= 0:
            raise ValueError("epsilon_alpha must be positive for adaptive_l1")


@dataclass
class StabilityBound:
    """Largest eigenvalue of R_kk, the mean-sense step-size limit
    eta_max = 2 / lambda_max, and — when R_kk has an exact two-value
    structure (equal diagonal, equal off-diagonal) — the closed form
    r_md + (M-1) r_od for cross-checking."""

    eta_max: float
    lambda_max: float
    lambda_max_two_value: float | None = None


def prox_l1(alpha: np.ndarray, threshold: float) -> np.ndarray:
    """Soft thresholding: sign(a) * max(|a| - threshold, 0) entrywise.

    Produces exact zeros (a tie |a| = threshold maps to 0.0), which the
    pruning rule relies on.
    """
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    alpha = np.asarray(alpha, dtype=float)
    return np.sign(alpha) * np.maximum(np.abs(alpha) - threshold, 0.0)


def prox_adaptive_l1(
    alpha: np.ndarray, base_threshold: float, alpha_prev: np.ndarray, eps: float
) -> np.ndarray:
    """Reweighted soft thresholding with per-entry threshold
    base_threshold / (|alpha_prev| + eps).

    Entries that were large on the previous step are barely shrunk (their
    shrink amount is at most base_threshold / |alpha_prev|); entries near
    zero see a threshold of up to base_threshold / eps.
    """
    if base_threshold < 0:
        raise ValueError("base_threshold must be nonnegative")
    if eps <= 0:
        raise ValueError("eps must be positive")
    alpha = np.asarray(alpha, dtype=float)
    alpha_prev = np.asarray(alpha_prev, dtype=float)
    if alpha.shape != alpha_prev.shape:
        raise ValueError("alpha and alpha_prev must have the same length")
    thr = base_threshold / (np.abs(alpha_prev) + eps)
    return np.sign(alpha) * np.maximum(np.abs(alpha) - thr, 0.0)


def fobos_klms_step(state: FilterState, u, d: float, reg: RegularizerSpec) -> StepOutcome:
    """One regularized step: KLMS gradient step (with possible admission),
    proximity step, then removal of every center whose coefficient is
    exactly zero. Mutates ``state`` and returns the outcome (with the pruned
    indices recorded).

    With ``reg.kind == "none"`` this is bit-identical to ``klms_step``.
    """
    if reg.kind == "none" or reg.lam == 0.0:
        # zero penalty: the proximity step is the identity and nothing may
        # be pruned, so this reduces exactly to the plain update
        return klms_step(state, u, d)
    prev = state.alpha.copy()
    out = klms_step(state, u, d)
    if out.admitted:
        # a freshly admitted atom has no previous coefficient; use 0, i.e.
        # maximal reweighting 1/eps on speculative atoms
        prev = np.append(prev, 0.0)
    base = reg.lam * state.eta
    if reg.kind == "l1":
        shrunk = prox_l1(state.alpha, base)
    else:
        shrunk = prox_adaptive_l1(state.alpha, base, prev, reg.epsilon_alpha)
    keep = shrunk != 0.0
    if keep.all():
        state.alpha = shrunk
        return out
    out.pruned = tuple(np.flatnonzero(~keep))
    state.alpha = shrunk[keep]
    state.centers = state.centers[keep]
    return out


def stability_bound(Rkk: np.ndarray) -> StabilityBound:
    """Mean-sense stability limit for the step size: eta_max = 2 / lambda_max.

    ``Rkk`` must be symmetric positive definite. When the matrix has an exact
    two-value structure (all diagonal entries equal, all off-diagonal entries
    equal) the closed form lambda_max = r_md + (M-1) r_od is returned
    alongside the numerical eigenvalue.
    """
    R = np.asarray(Rkk, dtype=float)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ValueError("Rkk must be a square matrix")
    scale = max(np.abs(R).max(), 1.0)
    if np.abs(R - R.T).max() > 1e-10 * scale:
        raise ValueError("Rkk must be symmetric")
    lam_max = float(np.linalg.eigvalsh(R)[-1])
    if lam_max <= 0:
        raise ValueError("Rkk must be positive definite")
    closed = None
    M = R.shape[0]
    r_md = R[0, 0]
    if M == 1:
        closed = float(r_md)
    else:
        off = R[~np.eye(M, dtype=bool)]
        r_od = off[0]
        two_value = (
            np.abs(np.diag(R) - r_md).max() <= 1e-12 * scale
            and np.abs(off - r_od).max() <= 1e-12 * scale
        )
        if two_value:
            closed = float(r_md + (M - 1) * r_od)
    return StabilityBound(eta_max=2.0 / lam_max, lambda_max=lam_max, lambda_max_two_value=closed)
