"""Online kernel LMS with coherence-gated dictionary growth (CS-KLMS).

The filter keeps a dictionary of kernel centers and a coefficient vector
alpha. Each step predicts with the pre-update coefficients (a-priori error),
admits the input as a new center when its largest kernel value against the
dictionary does not exceed the coherence threshold mu0, and then performs the
LMS gradient update on alpha over the (possibly extended) dictionary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .kernels import as_centers, kernel_vector

__all__ = ["FilterState", "StepOutcome", "coherence_admit", "predict", "klms_step"]


@dataclass
class FilterState:
    """Mutable state of a CS-KLMS filter.

    ``centers`` is the (M, q) dictionary, ``alpha`` the matching coefficient
    vector. The coherence invariant — every pairwise kernel value between
    distinct centers is <= mu0 — holds after every update.
    """

    centers: np.ndarray
    alpha: np.ndarray
    xi: float
    eta: float
    mu0: float = 0.01

    def __post_init__(self):
        self.centers = as_centers(self.centers)
        self.alpha = np.asarray(self.alpha, dtype=float).reshape(-1).copy()
        if len(self.alpha) != len(self.centers):
            raise ValueError("alpha and centers must have the same length")
        if self.xi <= 0:
            raise ValueError("xi must be positive")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")
        if not 0.0 <= self.mu0 < 1.0:
            raise ValueError("mu0 must lie in [0, 1)")

    @classmethod
    def empty(cls, q: int, xi: float, eta: float, mu0: float = 0.01) -> "FilterState":
        return cls(np.empty((0, q)), np.empty(0), xi, eta, mu0)

    @property
    def size(self) -> int:
        return len(self.alpha)


@dataclass
class StepOutcome:
    """Per-step record: a-priori prediction, error, and whether the
    dictionary grew this step. ``error = desired - prediction`` exactly."""

    prediction: float
    error: float
    admitted: bool
    pruned: tuple = field(default_factory=tuple)


def coherence_admit(kvec: np.ndarray, mu0: float) -> bool:
    """Admission rule: admit iff max kernel value <= mu0.

    An empty kernel vector (empty dictionary) always admits. The comparison
    is non-strict, so a tie at exactly mu0 admits.
    """
    kvec = np.asarray(kvec, dtype=float)
    if kvec.size == 0:
        return True
    return bool(kvec.max() <= mu0)


def predict(state: FilterState, u) -> float:
    """Filter output alpha^T kappa(u); 0 for an empty dictionary."""
    if state.size == 0:
        return 0.0
    return float(state.alpha @ kernel_vector(u, state.centers, state.xi))


def klms_step(state: FilterState, u, d: float) -> StepOutcome:
    """One CS-KLMS update. Mutates ``state`` in place and returns the outcome.

    The prediction uses the pre-update coefficients. If the coherence rule
    admits ``u``, it is appended with a zero coefficient before the gradient
    step, so the new atom's coefficient becomes eta * error (kappa(u,u) = 1).
    """
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if state.size and u.size != state.centers.shape[1]:
        raise ValueError(
            f"input dimension {u.size} does not match filter dimension "
            f"{state.centers.shape[1]}"
        )
    kvec = kernel_vector(u, state.centers, state.xi)
    prediction = float(state.alpha @ kvec) if kvec.size else 0.0
    error = float(d) - prediction
    admitted = coherence_admit(kvec, state.mu0)
    if admitted:
        if state.size == 0 and state.centers.shape[1] != u.size:
            state.centers = np.empty((0, u.size))
        state.centers = np.vstack([state.centers, u[None, :]])
        state.alpha = np.append(state.alpha, 0.0)
        kvec = np.append(kvec, 1.0)
    state.alpha = state.alpha + state.eta * error * kvec
    return StepOutcome(prediction=prediction, error=error, admitted=admitted)
