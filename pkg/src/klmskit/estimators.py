"""Scikit-learn style wrappers around the online kernel LMS filters.

These run the same per-sample updates as the functional layer (one pass
over the data in order — these are online algorithms, so sample order
matters) and expose the learned dictionary and coefficients as fitted
attributes.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .fobos import RegularizerSpec, fobos_klms_step
from .klms import FilterState, klms_step, predict

__all__ = ["KLMSRegressor", "FOBOSKLMSRegressor"]


class KLMSRegressor(BaseEstimator, RegressorMixin):
    """Gaussian-kernel LMS with coherence-based dictionary growth.

    Parameters: xi (kernel width), eta (step size), mu0 (coherence
    admission threshold). Fitted attributes: centers_ (M, q), alpha_ (M,),
    n_features_in_.
    """

    def __init__(self, xi: float = 1.0, eta: float = 0.1, mu0: float = 0.01):
        self.xi = xi
        self.eta = eta
        self.mu0 = mu0

    def _regularizer(self):
        return None

    def _check_X_y(self, X, y=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"X must be 2-dimensional, got shape {X.shape}")
        if y is None:
            return X
        y = np.asarray(y, dtype=float).ravel()
        if y.shape[0] != X.shape[0]:
            raise ValueError("X and y have inconsistent lengths")
        return X, y

    def _run(self, X, y):
        state = self._state
        reg = self._regularizer()
        if reg is None:
            for u, d in zip(X, y):
                klms_step(state, u, d)
        else:
            for u, d in zip(X, y):
                fobos_klms_step(state, u, d, reg)
        self.centers_ = state.centers
        self.alpha_ = state.alpha
        return self

    def fit(self, X, y):
        """Run one online pass over (X, y) from an empty dictionary."""
        X, y = self._check_X_y(X, y)
        self.n_features_in_ = X.shape[1]
        self._state = FilterState.empty(X.shape[1], self.xi, self.eta, self.mu0)
        return self._run(X, y)

    def partial_fit(self, X, y):
        """Continue the online pass, keeping dictionary and coefficients."""
        if not hasattr(self, "_state"):
            return self.fit(X, y)
        X, y = self._check_X_y(X, y)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but the filter was started "
                f"with {self.n_features_in_}"
            )
        return self._run(X, y)

    def predict(self, X):
        if not hasattr(self, "_state"):
            raise NotFittedError(
                f"This {type(self).__name__} instance is not fitted yet."
            )
        X = self._check_X_y(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"X has {X.shape[1]} features, but the filter was fitted "
                f"with {self.n_features_in_}"
            )
        return np.array([predict(self._state, u) for u in X])


class FOBOSKLMSRegressor(KLMSRegressor):
    """Kernel LMS with an l1 (penalty="l1") or reweighted-l1
    (penalty="adaptive_l1") proximity step after each update; coefficients
    driven to zero have their dictionary atoms removed online."""

    def __init__(
        self,
        xi: float = 1.0,
        eta: float = 0.1,
        mu0: float = 0.01,
        penalty: str = "l1",
        lam: float = 1e-3,
        epsilon_alpha: float = 1e-2,
    ):
        super().__init__(xi=xi, eta=eta, mu0=mu0)
        self.penalty = penalty
        self.lam = lam
        self.epsilon_alpha = epsilon_alpha

    def _regularizer(self):
        return RegularizerSpec(
            kind=self.penalty, lam=self.lam, epsilon_alpha=self.epsilon_alpha
        )
