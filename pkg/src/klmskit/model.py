"""Transient and steady-state behavioral model of the fixed-dictionary
kernelized LMS filter.

The filter's weight-error correlation matrix C_v(n) obeys an affine
recursion c(n+1) = G c(n) + eta^2 J_min r in lexicographic (column-stacked)
coordinates, with G built from the second- and fourth-order kernelized
moments. From that recursion come the MSE learning curve
J_ms(n) = J_min + trace(R_kk C_v(n)), its steady state, and the iteration
count at which the trajectory has effectively converged.

Desired-signal moments (E{d^2} and the cross-correlation p_kd) have no
closed form for the benchmark systems; they are estimated from simulated
stationary streams, either against one realized dictionary
(estimate_moments) or averaged over the dictionary distribution
(ensemble_moments, which integrates the kernel against each element's
Gaussian law so only the input stream is sampled).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fobos import stability_bound
from .kernels import as_centers
from .moments import DictionaryStatistics, KernelizedMoments, compute_rkk, k_tensor
from .simulate import RegimeSchedule, SystemModel, generate_input, system_response

__all__ = [
    "TransientModel",
    "ModelCurve",
    "SegmentAnalysis",
    "moment_averages",
    "estimate_moments",
    "ensemble_moments",
    "wiener_and_jmin",
    "kernelized_moments",
    "mean_weight_trajectory",
    "build_g",
    "transient_model",
    "cv_trajectory",
    "steady_state",
    "mse_curve",
    "mse_curve_closed",
    "convergence_iteration",
    "convergence_iteration_closed",
    "segment_analysis",
    "to_db",
]

_UNSTABLE_MSG = "model unstable at this step size"
_BURN_IN = 1000
_DB_FLOOR = 1e-15  # -150 dB output floor


@dataclass
class TransientModel:
    """State of the lexicographic C_v recursion c(n+1) = G c(n) + eta^2 J_min r_kk."""

    G: np.ndarray
    r_kk: np.ndarray
    J_min: float
    eta: float
    c0: np.ndarray
    c_inf: Optional[np.ndarray] = None

    @property
    def M(self) -> int:
        return int(round(np.sqrt(self.r_kk.shape[0])))


@dataclass
class ModelCurve:
    """Per-iteration modeled MSE (linear units), its excess part, and the
    convergence iteration (None when not reached)."""

    J_ms: np.ndarray
    J_ex: np.ndarray
    n_eps: Optional[int]


def to_db(x) -> np.ndarray:
    """10 log10 with a -150 dB floor for zero/negative values."""
    return 10.0 * np.log10(np.maximum(np.asarray(x, dtype=float), _DB_FLOOR))


def moment_averages(U, d, centers, xi: float):
    """Plain sample averages over an explicit stream: (mean of d^2, mean of
    d * k(u)) for the given dictionary."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    U = np.asarray(U, dtype=float)
    d = np.asarray(d, dtype=float)
    D = as_centers(centers)
    if U.ndim != 2 or U.shape[1] != D.shape[1]:
        raise ValueError("stream and dictionary dimensions disagree")
    if d.shape[0] != U.shape[0]:
        raise ValueError("stream and desired sequences must have equal length")
    n = U.shape[0]
    p_acc = np.zeros(D.shape[0])
    g = 1.0 / (2.0 * xi * xi)
    step = 50_000
    for lo in range(0, n, step):
        Uc = U[lo : lo + step]
        sq = ((Uc[:, None, :] - D[None, :, :]) ** 2).sum(axis=2)
        p_acc += np.exp(-g * sq).T @ d[lo : lo + step]
    return float(d @ d) / n, p_acc / n


def estimate_moments(
    system: SystemModel,
    dictionary,
    xi: float,
    sigma: float,
    n_samples: int = 200_000,
    seed: int = 0,
):
    """Sample averages (E{d^2}, p_kd) against one realized dictionary.

    Simulates a fresh stationary stream at input level ``sigma`` (the first
    1000 samples are discarded so the system recursion reaches
    stationarity) and averages d_n^2 and d_n * k(u_n). Deterministic given
    the seed.
    """
    if n_samples < 1_000:
        raise ValueError("n_samples below 1000 is too noisy to be meaningful")
    D = as_centers(dictionary)
    if D.shape[1] != system.q:
        raise ValueError(
            f"dictionary dimension {D.shape[1]} does not match system q={system.q}"
        )
    schedule = RegimeSchedule([(n_samples + _BURN_IN, sigma)])
    U = generate_input(schedule, system.q, np.random.SeedSequence((seed, 0)))
    d = system_response(system, U, np.random.SeedSequence((seed, 1)))
    return moment_averages(U[_BURN_IN:], d[_BURN_IN:], D, xi)


def ensemble_moments(
    system: SystemModel,
    sigma: float,
    stats: DictionaryStatistics,
    xi: float,
    n_samples: int = 5_000_000,
    seed: int = 0,
):
    """(E{d^2}, p_kd) averaged over the dictionary distribution.

    The expectation over each Gaussian dictionary element is carried out in
    closed form — E_c{kappa(u, c)} = det(I + C/xi^2)^(-1/2)
    exp(-u^T (xi^2 I + C)^(-1) u / 2) — so only the input/noise stream is
    sampled. Every element with the same covariance class shares one value,
    giving a length-M vector with at most two distinct entries.
    """
    if n_samples < 1_000:
        raise ValueError("n_samples below 1000 is too noisy to be meaningful")
    if xi <= 0:
        raise ValueError("xi must be positive")
    if stats.q != system.q:
        raise ValueError(f"stats q={stats.q} does not match system q={system.q}")
    schedule = RegimeSchedule([(n_samples + _BURN_IN, sigma)])
    U = generate_input(schedule, system.q, np.random.SeedSequence((seed, 0)))
    d = system_response(system, U, np.random.SeedSequence((seed, 1)))
    U, d = U[_BURN_IN:], d[_BURN_IN:]
    d2 = float(d @ d) / n_samples
    p = np.empty(stats.M)
    eye = np.eye(stats.q)
    classes = []
    if stats.L > 0:
        classes.append((slice(0, stats.L), stats.R_uu))
    if stats.L < stats.M:
        classes.append((slice(stats.L, stats.M), stats.R_uu_tilde))
    for rows, C in classes:
        A = np.linalg.inv(xi * xi * eye + C)
        detf = float(np.linalg.det(eye + C / (xi * xi)) ** -0.5)
        quad = ((U @ A) * U).sum(axis=1)
        w = detf * np.exp(-0.5 * quad)
        p[rows] = float(d @ w) / n_samples
    return d2, p


def wiener_and_jmin(Rkk: np.ndarray, p_kd: np.ndarray, d2: float):
    """Optimum coefficients and minimum MSE: alpha_opt = Rkk^{-1} p_kd via a
    Cholesky (symmetric positive-definite) solve, J_min = d2 - p_kd^T alpha_opt."""
    R = np.asarray(Rkk, dtype=float)
    p = np.asarray(p_kd, dtype=float)
    try:
        chol = np.linalg.cholesky(R)
    except np.linalg.LinAlgError:
        raise ValueError("Rkk must be positive definite") from None
    alpha = np.linalg.solve(chol.T, np.linalg.solve(chol, p))
    return alpha, float(d2 - p @ alpha)


def kernelized_moments(Rkk: np.ndarray, p_kd: np.ndarray, d2: float) -> KernelizedMoments:
    """Bundle the moment set with its induced optimum."""
    alpha, jmin = wiener_and_jmin(Rkk, p_kd, d2)
    return KernelizedMoments(Rkk=np.asarray(Rkk, float), p_kd=np.asarray(p_kd, float),
                             d2=float(d2), J_min=jmin, alpha_opt=alpha)


def mean_weight_trajectory(Rkk: np.ndarray, eta: float, v0, N: int) -> np.ndarray:
    """First N iterates of the mean weight-error recursion
    E{v_{n+1}} = (I - eta Rkk) E{v_n}, rows v_0 .. v_{N-1}."""
    R = np.asarray(Rkk, dtype=float)
    v = np.asarray(v0, dtype=float).copy()
    A = np.eye(R.shape[0]) - eta * R
    out = np.empty((N, v.shape[0]))
    for n in range(N):
        out[n] = v
        v = A @ v
    return out


def build_g(Rkk: np.ndarray, k_tens: np.ndarray, eta: float) -> np.ndarray:
    """The recursion matrix G = I - eta (I (x) R + R (x) I) + eta^2 G3,
    where G3 reindexes the fourth-order tensor lexicographically:
    G3[i + j M, l + p M] = K[i, j, l, p] (0-based). Symmetric."""
    R = np.asarray(Rkk, dtype=float)
    M = R.shape[0]
    K = np.asarray(k_tens, dtype=float)
    if K.shape != (M, M, M, M):
        raise ValueError("k_tensor shape does not match Rkk")
    eye = np.eye(M)
    G3 = K.transpose(1, 0, 3, 2).reshape(M * M, M * M)
    return np.eye(M * M) - eta * (np.kron(eye, R) + np.kron(R, eye)) + eta * eta * G3


def transient_model(
    Rkk: np.ndarray, k_tens: np.ndarray, eta: float, J_min: float, alpha_opt
) -> TransientModel:
    """Assemble the recursion state for a filter started at zero
    coefficients: v_0 = -alpha_opt, so C_v(0) = alpha_opt alpha_opt^T."""
    alpha = np.asarray(alpha_opt, dtype=float)
    return TransientModel(
        G=build_g(Rkk, k_tens, eta),
        r_kk=np.asarray(Rkk, dtype=float).flatten("F"),
        J_min=float(J_min),
        eta=float(eta),
        c0=np.outer(alpha, alpha).flatten("F"),
    )


def cv_trajectory(model: TransientModel, N: int) -> np.ndarray:
    """Iterates c(0) .. c(N) of the affine recursion (N+1 rows)."""
    drive = model.eta * model.eta * model.J_min * model.r_kk
    out = np.empty((N + 1, model.c0.shape[0]))
    c = model.c0.copy()
    for n in range(N):
        out[n] = c
        c = model.G @ c + drive
    out[N] = c
    return out


def _spectral_radius(G: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvalsh(G)).max())


def steady_state(model: TransientModel):
    """Fixed point of the recursion: c_inf = eta^2 J_min (I - G)^{-1} r_kk,
    the steady-state EMSE J_ex_inf = trace(R_kk C_v(inf)) = r_kk . c_inf,
    and J_ms_inf = J_min + J_ex_inf. Caches c_inf on the model.

    Raises ValueError when the spectral radius of G is >= 1 (no steady
    state at this step size).
    """
    if _spectral_radius(model.G) >= 1.0 - 1e-9:
        raise ValueError(_UNSTABLE_MSG)
    n2 = model.G.shape[0]
    c_inf = np.linalg.solve(
        np.eye(n2) - model.G, model.eta * model.eta * model.J_min * model.r_kk
    )
    model.c_inf = c_inf
    j_ex = float(model.r_kk @ c_inf)
    return c_inf, model.J_min + j_ex, j_ex


def mse_curve(model: TransientModel, cv_seq: np.ndarray, Rkk: np.ndarray) -> ModelCurve:
    """Learning curve along an explicit C_v trajectory:
    J_ms(n) = J_min + trace(R_kk C_v(n)), J_ex = J_ms - J_min, plus the
    default-tolerance convergence iteration (None when there is no steady
    state or it is not reached within the trajectory)."""
    r = np.asarray(Rkk, dtype=float).flatten("F")
    j_ex = np.asarray(cv_seq, dtype=float) @ r
    j_ms = model.J_min + j_ex
    n_eps = None
    try:
        c_inf = model.c_inf if model.c_inf is not None else steady_state(model)[0]
    except ValueError:
        c_inf = None
    if c_inf is not None:
        n_eps = convergence_iteration(cv_seq, c_inf)
    return ModelCurve(J_ms=j_ms, J_ex=j_ex, n_eps=n_eps)


def convergence_iteration(cv_seq, c_inf, tol: float = 1e-3):
    """Smallest n with ||c_inf - c(n)||_2 <= tol over the given iterates;
    None when the bound is never met."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    dist = np.linalg.norm(np.asarray(cv_seq, float) - np.asarray(c_inf, float), axis=1)
    hits = np.flatnonzero(dist <= tol)
    return int(hits[0]) if hits.size else None


def _modes(model: TransientModel):
    """Eigen-decomposition of the closed-form solution
    c(n) = c_inf + V (lam^n * b), b = V^T (c0 - c_inf)."""
    if model.c_inf is None:
        steady_state(model)
    lam, V = np.linalg.eigh(model.G)
    b = V.T @ (model.c0 - model.c_inf)
    return lam, V, b


def convergence_iteration_closed(
    model: TransientModel, tol: float = None, rtol: float = 1e-3, n_max: int = 10**8
):
    """Convergence iteration from the closed-form solution (no trajectory
    storage): smallest n with ||c_inf - c(n)||_2 <= tol, located by binary
    search on the monotone mode-energy decay. With tol=None the threshold
    is rtol * ||c_inf||_2. Returns None when not reached by n_max."""
    lam, _, b = _modes(model)
    if tol is None:
        tol = rtol * float(np.linalg.norm(model.c_inf))
    if tol <= 0:
        raise ValueError("tol must be positive")
    loglam = np.log(np.maximum(np.abs(lam), 1e-300))
    b2 = b * b

    def dist2(n):
        return float(b2 @ np.exp((2.0 * n) * loglam))

    t2 = tol * tol
    if dist2(0) <= t2:
        return 0
    hi = 1
    while dist2(hi) > t2:
        hi *= 2
        if hi > n_max:
            return None
    lo = hi // 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if dist2(mid) <= t2:
            hi = mid
        else:
            lo = mid
    return hi


def mse_curve_closed(model: TransientModel, N: int) -> np.ndarray:
    """J_ms(n) for n = 0 .. N (linear units) from the closed-form solution,
    computed in chunks without storing the C_v trajectory."""
    lam, V, b = _modes(model)
    w = (V.T @ model.r_kk) * b
    j_floor = model.J_min + float(model.r_kk @ model.c_inf)
    signs = np.sign(lam)
    loglam = np.log(np.maximum(np.abs(lam), 1e-300))
    neg = signs < 0
    out = np.empty(N + 1)
    step = 2000
    for lo in range(0, N + 1, step):
        n = np.arange(lo, min(lo + step, N + 1))
        mag = np.exp(np.outer(n, loglam))
        if neg.any():
            mag[:, neg] *= np.where(n % 2 == 0, 1.0, -1.0)[:, None]
        out[lo : lo + n.size] = j_floor + mag @ w
    return out


@dataclass
class SegmentAnalysis:
    """Model outputs for one stationary segment: optimum, steady state,
    within-segment convergence iteration, step-size bound, and the modeled
    learning curve in dB (one value per iteration of the segment)."""

    J_min: float
    eta_max: float
    unstable: bool
    J_ms_inf: Optional[float] = None
    J_ex_inf: Optional[float] = None
    n_eps: Optional[int] = None
    curve_db: Optional[np.ndarray] = None


def segment_analysis(
    stats: DictionaryStatistics,
    xi: float,
    eta: float,
    d2: float,
    p_kd: np.ndarray,
    n_iters: int,
    rtol: float = 1e-3,
) -> SegmentAnalysis:
    """Full model pipeline for one segment: moments -> optimum -> recursion
    -> curve/steady state/convergence iteration.

    The convergence iteration uses a threshold relative to the steady-state
    correlation, rtol * ||c_inf||_2, and is counted from the segment start.
    When the recursion is unstable at this step size only J_min and eta_max
    are reported.
    """
    Rkk = compute_rkk(stats, xi)
    K = k_tensor(stats, xi)
    alpha_opt, j_min = wiener_and_jmin(Rkk, p_kd, d2)
    bound = stability_bound(Rkk)
    model = transient_model(Rkk, K, eta, j_min, alpha_opt)
    try:
        _, j_ms_inf, j_ex_inf = steady_state(model)
    except ValueError:
        return SegmentAnalysis(J_min=j_min, eta_max=bound.eta_max, unstable=True)
    return SegmentAnalysis(
        J_min=j_min,
        eta_max=bound.eta_max,
        unstable=False,
        J_ms_inf=j_ms_inf,
        J_ex_inf=j_ex_inf,
        n_eps=convergence_iteration_closed(model, rtol=rtol),
        curve_db=to_db(mse_curve_closed(model, n_iters - 1)),
    )
