"""Benchmark systems, regime-switching input generation, dictionary
sampling, and the Monte Carlo harness.

Two nonlinear systems are provided. ``example1`` (scalar input) is the
rational recursion y <- y/(1+y^2) + u^3 observed in additive Gaussian
noise; ``example2`` (two-dimensional correlated input) is a linear AR(2)
section followed by a piecewise Wiener nonlinearity. In both cases the
desired sample d(n) is paired with the input vector u(n) that produced it.

Randomness is organized in three named streams per Monte Carlo run —
input, noise, dictionary — derived from SeedSequence((seed, run, stream)),
so runs are independent, reproducible, and insensitive to execution order
(aggregation is a fixed-order reduction).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .fobos import RegularizerSpec

__all__ = [
    "SystemModel",
    "RegimeSchedule",
    "McResult",
    "generate_input",
    "system_response",
    "draw_dictionary",
    "fixed_dictionary_klms_run",
    "learned_dictionary_run",
    "monte_carlo",
]

_STREAM_INPUT = 0
_STREAM_NOISE = 1
_STREAM_DICTIONARY = 2

# dictionary capacity for the learned-dictionary kernel; coherence admission
# saturates far below this for any sane mu0
_DICT_CAP = 4096


@dataclass
class SystemModel:
    """One of the two benchmark systems plus its observation-noise power."""

    kind: str
    noise_variance: float = 0.0

    def __post_init__(self):
        if self.kind not in ("example1", "example2"):
            raise ValueError(f"system kind must be example1 or example2, got {self.kind!r}")
        if self.noise_variance < 0:
            raise ValueError("noise_variance must be nonnegative")

    @property
    def q(self) -> int:
        """Input dimension."""
        return 1 if self.kind == "example1" else 2


@dataclass
class RegimeSchedule:
    """Piecewise-stationary input plan: list of (length, sigma) segments."""

    segments: list = field(default_factory=list)

    def __post_init__(self):
        segs = []
        for item in self.segments:
            length, sigma = item
            length = int(length)
            sigma = float(sigma)
            if length < 1:
                raise ValueError("segment length must be at least 1")
            if sigma <= 0:
                raise ValueError("segment sigma must be positive")
            segs.append((length, sigma))
        if not segs:
            raise ValueError("schedule needs at least one segment")
        self.segments = segs

    @property
    def total_length(self) -> int:
        return sum(length for length, _ in self.segments)

    @property
    def changepoints(self) -> list:
        """Start index of every segment after the first (0-based)."""
        out, pos = [], 0
        for length, _ in self.segments[:-1]:
            pos += length
            out.append(pos)
        return out

    def bounds(self) -> list:
        """(start, stop) index pairs, one per segment."""
        out, pos = [], 0
        for length, _ in self.segments:
            out.append((pos, pos + length))
            pos += length
        return out


@dataclass
class McResult:
    """Averaged Monte Carlo learning curves."""

    mse_db: np.ndarray
    dict_size: np.ndarray
    runs: int
    seed: int


def generate_input(schedule: RegimeSchedule, q: int, seed) -> np.ndarray:
    """Input stream for the schedule, shape (N, q).

    q=1: i.i.d. N(0, sigma^2) per segment. q=2: per segment, u2 and v_u are
    i.i.d. N(0, sigma^2) and u1 = 0.5 u2 + v_u (so cov(u1, u2) = 0.5
    sigma^2). ``seed`` may be an int, a SeedSequence, or a Generator.
    """
    if q not in (1, 2):
        raise ValueError("q must be 1 or 2")
    rng = np.random.default_rng(seed)
    parts = []
    for length, sigma in schedule.segments:
        if q == 1:
            parts.append(rng.normal(0.0, sigma, size=(length, 1)))
        else:
            u2 = rng.normal(0.0, sigma, size=length)
            vu = rng.normal(0.0, sigma, size=length)
            parts.append(np.column_stack((0.5 * u2 + vu, u2)))
    return np.vstack(parts)


@njit(cache=True)
def _resp_ex1(u, z):
    n = u.shape[0]
    d = np.empty(n)
    y = 0.0
    for i in range(n):
        y = y / (1.0 + y * y) + u[i] ** 3
        d[i] = y + z[i]
    return d


@njit(cache=True)
def _resp_ex2(u1, u2, z):
    n = u1.shape[0]
    d = np.empty(n)
    y1 = 0.0
    y2 = 0.0
    for i in range(n):
        y = u1[i] + 0.5 * u2[i] - 0.2 * y1 + 0.35 * y2
        if y >= 0.0:
            f = y / (3.0 * np.sqrt(0.1 + 0.9 * y * y))
        else:
            f = -(y * y) * (1.0 - np.exp(0.7 * y)) / 3.0
        d[i] = f + z[i]
        y2 = y1
        y1 = y
    return d


def system_response(system: SystemModel, u_seq: np.ndarray, seed) -> np.ndarray:
    """Desired signal d(n) for the input stream (zero initial state,
    observation noise drawn from ``seed``). The system state runs
    continuously through the whole stream — regime changes affect only the
    input statistics."""
    U = np.ascontiguousarray(np.asarray(u_seq, dtype=float))
    if U.ndim != 2 or U.shape[1] != system.q:
        raise ValueError(
            f"input dimension mismatch: {system.kind} needs q={system.q}, "
            f"got shape {U.shape}"
        )
    rng = np.random.default_rng(seed)
    z = rng.normal(0.0, np.sqrt(system.noise_variance), size=U.shape[0])
    if system.kind == "example1":
        return _resp_ex1(np.ascontiguousarray(U[:, 0]), z)
    return _resp_ex2(np.ascontiguousarray(U[:, 0]), np.ascontiguousarray(U[:, 1]), z)


def draw_dictionary(M: int, q: int, sigma: float, seed, shape: str = "iid") -> np.ndarray:
    """M dictionary elements, shape (M, q).

    shape="iid": entries i.i.d. N(0, sigma^2). shape="process" (q=2 only):
    elements drawn with the same correlation as the q=2 input process,
    c1 = 0.5 c2 + c_v. ``seed`` may be an int, SeedSequence, or Generator —
    pass one Generator across calls to draw concatenated dictionaries like
    {10@0.15} followed by {10@0.35}.
    """
    if M < 1:
        raise ValueError("M must be at least 1")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    if shape == "iid":
        return rng.normal(0.0, sigma, size=(M, q))
    if shape == "process":
        if q != 2:
            raise ValueError("shape='process' requires q=2")
        c2 = rng.normal(0.0, sigma, size=M)
        cv = rng.normal(0.0, sigma, size=M)
        return np.column_stack((0.5 * c2 + cv, c2))
    raise ValueError(f"shape must be 'iid' or 'process', got {shape!r}")


@njit(cache=True)
def _klms_fixed(U, d, D, eta, xi):
    n, q = U.shape
    M = D.shape[0]
    alpha = np.zeros(M)
    err = np.empty(n)
    kv = np.empty(M)
    g = 1.0 / (2.0 * xi * xi)
    for i in range(n):
        pred = 0.0
        for m in range(M):
            s = 0.0
            for c in range(q):
                t = U[i, c] - D[m, c]
                s += t * t
            kv[m] = np.exp(-s * g)
            pred += alpha[m] * kv[m]
        e = d[i] - pred
        err[i] = e
        for m in range(M):
            alpha[m] += eta * e * kv[m]
    return err


@njit(cache=True)
def _fobos_run(U, d, eta, xi, mu0, lam, eps_a, mode, cap):
    # mode: 0 plain coherence-sparsified KLMS, 1 uniform l1, 2 adaptive l1
    n, q = U.shape
    D = np.empty((cap, q))
    alpha = np.empty(cap)
    ap = np.empty(cap)
    kv = np.empty(cap)
    M = 0
    err = np.empty(n)
    size = np.empty(n)
    g = 1.0 / (2.0 * xi * xi)
    base = lam * eta
    for i in range(n):
        pred = 0.0
        kmax = -1.0
        for m in range(M):
            s = 0.0
            for c in range(q):
                t = U[i, c] - D[m, c]
                s += t * t
            kv[m] = np.exp(-s * g)
            pred += alpha[m] * kv[m]
            if kv[m] > kmax:
                kmax = kv[m]
        e = d[i] - pred
        err[i] = e
        # previous-step coefficients, captured before the gradient step
        for m in range(M):
            ap[m] = alpha[m]
        if ((M == 0) or (kmax <= mu0)) and M < cap:
            for c in range(q):
                D[M, c] = U[i, c]
            alpha[M] = 0.0
            ap[M] = 0.0
            kv[M] = 1.0
            M += 1
        for m in range(M):
            alpha[m] += eta * e * kv[m]
        if mode > 0:
            w = 0
            for m in range(M):
                if mode == 1:
                    thr = base
                else:
                    thr = base / (abs(ap[m]) + eps_a)
                a = alpha[m]
                if a > thr:
                    a -= thr
                elif a < -thr:
                    a += thr
                else:
                    a = 0.0
                if a != 0.0:
                    alpha[w] = a
                    for c in range(q):
                        D[w, c] = D[m, c]
                    w += 1
            M = w
        size[i] = M
    return err, size


def fixed_dictionary_klms_run(
    U: np.ndarray, d: np.ndarray, centers: np.ndarray, xi: float, eta: float
) -> np.ndarray:
    """A-priori error sequence of the LMS update over a frozen dictionary
    (no admissions, no pruning), starting from zero coefficients."""
    U = np.ascontiguousarray(np.asarray(U, dtype=float))
    d = np.ascontiguousarray(np.asarray(d, dtype=float))
    D = np.ascontiguousarray(np.asarray(centers, dtype=float))
    if D.ndim != 2 or D.shape[0] < 1:
        raise ValueError("dictionary must be a nonempty (M, q) array")
    if U.ndim != 2 or U.shape[1] != D.shape[1]:
        raise ValueError("input and dictionary dimensions disagree")
    if d.shape[0] != U.shape[0]:
        raise ValueError("input and desired sequences must have equal length")
    if xi <= 0:
        raise ValueError("xi must be positive")
    return _klms_fixed(U, d, D, float(eta), float(xi))


def learned_dictionary_run(
    U: np.ndarray,
    d: np.ndarray,
    xi: float,
    eta: float,
    mu0: float,
    reg: RegularizerSpec,
):
    """Online run that grows the dictionary by coherence admission and, for
    l1 penalties, prunes zeroed atoms. Returns (error sequence, dictionary
    size sequence)."""
    U = np.ascontiguousarray(np.asarray(U, dtype=float))
    d = np.ascontiguousarray(np.asarray(d, dtype=float))
    if U.ndim != 2:
        raise ValueError("U must be a (N, q) array")
    if d.shape[0] != U.shape[0]:
        raise ValueError("input and desired sequences must have equal length")
    if xi <= 0:
        raise ValueError("xi must be positive")
    mode = {"none": 0, "l1": 1, "adaptive_l1": 2}[reg.kind]
    return _fobos_run(
        U, d, float(eta), float(xi), float(mu0), float(reg.lam),
        float(reg.epsilon_alpha), mode, _DICT_CAP,
    )


def _run_seeds(seed: int, run: int):
    streams = [
        np.random.SeedSequence((seed, run, s))
        for s in (_STREAM_INPUT, _STREAM_NOISE, _STREAM_DICTIONARY)
    ]
    return streams


def _single_run(cfg, run: int):
    """One Monte Carlo realization: (squared a-priori errors, dictionary
    sizes) over the full stream."""
    system = SystemModel(cfg.system, cfg.noise_variance)
    schedule = RegimeSchedule(cfg.segments)
    ss_input, ss_noise, ss_dict = _run_seeds(cfg.mc_seed, run)
    U = generate_input(schedule, system.q, ss_input)
    d = system_response(system, U, ss_noise)
    if cfg.dictionary_mode == "learned":
        err, size = learned_dictionary_run(U, d, cfg.xi, cfg.eta, cfg.mu0, cfg.reg)
        return err * err, size
    # fixed mode: at each regime change the dictionary is replaced and the
    # coefficients restart from zero; the system itself runs on
    rng_dict = np.random.default_rng(ss_dict)
    err = np.empty(schedule.total_length)
    size = np.empty(schedule.total_length)
    for (start, stop), blocks in zip(schedule.bounds(), cfg.dictionary_spec):
        D = np.vstack(
            [
                draw_dictionary(count, system.q, sigma, rng_dict, cfg.dictionary_shape)
                for count, sigma in blocks
            ]
        )
        err[start:stop] = _klms_fixed(U[start:stop], d[start:stop], D, cfg.eta, cfg.xi)
        size[start:stop] = D.shape[0]
    return err * err, size


def monte_carlo(cfg, workers: int = 1) -> McResult:
    """Averaged learning curves over cfg.mc_runs independent realizations.

    Each run draws its own input, noise, and dictionary streams; squared
    a-priori errors are averaged across runs in fixed run order and
    converted to dB. Deterministic given the config and seed, for any
    worker count (runs are aggregated in run order).
    """
    if cfg.mc_runs < 1:
        raise ValueError("mc.runs must be at least 1")
    if workers < 1:
        raise ValueError("workers must be at least 1")
    acc_err = np.zeros(RegimeSchedule(cfg.segments).total_length)
    acc_size = np.zeros_like(acc_err)
    if workers == 1:
        for run in range(cfg.mc_runs):
            sq, size = _single_run(cfg, run)
            acc_err += sq
            acc_size += size
    else:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        with ProcessPoolExecutor(max_workers=workers) as pool:
            for sq, size in pool.map(partial(_single_run, cfg), range(cfg.mc_runs)):
                acc_err += sq
                acc_size += size
    mse = acc_err / cfg.mc_runs
    mse_db = 10.0 * np.log10(np.maximum(mse, 1e-15))
    return McResult(
        mse_db=mse_db,
        dict_size=acc_size / cfg.mc_runs,
        runs=cfg.mc_runs,
        seed=cfg.mc_seed,
    )
