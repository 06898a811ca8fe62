import numpy as np
import pytest

from klmskit import (
    DictionaryStatistics,
    compute_k_entry,
    compute_rkk,
    k_tensor,
    quadratic_mgf,
)


def test_mgf_scalar_known_value():
    # E{exp(-y^2/2)} for y ~ N(0,1): det(1 + 1)^(-1/2)
    val = quadratic_mgf(np.array([[1.0]]), np.array([[1.0]]), -0.5)
    assert val == pytest.approx(0.7071067811865476, rel=1e-15)


def test_mgf_at_zero_is_one():
    rng = np.random.default_rng(0)
    A = rng.normal(size=(3, 3))
    Q = A + A.T
    B = rng.normal(size=(3, 3))
    Ry = B @ B.T
    assert quadratic_mgf(Q, Ry, 0.0) == 1.0


def test_mgf_diverges_for_large_s():
    with pytest.raises(ValueError):
        quadratic_mgf(np.array([[1.0]]), np.array([[1.0]]), 0.5)
    with pytest.raises(ValueError):
        quadratic_mgf(np.array([[1.0]]), np.array([[1.0]]), 1.0)


def test_mgf_against_sampling():
    # scalar case E{exp(s y^2)}, y ~ N(0, 0.49): closed form (1-2s*0.49)^(-1/2)
    s = -0.8
    rng = np.random.default_rng(4)
    y = rng.normal(0, 0.7, size=400_000)
    mc = np.exp(s * y * y).mean()
    val = quadratic_mgf(np.array([[1.0]]), np.array([[0.49]]), s)
    assert val == pytest.approx((1 - 2 * s * 0.49) ** -0.5, rel=1e-14)
    assert val == pytest.approx(mc, rel=5e-3)


def _stats_q1(sigma_m=0.15, sigma_t=0.35, M=4, L=2):
    return DictionaryStatistics(
        q=1, M=M, L=L,
        R_uu=np.array([[sigma_m**2]]),
        R_uu_tilde=np.array([[sigma_t**2]]),
    )


def test_rkk_diagonal_closed_form():
    # E{kappa(u,c)^2} with u, c iid N(0, sigma^2), q=1: (1 + 4 sigma^2/xi^2)^(-1/2)
    sigma, xi = 0.35, 0.02
    stats = DictionaryStatistics(q=1, M=2, L=2, R_uu=np.array([[sigma**2]]))
    R = compute_rkk(stats, xi)
    assert R[0, 0] == pytest.approx((1 + 4 * sigma**2 / xi**2) ** -0.5, rel=1e-12)
    assert R[1, 1] == R[0, 0]


def test_rkk_block_structure():
    stats = _stats_q1(M=5, L=2)
    R = compute_rkk(stats, 0.1)
    assert np.array_equal(R, R.T)
    # five distinct values: matched/mismatched diag, mm/mt/tt off-diag
    assert R[0, 0] == R[1, 1]
    assert R[2, 2] == R[3, 3] == R[4, 4]
    assert R[0, 1] == R[1, 0]
    assert R[0, 2] == R[0, 3] == R[1, 4]
    assert R[2, 3] == R[3, 4]
    assert len({R[0, 0], R[2, 2], R[0, 1], R[0, 2], R[2, 3]}) == 5


def test_rkk_matched_only_ignores_tilde():
    base = DictionaryStatistics(q=1, M=3, L=3, R_uu=np.array([[0.04]]),
                                R_uu_tilde=np.array([[0.09]]))
    other = DictionaryStatistics(q=1, M=3, L=3, R_uu=np.array([[0.04]]),
                                 R_uu_tilde=np.array([[123.0]]))
    assert np.array_equal(compute_rkk(base, 0.2), compute_rkk(other, 0.2))


def test_wide_kernel_limit():
    stats = _stats_q1()
    R = compute_rkk(stats, 1e6)
    assert np.allclose(R, 1.0, atol=1e-9)
    assert compute_k_entry(stats, 1e6, 0, 1, 2, 3) == pytest.approx(1.0, abs=1e-9)


def _mc_kernel_matrix(stats, xi, n, seed):
    """Draw (u, c_1..c_M) and return the (n, M) kernel value matrix."""
    rng = np.random.default_rng(seed)
    Lm = np.linalg.cholesky(stats.R_uu)
    U = rng.normal(size=(n, stats.q)) @ Lm.T
    kappa = np.empty((n, stats.M))
    for m in range(stats.M):
        Lc = np.linalg.cholesky(stats.element_cov(m))
        C = rng.normal(size=(n, stats.q)) @ Lc.T
        d2 = ((U - C) ** 2).sum(axis=1)
        kappa[:, m] = np.exp(-d2 / (2 * xi * xi))
    return kappa


def test_rkk_against_sampling_q2():
    A = np.array([[0.5, 0.2], [0.1, 0.4]])
    B = np.array([[0.3, -0.1], [0.2, 0.6]])
    stats = DictionaryStatistics(
        q=2, M=4, L=2,
        R_uu=A @ A.T + 0.05 * np.eye(2),
        R_uu_tilde=B @ B.T + 0.05 * np.eye(2),
    )
    xi = 0.6
    n = 400_000
    kappa = _mc_kernel_matrix(stats, xi, n, seed=12)
    R_hat = kappa.T @ kappa / n
    se = np.sqrt((np.square(kappa).T @ np.square(kappa) / n - R_hat**2) / n)
    R = compute_rkk(stats, xi)
    assert np.all(np.abs(R - R_hat) <= 5 * se)


def test_k_entry_against_sampling():
    stats = _stats_q1(M=3, L=1)
    xi = 0.25
    n = 500_000
    kappa = _mc_kernel_matrix(stats, xi, n, seed=3)
    for idx in [(0, 0, 1, 2), (1, 1, 1, 1), (0, 1, 1, 2), (0, 1, 2, 2)]:
        prod = kappa[:, idx[0]] * kappa[:, idx[1]] * kappa[:, idx[2]] * kappa[:, idx[3]]
        mc, se = prod.mean(), prod.std(ddof=1) / np.sqrt(n)
        val = compute_k_entry(stats, xi, *idx)
        assert abs(val - mc) <= 5 * se, f"entry {idx}: {val} vs {mc} +/- {se}"


def test_k_entry_permutation_invariant_bitwise():
    stats = _stats_q1(M=4, L=2)
    xi = 0.1
    rng = np.random.default_rng(8)
    for _ in range(30):
        idx = tuple(rng.integers(0, 4, size=4))
        perm = tuple(rng.permutation(idx))
        assert compute_k_entry(stats, xi, *idx) == compute_k_entry(stats, xi, *perm)


def test_k_tensor_matches_entries_bitwise():
    stats = _stats_q1(M=3, L=1)
    xi = 0.15
    K = k_tensor(stats, xi)
    assert K.shape == (3, 3, 3, 3)
    rng = np.random.default_rng(5)
    for _ in range(40):
        i, j, l, p = rng.integers(0, 3, size=4)
        assert K[i, j, l, p] == compute_k_entry(stats, xi, i, j, l, p)
    # pairwise-swap symmetry used by the recursion matrix
    assert np.array_equal(K, K.transpose(1, 0, 3, 2))
    assert np.array_equal(K, K.transpose(2, 3, 0, 1))


def test_k_tensor_positive_and_bounded():
    stats = _stats_q1(M=3, L=2)
    K = k_tensor(stats, 0.3)
    assert np.all(K > 0)
    assert np.all(K <= 1.0)


def test_stats_validation():
    with pytest.raises(ValueError):
        DictionaryStatistics(q=1, M=2, L=3, R_uu=np.eye(1))
    with pytest.raises(ValueError):
        DictionaryStatistics(q=2, M=2, L=0, R_uu=np.array([[1.0, 0.5], [0.4, 1.0]]))
    with pytest.raises(ValueError):
        DictionaryStatistics(q=2, M=2, L=0, R_uu=np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        DictionaryStatistics(q=1, M=0, L=0, R_uu=np.eye(1))
    with pytest.raises(ValueError):
        DictionaryStatistics(q=2, M=2, L=1, R_uu=np.eye(1))


def test_element_cov_mapping():
    stats = _stats_q1(M=4, L=2)
    assert np.array_equal(stats.element_cov(0), stats.R_uu)
    assert np.array_equal(stats.element_cov(1), stats.R_uu)
    assert np.array_equal(stats.element_cov(2), stats.R_uu_tilde)
    assert np.array_equal(stats.element_cov(3), stats.R_uu_tilde)
    with pytest.raises(ValueError):
        stats.element_cov(4)


def test_defaulted_tilde_copies_matched():
    stats = DictionaryStatistics(q=1, M=2, L=1, R_uu=np.array([[0.25]]))
    assert np.array_equal(stats.R_uu_tilde, stats.R_uu)
