import numpy as np
import pytest

from klmskit import (
    FilterState,
    coherence_admit,
    gaussian_kernel,
    klms_step,
    learned_dictionary_run,
    predict,
    RegularizerSpec,
)


def test_coherence_admit_rules():
    assert coherence_admit(np.empty(0), 0.01) is True
    assert coherence_admit(np.array([0.005, 0.01]), 0.01) is True  # tie admits
    assert coherence_admit(np.array([0.0100001]), 0.01) is False
    assert coherence_admit(np.array([0.3, 0.001]), 0.01) is False


def test_first_step_admits_and_updates():
    st = FilterState.empty(q=1, xi=0.5, eta=0.1, mu0=0.01)
    out = klms_step(st, [0.7], 2.0)
    assert out.admitted
    assert out.prediction == 0.0
    assert out.error == 2.0
    assert st.size == 1
    assert st.centers[0, 0] == 0.7
    # new atom enters with coefficient 0 and kappa(u,u)=1, so it lands at eta*e
    assert st.alpha[0] == pytest.approx(0.1 * 2.0, rel=1e-15)


def test_no_admit_update_is_plain_lms():
    st = FilterState(centers=[[0.0]], alpha=[0.5], xi=0.5, eta=0.2, mu0=0.01)
    u, d = np.array([0.1]), 1.0
    k = gaussian_kernel(u, [0.0], 0.5)  # ~0.98, far above mu0 -> no admit
    out = klms_step(st, u, d)
    assert not out.admitted
    assert st.size == 1
    assert out.prediction == pytest.approx(0.5 * k, rel=1e-15)
    assert st.alpha[0] == pytest.approx(0.5 + 0.2 * out.error * k, rel=1e-15)


def test_error_is_apriori():
    st = FilterState.empty(q=2, xi=0.8, eta=0.3)
    rng = np.random.default_rng(0)
    for _ in range(50):
        u = rng.normal(size=2)
        d = float(rng.normal())
        pred_before = predict(st, u)
        out = klms_step(st, u, d)
        assert out.prediction == pred_before
        assert out.error == d - pred_before


def test_coherence_invariant_holds_along_a_run():
    st = FilterState.empty(q=1, xi=0.02, eta=0.01, mu0=0.01)
    rng = np.random.default_rng(42)
    for _ in range(800):
        u = rng.normal(0, 0.35, size=1)
        klms_step(st, u, float(u[0] ** 3))
    assert st.size > 1
    C = st.centers
    for i in range(st.size):
        for j in range(i + 1, st.size):
            assert gaussian_kernel(C[i], C[j], st.xi) <= st.mu0 + 1e-15


def test_mu0_zero_freezes_dictionary_after_first():
    st = FilterState.empty(q=1, xi=0.5, eta=0.1, mu0=0.0)
    rng = np.random.default_rng(1)
    for _ in range(100):
        klms_step(st, rng.normal(size=1), 0.3)
    # any Gaussian kernel value is > 0, so nothing after the first admit
    assert st.size == 1


def test_mu0_near_one_admits_almost_everything():
    st = FilterState.empty(q=1, xi=0.5, eta=0.1, mu0=0.999999)
    rng = np.random.default_rng(2)
    n = 60
    for _ in range(n):
        klms_step(st, rng.normal(size=1), 0.3)
    # only near-exact repeats of an existing center are rejected
    assert st.size >= n - 2


def test_functional_loop_matches_compiled_runner():
    # same algorithm implemented twice (pure python vs compiled); admission
    # traces must agree exactly, errors up to summation-order rounding
    rng = np.random.default_rng(7)
    U = rng.normal(0, 0.35, size=(1500, 1))
    d = U[:, 0] ** 3 + rng.normal(0, 0.01, size=1500)
    st = FilterState.empty(q=1, xi=0.02, eta=0.01, mu0=0.01)
    errs = np.empty(1500)
    sizes = np.empty(1500)
    for i in range(1500):
        errs[i] = klms_step(st, U[i], d[i]).error
        sizes[i] = st.size
    err2, size2 = learned_dictionary_run(
        U, d, xi=0.02, eta=0.01, mu0=0.01, reg=RegularizerSpec(kind="none")
    )
    assert np.array_equal(sizes, size2)
    assert np.allclose(errs, err2, rtol=0, atol=1e-12)


def test_determinism():
    def run():
        st = FilterState.empty(q=1, xi=0.1, eta=0.05)
        rng = np.random.default_rng(123)
        for _ in range(300):
            klms_step(st, rng.normal(size=1), float(rng.normal()))
        return st.centers.copy(), st.alpha.copy()

    c1, a1 = run()
    c2, a2 = run()
    assert np.array_equal(c1, c2)
    assert np.array_equal(a1, a2)


def test_dimension_mismatch_raises():
    st = FilterState.empty(q=2, xi=0.5, eta=0.1)
    klms_step(st, [0.1, 0.2], 1.0)
    with pytest.raises(ValueError):
        klms_step(st, [0.1], 1.0)


def test_state_validation():
    with pytest.raises(ValueError):
        FilterState(centers=[[0.0]], alpha=[0.1, 0.2], xi=0.5, eta=0.1)
    with pytest.raises(ValueError):
        FilterState.empty(q=1, xi=0.0, eta=0.1)
    with pytest.raises(ValueError):
        FilterState.empty(q=1, xi=0.5, eta=0.1, mu0=1.0)
