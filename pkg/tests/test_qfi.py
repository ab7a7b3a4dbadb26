from math import sqrt

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import unitary_group

from kbody_qfi.exceptions import DomainError
from kbody_qfi.oracle import build_dense, kron_all
from kbody_qfi.product_opt import ProductStateParams
from kbody_qfi.qfi import (
    QfiMethod,
    qfi_mixed,
    qfi_pure,
    two_copy_variance,
    two_copy_variance_dense,
    variance,
    variance_batch,
)
from kbody_qfi.spectrum import HamiltonianSpec, build_spectrum


def random_state(rng, dim):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return psi / np.linalg.norm(psi)


def random_density(rng, dim, rank=None):
    rank = rank or dim
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


H3_K2 = build_dense(HamiltonianSpec(3, {2: 1}))
H3_K3 = build_dense(HamiltonianSpec(3, {3: 1}))
PLUS_LAST = np.kron(np.kron([1, 0], [1, 0]), np.array([1, 1]) / sqrt(2))


def test_variance_of_eigenstate_is_zero():
    psi = np.zeros(8)
    psi[3] = 1.0
    assert variance(psi, H3_K2) == 0.0
    assert qfi_pure(psi, H3_K3).value == 0.0


def test_variance_motivating_examples():
    assert variance(PLUS_LAST, H3_K3) == pytest.approx(9 / 4, abs=1e-12)
    assert qfi_pure(PLUS_LAST, H3_K3).value == pytest.approx(9.0, abs=1e-12)
    p = (3 + sqrt(3)) / 6
    psi = ProductStateParams.symmetric(3, p).state_vector()
    assert variance(psi, H3_K2) == pytest.approx(1.0, abs=1e-12)
    result = qfi_pure(psi, H3_K2)
    assert result.value == pytest.approx(4.0, abs=1e-12)
    assert result.method is QfiMethod.PURE_VARIANCE


def test_variance_accepts_spectrum_and_matrix():
    psi = ProductStateParams([0.2, 0.9, 0.5]).state_vector([0.3, 1.0, 2.0])
    spec = HamiltonianSpec(3, {1: 1, 2: 0.5})
    a = variance(psi, build_spectrum(spec))
    b = variance(psi, build_dense(spec))
    c = variance(psi, build_dense(spec).toarray())
    assert a == pytest.approx(b, abs=1e-14) and b == pytest.approx(c, abs=1e-14)


def test_dimension_mismatch():
    with pytest.raises(DomainError):
        variance(np.ones(4) / 2, H3_K2)
    with pytest.raises(DomainError):
        two_copy_variance(np.eye(4) / 4, H3_K2)


def test_unnormalized_state_rejected():
    with pytest.raises(DomainError):
        variance(np.ones(8), H3_K2)


def test_mixed_qfi_maximally_mixed_is_zero():
    assert qfi_mixed(np.eye(8) / 8, H3_K2).value == 0.0


def test_mixed_qfi_rank_one_equals_pure(rng):
    for n in (2, 3, 4):
        a = build_dense(HamiltonianSpec(n, {1: 1, 2: 0.5}, axis="x")).toarray()
        psi = random_state(rng, 2**n)
        rho = np.outer(psi, psi.conj())
        assert qfi_mixed(rho, a).value == pytest.approx(qfi_pure(psi, a).value, abs=1e-9)


def test_mixed_qfi_single_qubit_hand_sum():
    plus = np.array([1, 1]) / sqrt(2)
    minus = np.array([1, -1]) / sqrt(2)
    lam = {0: 0.7, 1: 0.3}
    vec = {0: plus, 1: minus}
    rho = lam[0] * np.outer(plus, plus) + lam[1] * np.outer(minus, minus)
    a = np.diag([0.5, -0.5])
    expected = 0.0
    for k in (0, 1):
        for l in (0, 1):
            if lam[k] + lam[l] > 0:
                expected += 2 * (lam[k] - lam[l]) ** 2 / (lam[k] + lam[l]) * abs(vec[k] @ a @ vec[l]) ** 2
    assert expected == pytest.approx(0.16)
    result = qfi_mixed(rho, a)
    assert result.value == pytest.approx(expected, abs=1e-12)
    assert result.method is QfiMethod.MIXED_EIGEN


def test_mixed_qfi_rejects_non_psd():
    rho = np.diag([1.2, -0.2])
    with pytest.raises(DomainError):
        qfi_mixed(rho, np.diag([1.0, -1.0]))


def test_convexity_bound(rng):
    for n in (2, 3, 4):
        a = build_dense(HamiltonianSpec(n, {1: 1, 3 if n >= 3 else 2: 0.7}, axis=(0.6, 0, 0.8))).toarray()
        for rank in (1, 2, 2**n):
            rho = random_density(rng, 2**n, rank)
            assert qfi_mixed(rho, a).value <= 4 * two_copy_variance(rho, a) + 1e-9


def local_unitary(rng, n):
    return kron_all([unitary_group.rvs(2, random_state=rng) for _ in range(n)])


def test_unitary_covariance(rng):
    for n in (2, 3):
        a = build_dense(HamiltonianSpec(n, {1: 0.3, 2: 1})).toarray()
        rho = random_density(rng, 2**n, 3)
        u = local_unitary(rng, n)
        lhs = qfi_mixed(u @ rho @ u.conj().T, a).value
        rhs = qfi_mixed(rho, u.conj().T @ a @ u).value
        assert lhs == pytest.approx(rhs, abs=1e-9)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_cap_on_random_pure_states(rng, n):
    for k in range(1, n + 1):
        a = build_dense(HamiltonianSpec(n, {k: 1}, axis="x"))
        for _ in range(20):
            assert qfi_pure(random_state(rng, 2**n), a).value <= n**2 + 1e-9


def test_two_copy_examples(rng):
    psi = random_state(rng, 8)
    rho = np.outer(psi, psi.conj())
    a = build_dense(HamiltonianSpec(3, {1: 1, 2: 1}, axis="x")).toarray()
    assert two_copy_variance(rho, a) == pytest.approx(variance(psi, a), abs=1e-10)
    h = build_dense(HamiltonianSpec(2, {1: 1})).toarray()
    assert two_copy_variance(np.eye(4) / 4, h) == pytest.approx(0.5, abs=1e-14)
    proj = np.zeros((8, 8))
    proj[0, 0] = 1.0
    assert two_copy_variance(proj, H3_K2.toarray()) == pytest.approx(0.0, abs=1e-14)


def test_two_copy_identity_matches_materialized_product(rng):
    for n in (1, 2, 3):
        rho = random_density(rng, 2**n, 2)
        a = build_dense(HamiltonianSpec(max(n, 2), {1: 1}, axis="y")).toarray()[: 2**n, : 2**n]
        a = (a + a.conj().T) / 2
        assert two_copy_variance(rho, a) == pytest.approx(two_copy_variance_dense(rho, a), abs=1e-12)


@given(
    st.lists(st.floats(0, 1), min_size=3, max_size=3),
    st.lists(st.floats(0, 2 * np.pi), min_size=3, max_size=3),
)
def test_diagonal_variance_ignores_phases(probs, phases):
    params = ProductStateParams(probs)
    a = build_dense(HamiltonianSpec(3, {1: 1, 2: 1, 3: 0.5}))
    assert variance(params.state_vector(phases), a) == pytest.approx(variance(params.state_vector(), a), abs=1e-10)


def test_variance_batch_matches_single(rng):
    a = build_dense(HamiltonianSpec(3, {1: 1, 3: 1}, axis="x")).toarray()
    psis = np.array([random_state(rng, 8) for _ in range(6)])
    expected = [variance(p, a) for p in psis]
    np.testing.assert_allclose(variance_batch(psis, a), expected, atol=1e-12)
    np.testing.assert_allclose(variance_batch(psis, np.repeat(a[None], 6, axis=0)), expected, atol=1e-12)
