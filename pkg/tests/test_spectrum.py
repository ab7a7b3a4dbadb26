import json
from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kbody_qfi.exceptions import DegenerateSpecError, DomainError
from kbody_qfi.spectrum import (
    HamiltonianSpec,
    build_spectrum,
    couplings_from_string_weights,
    degeneracy,
    omega_term,
    omega_term_exact,
)

from oracles import brute_force_sector_value


@pytest.mark.parametrize(
    "n, k, e, expected",
    [(3, 1, 0, 1.5), (3, 2, 1, -0.5), (3, 2, 0, 1.5), (3, 2, 3, 1.5), (4, 1, 2, 0.0)],
)
def test_omega_term_examples(n, k, e, expected):
    assert omega_term(n, k, e) == pytest.approx(expected, abs=1e-15)


def test_omega_term_matches_brute_force_spin_sums():
    for n in range(2, 9):
        for k in range(1, n + 1):
            for e in range(n + 1):
                assert omega_term(n, k, e) == pytest.approx(brute_force_sector_value(n, k, e), abs=1e-12)


@pytest.mark.parametrize("args", [(3, 0, 0), (3, 4, 0), (3, 1, -1), (3, 1, 4)])
def test_omega_term_domain(args):
    with pytest.raises(DomainError):
        omega_term(*args)


@pytest.mark.parametrize("n, e, expected", [(4, 2, 6), (3, 0, 1), (13, 6, 1716)])
def test_degeneracy(n, e, expected):
    assert degeneracy(n, e) == expected


@given(st.integers(2, 13).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))))
def test_parity_symmetry(nk):
    n, k = nk
    for e in range(n + 1):
        assert omega_term_exact(n, k, n - e) == (-1) ** k * omega_term_exact(n, k, e)


@given(st.integers(2, 16).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, n))))
def test_traceless_exact(nk):
    n, k = nk
    assert sum(comb(n, e) * omega_term_exact(n, k, e) for e in range(n + 1)) == Fraction(0)
    assert abs(sum(comb(n, e) * omega_term(n, k, e) for e in range(n + 1))) < 1e-9


@given(st.integers(2, 16))
def test_one_body_closed_form(n):
    for e in range(n + 1):
        assert omega_term_exact(n, 1, e) == Fraction(n - 2 * e, 2)


def test_build_spectrum_examples():
    s = build_spectrum(HamiltonianSpec(3, {2: 1}))
    np.testing.assert_allclose(s.omegas, [1.5, -0.5, -0.5, 1.5], atol=1e-15)
    s = build_spectrum(HamiltonianSpec(3, {3: 1}))
    np.testing.assert_allclose(s.omegas, [1.5, -1.5, 1.5, -1.5], atol=1e-15)
    s = build_spectrum(HamiltonianSpec(3, {1: 1, 2: 1}))
    assert np.max(np.abs(s.omegas)) == pytest.approx(1.5, abs=1e-12)


@given(
    st.integers(2, 16).flatmap(
        lambda n: st.tuples(
            st.just(n),
            st.dictionaries(st.integers(1, n), st.floats(-3, 3).filter(lambda g: abs(g) > 1e-3), min_size=1),
        )
    ),
    st.booleans(),
)
def test_spectrum_invariants(nc, normalized):
    n, couplings = nc
    try:
        s = build_spectrum(HamiltonianSpec(n, couplings, normalized=normalized))
    except DegenerateSpecError:
        return
    assert len(s.omegas) == len(s.degeneracies) == n + 1
    assert s.degeneracies.sum() == 2**n
    assert abs(np.dot(s.degeneracies, s.omegas)) < 1e-9 * max(1.0, np.abs(s.omegas).max()) * 2**n
    if normalized:
        assert np.max(np.abs(s.omegas)) == pytest.approx(n / 2, abs=1e-12)


def test_normalization_applies_to_total_not_per_order():
    s = build_spectrum(HamiltonianSpec(4, {1: 1, 2: 1}))
    raw = [omega_term(4, 1, e) + omega_term(4, 2, e) for e in range(5)]
    np.testing.assert_allclose(s.omegas, np.array(raw) * 2 / max(map(abs, raw)), atol=1e-14)
    assert s.norm_constant == pytest.approx(0.5)


def test_axis_does_not_change_spectrum():
    z = build_spectrum(HamiltonianSpec(5, {1: 1, 3: 0.4}, axis="z"))
    x = build_spectrum(HamiltonianSpec(5, {1: 1, 3: 0.4}, axis="x"))
    np.testing.assert_array_equal(z.omegas, x.omegas)


def test_spec_validation():
    with pytest.raises(DomainError):
        HamiltonianSpec(1, {1: 1})
    with pytest.raises(DomainError):
        HamiltonianSpec(17, {1: 1})
    with pytest.raises(DomainError):
        HamiltonianSpec(3, {4: 1})
    with pytest.raises(DomainError):
        HamiltonianSpec(3, {1: 1}, axis=(1, 1, 0))
    with pytest.raises(DegenerateSpecError):
        HamiltonianSpec(3, {1: 0.0, 2: 0.0})


def test_json_round_trip():
    spec = HamiltonianSpec(4, {1: 0.5, 3: 2.0}, axis=(0.6, 0.0, 0.8), normalized=False)
    text = spec.to_json()
    data = json.loads(text)
    assert set(data) == {"n", "couplings", "axis", "normalized"}
    assert HamiltonianSpec.from_json(text) == spec


def test_from_dict_rejects_malformed():
    with pytest.raises(DomainError):
        HamiltonianSpec.from_dict({"couplings": {"1": 1}})


def test_string_weights_reproduce_raw_pauli_sum():
    # weights per string: H = sum_{i<j} zz + sum_i z ; all-|0> energy C(N,2) + N
    n = 5
    spec = HamiltonianSpec(n, couplings_from_string_weights(n, {1: 1, 2: 1}), normalized=False)
    s = build_spectrum(spec)
    assert s.omegas[0] == pytest.approx(comb(n, 2) + n)
    assert s.omegas[n] == pytest.approx(comb(n, 2) - n)


def test_diagonal_expansion_order():
    s = build_spectrum(HamiltonianSpec(3, {2: 1}))
    np.testing.assert_allclose(s.diagonal(), [1.5, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, 1.5])
