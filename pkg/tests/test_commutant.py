import math
from fractions import Fraction
from itertools import permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anticoncentration.commutant import (
    CommutantBasis,
    enumerate_sigma,
    gram_matrix,
    operator_expectation,
    permutation_operators,
    permutation_subspace,
    purities,
    q_operator_matrix,
    qutrit_t_state,
    satisfies_condition_i,
    span_dimension,
    subspace_sum,
    weingarten_matrix,
)
from anticoncentration.gfd import rank_mod
from anticoncentration.qanalog import gram_row_sum, sigma_size, wg_row_sum
from anticoncentration.tableau import gate_unitary, random_clifford

CASES = [(2, 2), (2, 3), (2, 5), (3, 2), (3, 3), (3, 5), (4, 2)]


@pytest.mark.parametrize("k,d", CASES)
def test_enumeration_sizes_and_conditions(k, d):
    basis = enumerate_sigma(k, d)
    assert basis.size == sigma_size(k, d)
    assert len(set(basis.subspaces)) == basis.size
    ones = tuple([1] * (2 * k))
    for s in basis.subspaces:
        assert rank_mod(s.basis.to_numpy(), d) == k
        assert ones in s.element_set
        assert satisfies_condition_i(s.elements, k, d)
    assert basis.n_permutations == min(math.factorial(k), basis.size)
    assert all(s.is_permutation for s in basis.subspaces[: basis.n_permutations])


def test_known_counts():
    assert enumerate_sigma(3, 3).size == 8
    assert enumerate_sigma(3, 5).size == 12
    b = enumerate_sigma(3, 2)
    assert b.size == 6 and b.n_permutations == 6
    assert enumerate_sigma(4, 2).size == 30


def test_parameter_caps():
    with pytest.raises(ValueError):
        enumerate_sigma(5, 2)
    with pytest.raises(ValueError):
        enumerate_sigma(2, 7)


@pytest.mark.parametrize("k,d", CASES)
def test_element_sets_closed(k, d):
    for s in enumerate_sigma(k, d).subspaces:
        elems = s.element_set
        assert len(elems) == d**k
        e = np.array(sorted(elems))
        rng = np.random.default_rng(0)
        for _ in range(20):
            a, b = e[rng.integers(len(e))], e[rng.integers(len(e))]
            assert tuple(((a + b) % d).tolist()) in elems


def test_permutation_subspaces():
    ident = permutation_subspace((0, 1), 2, 3)
    swap = permutation_subspace((1, 0), 2, 3)
    assert all(x[:2] == x[2:] for x in ident.element_set)
    assert all(x[0] == x[3] and x[1] == x[2] for x in swap.element_set)
    basis = enumerate_sigma(3, 5)
    for p in permutations(range(3)):
        assert permutation_subspace(p, 3, 5) in basis.subspaces
    with pytest.raises(ValueError):
        permutation_subspace((0, 0, 1), 3, 2)


@pytest.mark.parametrize("k,d", CASES)
def test_json_roundtrip(k, d):
    basis = enumerate_sigma(k, d)
    text = basis.to_json()
    back = CommutantBasis.from_json(text)
    assert back.subspaces == basis.subspaces
    assert back.to_json() == text
    assert [s.permutation for s in back.subspaces] == [s.permutation for s in basis.subspaces]


@pytest.mark.parametrize("k,d", CASES)
def test_gram_matrix(k, d):
    basis = enumerate_sigma(k, d)
    for n in range(1, 5):
        g = gram_matrix(basis, n)
        assert all(g[i, i] == d ** (n * k) for i in range(basis.size))
        for row in g:
            assert sum(row) == gram_row_sum(n, k, d)


def test_gram_k2_offdiagonal():
    for d in (2, 3, 5):
        g = gram_matrix(enumerate_sigma(2, d), 1)
        assert g[0, 1] == d


@pytest.mark.parametrize("k,d", CASES)
def test_weingarten(k, d):
    basis = enumerate_sigma(k, d)
    for n in range(1, 5):
        g = gram_matrix(basis, n).astype(float)
        wg = weingarten_matrix(basis, n)
        scale = float(d) ** (n * k)
        assert np.allclose(g @ wg @ g / scale, g / scale, atol=1e-9)
        # moment identity: sum of all Wg entries = |Sigma| / gram_row_sum
        assert math.isclose(wg.sum(), sigma_size(k, d) / float(gram_row_sum(n, k, d)), rel_tol=1e-9)
        if n >= k - 1:
            assert np.allclose(g @ wg, np.eye(basis.size), atol=1e-9)
            assert np.allclose(wg.sum(axis=1), float(wg_row_sum(n, k, d)), rtol=1e-10)


def test_single_site_gram_is_singular_for_qutrits():
    # at n = 1 < k - 1 the eight k = 3 operators span only seven dimensions
    basis = enumerate_sigma(3, 3)
    assert span_dimension([s.operator() for s in basis.subspaces]) == 7


@pytest.mark.parametrize("d", [3, 5])
def test_q_operator_commutes_with_cliffords(d):
    q = q_operator_matrix(d)
    rng = np.random.default_rng(d)
    for _ in range(30):
        u = gate_unitary(random_clifford(1, d, rng))
        c3 = np.kron(np.kron(u, u), u)
        assert np.linalg.norm(q @ c3 - c3 @ q) < 1e-10


@pytest.mark.parametrize("d,dim", [(3, 7), (5, 11)])
def test_q_products_span_commutant(d, dim):
    q = q_operator_matrix(d)
    perms = permutation_operators(d, 3)
    products = perms + [a @ q for a in perms]
    assert span_dimension(products) == dim
    ops = [s.operator() for s in enumerate_sigma(3, d).subspaces]
    assert span_dimension(products + ops) == dim


def test_q_operator_trace():
    d = 3
    q = q_operator_matrix(d)
    # only P = identity has nonzero trace for P (x) P (x) P^{d-2}
    assert np.isclose(np.trace(q), d**3 / d)
    with pytest.raises(ValueError):
        q_operator_matrix(2)


@pytest.mark.parametrize("k,d", [(3, 3), (3, 5), (4, 2)])
def test_purities_of_stabilizer_state(k, d):
    basis = enumerate_sigma(k, d)
    table = purities(np.eye(d)[0], basis)
    assert np.allclose(table.zetas, 1.0)
    assert np.allclose(table.magics, 0.0)


def test_qutrit_t_purities():
    basis = enumerate_sigma(3, 3)
    psi = qutrit_t_state()
    table = purities(psi, basis)
    z = np.array(table.zetas)
    assert np.allclose(z[:6], 1.0)
    assert np.all((z[6:] > 0) & (z[6:] < 1))
    assert np.allclose(z[6:], 2 / 3, atol=1e-12)
    for s, zeta in zip(basis.subspaces, table.zetas):
        assert abs(operator_expectation(s.operator(), psi, 3) - zeta) < 1e-12


@given(st.lists(st.floats(-1, 1, allow_nan=False), min_size=6, max_size=6))
@settings(max_examples=30, deadline=None)
def test_purities_properties(v):
    psi = np.array(v[:3]) + 1j * np.array(v[3:])
    if np.linalg.norm(psi) < 1e-3:
        return
    psi /= np.linalg.norm(psi)
    basis = enumerate_sigma(3, 3)
    z = np.array(purities(psi, basis).zetas)
    assert np.allclose(z[:6], 1.0)
    assert np.all(z > -1e-12) and np.all(z <= 1 + 1e-12)


def test_magic_is_additive_on_products():
    basis = enumerate_sigma(3, 3)
    t = qutrit_t_state()
    zero = np.eye(3)[0]
    psi = np.kron(np.kron(t, t), zero)
    for s in basis.subspaces:
        assert math.isclose(subspace_sum(psi, s, 3), subspace_sum(t, s) ** 2, rel_tol=1e-12)


def test_purity_errors():
    basis = enumerate_sigma(3, 3)
    with pytest.raises(ValueError):
        purities(np.array([1.0, 1.0, 0.0]), basis)
    with pytest.raises(ValueError):
        purities(np.eye(9)[0], basis)
