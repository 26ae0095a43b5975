from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anticoncentration.commutant import enumerate_sigma, qutrit_t_state, subspace_sum
from anticoncentration.harness.stats import chi_square, tv_distance
from anticoncentration.qanalog import clifford_pt_pmf
from anticoncentration.tableau import (
    CircuitArchitecture,
    CliffordGate,
    StabilizerTableau,
    apply_dense,
    apply_gate,
    brickwork_architecture,
    circuit_to_unitary,
    gate_unitary,
    glued_architecture,
    is_symplectic,
    named_gate,
    named_matrix,
    overlap_zero,
    participation_entropy,
    pauli_matrix,
    random_clifford,
    run_architecture,
    staircase_architecture,
    symplectic_form,
)


def ghz(n):
    x = np.zeros((n, n), dtype=np.int64)
    z = np.zeros((n, n), dtype=np.int64)
    x[0] = 1
    for i in range(n - 1):
        z[i + 1, i] = z[i + 1, i + 1] = 1
    return StabilizerTableau(n, 2, np.zeros(n, dtype=np.int64), x, z)


def random_circuit(n, d, rng, n_gates=6):
    gates = []
    for _ in range(n_gates):
        m = int(rng.integers(1, min(n, 3) + 1))
        lo = int(rng.integers(0, n - m + 1))
        gates.append((random_clifford(m, d, rng), tuple(range(lo, lo + m))))
    return gates


def dense_zero_overlap(gates, n, d):
    u = circuit_to_unitary(gates, n, d)
    return abs(u[0, 0]) ** 2


@pytest.mark.parametrize("d", [2, 3, 5])
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 4))
@settings(max_examples=25, deadline=None)
def test_random_clifford_is_symplectic(d, seed, n):
    g = random_clifford(n, d, np.random.default_rng(seed))
    j = symplectic_form(n, d)
    assert np.array_equal((g.symplectic.T @ j @ g.symplectic) % d, j % d)


def test_gate_validation():
    with pytest.raises(ValueError):
        CliffordGate(1, 3, np.array([[1, 1], [1, 1]]), np.zeros(2))
    with pytest.raises(ValueError):
        CliffordGate(1, 3, np.eye(3), np.zeros(3))
    t = StabilizerTableau.zero_state(3, 2)
    with pytest.raises(ValueError):
        apply_gate(t, named_gate("H", 2), (0, 1))
    with pytest.raises(ValueError):
        named_gate("T", 3)


@pytest.mark.parametrize("d,orbit", [(2, 6), (3, 12)])
def test_single_qudit_orbit_is_uniform(d, orbit):
    rng = np.random.default_rng(7)
    n_draws = 1000 * orbit
    seen = Counter()
    for _ in range(n_draws):
        t = apply_gate(StabilizerTableau.zero_state(1, d), random_clifford(1, d, rng), (0,))
        seen[t.canonical()] += 1
    assert len(seen) == orbit
    res = chi_square(np.array(list(seen.values())), np.full(orbit, 1 / orbit))
    assert res.p_value > 1e-3


def test_named_gates():
    h = named_gate("H", 2)
    assert np.allclose(named_matrix("H", 2), np.array([[1, 1], [1, -1]]) / np.sqrt(2))
    t = apply_gate(StabilizerTableau.zero_state(1, 2), h, (0,))
    assert participation_entropy(t) == 1
    # S: X -> XZ up to phase
    phi, a, b = named_gate("S", 2).image(0)
    assert a.tolist() == [1] and b.tolist() == [1]
    # CADD: X1 -> X1 X2
    for d in (2, 3):
        phi, a, b = named_gate("CADD", d).image(0)
        assert a.tolist() == [1, 1] and b.tolist() == [0, 0] and phi == 0
    u = named_matrix("CADD", 3)
    assert np.allclose(u @ u.conj().T, np.eye(9)) and set(np.unique(u.real)) == {0.0, 1.0}


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("name", ["H", "S", "CADD"])
def test_named_gate_unitary_matches_displayed_matrix(d, name):
    g = named_gate(name, d)
    u = gate_unitary(g)
    v = named_matrix(name, d)
    # same up to a global phase
    k = np.unravel_index(np.argmax(np.abs(v)), v.shape)
    assert np.allclose(u * (v[k] / u[k]), v, atol=1e-10)


def test_identity_and_involution():
    rng = np.random.default_rng(3)
    t = run_architecture(brickwork_architecture(4, 3), StabilizerTableau.zero_state(4, 3), rng, 3)
    before = t.canonical()
    apply_gate(t, CliffordGate.identity(2, 3), (1, 2))
    assert t.canonical() == before
    t2 = StabilizerTableau.zero_state(3, 2)
    apply_gate(t2, named_gate("H", 2), (1,))
    apply_gate(t2, named_gate("H", 2), (1,))
    assert t2.canonical() == StabilizerTableau.zero_state(3, 2).canonical()


@pytest.mark.parametrize("d", [2, 3])
@given(seed=st.integers(0, 2**32 - 1))
@settings(max_examples=10, deadline=None)
def test_invariants_after_many_gates(d, seed):
    rng = np.random.default_rng(seed)
    t = StabilizerTableau.zero_state(6, d)
    for gate, sites in random_circuit(6, d, rng, 60):
        apply_gate(t, gate, sites)
    t.check_invariants()


def test_participation_entropy_examples():
    assert participation_entropy(StabilizerTableau.zero_state(5, 3)) == 0
    assert participation_entropy(StabilizerTableau.plus_state(5, 3)) == 5
    assert participation_entropy(ghz(6)) == 1


def test_overlap_examples():
    s = overlap_zero(StabilizerTableau.plus_state(4, 2))
    assert s.g == 4 and s.in_support and s.w == 1
    s = overlap_zero(StabilizerTableau.basis_state([1], 2))
    assert not s.in_support and s.w == 0 and s.probability == 0.0
    for n in range(2, 7):
        s = overlap_zero(ghz(n))
        assert s.g == 1 and s.w == 2 ** (n - 1)


@pytest.mark.parametrize("n,d", [(2, 2), (4, 2), (6, 2), (2, 3), (3, 3), (4, 3)])
def test_overlap_matches_dense_oracle(n, d):
    rng = np.random.default_rng(100 * n + d)
    for _ in range(40):
        gates = random_circuit(n, d, rng)
        t = StabilizerTableau.zero_state(n, d)
        for g, sites in gates:
            apply_gate(t, g, sites)
        s = overlap_zero(t)
        p = dense_zero_overlap(gates, n, d)
        assert round(p * d**n) == s.w
        assert abs(p - s.probability) < 1e-10


@pytest.mark.parametrize("d", [2, 3])
def test_tableau_matches_dense_stabilizers(d):
    # every generator of the evolved tableau stabilizes U|0>
    rng = np.random.default_rng(5)
    n = 3
    for _ in range(10):
        gates = random_circuit(n, d, rng)
        t = StabilizerTableau.zero_state(n, d)
        for g, sites in gates:
            apply_gate(t, g, sites)
        psi = circuit_to_unitary(gates, n, d)[:, 0]
        for j in range(n):
            assert np.allclose(pauli_matrix(t.row(j), d) @ psi, psi, atol=1e-10)


def test_two_qubit_global_gate_distribution():
    rng = np.random.default_rng(11)
    g = [participation_entropy(apply_gate(StabilizerTableau.zero_state(2, 2), random_clifford(2, 2, rng), (0, 1))) for _ in range(8000)]
    emp = np.bincount(g, minlength=3) / len(g)
    assert tv_distance(emp, clifford_pt_pmf(2, 2).as_array()) < 0.03


def test_architectures():
    assert staircase_architecture(4, 1, 2).layers == (((0, 1),), ((1, 2),), ((2, 3),))
    assert staircase_architecture(5, 4, 3).layers == (((0, 1, 2, 3, 4),),)
    with pytest.raises(ValueError):
        staircase_architecture(4, 4, 2)
    bw = brickwork_architecture(6, 2)
    assert bw.layer(0) == ((0, 1), (2, 3), (4, 5)) and bw.layer(1) == ((1, 2), (3, 4)) and bw.layer(2) == bw.layer(0)
    assert glued_architecture(6, 2, 2).layers == (((0, 1, 2, 3),), ((2, 3, 4, 5),))
    with pytest.raises(ValueError):
        CircuitArchitecture(4, 2, (((0, 1), (1, 2)),))
    with pytest.raises(ValueError):
        CircuitArchitecture(4, 2, (((0, 2),),))
    with pytest.raises(ValueError):
        CircuitArchitecture(4, 2, (((3, 4),),))


def test_run_architecture_depth_zero_and_copy():
    t0 = StabilizerTableau.zero_state(4, 2)
    t = run_architecture(brickwork_architecture(4, 2), t0, np.random.default_rng(0), depth=0)
    assert t.canonical() == t0.canonical() and t is not t0
    with pytest.raises(ValueError):
        run_architecture(brickwork_architecture(5, 2), t0, np.random.default_rng(0))


def test_staircase_full_width_is_global():
    rng = np.random.default_rng(2)
    arch = staircase_architecture(4, 3, 2)
    g = [participation_entropy(run_architecture(arch, StabilizerTableau.zero_state(4, 2), rng)) for _ in range(8000)]
    emp = np.bincount(g, minlength=5) / len(g)
    assert tv_distance(emp, clifford_pt_pmf(4, 2).as_array()) < 0.03


def test_magic_is_clifford_invariant():
    basis = enumerate_sigma(3, 3)
    rng = np.random.default_rng(9)
    n = 2
    psi0 = np.kron(qutrit_t_state(), np.eye(3)[0])
    ref = [subspace_sum(psi0, s, n) for s in basis.subspaces]
    for _ in range(20):
        u = gate_unitary(random_clifford(n, 3, rng))
        psi = u @ psi0
        assert np.allclose([subspace_sum(psi, s, n) for s in basis.subspaces], ref, atol=1e-10)


def test_dense_cap():
    with pytest.raises(ValueError):
        circuit_to_unitary([], 13, 2)
