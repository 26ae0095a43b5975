import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from anticoncentration import qanalog as qa
from anticoncentration.qanalog import LogValue

moduli = st.sampled_from([2, 3, 5])


def test_q_pochhammer_examples():
    assert qa.q_pochhammer(-1, 2, 3) == 30
    assert qa.q_pochhammer(-1, 3, 2) == 8
    assert qa.q_pochhammer(Fraction(7, 3), Fraction(-2, 5), 0) == 1
    with pytest.raises(ValueError):
        qa.q_pochhammer(1, 2, -1)


@given(st.fractions(-3, 3, max_denominator=7), st.fractions(-1, 1, max_denominator=7), st.integers(0, 8))
def test_q_pochhammer_recursion(a, xi, n):
    assert qa.q_pochhammer(a, xi, n + 1) == qa.q_pochhammer(a, xi, n) * (1 - a * xi**n)


def test_log_q_pochhammer_matches_exact():
    for d, n in [(2, 5), (3, 4), (5, 3)]:
        exact = qa.q_pochhammer(-Fraction(1, d**2), d, n)
        assert math.isclose(qa.log_q_pochhammer(-(d**-2), d, n), math.log(exact), rel_tol=1e-13)


def test_q_pochhammer_infinite():
    q = 0.5
    assert math.isclose(qa.q_pochhammer_infinite(-q, q), float(qa.q_pochhammer(-Fraction(1, 2), Fraction(1, 2), 80)), rel_tol=1e-15)
    with pytest.raises(ValueError):
        qa.q_pochhammer_infinite(0.1, 1.0)


def test_q_binomial_examples():
    assert qa.q_binomial(7, 0, 3) == 1
    assert qa.q_binomial(2, 1, 2) == 3
    assert qa.q_binomial(4, 2, 3) == 130


@given(st.integers(1, 12), st.integers(0, 12), moduli)
def test_q_binomial_pascal(N, g, d):
    g = min(g, N)
    if 0 < g < N:
        assert qa.q_binomial(N, g, d) == qa.q_binomial(N - 1, g - 1, d) + d**g * qa.q_binomial(N - 1, g, d)
    assert qa.q_binomial(N, g, d) == qa.q_binomial(N, N - g, d)


def test_sigma_size():
    assert qa.sigma_size(3, 3) == 8
    assert qa.sigma_size(3, 5) == 12
    assert qa.sigma_size(3, 2) == 6
    assert qa.sigma_size(4, 2) == 30
    for d in (2, 3, 5):
        assert qa.sigma_size(2, d) == 2


def test_gram_and_weingarten_row_sums():
    assert qa.gram_row_sum(1, 2, 2) == 6
    assert qa.gram_row_sum(2, 3, 3) == 1080
    assert qa.wg_row_sum(1, 2, 2) == Fraction(1, 6)
    assert qa.wg_row_sum(2, 3, 3) == Fraction(1, 1080)
    for d in (2, 3, 5):
        for n in range(4):
            assert qa.gram_row_sum(n, 1, d) == d**n
            assert qa.wg_row_sum(n, 1, d) == Fraction(1, d**n)
            for k in (2, 3, 4):
                assert qa.gram_row_sum(n, k, d) * qa.wg_row_sum(n, k, d) == 1
                assert math.isclose(
                    qa.log_gram_row_sum(n, k, d), math.log(qa.gram_row_sum(n, k, d), d), rel_tol=1e-13
                )


def test_stabilizer_counts():
    assert qa.aleph(0, 1, 2) == 2
    assert qa.aleph(1, 1, 2) == 4
    assert qa.stab_count(1, 2) == 6
    assert qa.stab_count(2, 2) == 60
    assert qa.stab_count(1, 3) == 12
    for d in (2, 3, 5):
        for N in range(1, 9):
            assert sum(qa.aleph(g, N, d) for g in range(N + 1)) == d**N * qa.q_pochhammer(-d, d, N)


def test_clifford_pt_single_qubit():
    pmf = qa.clifford_pt_pmf(1, 2)
    assert pmf.probs == (Fraction(1, 3), Fraction(2, 3))
    assert pmf.exact and pmf.label == "g"
    n = pmf.to_n(1)
    assert n.label == "n" and n.probs == (Fraction(2, 3), Fraction(1, 3))


@pytest.mark.parametrize("d", [2, 3, 5])
def test_clifford_pt_normalized_exactly(d):
    for N in (1, 2, 7, 32, 128):
        assert qa.clifford_pt_pmf(N, d).total() == 1


@pytest.mark.parametrize("d", [2, 3, 5])
@pytest.mark.parametrize("k", [1, 2, 3, 4])
def test_moment_consistency(d, k):
    for N in (1, 3, 8):
        pmf = qa.clifford_pt_pmf(N, d)
        lhs = sum(Fraction(d) ** ((1 - k) * g) * p for g, p in zip(pmf.support, pmf.probs))
        rhs = qa.q_pochhammer(-Fraction(d) ** (2 - k), d, N) / qa.q_pochhammer(-d, d, N)
        assert lhs == rhs
        assert lhs == qa.ipr_haar_clifford(k, N, d)


def test_pt_infinity():
    lim = qa.pt_infinity_pmf(2, n_max=64)
    assert abs(sum(lim.probs) - 1) < 1e-12
    finite = qa.clifford_pt_pmf(64, 2).to_n(64).as_array(65)
    assert np.max(np.abs(finite - lim.as_array(65))) < 1e-10
    with pytest.raises(ValueError):
        qa.pt_infinity_pmf(2, n_max=3)


def test_ipr_haar_clifford_examples():
    assert qa.ipr_haar_clifford(2, 1, 2) == Fraction(2, 3)
    for N in range(1, 10):
        assert qa.ipr_haar_clifford(2, N, 2) == Fraction(2, 2**N + 1)
        assert qa.ipr_haar_clifford(3, N, 2) == Fraction(6, (2**N + 1) * (2**N + 2))
    with pytest.raises(ValueError):
        qa.ipr_haar_clifford(0, 3, 2)


def test_single_qubit_ipr_by_enumeration():
    # six states: |0>, |1> have I_2 = 1; the four others have I_2 = 1/2
    assert Fraction(2 * 1 + 4 * Fraction(1, 2), 6) == qa.ipr_haar_clifford(2, 1, 2)


@given(st.integers(1, 4), st.integers(1, 60), moduli)
def test_log_ipr_haar_clifford(k, N, d):
    exact = qa.ipr_haar_clifford(k, N, d)
    assert math.isclose(qa.log_ipr_haar_clifford(k, N, d).log_d, LogValue.from_exact(exact, d).log_d, rel_tol=1e-12, abs_tol=1e-12)


def test_log_ipr_no_overflow():
    v = qa.log_ipr_haar_clifford(3, 10**6, 2)
    assert math.isclose(v.log_d, -2 * 10**6 + math.log2(6), rel_tol=1e-12)
    assert v.value() == 0.0  # underflows as a float, not as a LogValue


def test_logvalue_arithmetic():
    a = LogValue.from_exact(Fraction(3, 4), 2)
    b = LogValue.from_exact(Fraction(1, 8), 2)
    assert math.isclose((a + b).value(), 7 / 8)
    assert math.isclose((a * b).value(), 3 / 32)
    assert math.isclose((a / b).value(), 6)
    with pytest.raises(ValueError):
        LogValue.from_exact(0, 2)
    with pytest.raises(ValueError):
        a + LogValue(0.0, 3)
    huge = LogValue.from_exact(Fraction(1, 3**5000), 3)
    assert math.isclose(huge.log_d, -5000)


def test_annealed_entropy():
    s2, _ = qa.participation_entropy_annealed(2, 30, 2)
    assert math.isclose(s2, 30 - 1, abs_tol=1e-8)  # N - log_2 2
    s3, c3 = qa.participation_entropy_annealed(3, 10, 2)
    assert math.isclose(s3, -0.5 * math.log2(qa.ipr_haar_clifford(3, 10, 2)), rel_tol=1e-14)
    assert math.isclose(qa.annealed_constant(40, 2) / (-20), 1, rel_tol=0.05)
    with pytest.raises(ValueError):
        qa.participation_entropy_annealed(1, 5, 2)


def test_quenched_constant():
    c = qa.participation_entropy_quenched_constant(2)
    assert math.isclose(c, -0.7645, abs_tol=1e-4)
    assert abs(float(qa.mean_participation_entropy(40, 2)) - 40 - c) < 1e-6
    big = qa.participation_entropy_quenched_constant(13)
    assert math.isclose(big, -1 / 14, rel_tol=0.1)
    with pytest.raises(ValueError):
        qa.participation_entropy_quenched_constant(2, tol=0)


def test_ipr_crmps():
    for k, N, d in product((2, 3), (3, 6), (2, 3)):
        assert qa.ipr_crmps(k, N, N - 1, d) == qa.ipr_haar_clifford(k, N, d)
        assert qa.ipr_crmps(1, N, 1, d) == 1
    v = qa.ipr_crmps(2, 64, 4, 2)
    assert isinstance(v, Fraction) and 0 < v < 1
    with pytest.raises(ValueError):
        qa.ipr_crmps(2, 5, 5, 2)


@pytest.mark.parametrize("k,d", [(2, 2), (3, 2), (3, 3), (4, 5)])
def test_ipr_crmps_monotone_in_r(k, d):
    vals = [qa.ipr_crmps(k, 12, r, d) for r in range(12)]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_crmps_scaling_x():
    x0, _ = qa.crmps_scaling_x(256, 8, 2)
    assert x0 == 1
    x0, x = qa.crmps_scaling_x(10**6, round(math.log2(10**6)) - 1, 2)
    assert abs(x / x0 - 1) < 1e-4
    x0, x = qa.crmps_scaling_x(512, 6, 2, "glued")
    assert math.isclose(x0, 8 / 3)
    assert math.isclose(x, 8 / 3 * (1 - 12 / 512))
    with pytest.raises(ValueError):
        qa.crmps_scaling_x(16, 2, 2, "ring")


def test_crmps_x_from_ipr_inverts_k2_moment():
    x = qa.crmps_x_from_ipr(64, 4, 2)
    lhs = float(qa.ipr_crmps(2, 64, 4, 2)) * 2**64
    assert math.isclose(qa.scaling_moment(2, 2, x), lhs, rel_tol=1e-12)


def test_crmps_pmf():
    lim = qa.pt_infinity_pmf(2, n_max=80, tail_tol=1.0).as_array()
    assert np.array_equal(qa.crmps_pmf(0.0, 2).as_array(), lim)
    # Poisson(x/d) moves at most 1 - exp(-x/d) <= x/d of the mass
    for x in (1e-8, 1e-4):
        assert np.max(np.abs(qa.crmps_pmf(x, 2).as_array() - lim)) <= x / 2
    for x in (0.5, 3.0):
        p = qa.crmps_pmf(x, 2)
        assert abs(p.total() - 1) < 1e-10
        assert np.allclose(p.as_array(), qa.crmps_pmf_series(x, 2), atol=1e-14)
    with pytest.raises(ValueError):
        qa.crmps_pmf(-1.0, 2)
    with pytest.raises(ValueError):
        qa.crmps_pmf(60.0, 2, n_max=20)


@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("x", [0.0, 0.5, 1.0, 2.0, 4.0])
def test_scaling_moment_identity(k, x):
    d = 2
    p = qa.crmps_pmf(x, d, n_max=120).as_array()
    lhs = float(np.sum(float(d) ** (np.arange(len(p)) * (k - 1)) * p))
    assert math.isclose(lhs, qa.scaling_moment(k, d, x), rel_tol=1e-8)


def test_ipr_csc():
    for k, r, d in product((2, 3), (1, 2), (2, 3)):
        assert qa.ipr_csc(k, 2 * r, r, d) == qa.ipr_haar_clifford(k, 2 * r, d)
    assert isinstance(qa.ipr_csc(3, 32, 4, 2), Fraction)
    with pytest.raises(ValueError):
        qa.ipr_csc(3, 10, 3, 2)


def _ones(k, d):
    return [1.0] * qa.sigma_size(k, d)


def test_doped_with_stabilizer_input():
    for k, N, r, d in [(3, 12, 3, 3), (2, 10, 2, 2), (3, 16, 4, 5)]:
        assert math.isclose(qa.ipr_doped_crmps(k, N, r, d, _ones(k, d)), float(qa.ipr_crmps(k, N, r, d)), rel_tol=1e-12)
        assert math.isclose(qa.ipr_doped_gc(k, N, r, d, _ones(k, d)), float(qa.ipr_csc(k, N, r, d)), rel_tol=1e-12)
    with pytest.raises(ValueError):
        qa.ipr_doped_crmps(3, 12, 3, 3, [1.0] * 5)


def test_doped_defects_decay():
    zeta = [1.0] * 6 + [1 / 3] * 2
    a = qa.ipr_doped_gc(3, 48, 2, 3, zeta) / float(qa.ipr_csc(3, 48, 2, 3))
    b = qa.ipr_doped_gc(3, 48, 6, 3, zeta) / float(qa.ipr_csc(3, 48, 6, 3))
    assert a < 1 and b < a


def test_ipr_doped_global():
    for N in (32, 64):
        clean = qa.ipr_doped_global(3, N, 3, _ones(3, 3), 0)
        assert math.isclose(clean.log_d, qa.log_ipr_haar_clifford(3, N, 3).log_d, abs_tol=1e-6)
    zeta = [1.0] * 6 + [2 / 3] * 2
    v = qa.ipr_doped_global(3, 10, 3, zeta, 2)
    assert math.isclose(v.log_d, -20 + math.log(qa.qutrit_t_bracket(2), 3), rel_tol=1e-14)
    far = qa.ipr_doped_global(3, 10, 3, zeta, 400)
    assert math.isclose(far.log_d, -20 + math.log(6, 3), rel_tol=1e-14)


def test_doped_correction_factor():
    zeta = [2 / 3, 2 / 3]
    magics = [-math.log(z, 3) for z in zeta]
    x0, N = 1.0, 27
    r = math.log(N / x0, 3)
    assert math.isclose(qa.doped_correction_factor(3, N, x0, magics), (6 + sum(z**r for z in zeta)) / 6)


def test_haar_unitary():
    for N in range(1, 7):
        for d in (2, 3, 5):
            assert qa.ipr_haar_unitary(1, N, d) == 1
            assert qa.ipr_haar_unitary(2, N, d) == qa.ipr_haar_clifford(2, N, d) == Fraction(2, d**N + 1)
        assert qa.ipr_haar_unitary(3, N, 2) == qa.ipr_haar_clifford(3, N, 2)
    assert qa.ipr_haar_unitary(3, 2, 3) != qa.ipr_haar_clifford(3, 2, 3)
    assert math.isclose(qa.log_ipr_haar_unitary(3, 5, 3).value(), float(qa.ipr_haar_unitary(3, 5, 3)))


def test_lognormal():
    base = qa.log_ipr_haar_unitary(3, 8, 3)
    assert qa.ipr_lognormal_unitary(3, 8, 3, 0.0) == base
    xs = [0.0, 0.5, 1.0, 2.0]
    vals = [qa.ipr_lognormal_unitary(3, 8, 3, x).log_d for x in xs]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    assert qa.lognormal_exponent(3) == 3
    assert qa.poisson_exponent(3, 3) == Fraction(24, 9)
    with pytest.raises(ValueError):
        qa.ipr_lognormal_unitary(3, 8, 3, -0.1)


@pytest.mark.parametrize("d", [2, 3, 5])
def test_q_binomial_row(d):
    for N in (0, 1, 7, 20):
        assert qa.q_binomial_row(N, d) == [qa.q_binomial(N, g, d) for g in range(N + 1)]
    assert sum(qa.aleph(g, 12, d) for g in range(13)) == qa.stab_count(12, d)
