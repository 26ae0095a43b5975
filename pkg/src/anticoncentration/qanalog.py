"""Closed-form q-analog expressions for stabilizer-state overlap statistics.

Every quantity has an exact path (``fractions.Fraction``) for identities and
moderate N, and where needed a log-domain float path (base-d logarithms)
that stays finite for N up to 10^6.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .gfd import _as_modulus

Rational = int | Fraction


@dataclass(frozen=True)
class LogValue:
    """A strictly positive number stored as its base-d logarithm."""

    log_d: float
    d: int

    @classmethod
    def from_exact(cls, value: Rational, d: int) -> "LogValue":
        value = Fraction(value)
        if value <= 0:
            raise ValueError("LogValue holds positive quantities only")
        return cls(_log_d_fraction(value, d), d)

    @property
    def ln(self) -> float:
        return self.log_d * math.log(self.d)

    def value(self) -> float:
        """Plain float; underflows to 0.0 for very small quantities."""
        return float(self.d) ** self.log_d

    def __mul__(self, other: "LogValue") -> "LogValue":
        _check_base(self, other)
        return LogValue(self.log_d + other.log_d, self.d)

    def __truediv__(self, other: "LogValue") -> "LogValue":
        _check_base(self, other)
        return LogValue(self.log_d - other.log_d, self.d)

    def __add__(self, other: "LogValue") -> "LogValue":
        _check_base(self, other)
        hi, lo = max(self.log_d, other.log_d), min(self.log_d, other.log_d)
        return LogValue(hi + math.log1p(self.d ** (lo - hi)) / math.log(self.d), self.d)


def _check_base(a: LogValue, b: LogValue) -> None:
    if a.d != b.d:
        raise ValueError("LogValue bases differ")


def _log_d_fraction(x: Fraction, d: int) -> float:
    # log of huge/tiny rationals without float overflow
    num, den = x.numerator, x.denominator
    return (_ln_int(num) - _ln_int(den)) / math.log(d)


def _ln_int(n: int) -> float:
    bits = n.bit_length()
    if bits < 1000:
        return math.log(n)
    shift = bits - 64
    return math.log(n >> shift) + shift * math.log(2)


@dataclass(frozen=True)
class PmfOverSupport:
    support: tuple[int, ...]
    probs: tuple
    label: str  # "g" or "n"

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs differ in length")
        if any(p < 0 for p in self.probs):
            raise ValueError("negative probability")

    @property
    def exact(self) -> bool:
        return all(isinstance(p, (Fraction, int)) for p in self.probs)

    def as_array(self, length: int | None = None) -> np.ndarray:
        """Dense float array indexed by support value."""
        size = max(self.support) + 1 if length is None else length
        out = np.zeros(size)
        for s, p in zip(self.support, self.probs):
            if s < size:
                out[s] = float(p)
        return out

    def total(self):
        return sum(self.probs)

    def mode(self) -> int:
        return self.support[int(np.argmax([float(p) for p in self.probs]))]

    def to_n(self, N: int) -> "PmfOverSupport":
        """Relabel a pmf over g as a pmf over n = N - g."""
        if self.label != "g":
            raise ValueError("pmf is not labelled by g")
        pairs = sorted((N - g, p) for g, p in zip(self.support, self.probs))
        return PmfOverSupport(tuple(s for s, _ in pairs), tuple(p for _, p in pairs), "n")


# ---------------------------------------------------------------------------
# q-Pochhammer and friends


def q_pochhammer(a: Rational, xi: Rational, n: int) -> Fraction:
    """(a; xi)_n = prod_{m=0}^{n-1} (1 - a xi^m), exactly."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    a, xi = Fraction(a), Fraction(xi)
    out = Fraction(1)
    term = Fraction(1)
    for _ in range(n):
        out *= 1 - a * term
        term *= xi
    return out


def log_q_pochhammer(a: float, xi: float, n: int) -> float:
    """Natural log of (a; xi)_n for factors that are all positive."""
    total = 0.0
    term = 1.0
    for _ in range(n):
        f = -a * term
        if 1 + f <= 0:
            raise ValueError("factor is not positive")
        total += math.log1p(f)
        term *= xi
    return total


def q_pochhammer_infinite(a: float, xi: float, rel_tol: float = 1e-16) -> float:
    """(a; xi)_inf for |xi| < 1, truncated once a factor is within rel_tol of 1."""
    if not abs(xi) < 1:
        raise ValueError("infinite product needs |xi| < 1")
    out = 1.0
    term = 1.0
    while True:
        f = a * term
        out *= 1 - f
        if abs(f) < rel_tol:
            return out
        term *= xi


def q_binomial(N: int, g: int, d) -> int:
    """Gaussian binomial coefficient binom(N, g)_d (number of g-dim subspaces of Z_d^N)."""
    d = int(d)
    if not 0 <= g <= N:
        raise ValueError(f"need 0 <= g <= N, got g={g}, N={N}")
    num = 1
    den = 1
    for i in range(g):
        num *= d ** (N - i) - 1
        den *= d ** (i + 1) - 1
    return num // den


def q_binomial_row(N: int, d) -> list[int]:
    """[binom(N, g)_d for g = 0..N], by the ratio recurrence in g."""
    d = int(d)
    row = [1]
    for g in range(N):
        row.append(row[-1] * (d ** (N - g) - 1) // (d ** (g + 1) - 1))
    return row


def sigma_size(k: int, d) -> int:
    """|Sigma_k(d)| = (-1; d)_{k-1} = prod_{m=0}^{k-2} (d^m + 1)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    d = _as_modulus(d)
    return int(q_pochhammer(-1, d, k - 1))


def gram_row_sum(n: int, k: int, d) -> Fraction:
    """Row sum of the n-site Gram matrix, d^{kn} (-d^{-n}; d)_{k-1}."""
    if n < 0 or k < 1:
        raise ValueError("need n >= 0, k >= 1")
    d = _as_modulus(d)
    return Fraction(d) ** (k * n) * q_pochhammer(-Fraction(1, d**n), d, k - 1)


def wg_row_sum(n: int, k: int, d) -> Fraction:
    return 1 / gram_row_sum(n, k, d)


def log_gram_row_sum(n: int, k: int, d: int) -> float:
    """log_d of gram_row_sum, for large n."""
    d = _as_modulus(d)
    return k * n + log_q_pochhammer(-(float(d) ** -n), d, k - 1) / math.log(d)


# ---------------------------------------------------------------------------
# random stabilizer states


def stab_count(N: int, d) -> int:
    """|Stab_{N,d}| = d^N (-d; d)_N."""
    d = _as_modulus(d)
    return d**N * int(q_pochhammer(-d, d, N))


def aleph(g: int, N: int, d) -> int:
    """Number of N-qudit stabilizer states with participation entropy g."""
    d = _as_modulus(d)
    if not 0 <= g <= N:
        raise ValueError(f"g={g} outside [0, {N}]")
    return d**N * d ** (g * (g + 1) // 2) * q_binomial(N, g, d)


def clifford_pt_pmf(N: int, d) -> PmfOverSupport:
    """Exact distribution of g over uniformly random N-qudit stabilizer states."""
    if N < 1:
        raise ValueError("N must be >= 1")
    d = _as_modulus(d)
    norm = int(q_pochhammer(-d, d, N))
    row = q_binomial_row(N, d)
    probs = tuple(Fraction(row[g] * d ** (g * (g + 1) // 2), norm) for g in range(N + 1))
    return PmfOverSupport(tuple(range(N + 1)), probs, "g")


def pt_infinity_pmf(d, n_max: int = 64, tail_tol: float = 1e-12) -> PmfOverSupport:
    """N -> infinity limit of the Clifford-Porter-Thomas law, over n = N - g."""
    d = _as_modulus(d)
    q = 1.0 / d
    norm = q_pochhammer_infinite(-q, q)
    logs = np.empty(n_max + 1)
    log_qq = 0.0  # ln (q; q)_n
    for n in range(n_max + 1):
        if n > 0:
            log_qq += math.log1p(-(q**n))
        logs[n] = -0.5 * n * (n + 1) * math.log(d) - log_qq
    probs = np.exp(logs) / norm
    tail = 1.0 - probs.sum()
    if tail > tail_tol:
        raise ValueError(f"truncated tail mass {tail:.3e} exceeds {tail_tol:.1e}; raise n_max")
    return PmfOverSupport(tuple(range(n_max + 1)), tuple(float(p) for p in probs), "n")


def ipr_haar_clifford(k: int, N: int, d) -> Fraction:
    """Average IPR I_k over random stabilizer states, exactly."""
    if k < 1:
        raise ValueError("k must be >= 1")
    d = _as_modulus(d)
    return (
        Fraction(1, d) ** ((k - 1) * N)
        * q_pochhammer(-1, d, k - 1)
        / q_pochhammer(-Fraction(1, d**N), d, k - 1)
    )


def log_ipr_haar_clifford(k: int, N: int, d) -> LogValue:
    d = _as_modulus(d)
    ln = (
        (1 - k) * N * math.log(d)
        + log_q_pochhammer(-1.0, d, k - 1)
        - log_q_pochhammer(-(float(d) ** -N), d, k - 1)
    )
    return LogValue(ln / math.log(d), d)


def annealed_constant(k: int, d) -> float:
    """c_k = (1-k)^{-1} sum_{m=0}^{k-2} log_d(1 + d^m)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    d = _as_modulus(d)
    return sum(math.log1p(d**m) for m in range(k - 1)) / math.log(d) / (1 - k)


def participation_entropy_annealed(k: int, N: int, d) -> tuple[float, float]:
    """Annealed participation entropy (1-k)^{-1} log_d I_k and the constant c_k."""
    if k < 2:
        raise ValueError("k must be >= 2")
    return log_ipr_haar_clifford(k, N, d).log_d / (1 - k), annealed_constant(k, d)


def participation_entropy_quenched_constant(d, tol: float = 1e-12) -> float:
    """c = -sum_{g>=1} (d^g + 1)^{-1}, to absolute error below tol."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    d = _as_modulus(d)
    total = 0.0
    g = 1
    while True:
        total += 1.0 / (d**g + 1)
        # remaining tail < sum_{h>g} d^{-h} = d^{-g} / (d - 1)
        if float(d) ** -g / (d - 1) < tol:
            return -total
        g += 1


def mean_participation_entropy(N: int, d) -> Fraction:
    """Quenched average sum_g g P_Haar(g), exactly."""
    pmf = clifford_pt_pmf(N, d)
    return sum(g * p for g, p in zip(pmf.support, pmf.probs))


# ---------------------------------------------------------------------------
# Clifford random MPS, staircase and glued circuits


def _pochhammer_neg_dpow(e: int, k: int, d: int) -> Fraction:
    # (-d^{-e}; d)_{k-1}
    return q_pochhammer(-Fraction(1, d**e), d, k - 1)


def ipr_crmps(k: int, N: int, r: int, d) -> Fraction:
    """Average IPR of a Clifford random MPS with bond dimension d^r."""
    d = _as_modulus(d)
    if not 0 <= r <= N - 1:
        raise ValueError(f"r={r} outside [0, N-1]")
    return (
        ipr_haar_clifford(k, N, d)
        * _pochhammer_neg_dpow(N, k, d)
        * _pochhammer_neg_dpow(r, k, d) ** (N - r - 1)
        / _pochhammer_neg_dpow(1 + r, k, d) ** (N - r)
    )


def _check_patches(N: int, r: int) -> None:
    if r < 1 or N % r or N < 2 * r:
        raise ValueError(f"need r >= 1 dividing N with N >= 2r, got N={N}, r={r}")


def ipr_csc(k: int, N: int, r: int, d) -> Fraction:
    """Average IPR of the Clifford staircase (equivalently glued) circuit on d^r patches."""
    d = _as_modulus(d)
    _check_patches(N, r)
    return (
        ipr_haar_clifford(k, N, d)
        * _pochhammer_neg_dpow(N, k, d)
        * _pochhammer_neg_dpow(r, k, d) ** ((N - 2 * r) // r)
        / _pochhammer_neg_dpow(2 * r, k, d) ** ((N - r) // r)
    )


def crmps_scaling_x(N: int, r: int, d, geometry: str = "mps") -> tuple[float, float]:
    """Scaling variable (x0, x) for bond/patch dimension chi = d^r.

    ``mps``: x0 = N/chi with the second-order finite-N correction.
    ``glued``: x0 = d/(d-1) N/(r chi), x = x0 (1 - 2r/N).
    """
    d = _as_modulus(d)
    if r < 0:
        raise ValueError("chi = d^r must be >= 1")
    chi = float(d) ** r
    if geometry == "mps":
        x0 = N / chi
        x = x0 * (1 - math.log(N / x0, d) / N - d / ((d - 1) * N))
    elif geometry == "glued":
        if r < 1:
            raise ValueError("glued geometry needs r >= 1")
        x0 = d / (d - 1) * N / (r * chi)
        x = x0 * (1 - 2 * r / N)
    else:
        raise ValueError(f"unknown geometry {geometry!r}")
    return x0, x


def crmps_x_from_ipr(N: int, r: int, d, k: int = 2) -> float:
    """x for which the scaling-limit k-th moment reproduces the exact ipr_crmps.

    Inverts d^{N(k-1)} I_k = scaling_moment(k, d, x) for x.
    """
    d = _as_modulus(d)
    lhs = ipr_crmps(k, N, r, d) * Fraction(d) ** (N * (k - 1))
    ratio = lhs / q_pochhammer(-Fraction(d) ** (k - 2), Fraction(1, d), k - 1)
    return d**2 / (d**k - d) * (_ln_int(ratio.numerator) - _ln_int(ratio.denominator))


def crmps_pmf(x: float, d, n_max: int = 80, tail_tol: float = 1e-12) -> PmfOverSupport:
    """Scaling-limit distribution of n for Clifford random MPS.

    Computed as the convolution of the N -> infinity Clifford-Porter-Thomas
    law with a Poisson variable of mean x/d.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    d = _as_modulus(d)
    base = np.asarray(pt_infinity_pmf(d, n_max, tail_tol=1.0).probs)
    poisson = stats.poisson.pmf(np.arange(n_max + 1), x / d)
    probs = np.convolve(base, poisson)[: n_max + 1]
    tail = 1.0 - probs.sum()
    if tail > tail_tol:
        raise ValueError(f"truncated tail mass {tail:.3e} exceeds {tail_tol:.1e}; raise n_max")
    return PmfOverSupport(tuple(range(n_max + 1)), tuple(float(p) for p in probs), "n")


def crmps_pmf_series(x: float, d, n_max: int = 80) -> np.ndarray:
    """Literal double-sum form of the same pmf (x > 0 only); kept as a cross-check."""
    if x <= 0:
        raise ValueError("series form needs x > 0")
    d = _as_modulus(d)
    q = 1.0 / d
    norm = q_pochhammer_infinite(-q, q)
    out = np.zeros(n_max + 1)
    for n in range(n_max + 1):
        s = 0.0
        qq = 1.0
        for p in range(n + 1):
            if p > 0:
                qq *= 1 - q**p
            log_term = (
                (n - p) * math.log(x)
                - 0.5 * p * (p - 1) * math.log(d)
                - math.lgamma(n - p + 1)
            )
            s += math.exp(log_term) / qq
        out[n] = math.exp(-x / d) * float(d) ** -n * s / norm
    return out


def scaling_moment(k: int, d, x: float = 0.0) -> float:
    """(-d^{k-2}; d^{-1})_{k-1} exp[(d^k - d) x / d^2]."""
    d = _as_modulus(d)
    return float(q_pochhammer(-Fraction(d) ** (k - 2), Fraction(1, d), k - 1)) * math.exp(
        (d**k - d) * x / d**2
    )


# ---------------------------------------------------------------------------
# magic-state doping


def _purity_values(purities: Mapping | Sequence, k: int, d: int) -> np.ndarray:
    values = np.asarray(list(purities.values()) if isinstance(purities, Mapping) else purities, dtype=float)
    if values.size != sigma_size(k, d):
        raise ValueError(f"expected {sigma_size(k, d)} purities, got {values.size}")
    if np.any(values <= 0) or np.any(values > 1 + 1e-12):
        raise ValueError("purities must lie in (0, 1]")
    return values


def _defect_values(purities: Mapping | Sequence, k: int, d: int) -> np.ndarray:
    values = _purity_values(purities, k, d)
    # permutation subspaces carry zeta = 1 and come first in canonical order
    perms = math.factorial(k) if sigma_size(k, d) >= math.factorial(k) else sigma_size(k, d)
    if not np.allclose(values[:perms], 1.0, atol=1e-12):
        raise ValueError("permutation entries must have purity 1")
    return values[perms:]


def ipr_doped_crmps(k: int, N: int, r: int, d, purities) -> float:
    """IPR of a Clifford random MPS whose first r inputs are a magic state.

    ``purities`` lists zeta_sigma for every sigma in Sigma_k(d) in canonical
    order (a mapping sigma -> zeta is accepted as well).
    """
    d = _as_modulus(d)
    if not 0 <= r <= N - 1:
        raise ValueError(f"r={r} outside [0, N-1]")
    zeta = _purity_values(purities, k, d)
    ln = (
        (1 - k) * N * math.log(d)
        + (N - r - 1) * log_q_pochhammer(-(float(d) ** -r), d, k - 1)
        - (N - r) * log_q_pochhammer(-(float(d) ** (-1 - r)), d, k - 1)
    )
    return math.exp(ln) * float(np.sum(zeta**r))


def ipr_doped_gc(k: int, N: int, r: int, d, purities) -> float:
    """IPR of the glued circuit whose first gate acts on 2r magic inputs."""
    d = _as_modulus(d)
    _check_patches(N, r)
    defects = _defect_values(purities, k, d)
    ln = (
        (1 - k) * N * math.log(d)
        + (N - 2 * r) // r * log_q_pochhammer(-(float(d) ** -r), d, k - 1)
        - (N - r) // r * log_q_pochhammer(-(float(d) ** (-2 * r)), d, k - 1)
    )
    bracket = math.factorial(k) + float(np.sum(defects ** (2 * r)))
    return math.exp(ln) * bracket


def ipr_doped_global(k: int, N: int, d, purities, n_t: int) -> LogValue:
    """Late-time IPR of a globally scrambled state with n_t magic inputs.

    Drops the (-d^{-N}; d)_{k-1} factor, which is 1 + O(d^{-N}).
    """
    d = _as_modulus(d)
    defects = _defect_values(purities, k, d)
    bracket = math.factorial(k) + float(np.sum(defects**n_t))
    return LogValue((1 - k) * N + math.log(bracket, d), d)


def qutrit_t_bracket(n_t: int) -> float:
    """6 + 2 (2/3)^{n_t}: the k = 3 bracket for the qutrit T state."""
    return 6 + 2 * (2 / 3) ** n_t


def doped_correction_factor(k: int, N: int, x0: float, magics: Sequence[float]) -> float:
    """1 + sum_sigma (x0/N)^{M_sigma} / k!, the finite-N doping correction.

    ``magics`` are M_sigma = -log_d zeta_sigma over the defect subspaces; with
    r = log_d(N/x0) this equals sum_sigma zeta_sigma^r / k! over all of Sigma_k(d).
    """
    return 1 + sum((x0 / N) ** m for m in magics) / math.factorial(k)


# ---------------------------------------------------------------------------
# Haar-unitary baselines


def ipr_haar_unitary(k: int, N: int, d) -> Fraction:
    """k! / prod_{m=1}^{k-1} (d^N + m)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    d = _as_modulus(d)
    den = 1
    for m in range(1, k):
        den *= d**N + m
    return Fraction(math.factorial(k), den)


def log_ipr_haar_unitary(k: int, N: int, d) -> LogValue:
    d = _as_modulus(d)
    ln = math.lgamma(k + 1) - sum(
        N * math.log(d) + math.log1p(m * float(d) ** -N) for m in range(1, k)
    )
    return LogValue(ln / math.log(d), d)


def ipr_lognormal_unitary(k: int, N: int, d, x: float) -> LogValue:
    """Haar-unitary IPR with the log-normal correction exp[k(k-1)x/2]."""
    if x < 0:
        raise ValueError("x must be nonnegative")
    base = log_ipr_haar_unitary(k, N, d)
    return LogValue(base.log_d + k * (k - 1) * x / 2 / math.log(base.d), base.d)


def poisson_exponent(k: int, d) -> Fraction:
    """(d^k - d) / d^2, the Clifford scaling exponent per unit x."""
    d = _as_modulus(d)
    return Fraction(d**k - d, d**2)


def lognormal_exponent(k: int) -> Fraction:
    return Fraction(k * (k - 1), 2)
