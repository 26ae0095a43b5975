"""Clifford commutant: stochastic Lagrangian subspaces and their Gram calculus.

A subspace sigma of Z_d^{2k} enters the k-replica commutant when it has
dimension k, contains the all-ones vector, and every element (x, y)
satisfies sum_i x_i^2 - y_i^2 = 0 mod D (D = 4 for qubits, computed on the
{0, 1} lifts). Each sigma is stored by its reduced echelon basis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import permutations, product
from typing import Sequence

import numpy as np

from .gfd import GfMatrix, iter_rref, rank_mod, rref_mod
from .qanalog import sigma_size
from .tableau import pauli_x, pauli_z

MAX_K = 4
IMAG_TOL = 1e-12


def _coefficients(k: int, d: int) -> np.ndarray:
    return np.array(list(product(range(d), repeat=k)), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class LagrangianSubspace:
    k: int
    d: int
    basis: GfMatrix
    permutation: tuple | None = None

    @cached_property
    def elements(self) -> np.ndarray:
        """All d^k members as rows of a (d^k, 2k) array."""
        return (_coefficients(self.k, self.d) @ self.basis.to_numpy()) % self.d

    @property
    def element_set(self) -> frozenset:
        if self.k > MAX_K:
            raise ValueError("element sets are only materialized for k <= 4")
        return frozenset(map(tuple, self.elements.tolist()))

    @property
    def is_permutation(self) -> bool:
        return self.permutation is not None

    @property
    def key(self) -> tuple:
        return self.basis.entries

    def __eq__(self, other):
        if not isinstance(other, LagrangianSubspace):
            return NotImplemented
        return (self.k, self.d, self.key) == (other.k, other.d, other.key)

    def __hash__(self):
        return hash((self.k, self.d, self.key))

    def operator(self) -> np.ndarray:
        """O_sigma = sum over (x, y) in sigma of |x><y| on (C^d)^{otimes k}."""
        k, d = self.k, self.d
        w = d ** np.arange(k - 1, -1, -1)
        e = self.elements
        o = np.zeros((d**k, d**k))
        o[e[:, :k] @ w, e[:, k:] @ w] = 1.0
        return o


def satisfies_condition_i(elements: np.ndarray, k: int, d: int) -> bool:
    D = 4 if d == 2 else d
    q = np.sum(elements[:, :k] ** 2, axis=1) - np.sum(elements[:, k:] ** 2, axis=1)
    return not np.any(q % D)


def _canonical(rows: np.ndarray, d: int) -> np.ndarray:
    r, piv = rref_mod(rows, d)
    return r[: len(piv)]


def permutation_subspace(perm: Sequence[int], k: int, d: int) -> LagrangianSubspace:
    """{(x, y) : y_i = x_perm(i)}, i.e. y = perm^-1 . x."""
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(k)):
        raise ValueError(f"{perm} is not a permutation of {k} elements")
    rows = np.zeros((k, 2 * k), dtype=np.int64)
    for j in range(k):
        rows[j, j] = 1
    for i, p in enumerate(perm):
        rows[p, k + i] = 1
    return LagrangianSubspace(k, d, GfMatrix(_canonical(rows, d), d), perm)


@dataclass(frozen=True, eq=False)
class CommutantBasis:
    k: int
    d: int
    subspaces: tuple

    @property
    def size(self) -> int:
        return len(self.subspaces)

    @property
    def n_permutations(self) -> int:
        return sum(s.is_permutation for s in self.subspaces)

    @cached_property
    def intersection_dims(self) -> np.ndarray:
        n = self.size
        out = np.zeros((n, n), dtype=np.int64)
        bs = [s.basis.to_numpy() for s in self.subspaces]
        for i in range(n):
            for j in range(i, n):
                dim = 2 * self.k - rank_mod(np.vstack([bs[i], bs[j]]), self.d)
                out[i, j] = out[j, i] = dim
        return out

    def index(self, sigma: LagrangianSubspace) -> int:
        return self.subspaces.index(sigma)

    def to_json(self) -> str:
        doc = {
            "k": self.k,
            "d": self.d,
            "subspaces": [
                {
                    "basis": s.basis.to_numpy().tolist(),
                    "permutation": list(s.permutation) if s.is_permutation else None,
                }
                for s in self.subspaces
            ],
            "intersection_dims": self.intersection_dims.tolist(),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "CommutantBasis":
        doc = json.loads(text)
        k, d = doc["k"], doc["d"]
        subs = tuple(
            LagrangianSubspace(
                k,
                d,
                GfMatrix(s["basis"], d),
                tuple(s["permutation"]) if s["permutation"] is not None else None,
            )
            for s in doc["subspaces"]
        )
        return cls(k, d, subs)


@lru_cache(maxsize=None)
def enumerate_sigma(k: int, d: int) -> CommutantBasis:
    """Brute-force Sigma_k(d) in canonical order (permutations first).

    Every k-dim subspace through 1_{2k} is <1> + W for a unique (k-1)-dim W
    inside the hyperplane {last coordinate = 0}, so only those are scanned.
    """
    if not 1 <= k <= MAX_K:
        raise ValueError("k must be in 1..4")
    if d not in (2, 3, 5):
        raise ValueError("d must be 2, 3 or 5")
    ones = np.ones((1, 2 * k), dtype=np.int64)
    coeffs = _coefficients(k, d)
    found = {}
    for w in iter_rref(k - 1, 2 * k - 1, d):
        rows = np.vstack([ones, np.hstack([w, np.zeros((k - 1, 1), dtype=np.int64)])])
        elems = (coeffs @ rows) % d
        if satisfies_condition_i(elems, k, d):
            canon = _canonical(rows, d)
            found[tuple(canon.ravel().tolist())] = canon
    perms = [permutation_subspace(p, k, d) for p in permutations(range(k))]
    perm_keys = {p.key for p in perms}
    if not perm_keys <= set(found):
        raise RuntimeError("a permutation subspace failed condition (i)")
    defects = [
        LagrangianSubspace(k, d, GfMatrix(found[key], d))
        for key in sorted(found)
        if key not in perm_keys
    ]
    basis = CommutantBasis(k, d, tuple(perms) + tuple(defects))
    expected = sigma_size(k, d)
    if basis.size != expected:
        raise RuntimeError(f"found {basis.size} subspaces, expected {expected}")
    return basis


# ---------------------------------------------------------------------------
# Gram and Weingarten matrices


def gram_matrix(basis: CommutantBasis, n: int) -> np.ndarray:
    """Exact G_{sigma,pi}(d^n) = d^{n dim(sigma cap pi)} as Python ints."""
    dims = basis.intersection_dims
    out = np.empty(dims.shape, dtype=object)
    for idx, v in np.ndenumerate(dims):
        out[idx] = basis.d ** (n * int(v))
    return out


def pinv_symmetric(g: np.ndarray, rel_cutoff: float = 1e-12) -> np.ndarray:
    evals, evecs = np.linalg.eigh(g)
    keep = np.abs(evals) > rel_cutoff * np.max(np.abs(evals))
    return (evecs[:, keep] / evals[keep]) @ evecs[:, keep].T


def weingarten_matrix(basis: CommutantBasis, n: int, rel_cutoff: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of the Gram matrix (rescaled for conditioning)."""
    scale = float(basis.d) ** (n * basis.k)
    g = np.array(
        [[float(basis.d) ** (n * int(v) - n * basis.k) for v in row] for row in basis.intersection_dims]
    )
    return pinv_symmetric(g, rel_cutoff) / scale


# ---------------------------------------------------------------------------
# Q operator


def q_operator_matrix(d: int, k: int = 3) -> np.ndarray:
    """Q_d = (1/d) sum_P P (x) P (x) P^{d-2} over the d^2 single-qudit Paulis."""
    if k != 3 or d not in (3, 5):
        raise ValueError("Q_d is provided for k = 3 and d in {3, 5}")
    x, z = pauli_x(d), pauli_z(d)
    q = np.zeros((d**3, d**3), dtype=complex)
    for a in range(d):
        for b in range(d):
            p = np.linalg.matrix_power(x, a) @ np.linalg.matrix_power(z, b)
            q += np.kron(np.kron(p, p), np.linalg.matrix_power(p, d - 2))
    return q / d


def span_dimension(ops: Sequence[np.ndarray], tol: float = 1e-9) -> int:
    m = np.array([np.asarray(o).ravel() for o in ops])
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def permutation_operators(d: int, k: int) -> list[np.ndarray]:
    return [permutation_subspace(p, k, d).operator() for p in permutations(range(k))]


# ---------------------------------------------------------------------------
# purities


@dataclass(frozen=True)
class PurityTable:
    state: np.ndarray
    zetas: tuple
    magics: tuple = field(default=())

    def __post_init__(self):
        if not self.magics:
            object.__setattr__(self, "magics", tuple(-float(np.log(z)) for z in self.zetas))


def _check_state(psi, d: int) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).ravel()
    if abs(np.linalg.norm(psi) - 1) > 1e-12:
        raise ValueError("state is not normalized")
    return psi


def subspace_sum(psi: np.ndarray, sigma: LagrangianSubspace, n_sites: int = 1) -> float:
    """zeta_sigma of an n_sites-qudit state: sum over sigma^{n_sites} of prod psi_x psi*_y.

    For product states this factorizes sitewise; here it is evaluated
    directly, which is what Clifford-invariance checks need.
    """
    k, d = sigma.k, sigma.d
    e = sigma.elements
    idx = np.zeros((1, 2 * k), dtype=np.int64)
    for _ in range(n_sites):
        idx = (idx[:, None, :] * d + e[None, :, :]).reshape(-1, 2 * k)
    terms = np.prod(psi[idx[:, :k]], axis=1) * np.prod(np.conj(psi[idx[:, k:]]), axis=1)
    val = terms.sum()
    if abs(val.imag) > IMAG_TOL:
        raise ValueError(f"purity has imaginary part {val.imag:.3e}")
    return float(val.real)


def operator_expectation(op: np.ndarray, psi: np.ndarray, k: int) -> complex:
    """tr(op^dag rho^{otimes k}) for a pure single-qudit state."""
    v = psi
    for _ in range(k - 1):
        v = np.kron(v, psi)
    return complex(np.vdot(op @ v, v))


def purities(state, basis: CommutantBasis) -> PurityTable:
    psi = _check_state(state, basis.d)
    if psi.size != basis.d:
        raise ValueError("expected a single-qudit state")
    zetas = tuple(subspace_sum(psi, s) for s in basis.subspaces)
    return PurityTable(psi, zetas)


def qutrit_t_state() -> np.ndarray:
    w = np.exp(2j * np.pi / 9)
    return np.array([1, w, np.conj(w)]) / np.sqrt(3)
