"""Dense linear algebra over the prime field Z_d.

Matrices are numpy arrays of small unsigned residues. :class:`GfMatrix`
is the immutable public wrapper; the ``*_mod`` functions work directly on
arrays and are what the rest of the package calls in inner loops.

For d = 2 there is an additional bit-packed path (rows stored as Python
integers) whose results are bit-identical to the generic path.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterator, Sequence

import numpy as np

SUPPORTED_MODULI = (2, 3, 5, 7, 11, 13)


def is_prime(d: int) -> bool:
    if d < 2:
        return False
    return all(d % p for p in range(2, int(d**0.5) + 1))


@dataclass(frozen=True)
class PrimeModulus:
    d: int

    def __post_init__(self):
        if not isinstance(self.d, (int, np.integer)) or not is_prime(int(self.d)):
            raise ValueError(f"modulus must be prime, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))

    def __int__(self) -> int:
        return self.d


def _as_modulus(d) -> int:
    if isinstance(d, PrimeModulus):
        return d.d
    return PrimeModulus(int(d)).d


@lru_cache(maxsize=None)
def inverse_table(d: int) -> np.ndarray:
    """Multiplicative inverses mod d; entry 0 is left as 0."""
    inv = np.zeros(d, dtype=np.int64)
    for a in range(1, d):
        inv[a] = pow(a, -1, d)
    return inv


def inv_mod(a: int, d: int) -> int:
    a %= d
    if a == 0:
        raise ZeroDivisionError("0 has no inverse mod d")
    return int(inverse_table(d)[a])


class GfMatrix:
    """Immutable dense matrix over Z_d.

    Parameters
    ----------
    entries : array-like
        Integer entries, reduced mod d on construction. A 1-D input is
        treated as a single column vector.
    d : int or PrimeModulus
    """

    __slots__ = ("_a", "_d")

    def __init__(self, entries, d):
        d = _as_modulus(d)
        a = np.asarray(entries, dtype=np.int64)
        if a.ndim == 1:
            a = a.reshape(-1, 1)
        if a.ndim != 2:
            raise ValueError("GfMatrix entries must be 1-D or 2-D")
        a = np.mod(a, d).astype(np.uint8)
        a.setflags(write=False)
        self._a = a
        self._d = d

    @classmethod
    def identity(cls, n: int, d) -> "GfMatrix":
        return cls(np.eye(n, dtype=np.int64), d)

    @classmethod
    def zeros(cls, rows: int, cols: int, d) -> "GfMatrix":
        return cls(np.zeros((rows, cols), dtype=np.int64), d)

    @property
    def d(self) -> int:
        return self._d

    @property
    def modulus(self) -> PrimeModulus:
        return PrimeModulus(self._d)

    @property
    def rows(self) -> int:
        return self._a.shape[0]

    @property
    def cols(self) -> int:
        return self._a.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self._a.shape

    @property
    def entries(self) -> tuple[int, ...]:
        """Row-major entries."""
        return tuple(int(x) for x in self._a.ravel())

    def to_numpy(self) -> np.ndarray:
        return self._a.astype(np.int64)

    @property
    def T(self) -> "GfMatrix":
        return GfMatrix(self._a.T, self._d)

    def __eq__(self, other) -> bool:
        if not isinstance(other, GfMatrix):
            return NotImplemented
        return self._d == other._d and np.array_equal(self._a, other._a)

    def __hash__(self):
        return hash((self._d, self._a.shape, self._a.tobytes()))

    def __repr__(self) -> str:
        return f"GfMatrix({self._a.tolist()}, d={self._d})"

    def __matmul__(self, other: "GfMatrix") -> "GfMatrix":
        return matmul_gf(self, other)


# ---------------------------------------------------------------------------
# array-level kernels


def rref_mod(a: np.ndarray, d: int, ncols: int | None = None) -> tuple[np.ndarray, list[int]]:
    """Reduced row-echelon form of an integer array mod d.

    Pivots are searched left to right, top to bottom. If ``ncols`` is given,
    only the first ``ncols`` columns are eligible as pivots while row
    operations still act on the full width (useful for augmented systems).
    """
    r = np.mod(np.array(a, dtype=np.int64), d)
    if r.ndim != 2:
        raise ValueError("expected a 2-D array")
    m, n = r.shape
    if ncols is None:
        ncols = n
    inv = inverse_table(d)
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == m:
            break
        nz = np.nonzero(r[row:, col])[0]
        if nz.size == 0:
            continue
        p = row + nz[0]
        if p != row:
            r[[row, p]] = r[[p, row]]
        if r[row, col] != 1:
            r[row] = (r[row] * inv[r[row, col]]) % d
        others = np.nonzero(r[:, col])[0]
        others = others[others != row]
        if others.size:
            r[others] = (r[others] - np.outer(r[others, col], r[row])) % d
        pivots.append(col)
        row += 1
    return r, pivots


def rank_mod(a: np.ndarray, d: int) -> int:
    a = np.asarray(a)
    if a.size == 0:
        return 0
    if d == 2:
        return rank_gf2_packed(pack_rows(a))
    return len(rref_mod(a, d)[1])


def kernel_mod(a: np.ndarray, d: int) -> np.ndarray:
    """Basis of the right null space {v : a v = 0 mod d}, one vector per row."""
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[1]
    r, pivots = rref_mod(a, d)
    free = [c for c in range(n) if c not in pivots]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, p in enumerate(pivots):
            basis[i, p] = (-r[row, f]) % d
    return basis


def solve_mod(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray | None:
    """One solution x of a x = b mod d, or None if the system is inconsistent.

    Free variables are set to zero.
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64).reshape(-1, 1)
    m, n = a.shape
    r, pivots = rref_mod(np.hstack([a, b]), d, ncols=n)
    rank = len(pivots)
    if np.any(r[rank:, n] % d):
        return None
    x = np.zeros(n, dtype=np.int64)
    for row, p in enumerate(pivots):
        x[p] = r[row, n]
    return x


def matmul_mod(a: np.ndarray, b: np.ndarray, d: int) -> np.ndarray:
    return np.mod(np.asarray(a, dtype=np.int64) @ np.asarray(b, dtype=np.int64), d)


# ---------------------------------------------------------------------------
# bit-packed GF(2)


def pack_rows(a: np.ndarray) -> list[int]:
    """Pack each row of a 0/1 array into a Python int (column j -> bit j)."""
    a = np.asarray(a, dtype=np.int64) & 1
    weights = [1 << j for j in range(a.shape[1])]
    return [sum(w for w, bit in zip(weights, row) if bit) for row in a.tolist()]


def unpack_rows(rows: Sequence[int], ncols: int) -> np.ndarray:
    out = np.zeros((len(rows), ncols), dtype=np.int64)
    for i, v in enumerate(rows):
        for j in range(ncols):
            out[i, j] = (v >> j) & 1
    return out


def rank_gf2_packed(rows: Sequence[int]) -> int:
    """GF(2) rank of bit-packed rows via an XOR basis keyed by lowest set bit."""
    basis: dict[int, int] = {}
    for v in rows:
        while v:
            low = v & -v
            b = basis.get(low)
            if b is None:
                basis[low] = v
                break
            v ^= b
    return len(basis)


def rref_gf2_packed(rows: Sequence[int], ncols: int) -> tuple[list[int], list[int]]:
    """Bit-packed GF(2) reduced row-echelon form with the same pivot rule as :func:`rref_mod`."""
    r = list(rows)
    m = len(r)
    pivots: list[int] = []
    row = 0
    for col in range(ncols):
        if row == m:
            break
        bit = 1 << col
        p = next((i for i in range(row, m) if r[i] & bit), None)
        if p is None:
            continue
        r[row], r[p] = r[p], r[row]
        for i in range(m):
            if i != row and r[i] & bit:
                r[i] ^= r[row]
        pivots.append(col)
        row += 1
    return r, pivots


# ---------------------------------------------------------------------------
# public GfMatrix operations


def rank_gf(m: GfMatrix) -> int:
    """Rank over Z_d (number of pivots after Gaussian elimination)."""
    return rank_mod(m.to_numpy(), m.d)


def rref_gf(m: GfMatrix) -> tuple[GfMatrix, list[int]]:
    r, pivots = rref_mod(m.to_numpy(), m.d)
    return GfMatrix(r, m.d), pivots


def kernel_basis_gf(m: GfMatrix) -> list[GfMatrix]:
    """Right kernel basis as column vectors; its size is cols - rank."""
    return [GfMatrix(v, m.d) for v in kernel_mod(m.to_numpy(), m.d)]


def matmul_gf(a: GfMatrix, b: GfMatrix) -> GfMatrix:
    if a.d != b.d:
        raise ValueError("moduli differ")
    if a.cols != b.rows:
        raise ValueError(f"dimension mismatch: {a.shape} @ {b.shape}")
    return GfMatrix(matmul_mod(a.to_numpy(), b.to_numpy(), a.d), a.d)


def solve_gf(a: GfMatrix, b: GfMatrix) -> GfMatrix | None:
    if a.d != b.d:
        raise ValueError("moduli differ")
    x = solve_mod(a.to_numpy(), b.to_numpy(), a.d)
    return None if x is None else GfMatrix(x, a.d)


def transpose(m: GfMatrix) -> GfMatrix:
    return m.T


def iter_rref(g: int, n: int, d: int) -> Iterator[np.ndarray]:
    """Yield every g x n reduced row-echelon matrix of rank g over Z_d.

    There are exactly binom(n, g)_d of them (one per g-dim subspace).
    """
    if not 0 <= g <= n:
        return
    for pivots in combinations(range(n), g):
        slots = [
            (i, c)
            for i, p in enumerate(pivots)
            for c in range(p + 1, n)
            if c not in pivots
        ]
        base = np.zeros((g, n), dtype=np.int64)
        for i, p in enumerate(pivots):
            base[i, p] = 1
        for values in product(range(d), repeat=len(slots)):
            m = base.copy()
            for (i, c), v in zip(slots, values):
                m[i, c] = v
            yield m
