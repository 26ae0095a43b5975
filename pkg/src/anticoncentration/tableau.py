"""Stabilizer tableaus over prime qudits.

Pauli conventions: X = sum_m |m><m+1|, Z = sum_m w^m |m><m| with
w = exp(-2 pi i / d), so that XZ = w ZX. A Pauli string is stored as a
triple (phi, a, b) meaning zeta^phi X^a Z^b, where zeta = exp(-2 pi i / D)
and D = 4 for qubits, D = d otherwise. Hence w = zeta^s with s = D / d.

Symplectic vectors are ordered (a_1..a_n, b_1..b_n) and the form is
<v, v'> = a.b' - b.a'; with it, P P' = w^<v,v'> P' P.

A :class:`CliffordGate` stores the images of X_1..X_n, Z_1..Z_n as the
columns of its symplectic matrix plus one phase per column.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .gfd import GfMatrix, inverse_table, kernel_mod, rank_mod, solve_mod

MAX_DENSE_DIM = 4096


def phase_order(d: int) -> int:
    return 4 if d == 2 else d


def phase_scale(d: int) -> int:
    return phase_order(d) // d


def zeta(d: int) -> complex:
    return np.exp(-2j * np.pi / phase_order(d))


def symplectic_form(n: int, d: int) -> np.ndarray:
    j = np.zeros((2 * n, 2 * n), dtype=np.int64)
    j[:n, n:] = np.eye(n, dtype=np.int64)
    j[n:, :n] = (d - 1) * np.eye(n, dtype=np.int64)
    return j


def symp_inner(u: np.ndarray, v: np.ndarray, d: int) -> int:
    n = len(u) // 2
    return int((u[:n] @ v[n:] - u[n:] @ v[:n]) % d)


def is_symplectic(m: np.ndarray, d: int) -> bool:
    n = m.shape[0] // 2
    j = symplectic_form(n, d)
    return bool(np.array_equal((m.T @ j @ m) % d, j))


def pauli_mul(p, q, d: int):
    """Product of two Paulis given as (phi, a, b); arrays may be stacked over rows."""
    phi, a, b = p
    psi, a2, b2 = q
    D = phase_order(d)
    s = phase_scale(d)
    cross = np.sum(np.asarray(b) * np.asarray(a2), axis=-1)
    return (
        np.mod(phi + psi - s * cross, D),
        np.mod(np.asarray(a) + a2, d),
        np.mod(np.asarray(b) + b2, d),
    )


def pauli_pow(p, e: int, d: int):
    phi, a, b = p
    out = (0, np.zeros_like(a), np.zeros_like(b))
    for _ in range(e % d):
        out = pauli_mul(out, p, d)
    return out


# ---------------------------------------------------------------------------
# domain types


@dataclass
class StabilizerTableau:
    """Generators zeta^phases[j] X^x[j] Z^z[j] of a pure stabilizer state.

    Rows are generators. The arrays are mutable and owned by one trajectory.
    """

    n: int
    d: int
    phases: np.ndarray
    x: np.ndarray
    z: np.ndarray

    @classmethod
    def zero_state(cls, n: int, d: int) -> "StabilizerTableau":
        return cls(
            n,
            d,
            np.zeros(n, dtype=np.int64),
            np.zeros((n, n), dtype=np.int64),
            np.eye(n, dtype=np.int64),
        )

    @classmethod
    def basis_state(cls, digits: Sequence[int], d: int) -> "StabilizerTableau":
        """|y> is stabilized by w^{-y_j} Z_j."""
        y = np.mod(np.asarray(digits, dtype=np.int64), d)
        t = cls.zero_state(len(y), d)
        t.phases = np.mod(-phase_scale(d) * y, phase_order(d))
        return t

    @classmethod
    def plus_state(cls, n: int, d: int) -> "StabilizerTableau":
        return cls(
            n,
            d,
            np.zeros(n, dtype=np.int64),
            np.eye(n, dtype=np.int64),
            np.zeros((n, n), dtype=np.int64),
        )

    @property
    def x_block(self) -> GfMatrix:
        return GfMatrix(self.x, self.d)

    @property
    def z_block(self) -> GfMatrix:
        return GfMatrix(self.z, self.d)

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.n, self.d, self.phases.copy(), self.x.copy(), self.z.copy())

    def row(self, j: int):
        return (int(self.phases[j]), self.x[j].copy(), self.z[j].copy())

    def check_invariants(self) -> None:
        d = self.d
        if rank_mod(np.hstack([self.x, self.z]), d) != self.n:
            raise ValueError("generators are not independent")
        comm = (self.x @ self.z.T - self.z @ self.x.T) % d
        if np.any(comm):
            raise ValueError("generators do not commute")

    def canonical(self) -> tuple:
        """Hashable canonical form: reduced generators of the stabilizer group."""
        rows = canonical_generators(self)
        return tuple((int(p), tuple(a.tolist()), tuple(b.tolist())) for p, a, b in rows)


def canonical_generators(t: StabilizerTableau):
    """Gauss-Jordan on [x|z] carried out with group multiplication, so phases follow."""
    d, n = t.d, t.n
    inv = inverse_table(d)
    rows = [t.row(j) for j in range(n)]
    vec = lambda r: np.concatenate([r[1], r[2]])
    r = 0
    for col in range(2 * n):
        piv = next((i for i in range(r, n) if vec(rows[i])[col] % d), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        lead = int(vec(rows[r])[col])
        if lead != 1:
            rows[r] = pauli_pow(rows[r], int(inv[lead]), d)
        for i in range(n):
            c = int(vec(rows[i])[col])
            if i != r and c:
                rows[i] = pauli_mul(rows[i], pauli_pow(rows[r], d - c, d), d)
        r += 1
    return [(int(p), np.asarray(a), np.asarray(b)) for p, a, b in rows]


@dataclass(frozen=True)
class CliffordGate:
    """Clifford on n_sites qudits in tableau-action form.

    Column j of ``symplectic`` (j < n) is the (a, b) vector of C X_j C^dag,
    column n + j that of C Z_j C^dag; ``phase_vector`` holds their phases.
    """

    n_sites: int
    d: int
    symplectic: np.ndarray
    phase_vector: np.ndarray

    def __post_init__(self):
        m = np.mod(np.asarray(self.symplectic, dtype=np.int64), self.d)
        p = np.mod(np.asarray(self.phase_vector, dtype=np.int64), phase_order(self.d))
        if m.shape != (2 * self.n_sites, 2 * self.n_sites) or p.shape != (2 * self.n_sites,):
            raise ValueError("gate data has the wrong shape")
        if not is_symplectic(m, self.d):
            raise ValueError("matrix is not symplectic")
        if self.d == 2:
            n = self.n_sites
            ab = np.sum(m[:n] * m[n:], axis=0) % 2
            if np.any((p - ab) % 2):
                raise ValueError("qubit image phases must match a.b mod 2")
        m.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "symplectic", m)
        object.__setattr__(self, "phase_vector", p)

    @classmethod
    def identity(cls, n: int, d: int) -> "CliffordGate":
        return cls(n, d, np.eye(2 * n, dtype=np.int64), np.zeros(2 * n, dtype=np.int64))

    def image(self, j: int):
        n = self.n_sites
        col = self.symplectic[:, j]
        return (int(self.phase_vector[j]), col[:n].copy(), col[n:].copy())

    def __eq__(self, other):
        if not isinstance(other, CliffordGate):
            return NotImplemented
        return (
            self.d == other.d
            and np.array_equal(self.symplectic, other.symplectic)
            and np.array_equal(self.phase_vector, other.phase_vector)
        )

    def __hash__(self):
        return hash((self.d, self.symplectic.tobytes(), self.phase_vector.tobytes()))


@dataclass(frozen=True)
class CircuitArchitecture:
    n: int
    d: int
    layers: tuple
    kind: str = "custom"

    def __post_init__(self):
        layers = tuple(tuple(tuple(int(s) for s in sup) for sup in layer) for layer in self.layers)
        for layer in layers:
            seen: set[int] = set()
            for sup in layer:
                if list(sup) != list(range(sup[0], sup[0] + len(sup))):
                    raise ValueError(f"support {sup} is not contiguous")
                if sup[0] < 0 or sup[-1] >= self.n:
                    raise ValueError(f"support {sup} out of range")
                if seen & set(sup):
                    raise ValueError("supports within a layer overlap")
                seen |= set(sup)
        object.__setattr__(self, "layers", layers)

    def layer(self, s: int):
        return self.layers[s % len(self.layers)]

    @property
    def period(self) -> int:
        return len(self.layers)


@dataclass(frozen=True)
class OverlapSample:
    """Overlap of a stabilizer state with |0...0>: w = d^{n-g} or 0."""

    n: int
    d: int
    g: int
    in_support: bool

    @property
    def log_w(self) -> float:
        return float(self.n - self.g) if self.in_support else float("-inf")

    @property
    def w(self) -> int:
        return self.d ** (self.n - self.g) if self.in_support else 0

    @property
    def probability(self) -> float:
        """|<0|psi>|^2."""
        return float(self.d) ** (-self.g) if self.in_support else 0.0


# ---------------------------------------------------------------------------
# random Cliffords


def _unit(i: int, n: int) -> np.ndarray:
    v = np.zeros(2 * n, dtype=np.int64)
    v[i] = 1
    return v


def _transvect(m: np.ndarray, h: np.ndarray, lam: int, d: int) -> None:
    """Apply v -> v + lam <v, h> h to every column of m, in place."""
    n = m.shape[0] // 2
    coef = (m[:n].T @ h[n:] - m[n:].T @ h[:n]) % d
    m += np.outer(h, (lam * coef) % d)
    m %= d


def _map_vector(x: np.ndarray, y: np.ndarray, support: np.ndarray, d: int) -> list:
    """Transvections (h, lam) taking x to y; both nonzero and supported on ``support``."""
    inv = inverse_table(d)
    if np.array_equal(x, y):
        return []
    w = symp_inner(x, y, d)
    if w:
        return [((y - x) % d, int(inv[w]))]
    n = len(x) // 2
    # find t with <x,t> != 0 and <t,y> != 0 inside the support
    def functional(v):
        f = np.concatenate([(d - v[n:]) % d, v[:n]])  # <v, t> = f . t
        return f[support]

    fx, fy = functional(x), functional(y)
    sol = solve_mod(np.vstack([fx, fy]), np.array([1, 1]), d)
    if sol is None:
        sol = solve_mod(fx[None, :], np.array([1]), d)
    t = np.zeros_like(x)
    t[support] = sol
    out = [((t - x) % d, int(inv[symp_inner(x, t, d)]))]
    out.append(((y - t) % d, int(inv[symp_inner(t, y, d)])))
    return out


def random_symplectic(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform element of Sp(2n, Z_d) as an integer matrix acting on columns.

    Built as M = T_0 T_1 ... T_{n-1}, where T_i acts on the pairs >= i and
    sends (X_i, Z_i) to a uniformly random symplectic pair (u, w) there.
    """
    inv = inverse_table(d)
    m = np.eye(2 * n, dtype=np.int64)
    for i in range(n - 1, -1, -1):
        support = np.r_[i:n, n + i : 2 * n]
        u = np.zeros(2 * n, dtype=np.int64)
        while not u.any():
            u[support] = rng.integers(0, d, size=support.size)
        # w uniform among vectors with <u, w> = 1
        w = np.zeros(2 * n, dtype=np.int64)
        w[support] = rng.integers(0, d, size=support.size)
        j = int(np.flatnonzero(u[support])[0])
        pos = support[j]
        h0 = np.zeros(2 * n, dtype=np.int64)
        if pos < n:
            h0[n + pos] = inv[u[pos]]
        else:
            h0[pos - n] = (-inv[u[pos]]) % d
        w = (w + (1 - symp_inner(u, w, d)) * h0) % d

        moves = _map_vector(_unit(i, n), u, support, d)
        zp = _unit(n + i, n)
        for h, lam in moves:
            zp = (zp + lam * symp_inner(zp, h, d) * h) % d
        if not np.array_equal(zp, w):
            c = symp_inner(zp, w, d)
            if c:
                moves.append(((w - zp) % d, int(inv[c])))
            else:
                t = (u + zp) % d
                moves.append((u.copy(), int(inv[symp_inner(zp, t, d)])))
                moves.append(((w - t) % d, int(inv[symp_inner(t, w, d)])))
        # T_i = tau_last ... tau_first; prepend to M
        for h, lam in moves:
            _transvect(m, h, lam, d)
    return m


def random_phases(m: np.ndarray, d: int, rng: np.random.Generator) -> np.ndarray:
    n = m.shape[0] // 2
    if d == 2:
        ab = np.sum(m[:n] * m[n:], axis=0) % 2
        return ab + 2 * rng.integers(0, 2, size=2 * n)
    return rng.integers(0, d, size=2 * n)


def random_clifford(n_sites: int, d: int, rng: np.random.Generator) -> CliffordGate:
    """Uniform Clifford on n_sites qudits, modulo global phase."""
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    m = random_symplectic(n_sites, d, rng)
    return CliffordGate(n_sites, d, m, random_phases(m, d, rng))


# ---------------------------------------------------------------------------
# named gates, extracted from their matrix forms


def pauli_x(d: int) -> np.ndarray:
    x = np.zeros((d, d), dtype=complex)
    x[np.arange(d), (np.arange(d) + 1) % d] = 1
    return x


def pauli_z(d: int) -> np.ndarray:
    return np.diag(np.exp(-2j * np.pi * np.arange(d) / d))


def named_matrix(name: str, d: int) -> np.ndarray:
    w = np.exp(-2j * np.pi / d)
    m = np.arange(d)
    if name == "H":
        return w ** np.outer(m, m) / np.sqrt(d)
    if name == "S":
        if d == 2:
            return np.diag([1, 1j])
        return np.diag(w ** (m * (m - 1) * (d + 1) // 2))
    if name == "CADD":
        u = np.zeros((d * d, d * d), dtype=complex)
        for a in range(d):
            for b in range(d):
                u[a * d + (a + b) % d, a * d + b] = 1
        return u
    raise ValueError(f"unknown gate {name!r}")


def pauli_matrix(p, d: int) -> np.ndarray:
    phi, a, b = p
    x, z = pauli_x(d), pauli_z(d)
    out = np.array([[1.0 + 0j]])
    for ai, bi in zip(np.asarray(a).tolist(), np.asarray(b).tolist()):
        out = np.kron(out, np.linalg.matrix_power(x, ai) @ np.linalg.matrix_power(z, bi))
    return zeta(d) ** int(phi) * out


def identify_pauli(q: np.ndarray, n: int, d: int, atol: float = 1e-9):
    """Return (phi, a, b) with q = zeta^phi X^a Z^b, or raise."""
    # <y - a| X^a Z^b |y> = w^{b.y}: row 0 pins a, unit steps pin b
    col = int(np.flatnonzero(np.abs(q[0]) > 0.5)[0])
    a = np.array([(col // d ** (n - 1 - j)) % d for j in range(n)], dtype=np.int64)
    w = np.exp(-2j * np.pi / d)
    b = np.zeros(n, dtype=np.int64)
    for j in range(n):
        step = d ** (n - 1 - j)
        ratio = q[step, (col + step) if a[j] + 1 < d else (col + step - d * step)] / q[0, col]
        b[j] = int(np.argmin(np.abs(w ** np.arange(d) - ratio)))
    c = q[0, col] * w ** (-int(b @ a))
    D = phase_order(d)
    phi = int(np.argmin(np.abs(zeta(d) ** np.arange(D) - c)))
    p = (phi, a, b)
    if not np.allclose(pauli_matrix(p, d), q, atol=atol):
        raise ValueError("matrix is not a Pauli string")
    return p


def clifford_from_unitary(u: np.ndarray, d: int) -> CliffordGate:
    n = int(round(np.log(u.shape[0]) / np.log(d)))
    m = np.zeros((2 * n, 2 * n), dtype=np.int64)
    ph = np.zeros(2 * n, dtype=np.int64)
    for j in range(2 * n):
        gen = np.zeros(2 * n, dtype=np.int64)
        gen[j] = 1
        q = u @ pauli_matrix((0, gen[:n], gen[n:]), d) @ u.conj().T
        phi, a, b = identify_pauli(q, n, d)
        m[:n, j], m[n:, j], ph[j] = a, b, phi
    return CliffordGate(n, d, m, ph)


@lru_cache(maxsize=None)
def named_gate(name: str, d: int) -> CliffordGate:
    """Tableau action of H, S or CADD, read off their matrix forms."""
    return clifford_from_unitary(named_matrix(name, d), d)


# ---------------------------------------------------------------------------
# gate application


def _power_tables(gate: CliffordGate):
    """phase/a/b of (image_j)^e for every generator j and exponent e."""
    d, n = gate.d, gate.n_sites
    ph = np.zeros((2 * n, d), dtype=np.int64)
    av = np.zeros((2 * n, d, n), dtype=np.int64)
    bv = np.zeros((2 * n, d, n), dtype=np.int64)
    for j in range(2 * n):
        img = gate.image(j)
        cur = (0, np.zeros(n, dtype=np.int64), np.zeros(n, dtype=np.int64))
        for e in range(d):
            ph[j, e], av[j, e], bv[j, e] = cur
            cur = pauli_mul(cur, img, d)
    return ph, av, bv


def apply_gate(t: StabilizerTableau, gate: CliffordGate, sites: Sequence[int]) -> StabilizerTableau:
    """Conjugate every generator by ``gate`` acting on ``sites`` (in place)."""
    sites = list(sites)
    m = gate.n_sites
    if len(sites) != m or gate.d != t.d:
        raise ValueError("gate does not match the support")
    if sites != list(range(sites[0], sites[0] + m)) or sites[0] < 0 or sites[-1] >= t.n:
        raise ValueError(f"bad support {sites}")
    d = t.d
    D = phase_order(d)
    s = phase_scale(d)
    lo, hi = sites[0], sites[0] + m
    exps = np.hstack([t.x[:, lo:hi], t.z[:, lo:hi]])
    ph, av, bv = _power_tables(gate)
    phi = np.zeros(t.n, dtype=np.int64)
    a = np.zeros((t.n, m), dtype=np.int64)
    b = np.zeros((t.n, m), dtype=np.int64)
    for j in range(2 * m):
        e = exps[:, j]
        a2, b2 = av[j, e], bv[j, e]
        phi += ph[j, e] - s * np.sum(b * a2, axis=1)
        a = (a + a2) % d
        b = (b + b2) % d
    t.phases = (t.phases + phi) % D
    t.x[:, lo:hi] = a
    t.z[:, lo:hi] = b
    return t


def participation_entropy(t: StabilizerTableau) -> int:
    """g = rank of the X block over Z_d."""
    return rank_mod(t.x, t.d)


def z_subgroup_phases(t: StabilizerTableau) -> list[int]:
    """Phases of group elements built from a basis of Z-only combinations."""
    d = t.d
    ker = kernel_mod(t.x.T, d)
    out = []
    for c in ker:
        acc = (0, np.zeros(t.n, dtype=np.int64), np.zeros(t.n, dtype=np.int64))
        for j in np.flatnonzero(c):
            acc = pauli_mul(acc, pauli_pow(t.row(j), int(c[j]), d), d)
        assert not np.any(acc[1])
        out.append((int(acc[0]), acc[2]))
    return out


def overlap_zero(t: StabilizerTableau) -> OverlapSample:
    """Rescaled overlap with |0...0> via the character of the Z-only subgroup.

    <0|psi><psi|0> = d^-n sum over Z-only stabilizers of their phase, which is
    d^-g if every Z-only element acts as +1 on |0> and 0 otherwise.
    """
    g = participation_entropy(t)
    elems = z_subgroup_phases(t)
    ok = all(p == 0 for p, _ in elems)
    if ok and t.d == 2:
        # the phase map is a homomorphism, so pairs add nothing; kept as a guard
        for i in range(len(elems)):
            for j in range(i + 1, len(elems)):
                zero = np.zeros_like(elems[i][1])
                p = pauli_mul((elems[i][0], zero, elems[i][1]), (elems[j][0], zero, elems[j][1]), 2)
                if p[0] != 0:
                    ok = False
    return OverlapSample(t.n, t.d, g, ok)


# ---------------------------------------------------------------------------
# architectures


def staircase_architecture(N: int, r: int, d: int) -> CircuitArchitecture:
    """N - r sequential (r+1)-site gates: the CRMPS circuit."""
    if not 1 <= r <= N - 1:
        raise ValueError("need 1 <= r <= N-1")
    layers = [(tuple(range(s, s + r + 1)),) for s in range(N - r)]
    return CircuitArchitecture(N, d, tuple(layers), "staircase")


def glued_architecture(N: int, r: int, d: int) -> CircuitArchitecture:
    """Staircase over r-site blocks: gates on blocks (j, j+1), j = 0..N/r - 2."""
    if r < 1 or N % r or N < 2 * r:
        raise ValueError("glued geometry needs r | N and N >= 2r")
    layers = [(tuple(range(j * r, (j + 2) * r)),) for j in range(N // r - 1)]
    return CircuitArchitecture(N, d, tuple(layers), "glued")


def brickwork_architecture(N: int, d: int) -> CircuitArchitecture:
    even = tuple((i, i + 1) for i in range(0, N - 1, 2))
    odd = tuple((i, i + 1) for i in range(1, N - 1, 2))
    return CircuitArchitecture(N, d, (even, odd), "brickwork")


def run_architecture(
    arch: CircuitArchitecture,
    initial: StabilizerTableau,
    rng: np.random.Generator,
    depth: int | None = None,
) -> StabilizerTableau:
    """Apply fresh uniform random gates layer by layer (on a copy of ``initial``).

    ``depth`` defaults to one pass over the listed layers; larger values cycle.
    """
    if arch.n != initial.n or arch.d != initial.d:
        raise ValueError("architecture and tableau disagree on n or d")
    t = initial.copy()
    if depth is None:
        depth = arch.period
    for s in range(depth):
        for sup in arch.layer(s):
            apply_gate(t, random_clifford(len(sup), t.d, rng), sup)
    return t


# ---------------------------------------------------------------------------
# dense oracle


def gate_unitary(gate: CliffordGate) -> np.ndarray:
    """A unitary realizing the gate's tableau action (fixed up to global phase).

    U|0> is the joint +1 eigenvector of the images of Z_j, and
    U|x> = prod_j (C X_j C^dag)^{-x_j} U|0>.
    """
    d, n = gate.d, gate.n_sites
    dim = d**n
    if dim > MAX_DENSE_DIM:
        raise ValueError(f"dense dimension {dim} exceeds {MAX_DENSE_DIM}")
    xs = [pauli_matrix(gate.image(j), d) for j in range(n)]
    zs = [pauli_matrix(gate.image(n + j), d) for j in range(n)]
    v = np.random.default_rng(0).normal(size=dim) + 1j * np.random.default_rng(1).normal(size=dim)
    for z in zs:
        acc = np.zeros(dim, dtype=complex)
        cur = v
        for _ in range(d):
            acc += cur
            cur = z @ cur
        v = acc / d
    v /= np.linalg.norm(v)
    k = int(np.argmax(np.abs(v) > 1e-9))
    v *= np.abs(v[k]) / v[k]
    xinv = [np.linalg.matrix_power(x, d - 1) for x in xs]
    u = np.zeros((dim, dim), dtype=complex)
    u[:, 0] = v
    for idx in range(1, dim):
        # lower the last nonzero digit by one to reach an already built column
        j = n - 1
        while (idx // d ** (n - 1 - j)) % d == 0:
            j -= 1
        prev = idx - d ** (n - 1 - j)
        u[:, idx] = xinv[j] @ u[:, prev]
    return u


def embed(u: np.ndarray, sites: Sequence[int], n: int, d: int) -> np.ndarray:
    lo = sites[0]
    hi = n - lo - len(sites)
    return np.kron(np.kron(np.eye(d**lo), u), np.eye(d**hi))


def apply_dense(state: np.ndarray, u: np.ndarray, sites: Sequence[int], n: int, d: int) -> np.ndarray:
    """Apply a local unitary to the leading axis of ``state`` (vector or matrix)."""
    lo, m = sites[0], len(sites)
    tail = state.shape[1:]
    s = state.reshape((d**lo, d**m, d ** (n - lo - m)) + tail)
    s = np.einsum("ij,ajb...->aib...", u, s)
    return s.reshape(state.shape)


def circuit_to_unitary(gates: Iterable, n: int, d: int) -> np.ndarray:
    """Dense unitary of a sequence of (CliffordGate, sites), first gate applied first."""
    dim = d**n
    if dim > MAX_DENSE_DIM:
        raise ValueError(f"dense dimension {dim} exceeds {MAX_DENSE_DIM}")
    u = np.eye(dim, dtype=complex)
    for gate, sites in gates:
        u = apply_dense(u, gate_unitary(gate), list(sites), n, d)
    return u
