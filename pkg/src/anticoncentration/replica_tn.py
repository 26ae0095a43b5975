"""Replica tensor network for the averaged brickwork circuit.

The k-replica average of a two-qudit Haar-Clifford gate is
    E[C^{k,k}] = sum_{pi,sigma} Wg_{pi sigma}(d^2) |pi pi>> <<sigma sigma|,
so its output on a pair of sites always lies in span{|pi pi>>}, and it
reads its input only through the overlaps <<sigma sigma|.

The MPS therefore has one unit per gated pair (and one per ungated
boundary site). Units are stored in orthonormal coordinates: the pair span
via the two-site Gram G(d^2), single sites via the rank-reduced G(d). A
layer contracts each unit with the <<sigma| functionals its sites feed
into, splits it between its two sites, and rebuilds new pair units through
Wg. A canonical sweep then truncates by discarded Schmidt weight, keeping
the components of <<f| and of every <<sigma|^N in the discarded space as
extra bond states so the readout and the conserved overlaps stay exact.

The first layer acting on a product input produces the replica Bell pairs
c_{pi pi} = sum_sigma Wg_{pi sigma}(d^2) z_a[sigma] z_b[sigma], with z the
purity covector of the input site (all ones for |0>). The readout uses
<<f|sigma>> = d per site.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .commutant import CommutantBasis, PurityTable, gram_matrix, weingarten_matrix
from .qanalog import LogValue

DEFAULT_CUTOFF = 1e-12
DEFAULT_BOND_CAP = 4096
ZIP_FACTOR = 1e-2  # zip-up truncates more gently than the canonical sweep


class BondCapExceeded(RuntimeError):
    pass


def _orthonormal_frame(g: np.ndarray):
    """P (r x n) and B (n x r) with B^T G B = 1 and P = B^T G on the range of G."""
    evals, evecs = np.linalg.eigh(g)
    keep = evals > 1e-12 * evals.max()
    lam, v = evals[keep], evecs[:, keep]
    return np.sqrt(lam)[:, None] * v.T, v / np.sqrt(lam)


@dataclass(frozen=True)
class BulkGate:
    """Averaged two-site gate and the basis data the contraction needs.

    ``kernel[pi, a, b]`` is the gate on commutant coefficients:
    c'_{pi pi} = sum_{a,b} kernel[pi, a, b] c_{a b}.
    """

    k: int
    d: int
    kernel: np.ndarray
    gram1: np.ndarray
    wg2: np.ndarray
    p1: np.ndarray  # <<e_i|sigma>>, single-site frame
    b1: np.ndarray
    p2: np.ndarray  # <<f_p|pi pi>>, pair frame
    b2: np.ndarray

    @property
    def d_eff(self) -> int:
        return self.kernel.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Dense d_eff^2 x d_eff^2 operator, rows (pi, pi'), columns (a, b)."""
        n = self.d_eff
        w = np.zeros((n, n, n, n))
        for p in range(n):
            w[p, p] = self.kernel[p]
        return w.reshape(n * n, n * n)

    @property
    def out_map(self) -> np.ndarray:
        """sigma-overlaps -> pair coordinates of the gate output."""
        return self.p2 @ self.wg2

    def readout(self, width: int) -> np.ndarray:
        if width == 2:
            return self.d**2 * self.b2.sum(axis=0)
        return self.d * self.b1.sum(axis=0)

    def protected(self, width: int) -> np.ndarray:
        """Rows: <<f| and every <<sigma| restricted to one unit, in unit coordinates."""
        if width == 2:
            sig = (self.gram1 * self.gram1) @ self.b2
        else:
            sig = self.p1.T
        return np.vstack([self.readout(width), sig])

    def overlaps(self, left: str, right: str) -> np.ndarray:
        """<<x y|f_p>> for a pair unit, x/y = 'sigma' (gated) or 'e' (kept)."""
        left_m = self.gram1 if left == "sigma" else self.p1
        right_m = self.gram1 if right == "sigma" else self.p1
        return np.einsum("np,an,bn->pab", self.b2, left_m, right_m)


def build_bulk_gate(basis: CommutantBasis, d: int | None = None, metric: str = "gram") -> BulkGate:
    if d is not None and d != basis.d:
        raise ValueError("basis modulus differs from d")
    g1 = gram_matrix(basis, 1).astype(float)
    wg2 = weingarten_matrix(basis, 2)
    kernel = np.einsum("ps,sa,sb->pab", wg2, g1, g1)
    p1, b1 = _orthonormal_frame(g1)
    if metric == "gram":
        p2, b2 = _orthonormal_frame(g1 * g1)
    else:
        p2 = b2 = np.eye(len(g1))
    return BulkGate(basis.k, basis.d, kernel, g1, wg2, p1, b1, p2, b2)


@dataclass
class ReplicaMps:
    """Units of one or two sites; tensors are (left, phys, right).

    ``widths[u]`` is the number of sites covered by unit u. The stored
    amplitudes times exp(log_scale) give the replica state.
    """

    tensors: list
    widths: list
    gate: BulkGate
    log_scale: float = 0.0
    max_bond_seen: int = 1

    @property
    def n_sites(self) -> int:
        return sum(self.widths)

    @property
    def d(self) -> int:
        return self.gate.d

    @property
    def bonds(self) -> list[int]:
        return [t.shape[2] for t in self.tensors[:-1]]

    def copy(self) -> "ReplicaMps":
        return ReplicaMps(
            [t.copy() for t in self.tensors], list(self.widths), self.gate, self.log_scale, self.max_bond_seen
        )

    def normalize(self) -> None:
        for i, t in enumerate(self.tensors):
            m = np.max(np.abs(t))
            if m > 0:
                self.tensors[i] = t / m
                self.log_scale += math.log(m)

    def log_d_ipr(self) -> float:
        """log_d E[I_k]: contract every unit with <<f|."""
        v = np.ones(1)
        acc = 0.0
        for t, w in zip(self.tensors, self.widths):
            v = v @ np.tensordot(t, self.gate.readout(w), axes=(1, 0))
            m = np.max(np.abs(v))
            v /= m
            acc += math.log(m)
        total = float(v[0])
        if not total > 0:
            raise FloatingPointError(f"contracted IPR is not positive ({total})")
        return (acc + math.log(total) + self.log_scale) / math.log(self.d)

    def compress(self, cutoff: float, bond_cap: int, protect: bool = True, left_canonical: bool = False) -> None:
        """Left-to-right QR, then right-to-left truncated SVD.

        With ``protect`` the discarded Schmidt space is not dropped outright:
        the projections of <<f|^N and every <<sigma|^N onto it are kept, so
        the readout and the conserved overlaps survive each truncation exactly.
        """
        ts = self.tensors
        n = len(ts)
        covs = [self.gate.protected(w) for w in self.widths]
        env_l = [np.ones((len(covs[0]), 1))]
        for i in range(n - 1):
            if not left_canonical:
                l, a, r = ts[i].shape
                q, rr = np.linalg.qr(ts[i].reshape(l * a, r))
                ts[i] = q.reshape(l, a, -1)
                ts[i + 1] = np.tensordot(rr, ts[i + 1], axes=(1, 0))
            env_l.append(np.einsum("xl,lar,xa->xr", env_l[i], ts[i], covs[i], optimize=True))
        env_r = np.ones((len(covs[0]), 1))
        for i in range(n - 1, 0, -1):
            l, a, r = ts[i].shape
            er = (covs[i][:, :, None] * env_r[:, None, :]).reshape(len(env_r), a * r)
            left, core, right = _protected_svd(ts[i].reshape(l, a * r), env_l[i], er, cutoff, bond_cap, protect)
            chi = right.shape[0]
            self.max_bond_seen = max(self.max_bond_seen, chi)
            ts[i] = right.reshape(chi, a, r)
            ts[i - 1] = np.tensordot(ts[i - 1], left @ core, axes=(2, 0))
            env_r = np.einsum("xa,lar,xr->xl", covs[i], ts[i], env_r, optimize=True)
        self.normalize()


def _orth(m: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the column span of m."""
    if m.size == 0:
        return np.zeros((m.shape[0], 0))
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    return u[:, s > 1e-13 * s[0]] if s[0] > 0 else u[:, :0]


def _site_vectors(N: int, basis: CommutantBasis, doped_sites: Mapping[int, PurityTable] | None):
    ones = np.ones(basis.size)
    out = [ones] * N
    for site, table in (doped_sites or {}).items():
        if not 0 <= site < N:
            raise ValueError(f"doped site {site} out of range")
        out[site] = np.asarray(table.zetas, dtype=float)
    return out


def initial_state(
    N: int,
    basis: CommutantBasis,
    doped_sites: Mapping[int, PurityTable] | None = None,
    gate: BulkGate | None = None,
) -> ReplicaMps:
    """Product of replica Bell pairs on (0,1), (2,3), ...: the state after layer 0."""
    if N < 2 or N % 2:
        raise ValueError("N must be even and >= 2")
    gate = gate or build_bulk_gate(basis)
    vecs = _site_vectors(N, basis, doped_sites)
    tensors = []
    for j in range(0, N, 2):
        coeff = gate.wg2 @ (vecs[j] * vecs[j + 1])
        tensors.append((gate.p2 @ coeff)[None, :, None])
    mps = ReplicaMps(tensors, [2] * (N // 2), gate)
    mps.normalize()
    return mps


def _keep(s: np.ndarray, cutoff: float) -> int:
    """Smallest chi whose discarded weight sum_{i >= chi} s_i^2 is <= cutoff * sum s_i^2."""
    w = s**2
    tail = np.cumsum(w[::-1])[::-1]  # tail[i] = sum_{j >= i} w_j
    return max(1, int(np.sum(tail > cutoff * tail[0])))


def _protected_svd(mat, env_l, env_r, cutoff: float, bond_cap: int, protect: bool = True):
    """Truncated SVD mat ~ L @ core @ R that keeps env_l @ mat @ env_r.T exact.

    env_l (n_x, rows) and env_r (n_x, cols) are the protected covectors seen
    from both sides of the cut. Their components in the discarded singular
    space are kept as extra bond states, so every protected scalar
    sum_ij env_l[x, i] mat[i, j] env_r[x, j] is unchanged. L has orthonormal
    columns and R orthonormal rows.
    """
    u, s, vh = np.linalg.svd(mat, full_matrices=False)
    chi = _keep(s, cutoff)
    left, right, core = u[:, :chi], vh[:chi], np.diag(s[:chi])
    if protect and chi < len(s):
        ul = _orth(u[:, chi:].T @ env_l.T)
        vr = _orth(vh[chi:] @ env_r.T)
        left = np.hstack([left, u[:, chi:] @ ul])
        right = np.vstack([right, vr.T @ vh[chi:]])
        extra = (ul.T * s[chi:]) @ vr
        core = np.block([[core, np.zeros((chi, extra.shape[1]))], [np.zeros((extra.shape[0], chi)), extra]])
    if max(core.shape) > bond_cap:
        raise BondCapExceeded(f"bond dimension {max(core.shape)} exceeds cap {bond_cap}")
    return left, core, right


def apply_layer(
    mps: ReplicaMps,
    gate: BulkGate,
    parity: int,
    cutoff: float = DEFAULT_CUTOFF,
    bond_cap: int = DEFAULT_BOND_CAP,
    protect: bool = True,
) -> None:
    """Apply one brickwork layer: gates on (i, i+1) for i = parity, parity+2, ...

    Zip-up sweep: a carry matrix absorbs the old units site by site. A pair
    unit factorizes exactly through its pi label, so its left site leaves
    (pi, right bond) pending for the right site. Each finished new unit is
    split off with a protected truncated SVD (right environments come from
    one reverse pass), then a canonical sweep truncates at ``cutoff``.
    """
    N = mps.n_sites
    gated = np.zeros(N, dtype=bool)
    for i in range(parity, N - 1, 2):
        gated[i] = gated[i + 1] = True
    g1, p1, b2 = gate.gram1, gate.p1, gate.b2
    out_map = gate.out_map
    # site -> (unit tensor, position in unit)
    sites = []
    for t, w in zip(mps.tensors, mps.widths):
        sites += [(t, q) for q in range(w)] if w == 2 else [(t, None)]
    plan = []  # first site of every new unit
    s = 0
    while s < N:
        plan.append(s)
        s += 2 if gated[s] else 1
    covs = [gate.protected(2 if gated[s] else 1) for s in plan]

    def first(carry, s):
        """carry (rows, *pending) -> (rows, leg, *new pending) for site s."""
        t, pos = sites[s]
        x = g1 if gated[s] else p1  # leg row -> pi
        if pos is None:
            v = np.tensordot(carry, t, axes=(1, 0))
            return v if not gated[s] else np.einsum("mir,is->msr", v, p1, optimize=True)
        if pos == 0:
            v = np.tensordot(carry, np.einsum("lpr,np->lnr", t, b2), axes=(1, 0))
            return x[None, :, :, None] * v[:, None, :, :]
        return np.einsum("mnr,xn->mxr", carry, x, optimize=True)

    def second(a, s):
        """a (rows, sigma, *pending) -> (rows, sigma, *new pending), same sigma on site s."""
        t, pos = sites[s]
        if pos is None:
            return np.einsum("msl,lir,is->msr", a, t, p1, optimize=True)
        if pos == 0:
            v = np.tensordot(a, np.einsum("lpr,np->lnr", t, b2), axes=(2, 0))
            return v * g1[None, :, :, None]
        return np.einsum("msnr,sn->msr", a, g1, optimize=True)

    def pull(e, u):
        """Environment of new units u, u+1, ... on the pending index before unit u."""
        s, c = plan[u], covs[u]
        t, pos = sites[s]
        if not gated[s]:
            if pos is None:
                return np.einsum("lir,xi,xr->xl", t, c, e, optimize=True)
            if pos == 0:
                return np.einsum("xi,in,np,lpr,xnr->xl", c, p1, b2, t, e, optimize=True)
            return np.einsum("xi,in,xr->xnr", c, p1, e, optimize=True)
        w = c @ out_map
        t2, pos2 = sites[s + 1]
        if pos2 is None:
            f = np.einsum("lir,is,xr->xsl", t2, p1, e, optimize=True)
        elif pos2 == 0:
            f = np.einsum("sn,np,lpr,xnr->xsl", g1, b2, t2, e, optimize=True)
        else:
            f = g1[None, :, :, None] * e[:, None, None, :]
        if pos is None:
            return np.einsum("xs,lir,is,xsr->xl", w, t, p1, f, optimize=True)
        if pos == 0:
            return np.einsum("xs,sn,np,lpr,xsnr->xl", w, g1, b2, t, f, optimize=True)
        return np.einsum("xs,sn,xsr->xnr", w, g1, f, optimize=True)

    n_x = len(covs[0])
    env_r = [None] * len(plan)
    e = np.ones((n_x, 1))
    for u in range(len(plan) - 1, 0, -1):
        e = pull(e, u)
        env_r[u - 1] = e

    carry = np.ones((1, 1))
    env_l = np.ones((n_x, 1))
    tensors, widths = [], []
    for u, s in enumerate(plan):
        rows = carry.shape[0]
        if gated[s]:
            a = first(carry, s)
            v = np.einsum("ps,ms...->mp...", out_map, second(a, s + 1), optimize=True)
            widths.append(2)
        else:
            v = first(carry, s)
            widths.append(1)
        m, phys = v.shape[:2]
        pend = v.shape[2:]
        if u == len(plan) - 1:
            tensors.append(v.reshape(m, phys, 1))
            break
        el = (env_l[:, :, None] * covs[u][:, None, :]).reshape(n_x, m * phys)
        left, core, right = _protected_svd(
            v.reshape(m * phys, -1), el, env_r[u].reshape(n_x, -1), cutoff * ZIP_FACTOR, bond_cap, protect
        )
        tensors.append(left.reshape(m, phys, -1))
        env_l = el @ left
        carry = (core @ right).reshape(-1, *pend)
    mps.tensors, mps.widths = tensors, widths
    mps.compress(cutoff, bond_cap, protect, left_canonical=True)


def evolve(
    mps: ReplicaMps,
    gate: BulkGate,
    depth: int,
    cutoff: float = DEFAULT_CUTOFF,
    bond_cap: int = DEFAULT_BOND_CAP,
) -> list[tuple[int, float]]:
    """Series of (t, log_d E[I_k]) for t = 0..depth.

    Depth t means layers s = 0..t; layer s acts on pairs (i, i+1) with
    i = s mod 2. The input state already holds layer 0. The MPS is modified
    in place.
    """
    if not 0 <= cutoff <= 1e-8:
        raise ValueError("cutoff must lie in [0, 1e-8]")
    if depth < 0:
        raise ValueError("depth must be >= 0")
    out = [(0, mps.log_d_ipr())]
    for t in range(1, depth + 1):
        apply_layer(mps, gate, t % 2, cutoff, bond_cap)
        out.append((t, mps.log_d_ipr()))
    return out


def delta_s3(series: Sequence[tuple[int, float]], reference: LogValue | float) -> list[float]:
    """log_d(reference) - log_d E[I_k](t) for every entry of the series.

    A float reference is read as its base-d logarithm already.
    """
    ref = reference.log_d if isinstance(reference, LogValue) else float(reference)
    return [ref - v for _, v in series]


def leading_doping(table: PurityTable, n_t: int) -> dict:
    """Doping map with the first n_t sites in the given state."""
    return {i: table for i in range(n_t)}


# ---------------------------------------------------------------------------
# independent k = 2 oracle (two permutations, no commutant machinery)


def k2_transfer_series(N: int, d: int, depth: int) -> list[tuple[int, float]]:
    """Dense evolution over {identity, swap}^N with hand-built Gram/Weingarten."""
    if N % 2 or N > 24:
        raise ValueError("oracle needs even N <= 24")
    g1 = np.array([[d**2, d], [d, d**2]], dtype=float)
    wg2 = np.linalg.inv(np.array([[d**4, d**2], [d**2, d**4]], dtype=float))
    kern = np.einsum("ps,sa,sb->pab", wg2, g1, g1)
    pair = np.zeros((2, 2))
    pair[np.arange(2), np.arange(2)] = wg2.sum(axis=1)
    c = pair
    for _ in range(N // 2 - 1):
        c = np.multiply.outer(c, pair)
    c = c.reshape((2,) * N)
    log_scale = 0.0

    def readout(c, log_scale):
        return (math.log(c.sum()) + log_scale) / math.log(d) + N

    out = [(0, readout(c, log_scale))]
    for t in range(1, depth + 1):
        start = t % 2
        for i in range(start, N - 1, 2):
            c = np.moveaxis(c, (i, i + 1), (0, 1))
            new = np.einsum("pab,ab...->p...", kern, c)
            c = np.zeros_like(c)
            c[0, 0] = new[0]
            c[1, 1] = new[1]
            c = np.moveaxis(c, (0, 1), (i, i + 1))
        m = np.max(np.abs(c))
        c = c / m
        log_scale += math.log(m)
        out.append((t, readout(c, log_scale)))
    return out
