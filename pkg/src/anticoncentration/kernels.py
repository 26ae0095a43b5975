"""Compiled qubit sampling kernels.

Only the X/Z exponent blocks are tracked (phases do not affect g). The
tableau is stored transposed and bit-sliced: for every site s there is one
row-bitmask word array for the X coordinate and one for the Z coordinate,
so a gate on m sites is a 2m x 2m GF(2) matrix acting on 2m word arrays.

Local symplectic vectors on m <= 32 sites are uint64 masks with bit i for
a_i and bit m + i for b_i. Gate matrices are lists of 2m column masks
(column j is the image of generator j), matching ``CliffordGate``.

Randomness comes from splitmix64, seeded per chunk by the caller.
"""

from __future__ import annotations

import numba as nb
import numpy as np
from numba.extending import intrinsic

MAX_LOCAL = 32

_U64 = nb.uint64


@nb.njit(cache=True, inline="always")
def _splitmix(state):
    z = state[0] + _U64(0x9E3779B97F4A7C15)
    state[0] = z
    z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
    return z ^ (z >> _U64(31))


@intrinsic
def _popcount(typingctx, x):
    sig = nb.uint64(nb.uint64)

    def codegen(context, builder, signature, args):
        return builder.ctpop(args[0])

    return sig, codegen


@nb.njit(cache=True, inline="always")
def _parity(x):
    return _popcount(x) & _U64(1)


@nb.njit(cache=True, inline="always")
def _swap(v, m, low):
    return ((v >> _U64(m)) & low) | ((v & low) << _U64(m))


@nb.njit(cache=True, inline="always")
def _lowbit(v):
    return v & (~v + _U64(1))


@nb.njit(cache=True)
def _transvect_cols(cols, nc, h, m, low):
    sh = _swap(h, m, low)
    for j in range(nc):
        if _parity(cols[j] & sh):
            cols[j] ^= h


@nb.njit(cache=True)
def random_symplectic_d2(m, state, cols):
    """Fill cols[:2m] with a uniform element of Sp(2m, 2) (column masks)."""
    low = (_U64(1) << _U64(m)) - _U64(1)
    for j in range(m):
        cols[j] = _U64(1) << _U64(j)
        cols[m + j] = _U64(1) << _U64(m + j)
    hs = np.empty(4, dtype=np.uint64)
    for i in range(m - 1, -1, -1):
        sup_low = low & ~((_U64(1) << _U64(i)) - _U64(1))
        supp = sup_low | (sup_low << _U64(m))
        u = _U64(0)
        while u == 0:
            u = _splitmix(state) & supp
        w = _splitmix(state) & supp
        if _parity(u & _swap(w, m, low)) == 0:
            w ^= _swap(_lowbit(u), m, low)
        nh = 0
        x = _U64(1) << _U64(i)
        if u != x:
            if _parity(x & _swap(u, m, low)):
                hs[nh] = x ^ u
                nh += 1
            else:
                fx = _swap(x, m, low)
                fu = _swap(u, m, low)
                c = fx & fu
                if c != 0:
                    t = _lowbit(c)
                else:
                    t = _lowbit(fx) | _lowbit(fu)
                hs[nh] = x ^ t
                hs[nh + 1] = t ^ u
                nh += 2
        zp = _U64(1) << _U64(m + i)
        for q in range(nh):
            if _parity(zp & _swap(hs[q], m, low)):
                zp ^= hs[q]
        if zp != w:
            if _parity(zp & _swap(w, m, low)):
                hs[nh] = zp ^ w
                nh += 1
            else:
                hs[nh] = u
                hs[nh + 1] = u ^ zp ^ w
                nh += 2
        for q in range(nh):
            _transvect_cols(cols, 2 * m, hs[q], m, low)


@nb.njit(cache=True)
def apply_local_d2(xc, zc, cols, start, m, tmp):
    """Apply the gate with column masks ``cols`` to sites start..start+m-1.

    xc, zc have shape (n_sites, n_words); tmp has shape (2*MAX_LOCAL, n_words).
    """
    nw = xc.shape[1]
    for i in range(2 * m):
        for w in range(nw):
            tmp[i, w] = 0
    for j in range(2 * m):
        c = cols[j]
        src = xc[start + j] if j < m else zc[start + j - m]
        for i in range(2 * m):
            if (c >> _U64(i)) & _U64(1):
                for w in range(nw):
                    tmp[i, w] ^= src[w]
    for i in range(m):
        for w in range(nw):
            xc[start + i, w] = tmp[i, w]
            zc[start + i, w] = tmp[m + i, w]


@nb.njit(cache=True)
def rank_words(vecs, work):
    """GF(2) rank of the rows of ``vecs`` (multiword bitmasks).

    The basis in ``work`` is kept fully reduced: each pivot bit appears in
    exactly one basis row, so one pass per incoming vector suffices.
    """
    n, nw = vecs.shape
    piv_w = np.empty(n, dtype=np.int64)
    piv_b = np.empty(n, dtype=np.uint64)
    r = 0
    for i in range(n):
        for w in range(nw):
            work[r, w] = vecs[i, w]
        for b in range(r):
            if work[r, piv_w[b]] & piv_b[b]:
                for w in range(nw):
                    work[r, w] ^= work[b, w]
        lw = -1
        for w in range(nw):
            if work[r, w] != 0:
                lw = w
                break
        if lw < 0:
            continue
        lb = _lowbit(work[r, lw])
        for b in range(r):
            if work[b, lw] & lb:
                for w in range(nw):
                    work[b, w] ^= work[r, w]
        piv_w[r] = lw
        piv_b[r] = lb
        r += 1
    return r


@nb.njit(cache=True)
def init_zero_d2(xc, zc):
    xc[:, :] = 0
    zc[:, :] = 0
    for s in range(xc.shape[0]):
        zc[s, s // 64] = _U64(1) << _U64(s % 64)


@nb.njit(cache=True)
def sample_g_d2(n, starts, sizes, n_samples, seed, out):
    """Run the gate schedule on |0...0> n_samples times; store g per sample."""
    nw = (n + 63) // 64
    xc = np.zeros((n, nw), dtype=np.uint64)
    zc = np.zeros((n, nw), dtype=np.uint64)
    tmp = np.zeros((2 * MAX_LOCAL, nw), dtype=np.uint64)
    work = np.zeros((n, nw), dtype=np.uint64)
    cols = np.zeros(2 * MAX_LOCAL, dtype=np.uint64)
    state = np.empty(1, dtype=np.uint64)
    state[0] = seed
    for k in range(n_samples):
        init_zero_d2(xc, zc)
        for q in range(starts.shape[0]):
            m = sizes[q]
            random_symplectic_d2(m, state, cols)
            apply_local_d2(xc, zc, cols, starts[q], m, tmp)
        out[k] = rank_words(xc, work)


# ---------------------------------------------------------------------------
# conversions used by tests and the generic/compiled cross-check


def to_words(block: np.ndarray) -> np.ndarray:
    """Transpose a 0/1 (rows x sites) block into per-site row-bitmask words."""
    rows, n = block.shape
    nw = (rows + 63) // 64
    out = np.zeros((n, nw), dtype=np.uint64)
    for s in range(n):
        for r in np.flatnonzero(block[:, s] & 1):
            out[s, r // 64] |= np.uint64(1) << np.uint64(r % 64)
    return out


def from_words(words: np.ndarray, rows: int) -> np.ndarray:
    n = words.shape[0]
    out = np.zeros((rows, n), dtype=np.int64)
    for s in range(n):
        for r in range(rows):
            out[r, s] = (int(words[s, r // 64]) >> (r % 64)) & 1
    return out


def gate_columns(symplectic: np.ndarray) -> np.ndarray:
    """Column masks of a 2m x 2m GF(2) matrix."""
    two_m = symplectic.shape[0]
    cols = np.zeros(2 * MAX_LOCAL, dtype=np.uint64)
    for j in range(two_m):
        for i in np.flatnonzero(symplectic[:, j] & 1):
            cols[j] |= np.uint64(1) << np.uint64(i)
    return cols


def columns_to_matrix(cols: np.ndarray, m: int) -> np.ndarray:
    out = np.zeros((2 * m, 2 * m), dtype=np.int64)
    for j in range(2 * m):
        for i in range(2 * m):
            out[i, j] = (int(cols[j]) >> i) & 1
    return out
