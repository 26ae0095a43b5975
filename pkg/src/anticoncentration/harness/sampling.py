"""Monte Carlo sampling of the participation entropy g over circuit ensembles.

Samples are drawn in fixed chunks. Chunk c is seeded from (seed, c) alone,
so the merged histogram does not depend on how many workers ran.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

import numpy as np

from .. import kernels
from ..tableau import (
    CircuitArchitecture,
    StabilizerTableau,
    participation_entropy,
    run_architecture,
)
from .config import CHUNK_SIZE
from .stats import EmpiricalDistribution


def global_architecture(N: int, d: int) -> CircuitArchitecture:
    return CircuitArchitecture(N, d, ((tuple(range(N)),),), "global")


def schedule(arch: CircuitArchitecture, depth: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Flatten the gate sequence into (starts, sizes) arrays for the compiled kernel."""
    depth = arch.period if depth is None else depth
    sups = [sup for s in range(depth) for sup in arch.layer(s)]
    starts = np.array([sup[0] for sup in sups], dtype=np.int64)
    sizes = np.array([len(sup) for sup in sups], dtype=np.int64)
    return starts, sizes


def uses_kernel(arch: CircuitArchitecture, depth: int | None = None) -> bool:
    if arch.d != 2:
        return False
    _, sizes = schedule(arch, depth)
    return sizes.size == 0 or int(sizes.max()) <= kernels.MAX_LOCAL


def _chunk_seed(seed: int, chunk: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, chunk])


def sample_chunk(arch: CircuitArchitecture, depth: int | None, n_samples: int, seed: int, chunk: int) -> np.ndarray:
    ss = _chunk_seed(seed, chunk)
    if uses_kernel(arch, depth):
        starts, sizes = schedule(arch, depth)
        out = np.zeros(n_samples, dtype=np.int64)
        kseed = ss.generate_state(1, dtype=np.uint64)[0]
        kernels.sample_g_d2(arch.n, starts, sizes, n_samples, kseed, out)
        return out
    rng = np.random.default_rng(ss)
    zero = StabilizerTableau.zero_state(arch.n, arch.d)
    return np.array(
        [participation_entropy(run_architecture(arch, zero, rng, depth)) for _ in range(n_samples)],
        dtype=np.int64,
    )


def _task(args):
    return sample_chunk(*args)


def sample_g(
    arch: CircuitArchitecture,
    n_samples: int,
    seed: int,
    depth: int | None = None,
    workers: int = 1,
) -> EmpiricalDistribution:
    """Histogram of g over n_samples circuits (label g, support 0..N)."""
    n_chunks = -(-n_samples // CHUNK_SIZE)
    tasks = [
        (arch, depth, min(CHUNK_SIZE, n_samples - c * CHUNK_SIZE), seed, c) for c in range(n_chunks)
    ]
    if workers > 1 and n_chunks > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_task, tasks))  # map keeps chunk order
    else:
        results = [_task(t) for t in tasks]
    g = np.concatenate(results) if results else np.zeros(0, dtype=np.int64)
    return EmpiricalDistribution.from_values(g, size=arch.n + 1, label="g")
