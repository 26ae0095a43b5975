"""Histogram statistics and the mode-matching fit of the scaling variable x."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy import optimize, stats

from ..qanalog import crmps_pmf


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Counts over an integer support 0..len(counts)-1 (labelled g or n)."""

    counts: np.ndarray
    label: str = "n"

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 1 or np.any(c < 0):
            raise ValueError("counts must be a nonnegative 1-d array")
        object.__setattr__(self, "counts", c)

    @classmethod
    def from_values(cls, values, size: int | None = None, label: str = "n") -> "EmpiricalDistribution":
        values = np.asarray(values, dtype=np.int64)
        if np.any(values < 0):
            raise ValueError("values must be nonnegative")
        size = int(values.max()) + 1 if size is None else size
        return cls(np.bincount(values, minlength=size)[:size], label)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def probabilities(self) -> np.ndarray:
        return self.counts / self.total

    @property
    def stderr(self) -> np.ndarray:
        p = self.probabilities
        return np.sqrt(p * (1 - p) / self.total)

    def merge(self, other: "EmpiricalDistribution") -> "EmpiricalDistribution":
        if other.label != self.label:
            raise ValueError("labels differ")
        size = max(len(self.counts), len(other.counts))
        a = np.zeros(size, dtype=np.int64)
        a[: len(self.counts)] += self.counts
        a[: len(other.counts)] += other.counts
        return EmpiricalDistribution(a, self.label)

    def relabel_n(self, N: int) -> "EmpiricalDistribution":
        """Counts over g -> counts over n = N - g."""
        if self.label != "g":
            raise ValueError("distribution is not labelled by g")
        c = np.zeros(N + 1, dtype=np.int64)
        c[: len(self.counts)] = self.counts[: N + 1]
        return EmpiricalDistribution(c[::-1].copy(), "n")

    def mode(self) -> int:
        return int(np.argmax(self.counts))  # argmax returns the smallest index on ties


def _aligned(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    size = max(len(p), len(q))
    return np.pad(p, (0, size - len(p))), np.pad(q, (0, size - len(q)))


def tv_distance(p, q) -> float:
    p, q = _aligned(p, q)
    return 0.5 * float(np.abs(p - q).sum())


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    dof: int
    p_value: float


def chi_square(counts, expected_probs, min_expected: float = 5.0) -> ChiSquareResult:
    """Pearson test; bins with expected count < min_expected are pooled into one tail bin."""
    counts, probs = _aligned(counts, expected_probs)
    total = counts.sum()
    if total <= 0:
        raise ValueError("no samples")
    expected = probs / probs.sum() * total
    small = expected < min_expected
    obs = list(counts[~small])
    exp = list(expected[~small])
    if small.any():
        obs.append(counts[small].sum())
        exp.append(expected[small].sum())
    obs, exp = np.array(obs), np.array(exp)
    keep = exp > 0
    stat = float(np.sum((obs[keep] - exp[keep]) ** 2 / exp[keep]))
    dof = int(keep.sum()) - 1
    return ChiSquareResult(stat, dof, float(stats.chi2.sf(stat, dof)) if dof > 0 else 1.0)


def stderr_mean(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    if v.size < 2:
        raise ValueError("need at least two values")
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(v.size))


def weighted_mean(support, counts, f: Callable) -> tuple[float, float]:
    """Mean and standard error of f(value) from a histogram."""
    support = np.asarray(support)
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    vals = f(support)
    mean = float(np.sum(counts * vals) / n)
    var = float(np.sum(counts * (vals - mean) ** 2) / (n - 1))
    return mean, math.sqrt(var / n)


# ---------------------------------------------------------------------------
# mode fit


def mode_vertex(p: Sequence[float]) -> float:
    """Location of the peak: vertex of the parabola through the mode and its neighbours.

    The integer mode alone pins x only to an interval, so the sub-bin
    vertex is what gets matched. Ties go to the smaller n.
    """
    p = np.asarray(p, dtype=float)
    m = int(np.argmax(p))
    left = p[m - 1] if m > 0 else 0.0
    right = p[m + 1] if m + 1 < len(p) else 0.0
    curv = left - 2 * p[m] + right
    if curv >= 0:
        return float(m)
    return m + 0.5 * (left - right) / curv


def fit_x_mode(empirical_probs, d: int, x_max: float = 40.0, n_grid: int = 401, tol: float = 1e-10) -> float:
    """x such that crmps_pmf(x) peaks where the histogram does.

    Grid search over [0, x_max], then golden-section refinement on the
    bracketing grid cell. Deterministic given the histogram.
    """
    target = mode_vertex(empirical_probs)

    def miss(x):
        return abs(mode_vertex(crmps_pmf(x, d, n_max=_n_max(x)).probs) - target)

    grid = np.linspace(0.0, x_max, n_grid)
    vals = [miss(x) for x in grid]
    i = int(np.argmin(vals))
    if vals[i] == 0.0 or i in (0, n_grid - 1):
        return float(grid[i])
    try:
        res = optimize.minimize_scalar(
            miss, bracket=(grid[i - 1], grid[i], grid[i + 1]), method="golden", options={"xtol": tol}
        )
    except ValueError:  # flat neighbourhood, not a strict bracket
        return float(grid[i])
    return float(res.x) if res.fun <= vals[i] and grid[i - 1] <= res.x <= grid[i + 1] else float(grid[i])


def _n_max(x: float) -> int:
    # Poisson mean x/d plus a generous tail
    return int(80 + 2 * x)
