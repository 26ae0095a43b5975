"""Experiment configuration: JSON file plus command-line overrides."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

EXPERIMENTS = (
    "analytic",
    "sample-stab",
    "sample-crmps",
    "sample-shallow",
    "replica",
    "replica-doped",
    "commutant-dump",
)
CHUNK_SIZE = 4096


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int = 16
    d: int = 2
    k: int = 3
    r: int = 4
    depth: int = 5
    samples: int = 100_000
    seed: int = 1
    nt: int | None = None  # None: floor(log2(N) / 2)
    tstate: str = "qutrit-t"
    out: str | None = None
    format: str = "csv"
    workers: int = 1
    cutoff: float = 1e-12
    bond_cap: int = 4096

    def validate(self) -> "ExperimentConfig":
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}")
        if self.d not in (2, 3, 5):
            raise ConfigError("d must be 2, 3 or 5")
        if self.n < 1:
            raise ConfigError("n must be >= 1")
        if not 1 <= self.k <= 4:
            raise ConfigError("k must be in 1..4")
        if self.samples < 1 or self.workers < 1:
            raise ConfigError("samples and workers must be positive")
        if self.depth < 0:
            raise ConfigError("depth must be >= 0")
        if self.format not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if not 0 <= self.cutoff <= 1e-8:
            raise ConfigError("cutoff must lie in [0, 1e-8]")
        if self.experiment == "sample-crmps" and not 1 <= self.r <= self.n - 1:
            raise ConfigError("need 1 <= r <= n - 1")
        if self.experiment.startswith("replica") and (self.n % 2 or self.n < 2):
            raise ConfigError("replica runs need even n >= 2")
        if self.nt is not None and not 0 <= self.nt <= self.n:
            raise ConfigError("nt must lie in [0, n]")
        return self

    @property
    def n_t(self) -> int:
        if self.nt is not None:
            return self.nt
        return max(self.n.bit_length() - 1, 0) // 2

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path: str | Path | None, overrides: dict) -> ExperimentConfig:
    """File values first, then every override that is not None."""
    base: dict = {}
    if path is not None:
        try:
            base = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(base, dict):
            raise ConfigError("config file must hold a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(base) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    merged = {**base, **{k: v for k, v in overrides.items() if v is not None and k in known}}
    if "experiment" not in merged:
        raise ConfigError("no experiment given")
    try:
        cfg = ExperimentConfig(**merged)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg.validate()


def with_overrides(cfg: ExperimentConfig, **kw) -> ExperimentConfig:
    return replace(cfg, **kw).validate()
