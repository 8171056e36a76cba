"""Samplers, the seeded Monte Carlo harness and critical-value tables.

Replication ``r`` draws from its own generator seeded by
``SeedSequence(master_seed, spawn_key=(r,))``, so results do not depend on how
replications are scheduled across worker processes.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .core_model import DEFAULT_MIN_TAIL, make_tail_sample
from .statistics import STATISTICS, evaluate_sample

__all__ = [
    "FORMAT_VERSION",
    "ThresholdTooHighError",
    "SimulationConfig",
    "Replications",
    "EcdfCurve",
    "CriticalValueTable",
    "pareto_from_uniform",
    "cauchy_from_uniform",
    "sample_pareto",
    "sample_cauchy",
    "replication_rng",
    "simulate_replications",
    "run_monte_carlo",
    "ecdf_sup_distance",
    "build_critical_table",
    "build_critical_tables",
    "save_tables",
    "load_tables",
    "resolve_workers",
]

FORMAT_VERSION = 1
QUANTILE_LEVELS = (0.90, 0.95, 0.99)


class ThresholdTooHighError(RuntimeError):
    pass


def pareto_from_uniform(u, theta0, scale=1.0):
    """Inverse survival map ``scale * u**(-1/theta0)`` for ``u`` in (0, 1]."""
    return scale * np.asarray(u, dtype=float) ** (-1.0 / theta0)


def cauchy_from_uniform(u):
    return np.tan(np.pi * (np.asarray(u, dtype=float) - 0.5))


def sample_pareto(theta0, n, rng, scale=1.0):
    """``n`` draws with ``P(X > x) = (x/scale)**-theta0`` for ``x >= scale``."""
    if not theta0 > 0:
        raise ValueError("theta0 must be positive")
    # 1 - U lies in (0, 1], which keeps the draw finite
    return pareto_from_uniform(1.0 - rng.random(n), theta0, scale)


def sample_cauchy(n, rng):
    return cauchy_from_uniform(rng.random(n))


def replication_rng(master_seed, r) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(master_seed), spawn_key=(int(r),)))


@dataclass(frozen=True)
class SimulationConfig:
    """One Monte Carlo experiment.

    ``distribution`` is ``"pareto"`` or ``"cauchy"``.  ``scale`` is the lower
    end of the Pareto support (1 by default, i.e. the standard Pareto law).
    """

    distribution: str = "pareto"
    theta0: float | None = 1.0
    n: int = 1000
    x0: float = 3.0
    reps: int = 1000
    master_seed: int = 0
    delta: float = 0.1
    x_max: float = 8.0
    statistics: tuple = ("ks", "cvm", "ad")
    min_tail: int = DEFAULT_MIN_TAIL
    scale: float = 1.0
    max_discard_fraction: float = 0.5

    def __post_init__(self):
        if self.distribution not in ("pareto", "cauchy"):
            raise ValueError(f"unknown distribution {self.distribution!r}")
        if self.distribution == "pareto" and not (self.theta0 is not None and self.theta0 > 0):
            raise ValueError("pareto needs theta0 > 0")
        if self.reps < 1 or self.n < 1:
            raise ValueError("reps and n must be at least 1")
        if not self.x0 > 0:
            raise ValueError("x0 must be positive")
        unknown = set(self.statistics) - set(STATISTICS)
        if unknown:
            raise ValueError(f"unknown statistics {sorted(unknown)}")
        object.__setattr__(self, "statistics", tuple(self.statistics))

    @classmethod
    def from_dist_spec(cls, spec: str, **kwargs) -> "SimulationConfig":
        """Parse ``"cauchy"``, ``"pareto:THETA"`` or ``"pareto:THETA:SCALE"``."""
        parts = spec.strip().lower().split(":")
        if parts[0] == "cauchy" and len(parts) == 1:
            return cls(distribution="cauchy", theta0=None, **kwargs)
        if parts[0] == "pareto" and len(parts) in (2, 3):
            extra = {"scale": float(parts[2])} if len(parts) == 3 else {}
            return cls(distribution="pareto", theta0=float(parts[1]), **extra, **kwargs)
        raise ValueError(f"bad distribution spec {spec!r}; use pareto:THETA[:SCALE] or cauchy")

    @property
    def label(self) -> str:
        if self.distribution == "cauchy":
            return "cauchy"
        return f"pareto{self.theta0:g}" + (f"s{self.scale:g}" if self.scale != 1.0 else "")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["statistics"] = list(self.statistics)
        return d

    def draw(self, rng):
        if self.distribution == "cauchy":
            return sample_cauchy(self.n, rng)
        return sample_pareto(self.theta0, self.n, rng, self.scale)


def _replicate(config: SimulationConfig, r: int):
    """Returns ``(m, theta_hat, stats)``; ``theta_hat`` is NaN for discards."""
    raw = config.draw(replication_rng(config.master_seed, r))
    m = int(np.count_nonzero(raw > config.x0))
    nan_stats = [math.nan] * len(config.statistics)
    if m == 0 or m < config.min_tail:
        return m, math.nan, nan_stats
    sample = make_tail_sample(raw, config.x0, min_tail=None)
    theta_hat, _, stats = evaluate_sample(sample, config.delta, config.x_max)
    return m, theta_hat, [stats[k] for k in config.statistics]


def _run_chunk(args):
    config, indices = args
    return [_replicate(config, r) for r in indices]


def resolve_workers(workers=None) -> int:
    if workers is None:
        env = os.environ.get("TAILCHECK_THREADS")
        workers = int(env) if env else 1
    return max(1, int(workers))


@dataclass
class Replications:
    """Per-replication output in replication order."""

    config: SimulationConfig
    m: np.ndarray
    theta_hat: np.ndarray
    stats: dict

    @property
    def retained_mask(self) -> np.ndarray:
        return ~np.isnan(self.theta_hat)

    @property
    def retained(self) -> int:
        return int(self.retained_mask.sum())

    @property
    def discarded(self) -> int:
        return len(self.m) - self.retained


def simulate_replications(config: SimulationConfig, workers=None) -> Replications:
    """Run every replication; the output is identical for any worker count.

    Raises
    ------
    ThresholdTooHighError
        If more than ``config.max_discard_fraction`` of replications have a
        tail smaller than ``config.min_tail``.
    """
    workers = resolve_workers(workers)
    idx = np.arange(config.reps)
    if workers == 1:
        rows = _run_chunk((config, idx))
    else:
        chunks = [(config, c) for c in np.array_split(idx, workers * 4) if len(c)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = [row for part in pool.map(_run_chunk, chunks) for row in part]
    m = np.array([r[0] for r in rows], dtype=int)
    theta_hat = np.array([r[1] for r in rows], dtype=float)
    values = np.array([r[2] for r in rows], dtype=float).reshape(len(rows), len(config.statistics))
    out = Replications(config, m, theta_hat, {k: values[:, j] for j, k in enumerate(config.statistics)})
    if out.discarded > config.max_discard_fraction * config.reps:
        raise ThresholdTooHighError(
            f"threshold too high for n: {out.discarded} of {config.reps} replications had fewer than "
            f"{config.min_tail} exceedances (mean m = {m.mean():.1f}); raise n or lower x0")
    return out


@dataclass(frozen=True)
class EcdfCurve:
    statistic: str
    values: np.ndarray
    retained: int
    discarded: int
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.sort(np.asarray(self.values, dtype=float))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, x):
        """Empirical cdf ``#{values <= x} / size``."""
        return np.searchsorted(self.values, x, side="right") / len(self.values)

    def levels(self) -> np.ndarray:
        return np.arange(1, len(self.values) + 1) / len(self.values)

    def to_dict(self) -> dict:
        return {"format_version": FORMAT_VERSION, "statistic": self.statistic,
                "retained": self.retained, "discarded": self.discarded,
                "config": self.config, "values": [float(v) for v in self.values]}

    @classmethod
    def from_dict(cls, d) -> "EcdfCurve":
        return cls(d["statistic"], np.array(d["values"], dtype=float), d["retained"], d["discarded"], d["config"])


def run_monte_carlo(config: SimulationConfig, workers=None) -> dict:
    """Null draws of each statistic in ``config``, as sorted ECDF curves."""
    reps = simulate_replications(config, workers)
    keep = reps.retained_mask
    return {k: EcdfCurve(k, reps.stats[k][keep], reps.retained, reps.discarded, config.to_dict())
            for k in config.statistics}


def ecdf_sup_distance(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance between two ECDF curves."""
    if isinstance(a, EcdfCurve) and isinstance(b, EcdfCurve) and a.statistic != b.statistic:
        raise ValueError("curves are for different statistics")
    va = np.sort(np.asarray(getattr(a, "values", a), dtype=float))
    vb = np.sort(np.asarray(getattr(b, "values", b), dtype=float))
    pts = np.concatenate([va, vb])
    fa = np.searchsorted(va, pts, side="right") / len(va)
    fb = np.searchsorted(vb, pts, side="right") / len(vb)
    return float(np.max(np.abs(fa - fb)))


@dataclass(frozen=True)
class CriticalValueTable:
    """Null draws of one statistic with named quantiles (numpy ``linear``, i.e. type 7)."""

    statistic: str
    draws: np.ndarray
    retained: int
    discarded: int
    grid: tuple
    master_seed: int
    config: dict
    quantiles: dict
    format_version: int = FORMAT_VERSION

    @classmethod
    def from_curve(cls, curve: EcdfCurve, config: SimulationConfig) -> "CriticalValueTable":
        q = np.quantile(curve.values, QUANTILE_LEVELS, method="linear")
        return cls(statistic=curve.statistic, draws=curve.values, retained=curve.retained,
                   discarded=curve.discarded, grid=(config.delta, config.x_max),
                   master_seed=config.master_seed, config=config.to_dict(),
                   quantiles={f"{lv:.2f}": float(v) for lv, v in zip(QUANTILE_LEVELS, q)})

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "statistic": self.statistic,
            "grid": {"delta": self.grid[0], "x_max": self.grid[1]},
            "config": self.config,
            "master_seed": self.master_seed,
            "retained": self.retained,
            "discarded": self.discarded,
            "draws": [float(v) for v in self.draws],
            "quantiles": self.quantiles,
        }

    @classmethod
    def from_dict(cls, d) -> "CriticalValueTable":
        if d.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported table format_version {d.get('format_version')!r}")
        return cls(statistic=d["statistic"], draws=np.array(d["draws"], dtype=float),
                   retained=d["retained"], discarded=d["discarded"],
                   grid=(float(d["grid"]["delta"]), float(d["grid"]["x_max"])),
                   master_seed=d["master_seed"], config=d["config"],
                   quantiles=dict(d["quantiles"]), format_version=d["format_version"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text) -> "CriticalValueTable":
        return cls.from_dict(json.loads(text))


def build_critical_tables(config: SimulationConfig, workers=None) -> dict:
    """One table per statistic in ``config``."""
    curves = run_monte_carlo(config, workers)
    return {k: CriticalValueTable.from_curve(c, config) for k, c in curves.items()}


def build_critical_table(config: SimulationConfig, statistic="ks", workers=None) -> CriticalValueTable:
    cfg = SimulationConfig(**{**config.to_dict(), "statistics": (statistic,)})
    return build_critical_tables(cfg, workers)[statistic]


def save_tables(tables: dict, path, manifest=None) -> None:
    """Write a table set: ``{"format_version", "tables": {stat: table}, "manifest"}``."""
    doc = {"format_version": FORMAT_VERSION,
           "tables": {k: t.to_dict() for k, t in tables.items()}}
    if manifest is not None:
        doc["manifest"] = manifest
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_tables(path) -> dict:
    """Read a table set, or a single table document, keyed by statistic."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {doc.get('format_version')!r}")
    if "tables" in doc:
        return {k: CriticalValueTable.from_dict(v) for k, v in doc["tables"].items()}
    t = CriticalValueTable.from_dict(doc)
    return {t.statistic: t}
