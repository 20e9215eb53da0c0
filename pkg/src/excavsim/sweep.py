"""Replicated-seed harnesses: the reversal-probability by tunnel-length rate
landscape (fixed-length tunnels) and the three-protocol comparison (growing
tunnel).

Runs are independent and merged keyed by seed, so the order in which they
finish never changes an aggregate.
"""

from __future__ import annotations

import csv
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .config import SimConfig, validate
from .engine import run
from .metrics import MetricsReport, build_report, deposits_before
from .policy import ProtocolKind

DEFAULT_REVERSAL_GRID = tuple(round(0.1 * i, 1) for i in range(11))
DEFAULT_LENGTH_GRID = tuple(range(1, 11))


@dataclass(frozen=True)
class SweepPlan:
    reversal_grid: tuple[float, ...] = DEFAULT_REVERSAL_GRID
    length_grid: tuple[int, ...] = DEFAULT_LENGTH_GRID
    robots: int = 4
    horizon: int = 10_800
    seeds: int = 20

    def __post_init__(self):
        object.__setattr__(self, "reversal_grid", tuple(float(p) for p in self.reversal_grid))
        object.__setattr__(self, "length_grid", tuple(int(n) for n in self.length_grid))
        if not self.reversal_grid or not self.length_grid:
            raise ValueError("sweep grids must be non-empty")
        if len(set(self.reversal_grid)) != len(self.reversal_grid):
            raise ValueError("duplicate reversal probabilities in grid")
        if len(set(self.length_grid)) != len(self.length_grid):
            raise ValueError("duplicate lengths in grid")
        if any(not 0.0 <= p <= 1.0 for p in self.reversal_grid):
            raise ValueError("reversal probabilities must lie in [0, 1]")
        if any(n < 1 for n in self.length_grid):
            raise ValueError("tunnel lengths must be >= 1")
        if self.seeds < 1:
            raise ValueError("need at least one seed per cell")
        if self.robots < 1 or self.horizon < 0:
            raise ValueError("need robots >= 1 and horizon >= 0")

    def seed_list(self, base_seed: int) -> list[int]:
        return [base_seed + i for i in range(self.seeds)]


@dataclass
class RateMatrix:
    """Excavation rate (deposits per tick) per (reversal probability, length).

    ``mean`` and ``sd`` are indexed ``[reversal, length]``; ``runs`` keeps
    every per-seed rate keyed by cell and seed.
    """

    reversal_grid: tuple[float, ...]
    length_grid: tuple[int, ...]
    mean: np.ndarray
    sd: np.ndarray
    counts: np.ndarray
    runs: dict = field(repr=False)

    @property
    def seeds(self) -> int:
        return int(self.counts.min())

    @classmethod
    def from_runs(
        cls,
        reversal_grid: Sequence[float],
        length_grid: Sequence[int],
        records: Iterable[tuple[float, int, int, float]],
    ) -> RateMatrix:
        """Aggregate ``(p_reverse, length, seed, rate)`` records.

        A seed seen twice in a cell must carry the same rate (runs are
        deterministic) and counts once.
        """
        ps, ls = tuple(reversal_grid), tuple(length_grid)
        cells: dict[tuple[int, int], dict[int, float]] = {}
        for p, length, seed, rate in records:
            key = (ps.index(p), ls.index(length))
            seen = cells.setdefault(key, {})
            if seed in seen and seen[seed] != rate:
                raise ValueError(f"seed {seed} gave two rates in cell {(p, length)}")
            if rate < 0:
                raise ValueError("rates must be non-negative")
            seen[int(seed)] = float(rate)
        mean = np.zeros((len(ps), len(ls)))
        sd = np.zeros((len(ps), len(ls)))
        counts = np.zeros((len(ps), len(ls)), dtype=np.int64)
        for (i, j), by_seed in cells.items():
            values = [by_seed[s] for s in sorted(by_seed)]
            mean[i, j] = math.fsum(values) / len(values)
            sd[i, j] = statistics.stdev(values) if len(values) > 1 else 0.0
            counts[i, j] = len(values)
        runs = {(ps[i], ls[j]): dict(sorted(v.items())) for (i, j), v in sorted(cells.items())}
        return cls(ps, ls, mean, sd, counts, runs)

    def records(self) -> list[tuple[float, int, int, float]]:
        return [(p, n, s, r) for (p, n), by_seed in self.runs.items() for s, r in by_seed.items()]


@dataclass(frozen=True)
class OptimalReversal:
    length: int
    p_reverse: float
    rate: float
    ties: tuple[float, ...]  # every P_r sharing the maximum; the smallest wins


def fixed_length_base(config: SimConfig) -> SimConfig:
    """``config`` switched to the fixed-probability protocol with growth off."""
    return config.with_protocol(ProtocolKind.REVERSAL).replace("world", growth=False)


def _cell_config(base: SimConfig, plan: SweepPlan, p: float, length: int) -> SimConfig:
    cfg = base.with_protocol(ProtocolKind.REVERSAL, fixed_reversal=p)
    cfg = cfg.replace("world", l0=length, growth=False)
    cfg = cfg.replace("engine", horizon=plan.horizon).replace(robots=plan.robots)
    return validate(cfg)


def _rate_job(job: tuple) -> tuple[float, int, int, float]:
    cfg, p, length, seed, backend = job
    res = run(cfg, seed=seed, backend=backend)
    rate = res.deposits / cfg.engine.horizon if cfg.engine.horizon else 0.0
    return p, length, seed, rate


def _map(fn, jobs: list, workers: int) -> list:
    if workers <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


def sweep_reversal(
    plan: SweepPlan, base: SimConfig, backend: Optional[str] = None, workers: int = 1
) -> RateMatrix:
    """Rate landscape over ``plan`` grids, seeds ``base.seed .. base.seed + seeds - 1``."""
    if base.protocol.kind is not ProtocolKind.REVERSAL:
        raise ValueError("sweep base config must use the reversal protocol")
    if base.world.growth:
        raise ValueError("sweep base config must disable tunnel growth")
    seeds = plan.seed_list(base.seed)
    jobs = [
        (_cell_config(base, plan, p, length), p, length, s, backend)
        for p in plan.reversal_grid
        for length in plan.length_grid
        for s in seeds
    ]
    return RateMatrix.from_runs(plan.reversal_grid, plan.length_grid, _map(_rate_job, jobs, workers))


def optimal_reversal_per_length(matrix: RateMatrix) -> list[OptimalReversal]:
    out = []
    for j, length in enumerate(matrix.length_grid):
        col = matrix.mean[:, j]
        best = float(col.max())
        ties = tuple(sorted(p for p, v in zip(matrix.reversal_grid, col) if v == best))
        out.append(OptimalReversal(length, ties[0], best, ties))
    return out


@dataclass
class ProtocolSummary:
    kind: ProtocolKind
    seeds: list[int]
    totals: list[int]
    early_totals: list[int]
    reports: list[MetricsReport] = field(repr=False)

    @property
    def mean(self) -> float:
        return float(np.mean(self.totals))

    @property
    def sd(self) -> float:
        return statistics.stdev(self.totals) if len(self.totals) > 1 else 0.0

    @property
    def early_mean(self) -> float:
        return float(np.mean(self.early_totals))

    @property
    def mean_gini(self) -> Optional[float]:
        g = [r.gini for r in self.reports if r.gini is not None]
        return float(np.mean(g)) if g else None

    @property
    def mean_contact_fraction(self) -> float:
        return float(np.mean([r.mean_contact_fraction for r in self.reports]))


@dataclass
class Comparison:
    horizon: int
    early_window: int
    protocols: dict[ProtocolKind, ProtocolSummary]

    def __getitem__(self, kind: ProtocolKind | str) -> ProtocolSummary:
        return self.protocols[ProtocolKind(kind)]


def _compare_job(job: tuple) -> tuple[int, int, MetricsReport]:
    cfg, seed, backend, early, time_bin = job
    res = run(cfg, seed=seed, backend=backend)
    return res.deposits, deposits_before(res.log, early), build_report(res.log, time_bin)


def compare_protocols(
    base: SimConfig,
    seeds: Sequence[int],
    backend: Optional[str] = None,
    early_fraction: float = 0.1,
    time_bin: int = 60,
    workers: int = 1,
) -> Comparison:
    """Run every protocol on the same seeds (hence the same random streams)."""
    if not base.world.growth:
        raise ValueError("protocol comparison needs tunnel growth enabled")
    seeds = sorted(set(int(s) for s in seeds))
    horizon = base.engine.horizon
    early = int(round(early_fraction * horizon))
    protocols = {}
    for kind in ProtocolKind:
        cfg = validate(base.with_protocol(kind))
        out = _map(_compare_job, [(cfg, s, backend, early, time_bin) for s in seeds], workers)
        protocols[kind] = ProtocolSummary(
            kind, list(seeds), [o[0] for o in out], [o[1] for o in out], [o[2] for o in out]
        )
    return Comparison(horizon, early, protocols)


def rate_summary(matrix: RateMatrix) -> dict:
    return {
        "reversal_grid": list(matrix.reversal_grid),
        "length_grid": list(matrix.length_grid),
        "seeds": matrix.seeds,
        "mean": matrix.mean.tolist(),
        "sd": matrix.sd.tolist(),
        "optimal": [
            {"length": o.length, "p_reverse": o.p_reverse, "rate": o.rate, "ties": list(o.ties)}
            for o in optimal_reversal_per_length(matrix)
        ],
    }


def write_rate_matrix_csv(matrix: RateMatrix, path: str | Path) -> None:
    """One row per (P_r, L) cell."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p_reverse", "length", "seeds", "mean_rate", "sd_rate"])
        for i, p in enumerate(matrix.reversal_grid):
            for j, n in enumerate(matrix.length_grid):
                w.writerow([p, n, int(matrix.counts[i, j]), repr(float(matrix.mean[i, j])), repr(float(matrix.sd[i, j]))])


def write_rate_runs_csv(matrix: RateMatrix, path: str | Path) -> None:
    """Long format, one row per run."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["p_reverse", "length", "seed", "rate"])
        for p, n, s, r in matrix.records():
            w.writerow([p, n, s, repr(r)])


def comparison_summary(cmp: Comparison) -> dict:
    out = {"horizon": cmp.horizon, "early_window": cmp.early_window, "protocols": {}}
    for kind, s in cmp.protocols.items():
        out["protocols"][kind.value] = {
            "seeds": s.seeds,
            "totals": s.totals,
            "early_totals": s.early_totals,
            "mean": s.mean,
            "sd": s.sd,
            "early_mean": s.early_mean,
            "mean_gini": s.mean_gini,
            "mean_contact_fraction": s.mean_contact_fraction,
        }
    return out


def write_comparison_csv(cmp: Comparison, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["protocol", "seed", "total", "rate", "early_total", "gini", "contact_fraction", "outside_fraction"])
        for kind, s in cmp.protocols.items():
            for seed, total, early, rep in zip(s.seeds, s.totals, s.early_totals, s.reports):
                rate = total / cmp.horizon if cmp.horizon else 0.0
                gini = "" if rep.gini is None else repr(rep.gini)
                w.writerow(
                    [kind.value, seed, total, repr(rate), early, gini,
                     repr(rep.mean_contact_fraction), repr(rep.mean_outside_fraction)]
                )
