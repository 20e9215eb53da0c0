"""Analyses over an :class:`EventLog`: deposits, occupancy, contact and
outside-tunnel fractions, Lorenz curves and Gini coefficients."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .eventlog import EventKind, EventLog
from .world import DEPOSIT, HOME, REST

EMPTY_CELL = -1  # occupancy sentinel for cells that did not exist yet


def _workloads(workloads: Sequence[float]) -> np.ndarray:
    w = np.asarray(workloads, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError("need a non-empty 1-D sequence of workloads")
    if np.any(w < 0):
        raise ValueError("workloads must be non-negative")
    return w


def lorenz_curve(workloads: Sequence[float]) -> Optional[list[tuple[float, float]]]:
    """Cumulative work share against cumulative population share.

    Returns ``None`` when no work was done at all.
    """
    w = np.sort(_workloads(workloads))
    total = w.sum()
    if total == 0:
        return None
    n = w.size
    shares = np.concatenate(([0.0], np.cumsum(w) / total))
    shares[-1] = 1.0
    return [(i / n, float(s)) for i, s in enumerate(shares)]


def gini(workloads: Sequence[float]) -> Optional[float]:
    """Gini coefficient as twice the area between equality line and Lorenz curve."""
    curve = lorenz_curve(workloads)
    if curve is None:
        return None
    y = np.array([p[1] for p in curve])
    n = len(curve) - 1
    area = float(np.sum(y[1:] + y[:-1])) / (2 * n)
    return 1.0 - 2.0 * area


def gini_pairwise(workloads: Sequence[float]) -> Optional[float]:
    """Mean absolute difference over twice the mean (brute force over pairs)."""
    w = _workloads(workloads)
    if w.sum() == 0:
        return None
    n = w.size
    return float(np.abs(w[:, None] - w[None, :]).sum() / (2 * n * n * w.mean()))


def _check_robot(log: EventLog, robot: int) -> None:
    if not 0 <= robot < log.robots:
        raise KeyError(f"robot {robot} is not in this log ({log.robots} robots)")


def _adjacent(log: EventLog) -> np.ndarray:
    """[ticks, robots] mask: robot in the tunnel touching another in-tunnel robot."""
    pos = log.pos.astype(np.int64)
    inside = pos >= 0
    diff = np.abs(pos[:, :, None] - pos[:, None, :])
    both = inside[:, :, None] & inside[:, None, :]
    touch = (diff == 1) & both
    return touch.any(axis=2)


def contact_fraction(log: EventLog, robot: int) -> float:
    _check_robot(log, robot)
    inside = log.pos[:, robot] >= 0
    n_in = int(inside.sum())
    if n_in == 0:
        return 0.0
    touching = (_adjacent(log)[:, robot] | log.contact[:, robot]) & inside
    return int(touching.sum()) / n_in


def outside_fraction(log: EventLog, robot: int) -> float:
    _check_robot(log, robot)
    if log.ticks == 0:
        return 0.0
    return int((log.pos[:, robot] < 0).sum()) / log.ticks


def occupancy_matrix(log: EventLog, time_bin: int = 60) -> np.ndarray:
    """Robot-presence counts per (time bin, tunnel cell).

    Columns are cell indices (0 = dig face).  A cell that did not exist at any
    tick of a bin holds ``EMPTY_CELL``.
    """
    if time_bin < 1:
        raise ValueError("time_bin must be >= 1")
    lengths = log.lengths()
    width = int(lengths.max()) if log.ticks else int(log.meta["l_start"])
    bins = -(-log.ticks // time_bin)
    out = np.zeros((bins, width), dtype=np.int64)
    for b in range(bins):
        sl = slice(b * time_bin, (b + 1) * time_bin)
        pos = log.pos[sl]
        counts = np.bincount(pos[pos >= 0].ravel(), minlength=width)
        out[b] = counts[:width]
        out[b, int(lengths[sl].max()) :] = EMPTY_CELL
    return out


def zone_occupancy(log: EventLog, time_bin: int = 60) -> np.ndarray:
    """Robot-tick counts per time bin in the home, deposit and rest zones."""
    bins = -(-log.ticks // time_bin)
    out = np.zeros((bins, 3), dtype=np.int64)
    for b in range(bins):
        pos = log.pos[b * time_bin : (b + 1) * time_bin]
        out[b] = [(pos == HOME).sum(), (pos == DEPOSIT).sum(), (pos == REST).sum()]
    return out


def deposits_series(log: EventLog) -> list[tuple[int, int]]:
    """``(tick, cumulative deposits)`` at the start, at every deposit and at the end."""
    start = log.start_tick
    base = int(log.meta.get("deposits_start", 0))
    series = [(start, base)]
    for ev in log.of_kind(EventKind.DEPOSIT_MADE):
        series.append((int(ev["tick"]), int(ev["a"])))
    end = start + log.ticks
    if series[-1][0] != end:
        series.append((end, series[-1][1]))
    return series


def deposits_before(log: EventLog, tick: int) -> int:
    ev = log.of_kind(EventKind.DEPOSIT_MADE)
    return int((ev["tick"] < tick).sum())


def trip_counts(log: EventLog) -> np.ndarray:
    """[robots, 3] counts of successful, unsuccessful and rested trips."""
    out = np.zeros((log.robots, 3), dtype=np.int64)
    ends = log.of_kind(EventKind.TRIP_ENDED)
    np.add.at(out, (ends["robot"], ends["a"]), 1)
    return out


@dataclass
class RobotSummary:
    robot: int
    successful: int
    unsuccessful: int
    rests: int
    contact_fraction: float
    outside_fraction: float


@dataclass
class MetricsReport:
    total_deposits: int
    deposits_series: list
    occupancy: list
    zone_occupancy: list
    time_bin: int
    per_robot: list
    lorenz: Optional[list]
    gini: Optional[float]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @property
    def mean_contact_fraction(self) -> float:
        return float(np.mean([r.contact_fraction for r in self.per_robot]))

    @property
    def mean_outside_fraction(self) -> float:
        return float(np.mean([r.outside_fraction for r in self.per_robot]))


def build_report(log: EventLog, time_bin: int = 60) -> MetricsReport:
    trips = trip_counts(log)
    adj = _adjacent(log) | log.contact
    inside = log.pos >= 0
    per_robot = []
    for r in range(log.robots):
        n_in = int(inside[:, r].sum())
        cf = int((adj[:, r] & inside[:, r]).sum()) / n_in if n_in else 0.0
        of = int((~inside[:, r]).sum()) / log.ticks if log.ticks else 0.0
        per_robot.append(RobotSummary(r, int(trips[r, 0]), int(trips[r, 1]), int(trips[r, 2]), cf, of))
    work = trips[:, 0]
    curve = lorenz_curve(work)
    series = deposits_series(log)
    return MetricsReport(
        total_deposits=series[-1][1],
        deposits_series=[list(p) for p in series],
        occupancy=occupancy_matrix(log, time_bin).tolist(),
        zone_occupancy=zone_occupancy(log, time_bin).tolist(),
        time_bin=time_bin,
        per_robot=per_robot,
        lorenz=[list(p) for p in curve] if curve is not None else None,
        gini=gini(work),
    )


def write_deposits_csv(report: MetricsReport, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["tick", "deposits"])
        w.writerows(report.deposits_series)


def write_occupancy_csv(report: MetricsReport, path: str | Path) -> None:
    occ = report.occupancy
    width = len(occ[0]) if occ else 0
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["bin_start"] + [f"cell_{i}" for i in range(width)] + ["home", "deposit", "rest"])
        for b, (row, zones) in enumerate(zip(occ, report.zone_occupancy)):
            w.writerow([b * report.time_bin] + row + zones)
