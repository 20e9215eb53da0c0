"""Command line: ``excavsim run | sweep | compare | report``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import sweep as sw
from .config import ConfigError, SimConfig, config_from_dict, parse_config
from .engine import run
from .eventlog import EventLog
from .metrics import build_report, write_deposits_csv, write_occupancy_csv
from .policy import ProtocolKind

PRESETS = Path(__file__).parent / "presets"

_PLAN_KEYS = {"reversal_grid", "length_grid", "robots", "horizon", "seeds", "config"}


def _load_config(path: Optional[str]) -> SimConfig:
    if path is None:
        return config_from_dict({})
    if path.startswith("preset:"):
        return parse_config(PRESETS / f"{path[len('preset:'):]}.json")
    return parse_config(path)


def _write_json(data, path: Path) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_metrics(log: EventLog, out: Path, time_bin: int) -> None:
    """metrics.json, deposits.csv and occupancy.csv, all derived from ``log`` only."""
    report = build_report(log, time_bin)
    doc = {"config": log.meta["config"], "seed": log.meta["seed"], "metrics": report.to_dict()}
    _write_json(doc, out / "metrics.json")
    write_deposits_csv(report, out / "deposits.csv")
    write_occupancy_csv(report, out / "occupancy.csv")


def cmd_run(args) -> int:
    config = _load_config(args.config)
    if args.protocol:
        config = config.with_protocol(args.protocol)
    seed = config.seed if args.seed is None else args.seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    res = run(config, seed=seed, backend=args.backend)
    res.log.write_ndjson(out / "events.ndjson")
    write_metrics(res.log, out, args.time_bin)
    print(f"seed {seed}: {res.deposits} deposits over {config.engine.horizon} ticks -> {out}")
    return 0


def load_sweep_plan(path: Optional[str]) -> tuple[sw.SweepPlan, SimConfig]:
    if path is None:
        return sw.SweepPlan(), sw.fixed_length_base(config_from_dict({}))
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(str(p), "sweep plan not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(str(p), f"malformed JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    unknown = sorted(set(data) - _PLAN_KEYS)
    if unknown:
        raise ConfigError(unknown[0], "unknown key")
    base = sw.fixed_length_base(config_from_dict(data.pop("config", {})))
    try:
        plan = sw.SweepPlan(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError("plan", str(exc)) from None
    return plan, base


def cmd_sweep(args) -> int:
    plan, base = load_sweep_plan(args.plan)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix = sw.sweep_reversal(plan, base, backend=args.backend, workers=args.workers)
    sw.write_rate_matrix_csv(matrix, out / "ratematrix.csv")
    sw.write_rate_runs_csv(matrix, out / "rates_long.csv")
    _write_json(sw.rate_summary(matrix), out / "sweep.json")
    for o in sw.optimal_reversal_per_length(matrix):
        print(f"L={o.length:3d}  best P_r={o.p_reverse:.2f}  rate={o.rate:.5f}")
    return 0


def _parse_seeds(text: str, base_seed: int) -> list[int]:
    if "," in text or "-" in text:
        seeds: list[int] = []
        for part in filter(None, (s.strip() for s in text.split(","))):
            lo, _, hi = part.partition("-")
            seeds.extend(range(int(lo), int(hi or lo) + 1))
        return seeds
    count = int(text)
    if count < 1:
        raise ConfigError("seeds", "need at least one seed")
    return list(range(base_seed, base_seed + count))


def cmd_compare(args) -> int:
    config = _load_config(args.config)
    try:
        seeds = _parse_seeds(args.seeds, config.seed)
    except ValueError as exc:
        raise ConfigError("seeds", str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cmp = sw.compare_protocols(config, seeds, backend=args.backend, workers=args.workers)
    sw.write_comparison_csv(cmp, out / "summary.csv")
    _write_json(sw.comparison_summary(cmp), out / "summary.json")
    for kind, s in cmp.protocols.items():
        print(f"{kind.value:9s} mean {s.mean:8.2f}  sd {s.sd:7.2f}  early {s.early_mean:7.2f}")
    return 0


def cmd_report(args) -> int:
    log = EventLog.read_ndjson(args.events)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics(log, out, args.time_bin)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="excavsim", description="Collective excavation simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, workers=False):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--backend", choices=["python", "c"], default=None, help="simulation backend")
        if workers:
            p.add_argument("--workers", type=int, default=1, help="worker processes")

    p = sub.add_parser("run", help="simulate one run and write its log and metrics")
    p.add_argument("--config", help="JSON config file, or preset:NAME (defaults when omitted)")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.add_argument("--protocol", choices=[k.value for k in ProtocolKind])
    p.add_argument("--time-bin", type=int, default=60, help="occupancy bin width in ticks")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="reversal probability by tunnel length rate landscape")
    p.add_argument("--plan", help="JSON sweep plan (default grid when omitted)")
    common(p, workers=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="all three protocols over replicated seeds")
    p.add_argument("--config", help="JSON config file, or preset:NAME (defaults when omitted)")
    p.add_argument("--seeds", default="20", help="a count (from the config seed) or a list like 0-9,15")
    common(p, workers=True)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("report", help="recompute metrics from an events.ndjson file")
    p.add_argument("--events", required=True)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--time-bin", type=int, default=60, help="occupancy bin width in ticks")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"excavsim: config error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"excavsim: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
