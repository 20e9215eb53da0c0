"""Columnar event log and its newline-delimited JSON form.

Per-tick robot samples live in ``[ticks, robots]`` arrays; discrete events
live in one structured array.  The NDJSON file is the exchange format for
post-hoc analysis: one header line, then for every tick its events followed by
one sample line per robot, then a trailer.  Every line carries the same keys
(tick, robot, state, pos, heading, contact, event, payload).
"""

from __future__ import annotations

import io
import json
from enum import IntEnum
from pathlib import Path
from typing import IO, Iterator

import numpy as np

from .agent import STATE_CODES, STATE_NAMES, FsmState, Heading
from .world import ZONE_CODES, ZONE_NAMES


class EventKind(IntEnum):
    TRIP_STARTED = 0
    TRIP_ENDED = 1
    CONTACT_STARTED = 2
    CONTACT_RESOLVED = 3
    ESTIMATE_UPDATED = 4
    DEPOSIT_MADE = 5
    TUNNEL_GREW = 6


EVENT_NAMES = {
    EventKind.TRIP_STARTED: "TripStarted",
    EventKind.TRIP_ENDED: "TripEnded",
    EventKind.CONTACT_STARTED: "ContactStarted",
    EventKind.CONTACT_RESOLVED: "ContactResolved",
    EventKind.ESTIMATE_UPDATED: "EstimateUpdated",
    EventKind.DEPOSIT_MADE: "DepositMade",
    EventKind.TUNNEL_GREW: "TunnelGrew",
}
EVENT_CODES = {v: k for k, v in EVENT_NAMES.items()}

TRIP_MODES = ("enter", "rest")
TRIP_OUTCOMES = ("successful", "unsuccessful", "rested")
RESOLUTIONS = ("pass", "giveup", "clear")

EVENT_DTYPE = np.dtype(
    [("tick", "i8"), ("robot", "i4"), ("kind", "i1"), ("a", "i8"), ("b", "i8"), ("x", "f8"), ("y", "f8")]
)
HEADINGS = ("inbound", "outbound")


def _pos_to_json(p: int):
    return int(p) if p >= 0 else ZONE_NAMES[int(p)]


def _pos_from_json(p) -> int:
    return ZONE_CODES[p] if isinstance(p, str) else int(p)


def _payload(ev) -> dict:
    kind = EventKind(int(ev["kind"]))
    a, b, x, y = int(ev["a"]), int(ev["b"]), float(ev["x"]), float(ev["y"])
    if kind is EventKind.TRIP_STARTED:
        return {"mode": TRIP_MODES[a]}
    if kind is EventKind.TRIP_ENDED:
        return {"outcome": TRIP_OUTCOMES[a], "trip": b, "p_enter": x, "p_reverse": y}
    if kind is EventKind.CONTACT_STARTED:
        return {"other": a}
    if kind is EventKind.CONTACT_RESOLVED:
        return {"other": a, "resolution": RESOLUTIONS[b]}
    if kind is EventKind.ESTIMATE_UPDATED:
        return {"l_raw": x, "l_est": y}
    if kind is EventKind.DEPOSIT_MADE:
        return {"total": a}
    return {"l_true": a}


def _unpayload(kind: EventKind, payload: dict) -> tuple[int, int, float, float]:
    if kind is EventKind.TRIP_STARTED:
        return TRIP_MODES.index(payload["mode"]), 0, 0.0, 0.0
    if kind is EventKind.TRIP_ENDED:
        return (
            TRIP_OUTCOMES.index(payload["outcome"]),
            payload["trip"],
            payload["p_enter"],
            payload["p_reverse"],
        )
    if kind is EventKind.CONTACT_STARTED:
        return payload["other"], 0, 0.0, 0.0
    if kind is EventKind.CONTACT_RESOLVED:
        return payload["other"], RESOLUTIONS.index(payload["resolution"]), 0.0, 0.0
    if kind is EventKind.ESTIMATE_UPDATED:
        return 0, 0, payload["l_raw"], payload["l_est"]
    if kind is EventKind.DEPOSIT_MADE:
        return payload["total"], 0, 0.0, 0.0
    return payload["l_true"], 0, 0.0, 0.0


def _line(tick, robot, state, pos, heading, contact, event, payload) -> str:
    rec = {
        "tick": tick,
        "robot": robot,
        "state": state,
        "pos": pos,
        "heading": heading,
        "contact": contact,
        "event": event,
        "payload": payload,
    }
    return json.dumps(rec, separators=(",", ":"))


class EventLog:
    """Immutable record of one run."""

    def __init__(
        self,
        meta: dict,
        state: np.ndarray,
        pos: np.ndarray,
        heading: np.ndarray,
        contact: np.ndarray,
        events: np.ndarray,
        final: dict | None = None,
    ):
        self.meta = meta
        self.state = np.asarray(state, dtype=np.int8)
        self.pos = np.asarray(pos, dtype=np.int32)
        self.heading = np.asarray(heading, dtype=np.int8)
        self.contact = np.asarray(contact, dtype=bool)
        self.events = np.asarray(events, dtype=EVENT_DTYPE)
        self.final = final or {}
        n = int(meta["robots"])
        for arr in (self.state, self.pos, self.heading, self.contact):
            if arr.ndim != 2 or arr.shape[1] != n:
                raise ValueError(f"sample arrays must be [ticks, {n}], got {arr.shape}")

    @property
    def robots(self) -> int:
        return int(self.meta["robots"])

    @property
    def ticks(self) -> int:
        return self.state.shape[0]

    @property
    def start_tick(self) -> int:
        return int(self.meta.get("start_tick", 0))

    def of_kind(self, kind: EventKind) -> np.ndarray:
        return self.events[self.events["kind"] == int(kind)]

    def lengths(self) -> np.ndarray:
        """True tunnel length at the end of every logged tick."""
        out = np.full(self.ticks, int(self.meta["l_start"]), dtype=np.int64)
        for ev in self.of_kind(EventKind.TUNNEL_GREW):
            out[int(ev["tick"]) - self.start_tick :] = int(ev["a"])
        return out

    def equals(self, other: EventLog) -> bool:
        return (
            self.meta == other.meta
            and np.array_equal(self.state, other.state)
            and np.array_equal(self.pos, other.pos)
            and np.array_equal(self.heading, other.heading)
            and np.array_equal(self.contact, other.contact)
            and np.array_equal(self.events, other.events)
            and self.final == other.final
        )

    def iter_lines(self) -> Iterator[str]:
        yield _line(None, None, None, None, None, None, "RunStarted", self.meta)
        ev = self.events
        bounds = np.searchsorted(ev["tick"], np.arange(self.ticks + 1) + self.start_tick)
        n = self.robots
        states = [[STATE_NAMES[FsmState(s)] for s in row] for row in self.state.tolist()]
        pos, heading, contact = self.pos.tolist(), self.heading.tolist(), self.contact.tolist()
        for i in range(self.ticks):
            tick = i + self.start_tick
            for e in ev[bounds[i] : bounds[i + 1]]:
                name = EVENT_NAMES[EventKind(int(e["kind"]))]
                yield _line(tick, int(e["robot"]), None, None, None, None, name, _payload(e))
            for r in range(n):
                yield _line(
                    tick,
                    r,
                    states[i][r],
                    _pos_to_json(pos[i][r]),
                    HEADINGS[heading[i][r]],
                    contact[i][r],
                    "Sample",
                    None,
                )
        yield _line(None, None, None, None, None, None, "RunEnded", self.final)

    def write_ndjson(self, dest: str | Path | IO[str]) -> None:
        if isinstance(dest, (str, Path)):
            with open(dest, "w", encoding="utf-8", newline="\n") as fh:
                self.write_ndjson(fh)
            return
        for line in self.iter_lines():
            dest.write(line)
            dest.write("\n")

    def to_ndjson(self) -> str:
        buf = io.StringIO()
        self.write_ndjson(buf)
        return buf.getvalue()

    @classmethod
    def read_ndjson(cls, src: str | Path | IO[str]) -> EventLog:
        if isinstance(src, (str, Path)):
            with open(src, encoding="utf-8") as fh:
                return cls.read_ndjson(fh)
        meta = None
        final: dict = {}
        samples: dict[int, list] = {}
        events = []
        for lineno, line in enumerate(src, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {lineno}: malformed JSON ({exc})") from None
            name = rec["event"]
            if name == "RunStarted":
                meta = rec["payload"]
            elif name == "RunEnded":
                final = rec["payload"]
            elif name == "Sample":
                samples.setdefault(rec["tick"], []).append(rec)
            else:
                kind = EventKind(EVENT_CODES[name])
                a, b, x, y = _unpayload(kind, rec["payload"])
                events.append((rec["tick"], rec["robot"], int(kind), a, b, x, y))
        if meta is None:
            raise ValueError("event log has no RunStarted header")
        n = int(meta["robots"])
        t = len(samples)
        state = np.zeros((t, n), np.int8)
        pos = np.zeros((t, n), np.int32)
        heading = np.zeros((t, n), np.int8)
        contact = np.zeros((t, n), bool)
        start = int(meta.get("start_tick", 0))
        for tick, recs in samples.items():
            i = tick - start
            for rec in recs:
                r = rec["robot"]
                state[i, r] = STATE_CODES[rec["state"]]
                pos[i, r] = _pos_from_json(rec["pos"])
                heading[i, r] = Heading.OUTBOUND if rec["heading"] == "outbound" else Heading.INBOUND
                contact[i, r] = rec["contact"]
        return cls(meta, state, pos, heading, contact, np.array(events, dtype=EVENT_DTYPE), final)
