"""Backend selection for the simulation loop.

The compiled kernel (``_ckernel``) is used when it was built; otherwise the
pure-Python ``engine.step`` loop runs.  ``EXCAVSIM_BACKEND=python`` forces
the fallback.
"""

from __future__ import annotations

import dataclasses

import numpy as np

try:
    from . import _ckernel
except ImportError:  # extension not built
    _ckernel = None

BACKEND = "c" if _ckernel is not None else "python"

_INT_FIELDS = ("fsm", "resume", "pos", "heading", "carrying", "trip_k", "trip_collisions", "failed", "timer")
_FLOAT_FIELDS = ("p_enter", "p_reverse", "l0", "l_est", "delta_l", "last_raw")
_CONTACT_FIELDS = ("live", "blocked", "other", "start", "decided_at", "gave_up")


def available() -> list[str]:
    return ["python"] + (["c"] if _ckernel is not None else [])


def _pack_robots(robots) -> dict:
    cols = {f: np.zeros(len(robots), dtype=np.int64) for f in _INT_FIELDS}
    cols.update({f: np.zeros(len(robots), dtype=np.float64) for f in _FLOAT_FIELDS})
    for i, r in enumerate(robots):
        cols["fsm"][i] = int(r.fsm)
        cols["resume"][i] = -1 if r.resume is None else int(r.resume)
        cols["pos"][i] = r.pos
        cols["heading"][i] = int(r.heading)
        cols["carrying"][i] = r.carrying
        cols["trip_k"][i] = r.trip_k
        cols["trip_collisions"][i] = r.trip_collisions
        cols["failed"][i] = r.failed
        cols["timer"][i] = r.timer
        cols["p_enter"][i] = r.policy.p_enter
        cols["p_reverse"][i] = r.policy.p_reverse
        cols["l0"][i] = r.odo.l0
        cols["l_est"][i] = r.odo.l_est
        cols["delta_l"][i] = r.odo.delta_l
        cols["last_raw"][i] = r.odo.last_raw
    return cols


def _unpack_robots(robots, cols: dict) -> list:
    from .agent import FsmState, Heading, OdometryState
    from .policy import PolicyState

    out = []
    for i, r in enumerate(robots):
        resume = int(cols["resume"][i])
        out.append(
            dataclasses.replace(
                r,
                fsm=FsmState(int(cols["fsm"][i])),
                resume=None if resume < 0 else FsmState(resume),
                pos=int(cols["pos"][i]),
                heading=Heading(int(cols["heading"][i])),
                carrying=bool(cols["carrying"][i]),
                trip_k=int(cols["trip_k"][i]),
                trip_collisions=int(cols["trip_collisions"][i]),
                failed=bool(cols["failed"][i]),
                timer=int(cols["timer"][i]),
                policy=PolicyState(float(cols["p_enter"][i]), float(cols["p_reverse"][i])),
                odo=OdometryState(
                    float(cols["l0"][i]),
                    float(cols["l_est"][i]),
                    float(cols["delta_l"][i]),
                    float(cols["last_raw"][i]),
                ),
            )
        )
    return out


def advance_compiled(sim, ticks: int, meta: dict):
    """Compiled twin of looping ``engine.step``; updates ``sim`` in place."""
    if _ckernel is None:
        raise RuntimeError("compiled kernel is not built")
    from .engine import ContactEvent, _final
    from .eventlog import EventLog
    from .policy import ProtocolKind
    from .world import Cell

    cfg = sim.config
    world = sim.world
    n = len(sim.robots)
    cap = world.l_true + 1
    if world.growth:
        cap += (world.deposit_count + ticks * n) // world.deposits_per_growth + 1
    cells = np.full(cap, -1, dtype=np.int32)
    for i, c in enumerate(world.tunnel_cells):
        if c.occupant is not None:
            cells[i] = c.occupant

    book = {f: np.zeros((n, n), dtype=np.int64) for f in _CONTACT_FIELDS}
    for (a, b), ev in sim.contacts.items():
        book["live"][a, b] = 1
        book["blocked"][a, b] = ev.blocked
        book["other"][a, b] = ev.other
        book["start"][a, b] = ev.start
        book["decided_at"][a, b] = ev.decided_at
        book["gave_up"][a, b] = ev.gave_up

    p = cfg.protocol
    params = {
        "n": n,
        "t_dig": cfg.engine.t_dig,
        "t_dump": cfg.engine.t_dump,
        "t_rest": p.t_rest,
        "adaptive": int(p.kind is ProtocolKind.ADAPTIVE),
        "alpha": p.alpha,
        "eta": p.eta,
        "xi": p.xi,
        "gamma": p.gamma,
        "rev_exponent": p.rev_exponent,
        "ent_exponent": p.ent_exponent,
        "p_pass": cfg.engine.p_pass,
        "p_pass_jam": cfg.engine.p_pass_jam,
        "sigma0": cfg.noise.sigma0,
        "sigma_c": cfg.noise.sigma_c,
        "world_l0": float(world.l0),
        "per_growth": world.deposits_per_growth,
        "growth": int(world.growth),
        "length": world.l_true,
    }
    cols = _pack_robots(sim.robots)
    capsules = [bg.capsule for bg in sim.streams.bitgens]
    state, pos, heading, contact, events, length, deposits = _ckernel.advance(
        params, cols, cells, world.deposit_count, sim.tick, book, capsules, sim.streams.counts, ticks
    )

    sim.robots = _unpack_robots(sim.robots, cols)
    world.tunnel_cells = [Cell(None if o < 0 else int(o)) for o in cells[:length]]
    world.deposit_count = int(deposits)
    contacts = {}
    for a in range(n):
        for b in range(a + 1, n):
            if book["live"][a, b]:
                contacts[(a, b)] = ContactEvent(
                    blocked=int(book["blocked"][a, b]),
                    other=int(book["other"][a, b]),
                    start=int(book["start"][a, b]),
                    decided_at=int(book["decided_at"][a, b]),
                    gave_up=bool(book["gave_up"][a, b]),
                )
    sim.contacts = contacts
    sim.tick += ticks
    if sim.check:
        world.check_exclusive(sim.positions())
    return EventLog(meta, state, pos, heading, contact, events, _final(sim))
