"""Discrete-time scheduler for the excavation lattice.

One tick:

1. robots at the trip-start point draw their entrance decision;
2. robots act once each in a fresh random order drawn from the world stream,
   each against the occupancy left by those before it (random sequential
   update, so a follower can bump into a leader that has not moved yet).  A
   blocked robot is in contact with its blocker: the inbound robot draws its
   give-up decision once per contact, and head-on pairs that persist swap
   cells with probability ``p_pass`` per tick (``p_pass_jam`` when the
   contact sits inside a run of three or more touching robots, a robot
   queued at home counting as one);
3. contacts that disappeared are closed (pass, giveup or clear);
4. deposits are counted and the tunnel grows at the dig face;
5. one sample per robot is appended to the log.

Timers count down inside ``fsm_step``.  Two interchangeable backends run the
loop: the pure-Python ``step`` below and a compiled kernel that reproduces it
draw for draw.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import agent
from .agent import (
    Action,
    ContactResolution,
    Draws,
    FsmState,
    Heading,
    OdometryState,
    Percepts,
    Robot,
    Timing,
    fsm_step,
    measure_length,
    update_estimate,
)
from .config import SimConfig, config_to_dict, validate
from .eventlog import EVENT_DTYPE, EventKind, EventLog
from .policy import (
    ContactReaction,
    PolicyState,
    TripOutcome,
    apply_trip_outcome,
    decide_reverse,
    initial_policy,
)
from .rng import Purpose, Streams
from .world import DEPOSIT, HOME, REST, ContractViolation, WorldState, new_world, record_deposit

RES_PASS, RES_GIVEUP, RES_CLEAR = 0, 1, 2


@dataclass
class ContactEvent:
    """One robot-robot contact, keyed by the unordered pair of robots."""

    blocked: int
    other: int
    start: int
    decided_at: int = -1
    gave_up: bool = False

    @property
    def decided(self) -> bool:
        return self.decided_at >= 0


@dataclass
class LogBuilder:
    robots: int
    state: list = field(default_factory=list)
    pos: list = field(default_factory=list)
    heading: list = field(default_factory=list)
    contact: list = field(default_factory=list)
    events: list = field(default_factory=list)

    def event(self, tick: int, robot: int, kind: EventKind, a=0, b=0, x=0.0, y=0.0) -> None:
        self.events.append((tick, robot, int(kind), a, b, x, y))


@dataclass
class SimState:
    config: SimConfig
    world: WorldState
    robots: list[Robot]
    streams: Streams
    tick: int = 0
    contacts: dict[tuple[int, int], ContactEvent] = field(default_factory=dict)
    log: Optional[LogBuilder] = None
    check: bool = False

    def positions(self) -> dict[int, int]:
        return {r.id: r.pos for r in self.robots}


def new_sim(config: SimConfig, seed: Optional[int] = None, check: bool = False) -> SimState:
    validate(config)
    seed = config.seed if seed is None else seed
    world = new_world(config)
    pol = initial_policy(config.protocol)
    robots = [
        Robot(id=r, policy=pol, odo=OdometryState.start(config.world.l0)) for r in range(config.robots)
    ]
    return SimState(
        config=config,
        world=world,
        robots=robots,
        streams=Streams(seed, config.robots),
        log=LogBuilder(config.robots),
        check=check,
    )


def timing_of(config: SimConfig) -> Timing:
    return Timing(config.engine.t_dig, config.engine.t_dump, config.protocol.t_rest)


def resolve_contact(
    event: ContactEvent,
    robot: Robot,
    tick: int,
    head_on: bool,
    jammed: bool,
    p_pass: float,
    p_pass_jam: float,
    draw_reverse: Callable[[], float],
    draw_pass: Callable[[], float],
    pass_open: bool,
) -> ContactResolution:
    """Resolve the contact that blocks ``robot`` this tick.

    The inbound robot decides once, the first time it finds itself blocked in
    this contact.  From the following tick on, a persisting head-on pair gets
    one passing draw per tick (``pass_open`` is false once the pair has drawn
    this tick).  Draws are pulled lazily so no stream is consumed needlessly.
    """
    if robot.inbound_active and not event.decided:
        event.decided_at = tick
        if decide_reverse(robot.policy, draw_reverse()) is ContactReaction.GIVE_UP:
            event.gave_up = True
            return ContactResolution.GIVE_UP
        return ContactResolution.PERSIST
    if head_on and pass_open and event.decided and event.decided_at < tick and not event.gave_up:
        if draw_pass() < (p_pass_jam if jammed else p_pass):
            return ContactResolution.PASS
    return ContactResolution.WAIT


def _run_length(world: WorldState, lo: int, hi: int, queued: bool) -> int:
    """Size of the block of touching robots containing cells ``lo..hi``.

    A robot queued at home to enter presses on a block that reaches the
    entrance and counts as one more member.
    """
    cells = world.tunnel_cells
    while lo > 0 and cells[lo - 1].occupant is not None:
        lo -= 1
    while hi + 1 < len(cells) and cells[hi + 1].occupant is not None:
        hi += 1
    return hi - lo + 1 + (1 if queued and hi == len(cells) - 1 else 0)


class _Tick:
    """Mutable scratch state for arbitrating one tick."""

    def __init__(self, sim: SimState):
        n = len(sim.robots)
        self.sim = sim
        self.t = sim.tick
        self.acted = [False] * n
        self.registered: dict[tuple[int, int], ContactEvent] = {}
        self.swapped: set[tuple[int, int]] = set()
        self.pass_drawn: set[tuple[int, int]] = set()
        self.deposits: list[Robot] = []
        self.timing = timing_of(sim.config)

    def queued(self) -> bool:
        return any(r.pos == HOME and r.fsm is FsmState.GOTO_DIG for r in self.sim.robots)

    def target(self, robot: Robot, d: int) -> int:
        if robot.pos == HOME:
            return self.sim.world.entrance
        nxt = robot.pos + d
        return DEPOSIT if nxt > self.sim.world.entrance else nxt

    def act(self, r: int) -> None:
        sim = self.sim
        rob = sim.robots[r]
        d = rob.wants_move()
        blocker = None
        if d != 0:
            tgt = self.target(rob, d)
            if tgt >= 0:
                blocker = sim.world.tunnel_cells[tgt].occupant

        res = ContactResolution.NONE
        if blocker is not None and rob.pos >= 0:
            res = self.contact(rob, sim.robots[blocker])
        percepts = Percepts(
            at_face=rob.pos == 0,
            at_home=rob.pos == HOME,
            blocked=blocker is not None,
            resolution=res,
        )
        new, action = fsm_step(rob, percepts, Draws(), self.timing)
        self.apply(r, rob, new, action, d, blocker)
        self.acted[r] = True

    def contact(self, rob: Robot, other: Robot) -> ContactResolution:
        sim = self.sim
        key = (rob.id, other.id) if rob.id < other.id else (other.id, rob.id)
        ev = self.registered.get(key)
        if ev is None:
            ev = sim.contacts.get(key)
            if ev is None:
                ev = ContactEvent(blocked=rob.id, other=other.id, start=self.t)
                sim.log.event(self.t, rob.id, EventKind.CONTACT_STARTED, other.id)
                sim.robots[rob.id] = dataclasses.replace(rob, trip_collisions=rob.trip_collisions + 1)
                sim.robots[other.id] = dataclasses.replace(other, trip_collisions=other.trip_collisions + 1)
                rob = sim.robots[rob.id]
            self.registered[key] = ev
        head_on = other.wants_move() == -rob.wants_move() and other.pos >= 0
        lo, hi = min(rob.pos, other.pos), max(rob.pos, other.pos)
        eng = sim.config.engine
        res = resolve_contact(
            ev,
            rob,
            self.t,
            head_on,
            _run_length(sim.world, lo, hi, self.queued()) >= 3,
            eng.p_pass,
            eng.p_pass_jam,
            lambda: sim.streams.draw(rob.id, Purpose.REVERSE),
            sim.streams.world,
            key not in self.pass_drawn,
        )
        if head_on:
            self.pass_drawn.add(key)
        if res is ContactResolution.PASS:
            self.swapped.add(key)
        return res

    def apply(self, r: int, old: Robot, new: Robot, action: Action, d: int, blocker) -> None:
        sim = self.sim
        world = sim.world
        # contact() may have bumped the collision counter on the stored robot
        stored = sim.robots[r]
        if stored.trip_collisions != old.trip_collisions:
            new = dataclasses.replace(new, trip_collisions=stored.trip_collisions)
        if action is Action.MOVE:
            tgt = self.target(old, d)
            if old.pos >= 0:
                world.tunnel_cells[old.pos].occupant = None
            if tgt >= 0:
                if world.tunnel_cells[tgt].occupant is not None:
                    raise ContractViolation(f"robot {r} moved into occupied cell {tgt}")
                world.tunnel_cells[tgt].occupant = r
            new = dataclasses.replace(new, pos=tgt)
        elif action is Action.SWAP:
            self.swap(r, new, blocker)
            return
        elif action is Action.GRAB:
            new = self.grab(new)
        elif action is Action.DEPOSIT:
            self.deposits.append(old)
            new = self.end_trip(new, TripOutcome.SUCCESSFUL)
        elif action is Action.TRIP_FAILED:
            new = self.end_trip(new, TripOutcome.UNSUCCESSFUL)
        elif action is Action.REST_DONE:
            new = self.end_trip(new, TripOutcome.RESTED)
        sim.robots[r] = new

    def swap(self, r: int, new: Robot, s: int) -> None:
        sim = self.sim
        world = sim.world
        partner = sim.robots[s]
        pnew, paction = fsm_step(
            partner,
            Percepts(blocked=True, resolution=ContactResolution.PASS),
            Draws(),
            self.timing,
        )
        if paction is not Action.SWAP:
            raise ContractViolation(f"robot {s} refused a pass with robot {r}")
        a, b = sim.robots[r].pos, partner.pos
        world.tunnel_cells[a].occupant = s
        world.tunnel_cells[b].occupant = r
        sim.robots[r] = dataclasses.replace(new, pos=b)
        sim.robots[s] = dataclasses.replace(pnew, pos=a)
        self.acted[s] = True

    def grab(self, rob: Robot) -> Robot:
        sim = self.sim
        noise = sim.config.noise
        draws = [sim.streams.draw(rob.id, Purpose.NOISE) for _ in range(1 + rob.trip_collisions)]
        l_raw = measure_length(sim.world.l_true, rob.trip_collisions, noise.sigma0, noise.sigma_c, draws)
        odo = update_estimate(rob.odo, l_raw, sim.config.protocol.gamma)
        sim.log.event(self.t, rob.id, EventKind.ESTIMATE_UPDATED, x=l_raw, y=odo.l_est)
        return dataclasses.replace(rob, odo=odo)

    def end_trip(self, rob: Robot, outcome: TripOutcome) -> Robot:
        sim = self.sim
        policy = apply_trip_outcome(
            rob.policy, outcome, sim.config.protocol, float(sim.world.l0), rob.odo.delta_l
        )
        sim.log.event(
            self.t, rob.id, EventKind.TRIP_ENDED, int(outcome), rob.trip_k, policy.p_enter, policy.p_reverse
        )
        return dataclasses.replace(rob, policy=policy, trip_k=rob.trip_k + 1, pos=HOME, failed=False)


def step(sim: SimState) -> SimState:
    """Advance ``sim`` by one tick in place and return it."""
    t = sim.tick
    robots = sim.robots
    timing = timing_of(sim.config)
    log = sim.log

    for r, rob in enumerate(robots):
        if rob.fsm is FsmState.EXIT_HOME:
            draw = sim.streams.draw(r, Purpose.ENTER)
            new, action = fsm_step(rob, Percepts(at_home=True), Draws(enter=draw), timing)
            if action is Action.START_REST:
                new = dataclasses.replace(new, pos=REST)
            log.event(t, r, EventKind.TRIP_STARTED, 0 if action is Action.START_DIG else 1)
            robots[r] = new

    tk = _Tick(sim)
    for r in sim.streams.permutation(len(robots)):
        if not tk.acted[r]:
            tk.act(r)

    closed = [k for k in sim.contacts if k not in tk.registered]
    closed.extend(tk.swapped)
    for key in sorted(closed):
        ev = tk.registered.get(key) or sim.contacts[key]
        how = RES_PASS if key in tk.swapped else (RES_GIVEUP if ev.gave_up else RES_CLEAR)
        log.event(t, ev.blocked, EventKind.CONTACT_RESOLVED, ev.other, how)
    in_contact = [False] * len(robots)
    for a, b in tk.registered:
        in_contact[a] = in_contact[b] = True
    sim.contacts = {k: ev for k, ev in tk.registered.items() if k not in tk.swapped}

    world = sim.world
    for rob in tk.deposits:
        before = world.l_true
        record_deposit(world, rob)
        log.event(t, rob.id, EventKind.DEPOSIT_MADE, world.deposit_count)
        if world.l_true != before:
            for i, other in enumerate(robots):
                if other.pos >= 0:
                    robots[i] = dataclasses.replace(other, pos=other.pos + 1)
            log.event(t, rob.id, EventKind.TUNNEL_GREW, world.l_true)

    log.state.append([int(r.fsm) for r in robots])
    log.pos.append([r.pos for r in robots])
    log.heading.append([int(r.heading) for r in robots])
    log.contact.append(in_contact)
    if sim.check:
        world.check_exclusive(sim.positions())
    sim.tick = t + 1
    return sim


@dataclass
class RunResult:
    config: SimConfig
    seed: int
    log: EventLog
    sim: SimState

    @property
    def deposits(self) -> int:
        return self.sim.world.deposit_count


def _meta(sim: SimState, seed: int, horizon: int) -> dict:
    return {
        "config": config_to_dict(sim.config),
        "seed": seed,
        "robots": len(sim.robots),
        "horizon": horizon,
        "l0": sim.world.l0,
        "l_start": sim.world.l_true,
        "start_tick": sim.tick,
    }


def _final(sim: SimState) -> dict:
    return {
        "tick": sim.tick,
        "deposit_count": sim.world.deposit_count,
        "l_true": sim.world.l_true,
        "robots": [
            {
                "id": r.id,
                "trip": r.trip_k,
                "p_enter": r.policy.p_enter,
                "p_reverse": r.policy.p_reverse,
                "l_est": r.odo.l_est,
            }
            for r in sim.robots
        ],
    }


def _build_log(sim: SimState, meta: dict) -> EventLog:
    lb = sim.log
    n = len(sim.robots)
    shape = (len(lb.state), n)
    return EventLog(
        meta,
        np.array(lb.state, dtype=np.int8).reshape(shape),
        np.array(lb.pos, dtype=np.int32).reshape(shape),
        np.array(lb.heading, dtype=np.int8).reshape(shape),
        np.array(lb.contact, dtype=bool).reshape(shape),
        np.array(lb.events, dtype=EVENT_DTYPE),
        _final(sim),
    )


def default_backend() -> str:
    from . import kernel

    forced = os.environ.get("EXCAVSIM_BACKEND")
    if forced:
        return forced
    return kernel.BACKEND


def advance(sim: SimState, ticks: int, backend: Optional[str] = None) -> EventLog:
    """Run ``ticks`` steps from ``sim`` (mutated in place) and return their log."""
    backend = backend or default_backend()
    meta = _meta(sim, sim.streams.seed, ticks)
    sim.log = LogBuilder(len(sim.robots))
    if backend == "python":
        for _ in range(ticks):
            step(sim)
        return _build_log(sim, meta)
    if backend == "c":
        from . import kernel

        return kernel.advance_compiled(sim, ticks, meta)
    raise ValueError(f"unknown backend {backend!r}")


def run(
    config: SimConfig, seed: Optional[int] = None, backend: Optional[str] = None, check: bool = False
) -> RunResult:
    """Simulate ``config.engine.horizon`` ticks from a fresh world."""
    seed = config.seed if seed is None else seed
    sim = new_sim(config, seed, check=check)
    log = advance(sim, config.engine.horizon, backend)
    return RunResult(config, seed, log, sim)
