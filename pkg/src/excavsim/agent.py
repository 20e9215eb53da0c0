"""Per-robot controller: finite state automaton plus odometry estimate.

The controller sees only local percepts (is the next cell blocked, am I at the
dig face or at home, how did my current contact resolve) and the random draws
the engine hands it.  ``fsm_step`` is pure: identical inputs give identical
outputs, and all lattice arbitration is left to the engine.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import IntEnum
from typing import NamedTuple, Optional, Sequence

from .policy import EnterDecision, PolicyState, decide_enter
from .world import DEPOSIT, HOME, REST, ContractViolation


class FsmState(IntEnum):
    GOTO_DIG = 0
    DIGGING = 1
    EXIT_TUNNEL = 2
    GOTO_DUMP = 3
    DUMPING = 4
    EXIT_HOME = 5
    COLLISION = 6
    RESTING = 7


STATE_NAMES = {
    FsmState.GOTO_DIG: "GotoDig",
    FsmState.DIGGING: "Digging",
    FsmState.EXIT_TUNNEL: "ExitTunnel",
    FsmState.GOTO_DUMP: "GotoDump",
    FsmState.DUMPING: "Dumping",
    FsmState.EXIT_HOME: "ExitHome",
    FsmState.COLLISION: "Collision",
    FsmState.RESTING: "Resting",
}
STATE_CODES = {v: k for k, v in STATE_NAMES.items()}


class Heading(IntEnum):
    INBOUND = 0
    OUTBOUND = 1


class Action(IntEnum):
    NONE = 0
    MOVE = 1
    SWAP = 2
    GRAB = 3
    DEPOSIT = 4
    TRIP_FAILED = 5
    REST_DONE = 6
    START_DIG = 7
    START_REST = 8


class ContactResolution(IntEnum):
    """How the engine resolved the contact blocking a robot this tick."""

    NONE = 0
    PERSIST = 1  # new contact, robot keeps going
    GIVE_UP = 2  # new contact, inbound robot abandons the trip
    WAIT = 3  # ongoing contact, no pass this tick
    PASS = 4  # ongoing head-on contact, the two robots swap cells


class Percepts(NamedTuple):
    at_face: bool = False
    at_home: bool = False
    blocked: bool = False
    resolution: ContactResolution = ContactResolution.NONE


class Draws(NamedTuple):
    enter: Optional[float] = None


class Timing(NamedTuple):
    t_dig: int = 8
    t_dump: int = 28
    t_rest: int = 60


@dataclass(frozen=True)
class OdometryState:
    l0: float
    l_est: float
    delta_l: float = 0.0
    last_raw: float = 0.0

    @classmethod
    def start(cls, l0: float) -> OdometryState:
        return cls(l0=float(l0), l_est=float(l0), delta_l=0.0, last_raw=float(l0))


@dataclass(frozen=True)
class Robot:
    id: int
    fsm: FsmState = FsmState.EXIT_HOME
    resume: Optional[FsmState] = None
    pos: int = HOME
    heading: Heading = Heading.INBOUND
    carrying: bool = False
    trip_k: int = 1
    trip_collisions: int = 0
    failed: bool = False
    timer: int = 0
    policy: PolicyState = field(default_factory=PolicyState)
    odo: OdometryState = field(default_factory=lambda: OdometryState.start(1))

    @property
    def in_tunnel(self) -> bool:
        return self.pos >= 0

    @property
    def inbound_active(self) -> bool:
        """Heading for the dig face on a trip that has not been abandoned."""
        if self.fsm is FsmState.GOTO_DIG:
            return True
        return self.fsm is FsmState.COLLISION and self.resume is FsmState.GOTO_DIG

    def wants_move(self) -> int:
        """+1 to move outward, -1 to move toward the face, 0 to stay."""
        s = self.fsm
        if s is FsmState.COLLISION:
            s = self.resume
        if s is FsmState.GOTO_DIG:
            return 0 if self.pos == 0 else -1
        if s in (FsmState.EXIT_TUNNEL, FsmState.GOTO_DUMP):
            return 1 if self.pos >= 0 else 0
        return 0


def _collide(robot: Robot, resume: FsmState, res: ContactResolution) -> tuple[Robot, Action]:
    if res is ContactResolution.GIVE_UP:
        if resume is not FsmState.GOTO_DIG:
            raise ContractViolation(f"robot {robot.id} gave up while heading out")
        return (
            dataclasses.replace(
                robot,
                fsm=FsmState.COLLISION,
                resume=FsmState.EXIT_TUNNEL,
                heading=Heading.OUTBOUND,
                failed=True,
            ),
            Action.NONE,
        )
    if res is ContactResolution.PASS:
        return dataclasses.replace(robot, fsm=resume, resume=None), Action.SWAP
    return dataclasses.replace(robot, fsm=FsmState.COLLISION, resume=resume), Action.NONE


def fsm_step(
    robot: Robot, percepts: Percepts, draws: Draws, timing: Timing
) -> tuple[Robot, Action]:
    s = robot.fsm
    replace = dataclasses.replace

    if s is FsmState.EXIT_HOME:
        if not percepts.at_home or draws.enter is None:
            raise ContractViolation(f"robot {robot.id} at trip start without home percept or draw")
        if decide_enter(robot.policy, draws.enter) is EnterDecision.DIG:
            fresh = replace(
                robot, fsm=FsmState.GOTO_DIG, heading=Heading.INBOUND, trip_collisions=0, failed=False
            )
            return fresh, Action.START_DIG
        rest = replace(robot, fsm=FsmState.RESTING, timer=timing.t_rest, trip_collisions=0, failed=False)
        return rest, Action.START_REST

    if s is FsmState.GOTO_DIG:
        if percepts.at_home:
            return robot, (Action.NONE if percepts.blocked else Action.MOVE)
        if percepts.at_face:
            return replace(robot, fsm=FsmState.DIGGING, timer=timing.t_dig), Action.NONE
        if percepts.blocked:
            return _collide(robot, FsmState.GOTO_DIG, percepts.resolution)
        return robot, Action.MOVE

    if s is FsmState.DIGGING:
        timer = robot.timer - 1
        if timer == 0:
            grabbed = replace(
                robot, fsm=FsmState.EXIT_TUNNEL, timer=0, carrying=True, heading=Heading.OUTBOUND
            )
            return grabbed, Action.GRAB
        return replace(robot, timer=timer), Action.NONE

    if s is FsmState.EXIT_TUNNEL or s is FsmState.GOTO_DUMP:
        if robot.pos == DEPOSIT:
            if s is FsmState.EXIT_TUNNEL:
                raise ContractViolation(f"robot {robot.id} in ExitTunnel outside the tunnel")
            # Empty-handed robots run the same deposit-area routine.
            return replace(robot, fsm=FsmState.DUMPING, timer=timing.t_dump), Action.NONE
        if robot.pos < 0:
            raise ContractViolation(f"robot {robot.id} heading out from zone {robot.pos}")
        if percepts.blocked:
            return _collide(robot, FsmState.GOTO_DUMP, percepts.resolution)
        return replace(robot, fsm=FsmState.GOTO_DUMP), Action.MOVE

    if s is FsmState.DUMPING:
        timer = robot.timer - 1
        if timer == 0:
            done = replace(
                robot, fsm=FsmState.EXIT_HOME, timer=0, carrying=False, heading=Heading.INBOUND
            )
            return done, (Action.DEPOSIT if robot.carrying else Action.TRIP_FAILED)
        return replace(robot, timer=timer), Action.NONE

    if s is FsmState.RESTING:
        if robot.pos != REST:
            raise ContractViolation(f"robot {robot.id} resting outside the rest zone")
        timer = robot.timer - 1
        if timer == 0:
            return replace(robot, fsm=FsmState.EXIT_HOME, timer=0), Action.REST_DONE
        return replace(robot, timer=timer), Action.NONE

    if s is FsmState.COLLISION:
        if robot.pos < 0:
            raise ContractViolation(f"robot {robot.id} in Collision outside the tunnel")
        resume = robot.resume
        if resume is FsmState.EXIT_TUNNEL:
            resume = FsmState.GOTO_DUMP
        if not percepts.blocked:
            if robot.wants_move() == 0:
                return replace(robot, fsm=resume, resume=None), Action.NONE
            return replace(robot, fsm=resume, resume=None), Action.MOVE
        return _collide(robot, resume, percepts.resolution)

    raise ContractViolation(f"robot {robot.id} in unknown state {s!r}")


def measure_length(
    l_true: int, trip_collisions: int, sigma0: float, sigma_c: float, draws: Sequence[float]
) -> float:
    """Noisy odometry reading of the tunnel length.

    ``draws`` holds ``1 + trip_collisions`` uniforms on [0, 1): the first sets
    the baseline error in [-sigma0, sigma0], each further one adds a
    per-collision slip in [-sigma_c, sigma_c].
    """
    if len(draws) != 1 + trip_collisions:
        raise ValueError(f"need {1 + trip_collisions} draws, got {len(draws)}")
    value = l_true + sigma0 * (2.0 * draws[0] - 1.0)
    for u in draws[1:]:
        value += sigma_c * (2.0 * u - 1.0)
    return value if value > 0.0 else 0.0


def update_estimate(odo: OdometryState, l_raw: float, gamma: float) -> OdometryState:
    l_est = odo.l_est + gamma * (l_raw - odo.l_est)
    delta = l_est - odo.l0
    return OdometryState(l0=odo.l0, l_est=l_est, delta_l=delta if delta > 0.0 else 0.0, last_raw=l_raw)
