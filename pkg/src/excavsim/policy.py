"""Trip-level probability laws for the three excavation protocols.

Active robots always enter and never reverse.  Reversal robots always enter
and give up with a fixed probability on contact.  Adaptive robots learn: the
reversal probability decays as a power of the estimated tunnel extension, and
the entrance probability is reinforced by successful trips, penalised by
unsuccessful ones and slowly restored while resting.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum


class ProtocolKind(str, Enum):
    ACTIVE = "active"
    REVERSAL = "reversal"
    ADAPTIVE = "adaptive"


class TripOutcome(IntEnum):
    SUCCESSFUL = 0
    UNSUCCESSFUL = 1
    RESTED = 2


class EnterDecision(IntEnum):
    DIG = 0
    REST = 1


class ContactReaction(IntEnum):
    PERSIST = 0
    GIVE_UP = 1


@dataclass(frozen=True)
class ProtocolParams:
    kind: ProtocolKind = ProtocolKind.ADAPTIVE
    alpha: float = 0.6
    fixed_reversal: float = 0.8
    eta: float = 1.5
    xi: float = 0.001
    gamma: float = 0.9
    t_rest: int = 60
    rev_exponent: float = 0.5
    ent_exponent: float = 2.0


@dataclass(frozen=True)
class PolicyState:
    p_enter: float = 1.0
    p_reverse: float = 0.0


def clamp01(x: float) -> float:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


def reversal_probability(alpha: float, l0: float, delta_l: float, exponent: float = 0.5) -> float:
    """Give-up probability after tunnel growth ``delta_l`` beyond ``l0``.

    ``alpha * (l0 / (l0 + delta_l)) ** exponent``; the default exponent gives
    the inverse square-root law.
    """
    return clamp01(alpha * (l0 / (l0 + delta_l)) ** exponent)


def entrance_update_value(l0: float, delta_l: float, exponent: float = 2.0) -> float:
    """Size of one entrance-probability reinforcement step.

    Zero for an unextended tunnel and tending to one as the tunnel grows.
    """
    return (delta_l / (l0 + delta_l)) ** exponent


def initial_policy(params: ProtocolParams) -> PolicyState:
    if params.kind is ProtocolKind.ACTIVE:
        return PolicyState(p_enter=1.0, p_reverse=0.0)
    if params.kind is ProtocolKind.REVERSAL:
        return PolicyState(p_enter=1.0, p_reverse=params.fixed_reversal)
    return PolicyState(p_enter=1.0, p_reverse=clamp01(params.alpha))


def apply_trip_outcome(
    state: PolicyState,
    outcome: TripOutcome,
    params: ProtocolParams,
    l0: float,
    delta_l: float,
) -> PolicyState:
    """Update a robot's probabilities at the end of a trip.

    Fixed protocols are inert.  Under the adaptive protocol the entrance
    probability moves by ``eta * entrance_update_value`` (up on success, down
    on failure) or by ``xi`` after a rest; the reversal probability is only
    refreshed after active trips.
    """
    if params.kind is not ProtocolKind.ADAPTIVE:
        return state
    if outcome is TripOutcome.RESTED:
        return PolicyState(clamp01(state.p_enter + params.xi), state.p_reverse)
    step = params.eta * entrance_update_value(l0, delta_l, params.ent_exponent)
    if outcome is TripOutcome.SUCCESSFUL:
        p_enter = clamp01(state.p_enter + step)
    else:
        p_enter = clamp01(state.p_enter - step)
    p_reverse = reversal_probability(params.alpha, l0, delta_l, params.rev_exponent)
    return PolicyState(p_enter, p_reverse)


def decide_enter(state: PolicyState, draw: float) -> EnterDecision:
    return EnterDecision.DIG if draw < state.p_enter else EnterDecision.REST


def decide_reverse(state: PolicyState, draw: float) -> ContactReaction:
    return ContactReaction.GIVE_UP if draw < state.p_reverse else ContactReaction.PERSIST
