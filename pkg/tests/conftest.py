import dataclasses

import pytest

from excavsim.agent import FsmState, Heading
from excavsim.config import SimConfig
from excavsim.engine import new_sim
from excavsim.kernel import available

BACKENDS = available()


def fixed_config(length: int, robots: int, kind: str = "active", **engine) -> SimConfig:
    cfg = SimConfig(robots=robots).with_protocol(kind)
    cfg = cfg.replace("world", l0=length, growth=False)
    if engine:
        cfg = cfg.replace("engine", **engine)
    return cfg


def place(sim, rid: int, pos: int, fsm: FsmState, carrying: bool = False, **changes):
    """Put robot ``rid`` at ``pos`` in ``fsm``, keeping cell occupancy in sync."""
    old = sim.robots[rid]
    if old.pos >= 0:
        sim.world.tunnel_cells[old.pos].occupant = None
    heading = Heading.OUTBOUND if fsm in (FsmState.EXIT_TUNNEL, FsmState.GOTO_DUMP) else Heading.INBOUND
    sim.robots[rid] = dataclasses.replace(old, pos=pos, fsm=fsm, carrying=carrying, heading=heading, **changes)
    if pos >= 0:
        sim.world.tunnel_cells[pos].occupant = rid


def head_on_sim(cfg: SimConfig, seed: int, inbound_at: int, outbound_at: list[int]):
    """Inbound robot 0 facing outbound robots 1.. stacked toward the face."""
    sim = new_sim(cfg, seed)
    place(sim, 0, inbound_at, FsmState.GOTO_DIG)
    for i, p in enumerate(outbound_at, start=1):
        place(sim, i, p, FsmState.GOTO_DUMP, carrying=True)
    return sim


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param

