import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fixed_config, head_on_sim, place
from excavsim.agent import FsmState
from excavsim.config import ConfigError, SimConfig
from excavsim.engine import advance, new_sim, run, step
from excavsim.eventlog import EventKind
from excavsim.rng import Purpose
from excavsim.world import HOME


def test_unobstructed_walk_to_face():
    sim = new_sim(fixed_config(3, 1), 0)
    place(sim, 0, 2, FsmState.GOTO_DIG)
    for _ in range(3):
        step(sim)
    assert sim.robots[0].pos == 0 and sim.robots[0].fsm is FsmState.DIGGING
    assert sim.tick == 3


def test_forced_pass_swaps_next_tick():
    cfg = fixed_config(5, 2, p_pass=1.0)
    sim = head_on_sim(cfg, 0, 3, [2])
    step(sim)  # contact starts, inbound robot decides to persist
    assert (sim.robots[0].pos, sim.robots[1].pos) == (3, 2)
    step(sim)
    assert (sim.robots[0].pos, sim.robots[1].pos) == (2, 3)
    passes = sim.log.events
    assert any(e[2] == EventKind.CONTACT_RESOLVED and e[4] == 0 for e in passes)


def _first_resolution(cfg, seed, outbound_at, backend=None):
    """Ticks from the start of the robot 0 / robot 1 contact to its resolution, and how it ended."""
    sim = head_on_sim(cfg, seed, 3, outbound_at)
    start = None
    while sim.tick < 10_000:
        ev = advance(sim, 16, backend).events
        mine = ev[((ev["robot"] == 0) & (ev["a"] == 1)) | ((ev["robot"] == 1) & (ev["a"] == 0))]
        if start is None:
            started = mine[mine["kind"] == EventKind.CONTACT_STARTED]
            if len(started):
                start = int(started["tick"][0])
        res = mine[mine["kind"] == EventKind.CONTACT_RESOLVED]
        if len(res):
            return int(res["tick"][0]) - start, int(res["b"][0])
    raise AssertionError("contact never resolved")


def test_two_robot_pass_time_is_geometric():
    cfg = fixed_config(6, 2, p_pass=0.5, p_pass_jam=0.1)
    times = [_first_resolution(cfg, s, [2])[0] for s in range(10_000)]
    # geometric with p=0.5: mean 2, sd sqrt(2)
    assert abs(np.mean(times) - 2.0) < 4 * np.sqrt(2 / 10_000)


def test_three_robot_jam_resolves_slower():
    cfg = fixed_config(6, 3, p_pass=0.5, p_pass_jam=0.1)
    pair = [_first_resolution(cfg.replace(robots=2), s, [2])[0] for s in range(10_000)]
    jam = [_first_resolution(cfg, s, [2, 1])[0] for s in range(10_000)]
    ratio = np.mean(jam) / np.mean(pair)
    # expected ratio is exactly (1/0.1) / (1/0.5) = 5; allow four standard errors
    se = ratio * np.hypot(np.std(jam) / np.mean(jam), np.std(pair) / np.mean(pair)) / np.sqrt(10_000)
    assert ratio >= 5 - 4 * se
    assert abs(np.mean(jam) - 10.0) < 4 * np.sqrt(90 / 10_000)


def test_fixed_reversal_gives_up_about_80_percent():
    cfg = fixed_config(6, 2, kind="reversal")
    outcomes = [_first_resolution(cfg, s, [2])[1] for s in range(4000)]
    frac = np.mean([o == 1 for o in outcomes])
    assert abs(frac - 0.8) < 3 * np.sqrt(0.16 / 4000)


def test_wall_contact_is_not_a_robot_contact(backend):
    cfg = fixed_config(4, 1, kind="reversal")
    sim = new_sim(cfg, 3)
    log = advance(sim, 2000, backend)
    assert len(log.of_kind(EventKind.CONTACT_STARTED)) == 0
    assert sim.streams.count(0, Purpose.REVERSE) == 0
    assert not log.contact.any()


def test_horizon_zero():
    res = run(SimConfig().replace("engine", horizon=0))
    assert res.log.ticks == 0 and res.deposits == 0 and len(res.log.events) == 0


def test_determinism(backend):
    cfg = SimConfig().replace("engine", horizon=3000)
    a = run(cfg, seed=11, backend=backend).log.to_ndjson()
    b = run(cfg, seed=11, backend=backend).log.to_ndjson()
    assert a == b
    assert a != run(cfg, seed=12, backend=backend).log.to_ndjson()


@pytest.mark.parametrize("length", [2, 3, 5])
def test_single_robot_closed_form(length, backend):
    """One trip costs L in + 1 arrival + T_dig + L out + 1 arrival + T_dump."""
    cfg = fixed_config(length, 1, t_dig=8, t_dump=4, horizon=10_800)
    cfg = cfg.replace("noise", sigma0=0.0, sigma_c=0.0)
    period = 2 * length + 8 + 4 + 2
    res = run(cfg, seed=0, backend=backend)
    assert res.deposits == 10_800 // period
    ticks = res.log.of_kind(EventKind.DEPOSIT_MADE)["tick"]
    assert np.all(np.diff(ticks) == period) and ticks[0] == period - 1


def test_config_errors_before_stepping():
    with pytest.raises(ConfigError):
        run(SimConfig().replace("protocol", gamma=0.0))


def _run_invariants(res):
    log, sim = res.log, res.sim
    ev = log.events
    kinds = ev["kind"]
    # exclusivity on every sample
    for row in log.pos:
        inside = row[row >= 0]
        assert len(inside) == len(set(inside.tolist()))
    # conservation
    ends = log.of_kind(EventKind.TRIP_ENDED)
    assert (kinds == EventKind.DEPOSIT_MADE).sum() == (ends["a"] == 0).sum() == sim.world.deposit_count
    # growth exactness and monotone length
    lengths = log.lengths()
    assert np.all(np.diff(lengths) >= 0)
    w = sim.world
    if w.growth:
        assert w.l_true - w.l0 == w.deposit_count // w.deposits_per_growth
    # trips alternate start / end per robot
    for r in range(log.robots):
        mine = ev[(ev["robot"] == r) & np.isin(kinds, [EventKind.TRIP_STARTED, EventKind.TRIP_ENDED])]
        seq = mine["kind"].tolist()
        assert seq[::2] == [EventKind.TRIP_STARTED] * len(seq[::2])
        assert seq[1::2] == [EventKind.TRIP_ENDED] * len(seq[1::2])
    # estimates only right after digging
    for e in log.of_kind(EventKind.ESTIMATE_UPDATED):
        i = int(e["tick"]) - log.start_tick
        assert i > 0 and log.state[i - 1, e["robot"]] == FsmState.DIGGING
    # at most one give-up draw per contact a robot took part in
    started = log.of_kind(EventKind.CONTACT_STARTED)
    for r in range(log.robots):
        involved = int(((started["robot"] == r) | (started["a"] == r)).sum())
        assert sim.streams.count(r, Purpose.REVERSE) <= involved
    # ticks never go backwards
    assert np.all(np.diff(ev["tick"]) >= 0)


@pytest.mark.parametrize("kind", ["active", "reversal", "adaptive"])
def test_run_invariants(kind, backend):
    res = run(SimConfig().with_protocol(kind).replace("engine", horizon=10_800), seed=5, backend=backend)
    _run_invariants(res)


@settings(max_examples=25, deadline=None)
@given(
    st.sampled_from(["active", "reversal", "adaptive"]),
    st.integers(1, 6),
    st.integers(1, 4),
    st.integers(0, 2**31),
    st.floats(0.0, 1.0),
)
def test_random_configs_keep_invariants(kind, robots, l0, seed, p_pass):
    cfg = SimConfig(robots=robots).with_protocol(kind).replace("world", l0=l0, deposits_per_growth=5)
    cfg = cfg.replace("engine", horizon=1500, p_pass=p_pass, p_pass_jam=p_pass / 4)
    res = run(cfg, seed=seed, backend="python", check=True)
    _run_invariants(res)
    carrying_states = {FsmState.DIGGING, FsmState.EXIT_TUNNEL, FsmState.GOTO_DUMP, FsmState.DUMPING, FsmState.COLLISION}
    for r in res.sim.robots:
        if r.carrying:
            assert r.fsm in carrying_states
        assert 0.0 <= r.policy.p_enter <= 1.0 and 0.0 <= r.policy.p_reverse <= 1.0


@pytest.mark.parametrize("seed", range(5))
def test_active_never_gives_up(seed, backend):
    res = run(SimConfig().with_protocol("active"), seed=seed, backend=backend)
    resolved = res.log.of_kind(EventKind.CONTACT_RESOLVED)
    assert (resolved["b"] == 1).sum() == 0
    assert (res.log.of_kind(EventKind.TRIP_ENDED)["a"] == 1).sum() == 0


def test_robots_start_at_home():
    sim = new_sim(SimConfig(), 0)
    assert all(r.pos == HOME and r.fsm is FsmState.EXIT_HOME for r in sim.robots)


def test_backend_selection(monkeypatch):
    from excavsim import kernel
    from excavsim.engine import default_backend

    assert "python" in kernel.available()
    monkeypatch.setenv("EXCAVSIM_BACKEND", "python")
    assert default_backend() == "python"
    monkeypatch.delenv("EXCAVSIM_BACKEND")
    assert default_backend() == kernel.BACKEND
    with pytest.raises(ValueError):
        advance(new_sim(SimConfig()), 1, "fortran")
