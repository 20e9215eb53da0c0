import random

import numpy as np
import pytest

from excavsim.config import SimConfig
from excavsim.engine import run
from excavsim.sweep import (
    RateMatrix,
    SweepPlan,
    compare_protocols,
    fixed_length_base,
    optimal_reversal_per_length,
    sweep_reversal,
)

BASE = fixed_length_base(SimConfig())


def test_plan_validation():
    with pytest.raises(ValueError):
        SweepPlan(reversal_grid=())
    with pytest.raises(ValueError):
        SweepPlan(seeds=0)
    with pytest.raises(ValueError):
        SweepPlan(length_grid=(0, 2))
    assert len(SweepPlan().reversal_grid) == 11 and len(SweepPlan().length_grid) == 10


def test_preconditions():
    with pytest.raises(ValueError):
        sweep_reversal(SweepPlan(), SimConfig())
    with pytest.raises(ValueError):
        compare_protocols(BASE, [0])


def test_degenerate_grid_equals_single_run():
    plan = SweepPlan(reversal_grid=(0.0,), length_grid=(3,), seeds=1, horizon=3000)
    m = sweep_reversal(plan, BASE)
    cfg = BASE.with_protocol("reversal", fixed_reversal=0.0).replace("world", l0=3)
    cfg = cfg.replace("engine", horizon=3000)
    assert m.mean.shape == (1, 1)
    assert m.mean[0, 0] == run(cfg, seed=BASE.seed).deposits / 3000
    assert m.sd[0, 0] == 0.0 and m.seeds == 1


def test_sweep_is_deterministic_and_seeded_from_base():
    plan = SweepPlan(reversal_grid=(0.0, 0.5), length_grid=(2, 4), seeds=3, horizon=1500)
    a, b = sweep_reversal(plan, BASE), sweep_reversal(plan, BASE)
    assert np.array_equal(a.mean, b.mean) and np.array_equal(a.sd, b.sd)
    c = sweep_reversal(plan, BASE.replace(seed=50))
    assert not np.array_equal(a.mean, c.mean)
    assert list(a.runs[(0.0, 2)]) == [0, 1, 2]


def test_merge_is_order_independent():
    recs = [(p, n, s, random.Random(s * 31 + n).random() * p) for p in (0.0, 0.5, 1.0) for n in (2, 5) for s in range(7)]
    ref = RateMatrix.from_runs((0.0, 0.5, 1.0), (2, 5), recs)
    for k in range(5):
        shuffled = recs[:]
        random.Random(k).shuffle(shuffled)
        m = RateMatrix.from_runs((0.0, 0.5, 1.0), (2, 5), shuffled)
        assert np.array_equal(m.mean, ref.mean) and np.array_equal(m.sd, ref.sd)


def test_identical_seed_runs_collapse_exactly():
    rate = 0.1
    m = RateMatrix.from_runs((0.3,), (4,), [(0.3, 4, 9, rate)] * 3)
    assert m.mean[0, 0] == rate and m.counts[0, 0] == 1
    with pytest.raises(ValueError):
        RateMatrix.from_runs((0.3,), (4,), [(0.3, 4, 9, rate), (0.3, 4, 9, 0.2)])


def _matrix(mean, ps, ls):
    mean = np.asarray(mean, float)
    return RateMatrix(tuple(ps), tuple(ls), mean, np.zeros_like(mean), np.ones(mean.shape, int), {})


def test_optimal_single_column():
    m = _matrix([[0.2, 0.1, 0.3]], (0.4,), (1, 2, 3))
    assert [o.p_reverse for o in optimal_reversal_per_length(m)] == [0.4, 0.4, 0.4]


def test_optimal_strict_and_ties():
    m = _matrix([[0.1, 0.5], [0.3, 0.2], [0.2, 0.5]], (0.0, 0.5, 1.0), (2, 8))
    opt = optimal_reversal_per_length(m)
    assert [(o.length, o.p_reverse) for o in opt] == [(2, 0.5), (8, 0.0)]
    assert opt[0].ties == (0.5,) and opt[1].ties == (0.0, 1.0)


def test_full_give_up_is_worse_than_half_at_length_8():
    plan = SweepPlan(reversal_grid=(0.5, 1.0), length_grid=(8,), seeds=20)
    m = sweep_reversal(plan, BASE)
    assert m.mean[1, 0] < m.mean[0, 0]


def test_compare_horizon_zero():
    cmp = compare_protocols(SimConfig().replace("engine", horizon=0), [0])
    for s in cmp.protocols.values():
        assert s.totals == [0] and s.early_totals == [0]


def test_compare_shares_seeds_and_reports():
    cmp = compare_protocols(SimConfig().replace("engine", horizon=2000), [3, 1, 3])
    for s in cmp.protocols.values():
        assert s.seeds == [1, 3] and len(s.reports) == 2
        assert [r.total_deposits for r in s.reports] == s.totals
        assert all(e <= t for e, t in zip(s.early_totals, s.totals))
    assert cmp["active"].totals == [
        run(SimConfig().with_protocol("active").replace("engine", horizon=2000), seed=s).deposits for s in (1, 3)
    ]
