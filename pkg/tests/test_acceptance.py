"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line."""

import dataclasses
import itertools
import time
from decimal import Decimal, getcontext
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import binomtest, spearmanr

from excavsim.agent import OdometryState, update_estimate
from excavsim.config import SimConfig
from excavsim.engine import advance, new_sim, run
from excavsim.eventlog import EventKind
from excavsim.metrics import gini, gini_pairwise, lorenz_curve
from excavsim.policy import (
    PolicyState,
    ProtocolKind,
    ProtocolParams,
    TripOutcome,
    apply_trip_outcome,
    entrance_update_value,
    reversal_probability,
)
from excavsim.sweep import SweepPlan, compare_protocols, fixed_length_base, optimal_reversal_per_length, sweep_reversal

SEEDS = list(range(20))
getcontext().prec = 50


@pytest.fixture
def report(capsys):
    def emit(name, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
        assert ok, detail

    return emit


@pytest.fixture(scope="module")
def comparison():
    t0 = time.perf_counter()
    cmp = compare_protocols(SimConfig(), SEEDS)
    return cmp, time.perf_counter() - t0


def _clamp(x):
    return min(Decimal(1), max(Decimal(0), x))


def test_c1_equation_exactness(report):
    t0 = time.perf_counter()
    worst = 0.0
    grid = list(itertools.product([0.3, 0.6, 0.9], [1, 2], [0, 0.5, 1, 3, 8, 20]))
    for alpha, l0, dl in grid:
        a, l, d = Decimal(str(alpha)), Decimal(l0), Decimal(str(dl))
        eq1 = _clamp(a * (l / (l + d)).sqrt())
        worst = max(worst, abs(reversal_probability(alpha, l0, dl) - float(eq1)))
        eq2 = Fraction(Decimal(str(dl))) / (l0 + Fraction(Decimal(str(dl))))
        worst = max(worst, abs(entrance_update_value(l0, dl) - float(eq2**2)))
    params = ProtocolParams(kind=ProtocolKind.ADAPTIVE, alpha=0.6, eta=0.2, xi=0.05, gamma=0.9)
    for p_enter, dl, outcome in itertools.product([0.0, 0.15, 0.5, 0.8, 1.0], [0, 1, 4, 9], list(TripOutcome)):
        out = apply_trip_outcome(PolicyState(p_enter, 0.6), outcome, params, 1.0, dl)
        pe, d = Decimal(str(p_enter)), Decimal(str(dl))
        step = Decimal("0.2") * (d / (1 + d)) ** 2
        if outcome is TripOutcome.RESTED:
            want_e, want_r = _clamp(pe + Decimal("0.05")), Decimal("0.6")
        else:
            want_e = _clamp(pe + step if outcome is TripOutcome.SUCCESSFUL else pe - step)
            want_r = Decimal("0.6") * (1 / (1 + d)).sqrt()
        worst = max(worst, abs(out.p_enter - float(want_e)), abs(out.p_reverse - float(want_r)))
    for l_est, l_raw in itertools.product([0.0, 1.0, 3.0, 7.25], [0.5, 3.0, 5.0, 11.0, 2.2]):
        got = update_estimate(OdometryState(1.0, l_est), l_raw, 0.9).l_est
        want = Decimal(str(l_est)) + Decimal("0.9") * (Decimal(str(l_raw)) - Decimal(str(l_est)))
        worst = max(worst, abs(got - float(want)))
    elapsed = time.perf_counter() - t0
    report("C1 equation exactness", worst <= 1e-12 and elapsed < 1.0, f"max error {worst:.2e} in {elapsed:.2f}s")


def _sign_test(a, b):
    wins = sum(x > y for x, y in zip(a, b))
    losses = sum(x < y for x, y in zip(a, b))
    return wins, binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue


def test_c2_protocol_ordering(comparison, report):
    cmp, elapsed = comparison
    ad, rev, act = cmp["adaptive"], cmp["reversal"], cmp["active"]
    w1, p1 = _sign_test(ad.totals, rev.totals)
    w2, p2 = _sign_test(rev.totals, act.totals)
    ok = ad.mean > rev.mean > act.mean and p1 < 0.05 and p2 < 0.05 and elapsed < 60
    detail = (
        f"means {ad.mean:.1f} > {rev.mean:.1f} > {act.mean:.1f}; sign tests "
        f"Ad>Rev {w1}/20 p={p1:.2g}, Rev>Act {w2}/20 p={p2:.2g}; {elapsed:.1f}s"
    )
    report("C2 protocol ordering", ok, detail)


def test_c3_workload_inequality(comparison, report):
    cmp, _ = comparison
    g_rev, g_ad = cmp["reversal"].mean_gini, cmp["adaptive"].mean_gini
    ok = g_rev < 0.15 and g_ad - g_rev >= 0.1 and 0.15 <= g_ad <= 0.45
    report("C3 workload inequality", ok, f"Gini reversal {g_rev:.3f}, adaptive {g_ad:.3f}")


def test_c4_contact_reduction(comparison, report):
    cmp, _ = comparison
    cf = {k: cmp[k].mean_contact_fraction for k in ("active", "reversal", "adaptive")}
    ok = cf["adaptive"] <= 0.5 * cf["active"] and cf["adaptive"] <= 0.5 * cf["reversal"]
    detail = f"contact fraction active {cf['active']:.3f}, reversal {cf['reversal']:.3f}, adaptive {cf['adaptive']:.3f}"
    report("C4 contact reduction", ok, detail)


def test_c5_sweep_trend(report):
    t0 = time.perf_counter()
    plan = SweepPlan(length_grid=tuple(range(2, 11)), seeds=20)
    matrix = sweep_reversal(plan, fixed_length_base(SimConfig()))
    opt = optimal_reversal_per_length(matrix)
    best = [o.p_reverse for o in opt]
    rho = spearmanr([o.length for o in opt], best).correlation
    drop = best[0] - best[-1]
    elapsed = time.perf_counter() - t0
    ok = rho < 0 and drop >= 0.2 - 1e-12 and elapsed < 600
    report("C5 sweep trend", ok, f"argmax P_r by L=2..10 {best}; spearman {rho:.3f}; drop {drop:.1f}; {elapsed:.1f}s")


def test_c6_estimator_property(report):
    cfg = SimConfig(robots=1).with_protocol("adaptive", gamma=0.9)
    cfg = cfg.replace("world", l0=4, growth=False).replace("noise", sigma0=0.0, sigma_c=0.0)
    sim = new_sim(cfg, 0)
    e0 = 9.5 - 4
    sim.robots[0] = dataclasses.replace(sim.robots[0], odo=OdometryState(4.0, 9.5))
    log = advance(sim, 3000, "python")
    est = log.of_kind(EventKind.ESTIMATE_UPDATED)
    worst = max(abs(abs(y - 4.0) - 0.1**n * abs(e0)) for n, y in enumerate(est["y"], start=1))
    ok = len(est) >= 20 and worst <= 1e-12
    report("C6 estimator property", ok, f"{len(est)} trips, max deviation {worst:.2e}")


def test_c7_invariant_suite(report):
    problems = []
    for kind in ProtocolKind:
        cfg = SimConfig().with_protocol(kind)
        a = run(cfg, seed=1, check=True)
        if a.log.to_ndjson() != run(cfg, seed=1).log.to_ndjson():
            problems.append(f"{kind.value} not deterministic")
        ends = a.log.of_kind(EventKind.TRIP_ENDED)
        if not (np.all((ends["x"] >= 0) & (ends["x"] <= 1)) and np.all((ends["y"] >= 0) & (ends["y"] <= 1))):
            problems.append(f"{kind.value} probabilities out of range")
        for row in a.log.pos:
            inside = row[row >= 0]
            if len(inside) != len(set(inside.tolist())):
                problems.append(f"{kind.value} shared cell")
                break
    give_ups = 0
    for s in SEEDS:
        res = run(SimConfig().with_protocol("active"), seed=s)
        give_ups += int((res.log.of_kind(EventKind.CONTACT_RESOLVED)["b"] == 1).sum())
    if give_ups:
        problems.append(f"{give_ups} give-ups under active")
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        w = rng.exponential(size=int(rng.integers(2, 30)))
        worst = max(worst, abs(gini(w) - gini_pairwise(w)))
        xs, ys = zip(*lorenz_curve(w))
        if ys[0] != 0 or abs(ys[-1] - 1) > 1e-15 or np.any(np.diff(np.diff(ys) / np.diff(xs)) < -1e-9):
            problems.append("lorenz shape")
            break
    if worst > 1e-10:
        problems.append(f"gini formulas differ by {worst:.1e}")
    report("C7 invariant suite", not problems, "; ".join(problems) or f"all green (gini max diff {worst:.1e})")


def test_c8_early_window_parity(comparison, report):
    cmp, _ = comparison
    early = {k: cmp[k].early_mean for k in ("active", "reversal", "adaptive")}
    spread = max(early.values()) - min(early.values())
    ok = spread < 0.25 * early["active"]
    detail = ", ".join(f"{k} {v:.1f}" for k, v in early.items()) + f"; spread {spread:.1f} vs bound {0.25 * early['active']:.1f}"
    report("C8 early-window parity", ok, detail)
