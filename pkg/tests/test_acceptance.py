"""Acceptance criteria, one test per criterion.

Each test records a one-line verdict that is printed in the pytest terminal
summary under "acceptance criteria". Batch criteria use the default config,
500 trials and master seed ``ACCEPTANCE_SEED``.
"""

import math
import random
import time

import pytest

from crosswalk_sim.cli import main, write_outputs
from crosswalk_sim.config import ScenarioConfig
from crosswalk_sim.light import LightState
from crosswalk_sim.pedestrian import (
    DecisionParams,
    crossing_threshold,
    distance_factor,
    light_factor,
    wait_for_red_bias,
)
from crosswalk_sim.stats import BatchConfig, aggregate, distance_bin, pearson, run_batch
from crosswalk_sim.vehicle import (
    IdmParams,
    Lane,
    ObstacleKind,
    ObstacleView,
    VehicleState,
    desired_gap,
    idm_acceleration,
    step_vehicle,
)

ACCEPTANCE_SEED = 0  # same as the CLI default --seed
N_TRIALS = 500
G, Y, R = LightState.GREEN, LightState.YELLOW, LightState.RED


def verdict(report, number, ok, detail):
    report[number] = (bool(ok), detail)
    print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def batch():
    cfg = ScenarioConfig()
    started = time.perf_counter()
    outcomes = run_batch(BatchConfig(cfg, N_TRIALS, ACCEPTANCE_SEED), jobs=1)
    elapsed = time.perf_counter() - started
    return outcomes, elapsed, aggregate(outcomes, strict=False)


def crossings(outcomes, light):
    done = [o for o in outcomes if not o.timeout and o.light_at_crossing is light]
    return sum(o.success for o in done), sum(not o.success for o in done)


def test_1_red_crossings_safe_and_fast(batch, acceptance_report):
    outcomes, elapsed, _ = batch
    ok_n, fail_n = crossings(outcomes, R)
    rate = ok_n / (ok_n + fail_n) if ok_n + fail_n else float("nan")
    verdict(acceptance_report, 1, rate >= 0.99 and elapsed < 10.0,
            f"red success rate {rate:.4f} ({ok_n}/{ok_n + fail_n}, need >= 0.99); "
            f"{N_TRIALS} trials in {elapsed:.2f} s (need < 10 s)")


def test_2_no_green_crossings(batch, acceptance_report):
    outcomes, _, _ = batch
    n_green = sum(crossings(outcomes, G))
    p = DecisionParams()
    rng = random.Random(2)
    worst = max(crossing_threshold(G, rng.uniform(0, 400), rng.choice([rng.uniform(0, 60), math.inf]), p)
                for _ in range(100_000))
    grid = max(crossing_threshold(G, w, d, p) for w in (0, 5, 9.99, 10, 12, 1e6) for d in (0, 2, 3, 4, 4.01, math.inf))
    verdict(acceptance_report, 2, n_green == 0 and worst == 0.0 and grid == 0.0,
            f"green crossings {n_green} (need 0); max green threshold {max(worst, grid)} (need 0)")


def test_3_yellow_mostly_fails(batch, acceptance_report):
    outcomes, _, _ = batch
    ok_n, fail_n = crossings(outcomes, Y)
    share = fail_n / (ok_n + fail_n) if ok_n + fail_n else float("nan")
    verdict(acceptance_report, 3, share > 0.5, f"yellow failure share {share:.3f} ({fail_n}/{ok_n + fail_n}, need > 0.5)")


def test_4_correlation_triple(batch, acceptance_report):
    _, _, stats = batch
    targets = {"success_vs_wait": -0.81, "success_vs_distance": 0.52, "wait_vs_distance": -0.55}
    parts, ok = [], True
    for name, target in targets.items():
        r = stats.correlations.get(name)
        good = r is not None and math.copysign(1, r) == math.copysign(1, target) and abs(abs(r) - abs(target)) <= 0.20
        ok &= good
        parts.append(f"{name} {r:+.3f} (target {target:+.2f} +/- 0.20){'' if good else ' X'}")
    verdict(acceptance_report, 4, ok, "; ".join(parts))


def test_5_green_arrival_waits(batch, acceptance_report):
    _, _, stats = batch
    med = {s: stats.wait_stats_by_light_at_arrival[s].median for s in (G, Y, R)}
    ok = 8.0 <= med[G] <= 18.0 and med[R] < med[Y] < med[G]
    verdict(acceptance_report, 5, ok,
            f"median wait by arrival light: red {med[R]:.2f} < yellow {med[Y]:.2f} < green {med[G]:.2f} s "
            f"(green in [8, 18])")


def test_6_failures_close_to_vehicles(batch, acceptance_report):
    outcomes, _, _ = batch
    failures = [o for o in outcomes if not o.timeout and not o.success]
    bins = [distance_bin(o.nearest_vehicle_at_decision_m) for o in failures]
    near = sum(b == 0 for b in bins) / len(failures)
    far = sum(b >= 2 for b in bins) / len(failures)
    verdict(acceptance_report, 6, near >= 0.70 and far <= 0.10,
            f"{len(failures)} failures: {near:.3f} in [0,5) m (need >= 0.70), {far:.3f} at >= 10 m (need <= 0.10)")


def test_7_determinism(batch, tmp_path, acceptance_report):
    outcomes, _, stats = batch
    write_outputs(tmp_path / "in_process", stats, outcomes, {}, "json")
    seed = str(ACCEPTANCE_SEED)
    for jobs in ("1", "8"):
        assert main(["run", "--trials", str(N_TRIALS), "--seed", seed, "--jobs", jobs, "--out", str(tmp_path / jobs)]) == 0
    same = all(
        (tmp_path / "in_process" / f).read_bytes() == (tmp_path / "1" / f).read_bytes() == (tmp_path / "8" / f).read_bytes()
        for f in ("trials.csv", "aggregate.json")
    )
    verdict(acceptance_report, 7, same, "trials.csv and aggregate.json byte-identical across repeated runs and --jobs 1/8")


def _platoon_min_gap(rng, p, steps=10_000, dt=1 / 60):
    lead = VehicleState(Lane.EASTBOUND, 0.0, rng.uniform(0, 15), rng.uniform(10, 15), 0)
    gap0 = rng.uniform(p.s0_m, 80.0)
    follower = VehicleState(Lane.EASTBOUND, -gap0 - 4.5, rng.uniform(0, 15), rng.uniform(10, 15), 1)
    # half the leads stop at a wall somewhere ahead, forcing the follower to queue
    wall = rng.uniform(20, 300) if rng.random() < 0.5 else math.inf
    min_gap = math.inf
    for _ in range(steps):
        gap = lead.x_m - 4.5 - follower.x_m
        min_gap = min(min_gap, gap)
        if min_gap <= 0:
            break
        lead_obstacle = ObstacleView(max(wall - lead.x_m, 1e-6), lead.v_mps, ObstacleKind.STOP_LINE) if wall < math.inf else ObstacleView()
        a_lead = max(idm_acceleration(lead.v_mps, lead_obstacle, lead.v0_mps, p), -p.b_max)
        a_f = max(idm_acceleration(follower.v_mps, ObstacleView(gap, follower.v_mps - lead.v_mps, ObstacleKind.LEAD_VEHICLE),
                                   follower.v0_mps, p), -p.b_max)
        lead, follower = step_vehicle(lead, a_lead, dt), step_vehicle(follower, a_f, dt)
    return min(min_gap, lead.x_m - 4.5 - follower.x_m)


def test_8_idm_suite(acceptance_report):
    p = IdmParams()
    free = ObstacleView()
    eq = max(abs(idm_acceleration(v0, free, v0, p)) for v0 in (5.0, 10.0, 12.5, 15.0, 33.3))
    a_case = idm_acceleration(10.0, ObstacleView(20.0, 0.0, ObstacleKind.LEAD_VEHICLE), 15.0, p)
    a_ref = 1.5 * (1 - (2 / 3) ** 4 - (17 / 20) ** 2)
    s1 = desired_gap(10.0, 0.0, p)
    s2 = desired_gap(10.0, 5.0, p)
    s2_ref = 2 + 15 + 50 / (2 * math.sqrt(3))
    # the model itself: no braking cap, so any start with gap >= s0 is admissible
    rng = random.Random(8)
    min_gaps = [_platoon_min_gap(rng, IdmParams(b_max=math.inf)) for _ in range(100)]
    ok = (
        eq <= 1e-12
        and abs(a_case - a_ref) <= 1e-9
        and round(a_case, 3) == 0.120
        and abs(s1 - 17.0) <= 1e-9
        and abs(s2 - s2_ref) <= 1e-9
        and round(s2, 2) == 31.43
        and min(min_gaps) > 0
    )
    verdict(acceptance_report, 8, ok,
            f"|a(v0)| max {eq:.1e}; a = {a_case:.6f}; s* = {s1:.9f}, {s2:.9f}; "
            f"platoon min gap over 100 runs {min(min_gaps):.3f} m")


def test_9_decision_model(acceptance_report):
    p = DecisionParams()
    cases = [
        (distance_factor(10.0, p), 0.4),
        (distance_factor(3.0, p), 0.1),
        (distance_factor(1.5, p), -0.4),
        (light_factor(R, 1.0, p), 0.45),
        (light_factor(Y, 5.0, p), 0.4),
        (light_factor(Y, 3.0, p), 0.0),
        (light_factor(G, 100.0, p), -0.4),
        (wait_for_red_bias(G, 5.0, p), -0.2),
        (wait_for_red_bias(G, 12.0, p), 0.0),
        (wait_for_red_bias(R, 5.0, p), 0.0),
        (crossing_threshold(R, 100.0, 10.0, DecisionParams(base_threshold=0.5)), 1.0),
    ]
    exact = sum(got == want for got, want in cases)
    rng = random.Random(9)
    out_of_range = 0
    for _ in range(100_000):
        q = DecisionParams(base_threshold=rng.uniform(-3, 3))
        d = rng.choice([rng.uniform(0, 50), math.inf])
        thr = crossing_threshold(rng.choice((G, Y, R)), rng.uniform(0, 1000), d, q)
        out_of_range += not (0.0 <= thr <= 1.0)
    verdict(acceptance_report, 9, exact == len(cases) and out_of_range == 0,
            f"{exact}/{len(cases)} constant cases exact; {out_of_range} of 100000 thresholds outside [0,1]")


def _pearson_by_definition(xs, ys):
    n = len(xs)
    mx, my = sum(xs) / n, sum(ys) / n
    cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    vx = sum((x - mx) ** 2 for x in xs)
    vy = sum((y - my) ** 2 for y in ys)
    return cov / math.sqrt(vx * vy)


def test_10_pearson_oracle(acceptance_report):
    rng = random.Random(10)
    worst = 0.0
    for _ in range(1000):
        n = rng.randint(2, 12)
        xs = [rng.uniform(-10, 10) for _ in range(n)]
        if rng.random() < 0.3:
            ys = [float(rng.random() < 0.5) for _ in range(n)]
            if len(set(ys)) == 1:
                ys[0] = 1.0 - ys[0]
        else:
            ys = [rng.uniform(-10, 10) for _ in range(n)]
        worst = max(worst, abs(pearson(xs, ys) - _pearson_by_definition(xs, ys)))
    verdict(acceptance_report, 10, worst <= 1e-12, f"max |pearson - definition| over 1000 inputs {worst:.2e}")
