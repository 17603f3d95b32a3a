"""Single-trial world update loop.

Trial clock: vehicles warm up for ``warmup_s`` seconds before the
pedestrian arrives at t = 0, so the road carries steady traffic on arrival.
The light is scheduled on the same clock.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

from .config import ScenarioConfig, sample_pedestrian_speed, sample_vehicle_speed, validate_config
from .light import LightSchedule, LightState, light_state_at, sample_schedule
from .pedestrian import (
    Decision,
    PedestrianState,
    PedStatus,
    Side,
    crossing_threshold,
    decide_cross,
    start_lateral,
    step_pedestrian,
    threshold_terms,
)
from .vehicle import CrosswalkGeometry, Lane, VehicleState

LANES = (Lane.EASTBOUND, Lane.WESTBOUND)
EventSink = Callable[[dict[str, Any]], None]


@dataclass(frozen=True)
class TrialOutcome:
    seed: int
    success: bool
    timeout: bool
    wait_s: Optional[float]
    light_at_arrival: LightState
    light_at_crossing: Optional[LightState]
    nearest_vehicle_at_decision_m: Optional[float]
    crossing_duration_s: Optional[float]
    side: Side
    ped_speed_mps: float


@dataclass
class WorldState:
    t_s: float
    vehicles: dict[Lane, list[VehicleState]]  # leading vehicle first
    pedestrian: PedestrianState
    schedule: LightSchedule
    next_spawn_s: dict[Lane, float]
    next_vehicle_id: int = 0
    crossing_started_s: float = math.inf
    first_decision_s: float = 0.0
    spawn_count: dict[Lane, int] = field(default_factory=lambda: {lane: 0 for lane in LANES})


def crosswalk_geometry(cfg: ScenarioConfig) -> CrosswalkGeometry:
    mid = cfg.road_length_m / 2.0
    start = mid - cfg.crosswalk_width_m / 2.0
    return CrosswalkGeometry(
        crosswalk_start_m=start,
        crosswalk_end_m=mid + cfg.crosswalk_width_m / 2.0,
        stop_line_m=start - cfg.stop_line_setback_m,
        buffer_edge_m=start - cfg.ped_buffer_m,
        vehicle_length_m=cfg.vehicle_length_m,
    )


def lane_bounds(lane: Lane, cfg: ScenarioConfig) -> tuple[float, float]:
    """Lateral extent of a lane, measured from the bottom road edge."""
    if lane is Lane.EASTBOUND:
        return 0.0, cfg.lane_width_m
    return cfg.lane_width_m, 2.0 * cfg.lane_width_m


def pedestrian_x(cfg: ScenarioConfig) -> float:
    return cfg.road_length_m / 2.0


def _distances(world: WorldState, cfg: ScenarioConfig):
    """Yield the distance from the pedestrian centre to each vehicle body."""
    px, py = pedestrian_x(cfg), world.pedestrian.lateral_m
    half_w = cfg.vehicle_width_m / 2.0
    length = cfg.vehicle_length_m
    for lane in LANES:
        lo, hi = lane_bounds(lane, cfg)
        yc = (lo + hi) / 2.0
        dy = max(yc - half_w - py, 0.0, py - (yc + half_w))
        eastbound = lane is Lane.EASTBOUND
        for v in world.vehicles[lane]:
            if eastbound:
                x0, x1 = v.x_m - length, v.x_m
            else:
                x0 = cfg.road_length_m - v.x_m
                x1 = x0 + length
            dx = max(x0 - px, 0.0, px - x1)
            yield math.hypot(dx, dy)


def nearest_vehicle_distance(world: WorldState, cfg: ScenarioConfig) -> float:
    """Distance from pedestrian centre to the closest vehicle; inf if none."""
    return min(_distances(world, cfg), default=math.inf)


def detect_collision(world: WorldState, cfg: ScenarioConfig) -> bool:
    r = cfg.pedestrian_radius_m
    return any(d < r for d in _distances(world, cfg))


def pedestrian_in_lane(ped: PedestrianState, lane: Lane, cfg: ScenarioConfig) -> bool:
    lo, hi = lane_bounds(lane, cfg)
    r = cfg.pedestrian_radius_m
    # the lane still lies ahead on the pedestrian's path
    if ped.direction > 0:
        return ped.lateral_m - r < hi
    return ped.lateral_m + r > lo


def spawn_vehicles(rng: random.Random, cfg: ScenarioConfig, world: WorldState, log: Optional[EventSink] = None) -> WorldState:
    """Insert due vehicles at each lane's upstream edge (front bumper at x=0)."""
    if not cfg.spawn_enabled:
        return world
    p = cfg.idm
    # drivers entering on yellow/red saw the signal from upstream and plan to stop
    committed = light_state_at(world.schedule, world.t_s) is not LightState.GREEN
    for lane in LANES:
        if world.t_s < world.next_spawn_s[lane]:
            continue
        queue = world.vehicles[lane]
        speed = sample_vehicle_speed(rng, cfg)
        if queue:
            entry_gap = queue[-1].x_m - cfg.vehicle_length_m
            if entry_gap <= p.s0_m + speed * p.T_headway_s:
                continue
        vid = world.next_vehicle_id
        world.next_vehicle_id += 1
        queue.append(VehicleState(lane, 0.0, speed, speed, vid, committed))
        world.spawn_count[lane] += 1
        world.next_spawn_s[lane] += rng.expovariate(1.0 / cfg.spawn_headway_mean_s)
        if log is not None:
            log({"t": world.t_s, "event": "spawn", "lane": lane.value, "id": vid, "speed": speed})
    return world


def _update_vehicles(world: WorldState, cfg: ScenarioConfig, geom: CrosswalkGeometry, light: LightState, dt: float) -> None:
    """Advance every vehicle by ``dt``.

    Inlined equivalent of ``select_obstacle`` + ``idm_acceleration`` +
    ``step_vehicle``; this is the hot loop.
    """
    p = cfg.idm
    ped = world.pedestrian
    active = ped.status is PedStatus.CROSSING and world.t_s - world.crossing_started_s >= cfg.driver_reaction_s - 1e-9
    a_max, s0, T, delta, b_max = p.a_max, p.s0_m, p.T_headway_s, p.delta_exponent, p.b_max
    two_b = 2.0 * p.b_comfortable
    brake_term = 2.0 * math.sqrt(p.a_max * p.b_comfortable)
    length = geom.vehicle_length_m
    cw_start = geom.crosswalk_start_m
    stop_line = geom.stop_line_m
    buffer_edge = geom.buffer_edge_m
    exit_x = cfg.road_length_m + cfg.vehicle_length_m
    green = light is LightState.GREEN
    runners_yield = cfg.yellow_runners_yield or light is not LightState.YELLOW
    for lane in LANES:
        queue = world.vehicles[lane]
        ped_here = active and pedestrian_in_lane(ped, lane, cfg)
        updated: list[VehicleState] = []
        lead = None
        for veh in queue:
            x, v, v0, stopping = veh.x_m, veh.v_mps, veh.v0_mps, veh.stopping
            stop_gap = stop_line - x
            if green:
                stopping = False
            elif not stopping and stop_gap > 0 and stop_gap >= v * v / two_b:
                stopping = True
            gap = math.inf
            closing = 0.0
            if lead is not None:  # pre-step snapshot of the vehicle ahead
                gap = lead.x_m - length - x
                if gap < 1e-6:
                    gap = 1e-6
                closing = v - lead.v_mps
            if x <= cw_start:
                if not green and 0.0 < stop_gap < gap and (stopping or stop_gap >= v * v / two_b):
                    gap = stop_gap
                    closing = v
                if ped_here and (runners_yield or stopping):
                    g = buffer_edge - x
                    if g <= 0.0:
                        g = cw_start - x
                        if g < 1e-6:
                            g = 1e-6
                    if g < gap:
                        gap = g
                        closing = v
            free = 1.0 - (v / v0) ** delta
            if gap == math.inf:
                a = a_max * free
            else:
                s_star = s0 + v * T + v * closing / brake_term
                if s_star < s0:
                    s_star = s0
                a = a_max * (free - (s_star / gap) ** 2)
            if a < -b_max:
                a = -b_max
            v_new = v + a * dt
            if v_new < 0.0:
                v_new = 0.0
            lead = veh
            x_new = x + v_new * dt
            if x_new < exit_x:
                updated.append(VehicleState(lane, x_new, v_new, v0, veh.id, stopping))
        world.vehicles[lane] = updated


def _place_scripted_vehicles(world: WorldState, cfg: ScenarioConfig) -> None:
    """Add ``cfg.initial_vehicles``; a scripted vehicle cruises at its initial speed."""
    for lane_name, x, v in sorted(cfg.initial_vehicles, key=lambda e: -e[1]):
        lane = Lane(lane_name)
        v0 = v if v > 0 else cfg.veh_speed_min_mps
        world.vehicles[lane].append(VehicleState(lane, float(x), float(v), float(v0), world.next_vehicle_id))
        world.next_vehicle_id += 1
    for lane in LANES:
        world.vehicles[lane].sort(key=lambda veh: -veh.x_m)


def initial_world(rng: random.Random, cfg: ScenarioConfig) -> WorldState:
    schedule = sample_schedule(rng, cfg.light)
    side = Side.TOP if rng.random() < 0.5 else Side.BOTTOM
    speed = sample_pedestrian_speed(rng, cfg)
    ped = PedestrianState(side, start_lateral(side, cfg.road_span_m, cfg.pedestrian_radius_m), speed)
    t0 = -cfg.warmup_s
    first_decision = rng.random() * cfg.decision_interval_s
    next_spawn = {lane: t0 + rng.expovariate(1.0 / cfg.spawn_headway_mean_s) for lane in LANES}
    return WorldState(t0, {lane: [] for lane in LANES}, ped, schedule, next_spawn, first_decision_s=first_decision)


def run_trial(seed: int, cfg: ScenarioConfig, log: Optional[EventSink] = None) -> TrialOutcome:
    """Simulate one pedestrian episode; a pure function of ``(seed, cfg)``."""
    validate_config(cfg)
    rng = random.Random(seed)
    world = initial_world(rng, cfg)
    geom = crosswalk_geometry(cfg)
    dt = cfg.dt_s
    p_dec = cfg.decision
    sched = world.schedule
    # warm-up: vehicles only, on a coarser clock
    warm_steps = int(math.ceil(cfg.warmup_s / cfg.warmup_dt_s - 1e-9))
    for k in range(warm_steps):
        t = -cfg.warmup_s + k * cfg.warmup_dt_s
        world.t_s = t
        h = min(cfg.warmup_dt_s, -t)
        _update_vehicles(world, cfg, geom, light_state_at(sched, t), h)
        spawn_vehicles(rng, cfg, world, log)

    _place_scripted_vehicles(world, cfg)
    light_at_arrival = light_state_at(sched, 0.0)
    light_at_crossing: Optional[LightState] = None
    decision_d: Optional[float] = None
    wait_s: Optional[float] = None
    crossing_started = 0.0
    # pedestrians arrive out of phase with their own decision rhythm
    next_decision = world.first_decision_s
    prev_light: Optional[LightState] = None
    status = PedStatus.WAITING

    step = 0
    while True:
        t = step * dt
        world.t_s = t
        if t > cfg.max_trial_time_s:
            if log is not None:
                log({"t": t, "event": "timeout"})
            return TrialOutcome(seed, False, True, None, light_at_arrival, None, None, None,
                                world.pedestrian.side, world.pedestrian.speed_mps)
        light = light_state_at(sched, t)
        if log is not None and light is not prev_light:
            log({"t": t, "event": "light", "state": light.value})
        prev_light = light

        ped = world.pedestrian
        if status is PedStatus.WAITING:
            wait = t
            ped = PedestrianState(ped.side, ped.lateral_m, ped.speed_mps, wait, status)
            world.pedestrian = ped
            if t >= next_decision - 1e-9:
                next_decision += cfg.decision_interval_s
                d = nearest_vehicle_distance(world, cfg)
                thr = crossing_threshold(light, wait, d, p_dec)
                choice = decide_cross(rng, thr)
                if log is not None:
                    log({"t": t, "event": "decision", "light": light.value, "wait_s": wait,
                         "distance_m": d, **threshold_terms(light, wait, d, p_dec),
                         "threshold": thr, "choice": choice.value})
                if choice is Decision.CROSS:
                    status = PedStatus.CROSSING
                    light_at_crossing = light
                    decision_d = d
                    wait_s = wait
                    crossing_started = t
                    world.crossing_started_s = t
                    ped = PedestrianState(ped.side, ped.lateral_m, ped.speed_mps, wait, status)
        elif status is PedStatus.CROSSING:
            ped = step_pedestrian(ped, dt, cfg.road_span_m, cfg.pedestrian_radius_m)
            status = ped.status
        world.pedestrian = ped

        if status is PedStatus.ARRIVED:
            duration = t - crossing_started
            if log is not None:
                log({"t": t, "event": "arrived", "crossing_duration_s": duration})
            return TrialOutcome(seed, True, False, wait_s, light_at_arrival, light_at_crossing,
                                decision_d, duration, ped.side, ped.speed_mps)

        _update_vehicles(world, cfg, geom, light, dt)
        spawn_vehicles(rng, cfg, world, log)

        if status is PedStatus.CROSSING and detect_collision(world, cfg):
            world.pedestrian = PedestrianState(ped.side, ped.lateral_m, ped.speed_mps, ped.wait_s, PedStatus.HIT)
            duration = t - crossing_started
            if log is not None:
                log({"t": t, "event": "collision", "crossing_duration_s": duration,
                     "lateral_m": ped.lateral_m})
            return TrialOutcome(seed, False, False, wait_s, light_at_arrival, light_at_crossing,
                                decision_d, duration, ped.side, ped.speed_mps)
        step += 1
