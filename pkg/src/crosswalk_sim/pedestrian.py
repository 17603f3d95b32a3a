"""Probabilistic crossing decision and pedestrian kinematics."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass

from .light import LightState


class Side(str, enum.Enum):
    TOP = "top"
    BOTTOM = "bottom"


class PedStatus(str, enum.Enum):
    WAITING = "waiting"
    CROSSING = "crossing"
    ARRIVED = "arrived"
    HIT = "hit"


class Decision(str, enum.Enum):
    CROSS = "cross"
    WAIT = "wait"


@dataclass(frozen=True)
class DecisionParams:
    base_threshold: float = -0.4
    patience_divisor_green: float = 20.0
    patience_divisor_yellow: float = 11.5
    patience_divisor_red: float = 10.0
    patience_cap_green: float = 0.4
    patience_cap_yellow: float = 0.5
    patience_cap_red: float = 0.5
    dist_far_m: float = 4.0
    dist_near_m: float = 2.0
    dist_far_bonus: float = 0.4
    dist_mid_bonus: float = 0.1
    dist_near_penalty: float = -0.4
    light_red_bonus: float = 0.45
    light_yellow_far_bonus: float = 0.4
    light_green_penalty: float = -0.4
    wait_for_red_bias: float = -0.2
    early_wait_cutoff_s: float = 10.0


@dataclass(frozen=True)
class PedestrianState:
    """``lateral_m`` is measured from the bottom road edge (road spans [0, width])."""

    side: Side
    lateral_m: float
    speed_mps: float
    wait_s: float = 0.0
    status: PedStatus = PedStatus.WAITING

    @property
    def direction(self) -> int:
        return 1 if self.side is Side.BOTTOM else -1


def patience_factor(wait_s: float, light: LightState, p: DecisionParams) -> float:
    if light is LightState.GREEN:
        divisor, cap = p.patience_divisor_green, p.patience_cap_green
    elif light is LightState.YELLOW:
        divisor, cap = p.patience_divisor_yellow, p.patience_cap_yellow
    else:
        divisor, cap = p.patience_divisor_red, p.patience_cap_red
    return min(wait_s / divisor, cap)


def distance_factor(d: float, p: DecisionParams) -> float:
    if d > p.dist_far_m:
        return p.dist_far_bonus
    if d > p.dist_near_m:
        return p.dist_mid_bonus
    return p.dist_near_penalty


def light_factor(light: LightState, d: float, p: DecisionParams) -> float:
    if light is LightState.RED:
        return p.light_red_bonus
    if light is LightState.YELLOW:
        return p.light_yellow_far_bonus if d > p.dist_far_m else 0.0
    return p.light_green_penalty


def wait_for_red_bias(light: LightState, wait_s: float, p: DecisionParams) -> float:
    if light is LightState.GREEN and wait_s < p.early_wait_cutoff_s:
        return p.wait_for_red_bias
    return 0.0


def threshold_terms(light: LightState, wait_s: float, d: float, p: DecisionParams) -> dict[str, float]:
    """Individual additive terms of the crossing threshold (for logging)."""
    return {
        "base": p.base_threshold,
        "patience": patience_factor(wait_s, light, p),
        "distance": distance_factor(d, p),
        "light_factor": light_factor(light, d, p),
        "bias": wait_for_red_bias(light, wait_s, p),
    }


def crossing_threshold(light: LightState, wait_s: float, d: float, p: DecisionParams) -> float:
    raw = (
        p.base_threshold
        + patience_factor(wait_s, light, p)
        + distance_factor(d, p)
        + light_factor(light, d, p)
        + wait_for_red_bias(light, wait_s, p)
    )
    return min(max(raw, 0.0), 1.0)


def decide_cross(rng: random.Random, threshold: float) -> Decision:
    u = rng.random()
    return Decision.CROSS if u < threshold else Decision.WAIT


def step_pedestrian(state: PedestrianState, dt: float, road_span: float, radius: float) -> PedestrianState:
    """Advance a crossing pedestrian; ARRIVED once the disc clears the far edge."""
    if state.status is not PedStatus.CROSSING:
        return state
    lateral = state.lateral_m + state.direction * state.speed_mps * dt
    arrived = lateral >= road_span + radius if state.direction > 0 else lateral <= -radius
    status = PedStatus.ARRIVED if arrived else PedStatus.CROSSING
    return PedestrianState(state.side, lateral, state.speed_mps, state.wait_s, status)


def start_lateral(side: Side, road_span: float, radius: float) -> float:
    """Curb position with the disc just touching the road edge."""
    return -radius if side is Side.BOTTOM else road_span + radius


def crossing_time(road_span: float, radius: float, speed: float) -> float:
    return (road_span + 2.0 * radius) / speed if speed > 0 else math.inf
