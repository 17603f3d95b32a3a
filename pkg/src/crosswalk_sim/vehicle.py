"""Intelligent Driver Model longitudinal dynamics and obstacle selection.

All positions are in the vehicle's own travel frame: ``x_m`` is the front
bumper, increasing downstream from the lane's upstream road edge.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

from .light import LightState


class Lane(str, enum.Enum):
    EASTBOUND = "eastbound"
    WESTBOUND = "westbound"


class ObstacleKind(str, enum.Enum):
    NONE = "none"
    LEAD_VEHICLE = "lead_vehicle"
    STOP_LINE = "stop_line"
    PEDESTRIAN_BUFFER = "pedestrian_buffer"


@dataclass(frozen=True)
class IdmParams:
    a_max: float = 1.5
    b_comfortable: float = 2.0
    s0_m: float = 2.0
    T_headway_s: float = 1.5
    delta_exponent: float = 4.0
    # physical braking limit applied by the integrator, not by the IDM formula
    b_max: float = 7.5


class VehicleState(NamedTuple):
    lane: Lane
    x_m: float
    v_mps: float
    v0_mps: float
    id: int
    # latched once the vehicle commits to stopping for the current yellow/red
    stopping: bool = False


class ObstacleView(NamedTuple):
    gap_m: float = math.inf
    closing_speed_mps: float = 0.0
    kind: ObstacleKind = ObstacleKind.NONE


FREE_ROAD = ObstacleView()


@dataclass(frozen=True)
class CrosswalkGeometry:
    """Crosswalk landmarks in a lane's own frame (metres)."""

    crosswalk_start_m: float
    crosswalk_end_m: float
    stop_line_m: float
    buffer_edge_m: float
    vehicle_length_m: float


class PedestrianView(NamedTuple):
    """What a vehicle needs to know about the pedestrian."""

    active: bool  # crossing (or committed to cross)
    in_lane: bool  # disc laterally overlaps this vehicle's lane


def desired_gap(v: float, dv: float, p: IdmParams) -> float:
    s_star = p.s0_m + v * p.T_headway_s + v * dv / (2.0 * math.sqrt(p.a_max * p.b_comfortable))
    return max(s_star, p.s0_m)


def idm_acceleration(v: float, obstacle: ObstacleView, v0: float, p: IdmParams) -> float:
    free = 1.0 - (v / v0) ** p.delta_exponent
    if obstacle.kind is ObstacleKind.NONE:
        return p.a_max * free
    s_star = desired_gap(v, obstacle.closing_speed_mps, p)
    return p.a_max * (free - (s_star / obstacle.gap_m) ** 2)


def can_stop_comfortably(v: float, gap: float, p: IdmParams) -> bool:
    return gap >= v * v / (2.0 * p.b_comfortable)


def select_obstacle(
    state: VehicleState,
    lead: Optional[VehicleState],
    light: LightState,
    stop_line_gap_m: float,
    ped: Optional[PedestrianView],
    geometry: CrosswalkGeometry,
    p: IdmParams,
) -> ObstacleView:
    """Return the nearest obstacle this vehicle must respond to.

    The stop line counts on yellow/red only while the vehicle can still
    stop comfortably (or has already committed to stopping). A vehicle whose
    front is past the crosswalk start ignores both the stop line and the
    pedestrian; it clears the crosswalk.
    """
    best = FREE_ROAD
    if lead is not None:
        gap = lead.x_m - geometry.vehicle_length_m - state.x_m
        best = ObstacleView(max(gap, 1e-6), state.v_mps - lead.v_mps, ObstacleKind.LEAD_VEHICLE)

    if state.x_m > geometry.crosswalk_start_m:
        return best

    if (
        light is not LightState.GREEN
        and stop_line_gap_m > 0.0
        and stop_line_gap_m < best.gap_m
        and (state.stopping or can_stop_comfortably(state.v_mps, stop_line_gap_m, p))
    ):
        best = ObstacleView(stop_line_gap_m, state.v_mps, ObstacleKind.STOP_LINE)

    if ped is not None and ped.active and ped.in_lane:
        gap = geometry.buffer_edge_m - state.x_m
        if gap <= 0.0:
            # inside the buffer zone: brake for the crosswalk edge itself
            gap = max(geometry.crosswalk_start_m - state.x_m, 1e-6)
        if gap < best.gap_m:
            best = ObstacleView(gap, state.v_mps, ObstacleKind.PEDESTRIAN_BUFFER)
    return best


def step_vehicle(state: VehicleState, a: float, dt: float) -> VehicleState:
    """Semi-implicit Euler step with a non-negative speed clamp."""
    v = state.v_mps + a * dt
    if v < 0.0:
        v = 0.0
    return VehicleState(state.lane, state.x_m + v * dt, v, state.v0_mps, state.id, state.stopping)
