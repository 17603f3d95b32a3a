"""Fixed-cycle vehicle signal: per-trial phase sampling and state lookup."""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Optional


class LightState(str, enum.Enum):
    GREEN = "green"
    YELLOW = "yellow"
    RED = "red"


PHASE_ORDER = (LightState.GREEN, LightState.YELLOW, LightState.RED)


@dataclass(frozen=True)
class LightTimingConfig:
    """Phase duration ranges in seconds.

    ``initial_state`` of ``None`` places t=0 uniformly at random in the
    cycle; otherwise t=0 falls ``initial_elapsed_s`` into that phase.
    """

    green_range_s: tuple[float, float] = (12.0, 18.0)
    yellow_range_s: tuple[float, float] = (3.0, 5.0)
    red_range_s: tuple[float, float] = (10.0, 16.0)
    initial_state: Optional[LightState] = None
    initial_elapsed_s: float = 0.0


@dataclass(frozen=True)
class LightSchedule:
    green_s: float
    yellow_s: float
    red_s: float
    phase_offset_s: float = 0.0

    @property
    def cycle_s(self) -> float:
        return self.green_s + self.yellow_s + self.red_s

    def duration(self, state: LightState) -> float:
        return {
            LightState.GREEN: self.green_s,
            LightState.YELLOW: self.yellow_s,
            LightState.RED: self.red_s,
        }[state]

    def phase_start(self, state: LightState) -> float:
        """Cycle position (seconds) at which ``state`` begins."""
        start = 0.0
        for s in PHASE_ORDER:
            if s is state:
                return start
            start += self.duration(s)
        raise ValueError(state)


def _uniform(rng: random.Random, lo_hi: tuple[float, float]) -> float:
    lo, hi = lo_hi
    if lo == hi:
        return float(lo)
    return rng.uniform(lo, hi)


def sample_schedule(rng: random.Random, cfg: LightTimingConfig) -> LightSchedule:
    """Draw phase durations (green, yellow, red, then offset) from ``rng``."""
    green = _uniform(rng, cfg.green_range_s)
    yellow = _uniform(rng, cfg.yellow_range_s)
    red = _uniform(rng, cfg.red_range_s)
    sched = LightSchedule(green, yellow, red)
    if cfg.initial_state is None:
        offset = rng.random() * sched.cycle_s
    else:
        state = LightState(cfg.initial_state)
        offset = sched.phase_start(state) + min(cfg.initial_elapsed_s, sched.duration(state))
        offset %= sched.cycle_s
    return LightSchedule(green, yellow, red, offset)


def light_state_at(schedule: LightSchedule, t: float) -> LightState:
    # half-open phases: [0, g) green, [g, g+y) yellow, [g+y, cycle) red
    pos = (t + schedule.phase_offset_s) % schedule.cycle_s
    if pos < schedule.green_s:
        return LightState.GREEN
    if pos < schedule.green_s + schedule.yellow_s:
        return LightState.YELLOW
    return LightState.RED
