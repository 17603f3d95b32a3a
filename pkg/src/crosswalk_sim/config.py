"""Scenario parameters: defaults, validation, file loading and sampling."""

from __future__ import annotations

import dataclasses
import json
import math
import random
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

from .light import LightState, LightTimingConfig
from .pedestrian import DecisionParams
from .vehicle import IdmParams

SECTIONS = {"idm": IdmParams, "decision": DecisionParams, "light": LightTimingConfig}


class InvalidConfig(ValueError):
    """Raised with every violated invariant, as (field, reason) pairs."""

    def __init__(self, violations: list[tuple[str, str]]):
        self.violations = list(violations)
        super().__init__("; ".join(f"{f}: {r}" for f, r in self.violations))

    @property
    def field(self) -> str:
        return self.violations[0][0]

    @property
    def reason(self) -> str:
        return self.violations[0][1]


class SamplingFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    lane_count: int = 2
    lane_width_m: float = 3.5
    crosswalk_width_m: float = 3.0
    road_length_m: float = 120.0
    vehicle_length_m: float = 4.5
    vehicle_width_m: float = 1.8
    pedestrian_radius_m: float = 0.3
    ped_speed_mean_mps: float = 1.4
    ped_speed_std_mps: float = 0.2
    veh_speed_min_mps: float = 10.0
    veh_speed_max_mps: float = 15.0
    idm: IdmParams = field(default_factory=IdmParams)
    decision: DecisionParams = field(default_factory=DecisionParams)
    light: LightTimingConfig = field(default_factory=LightTimingConfig)
    dt_s: float = 1.0 / 60.0
    decision_interval_s: float = 1.0
    spawn_headway_mean_s: float = 4.0
    max_trial_time_s: float = 300.0
    # not part of the published model; see README "Modelling choices"
    stop_line_setback_m: float = 16.0
    ped_buffer_m: float = 1.5
    driver_reaction_s: float = 0.8
    warmup_s: float = 20.0
    warmup_dt_s: float = 0.1
    spawn_enabled: bool = True
    # False: while the light is yellow, a vehicle not stopping for it ignores the pedestrian
    yellow_runners_yield: bool = False
    # scripted vehicles placed at t = 0: (lane, front x in lane frame, speed)
    initial_vehicles: tuple[tuple[str, float, float], ...] = ()

    @property
    def road_span_m(self) -> float:
        return self.lane_count * self.lane_width_m


_POSITIVE = (
    "lane_width_m",
    "crosswalk_width_m",
    "road_length_m",
    "vehicle_length_m",
    "vehicle_width_m",
    "pedestrian_radius_m",
    "ped_speed_mean_mps",
    "veh_speed_min_mps",
    "veh_speed_max_mps",
    "dt_s",
    "decision_interval_s",
    "spawn_headway_mean_s",
    "max_trial_time_s",
    "warmup_dt_s",
)


def _finite_positive(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0 and not math.isnan(value)


def validate_config(cfg: ScenarioConfig) -> ScenarioConfig:
    """Return ``cfg`` unchanged, or raise InvalidConfig listing every violation."""
    bad: list[tuple[str, str]] = []
    if cfg.lane_count != 2:
        bad.append(("lane_count", "must be 2 (one lane per direction)"))
    for name in _POSITIVE:
        if not _finite_positive(getattr(cfg, name)):
            bad.append((name, "must be strictly positive"))
    if not (isinstance(cfg.ped_speed_std_mps, (int, float)) and cfg.ped_speed_std_mps >= 0):
        bad.append(("ped_speed_std_mps", "must be non-negative"))
    elif _finite_positive(cfg.ped_speed_mean_mps) and cfg.ped_speed_std_mps >= cfg.ped_speed_mean_mps:
        bad.append(("ped_speed_std_mps", "must be below ped_speed_mean_mps"))
    if cfg.veh_speed_min_mps > cfg.veh_speed_max_mps:
        bad.append(("veh_speed", "min > max"))
    if cfg.dt_s > cfg.decision_interval_s:
        bad.append(("dt_s", "exceeds decision interval"))
    if cfg.vehicle_width_m > cfg.lane_width_m:
        bad.append(("vehicle_width_m", "wider than lane"))
    if cfg.crosswalk_width_m + 2 * (cfg.stop_line_setback_m + cfg.vehicle_length_m) >= cfg.road_length_m:
        bad.append(("road_length_m", "too short for crosswalk and approaches"))
    for name in ("stop_line_setback_m", "ped_buffer_m", "warmup_s", "driver_reaction_s"):
        if not (isinstance(getattr(cfg, name), (int, float)) and getattr(cfg, name) >= 0):
            bad.append((name, "must be non-negative"))

    for name in ("a_max", "b_comfortable", "s0_m", "T_headway_s", "delta_exponent", "b_max"):
        if not _finite_positive(getattr(cfg.idm, name)) and getattr(cfg.idm, name) != math.inf:
            bad.append((f"idm.{name}", "must be strictly positive"))

    d = cfg.decision
    for name in ("patience_divisor_green", "patience_divisor_yellow", "patience_divisor_red"):
        if not _finite_positive(getattr(d, name)):
            bad.append((f"decision.{name}", "must be strictly positive"))
    for name in ("patience_cap_green", "patience_cap_yellow", "patience_cap_red"):
        cap = getattr(d, name)
        if not (0 < cap <= 1):
            bad.append((f"decision.{name}", "must be in (0, 1]"))
    if not d.dist_near_m < d.dist_far_m:
        bad.append(("decision.dist_near_m", "must be below dist_far_m"))

    lt = cfg.light
    for name in ("green_range_s", "yellow_range_s", "red_range_s"):
        lo, hi = getattr(lt, name)
        if not (0 < lo <= hi):
            bad.append((f"light.{name}", "need 0 < min <= max"))
    if lt.initial_elapsed_s < 0:
        bad.append(("light.initial_elapsed_s", "must be non-negative"))

    for i, spec in enumerate(cfg.initial_vehicles):
        try:
            lane, x, v = spec
            ok = lane in ("eastbound", "westbound") and v >= 0 and 0 <= x <= cfg.road_length_m
        except (TypeError, ValueError):
            ok = False
        if not ok:
            bad.append((f"initial_vehicles[{i}]", "need (eastbound|westbound, 0 <= x <= road_length, v >= 0)"))

    if bad:
        raise InvalidConfig(bad)
    return cfg


def sample_pedestrian_speed(rng: random.Random, cfg: ScenarioConfig) -> float:
    """Normal(mean, std) truncated by rejection to (0, mean + 4 std]."""
    mean, std = cfg.ped_speed_mean_mps, cfg.ped_speed_std_mps
    if std == 0:
        return mean
    upper = mean + 4.0 * std
    for _ in range(100):
        v = rng.gauss(mean, std)
        if 0.0 < v <= upper:
            return v
    raise SamplingFailure("pedestrian speed: 100 consecutive rejections")


def sample_vehicle_speed(rng: random.Random, cfg: ScenarioConfig) -> float:
    lo, hi = cfg.veh_speed_min_mps, cfg.veh_speed_max_mps
    if lo == hi:
        return lo
    return rng.uniform(lo, hi)


# --- serialization -------------------------------------------------------


def _section_from_mapping(cls: type, data: Mapping[str, Any], prefix: str) -> Any:
    names = {f.name for f in fields(cls)}
    unknown = [k for k in data if k not in names]
    if unknown:
        raise InvalidConfig([(f"{prefix}.{k}", "unknown key") for k in unknown])
    kwargs = dict(data)
    if cls is LightTimingConfig:
        for key in ("green_range_s", "yellow_range_s", "red_range_s"):
            if key in kwargs:
                kwargs[key] = tuple(float(x) for x in kwargs[key])
        if kwargs.get("initial_state") is not None:
            kwargs["initial_state"] = LightState(kwargs["initial_state"])
    if cls is IdmParams and "b_max" in kwargs and kwargs["b_max"] is None:
        kwargs["b_max"] = math.inf
    return cls(**kwargs)


def config_from_dict(data: Mapping[str, Any]) -> ScenarioConfig:
    """Build a config from nested sections and/or dotted keys (``idm.a_max``)."""
    top: dict[str, Any] = {}
    nested: dict[str, dict[str, Any]] = {name: {} for name in SECTIONS}
    bad: list[tuple[str, str]] = []
    top_names = {f.name for f in fields(ScenarioConfig)} - set(SECTIONS)
    for key, value in data.items():
        if key in SECTIONS:
            if not isinstance(value, Mapping):
                bad.append((key, "must be a mapping"))
                continue
            nested[key].update(value)
        elif "." in key and key.split(".", 1)[0] in SECTIONS:
            section, sub = key.split(".", 1)
            nested[section][sub] = value
        elif key in top_names:
            top[key] = value
        else:
            bad.append((key, "unknown key"))
    if bad:
        raise InvalidConfig(bad)
    for name, cls in SECTIONS.items():
        top[name] = _section_from_mapping(cls, nested[name], name)
    if "initial_vehicles" in top:
        top["initial_vehicles"] = tuple(tuple(entry) for entry in top["initial_vehicles"])
    try:
        return ScenarioConfig(**top)
    except TypeError as exc:  # pragma: no cover - guarded by the key checks
        raise InvalidConfig([("config", str(exc))]) from exc


def config_to_dict(cfg: ScenarioConfig) -> dict[str, Any]:
    out = dataclasses.asdict(cfg)
    light = out["light"]
    for key in ("green_range_s", "yellow_range_s", "red_range_s"):
        light[key] = list(light[key])
    if light["initial_state"] is not None:
        light["initial_state"] = LightState(light["initial_state"]).value
    out["initial_vehicles"] = [list(entry) for entry in out["initial_vehicles"]]
    if out["idm"]["b_max"] == math.inf:
        out["idm"]["b_max"] = None
    return out


def load_config(path: str | Path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise InvalidConfig([("config", "top level must be an object")])
    return config_from_dict(data)


def with_override(cfg: ScenarioConfig, key: str, value: Any) -> ScenarioConfig:
    """Return a copy of ``cfg`` with one (possibly dotted) key replaced."""
    data = config_to_dict(cfg)
    if "." in key:
        section, sub = key.split(".", 1)
        if section not in SECTIONS:
            raise InvalidConfig([(key, "unknown key")])
        data[section][sub] = value
    else:
        data[key] = value
    return config_from_dict(data)
