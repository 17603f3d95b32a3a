"""File formats: per-trial CSV, aggregate JSON/CSV, plot series, manifest.

trials.csv columns (header row, one row per trial, in trial order):

    trial                          0-based index within the batch
    seed                           derived per-trial seed
    success                        1 if the pedestrian reached the far curb, else 0
    timeout                        1 if the trial hit max_trial_time_s, else 0
    wait_s                         arrival to crossing start (empty on timeout)
    light_at_arrival               green | yellow | red
    light_at_crossing              green | yellow | red (empty on timeout)
    nearest_vehicle_at_decision_m  distance at the crossing decision; "inf" if no vehicle
    crossing_duration_s            crossing start to arrival or collision
    side                           top | bottom (starting curb)
    ped_speed_mps                  sampled walking speed

Floats are written with ``repr`` so a parse/re-aggregate round trip is exact.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

from .engine import TrialOutcome
from .light import PHASE_ORDER, LightState
from .pedestrian import Side
from .stats import DISTANCE_BIN_EDGES, AggregateStats

SCHEMA_VERSION = "1.0"

TRIAL_COLUMNS = (
    "trial",
    "seed",
    "success",
    "timeout",
    "wait_s",
    "light_at_arrival",
    "light_at_crossing",
    "nearest_vehicle_at_decision_m",
    "crossing_duration_s",
    "side",
    "ped_speed_mps",
)
FIG3_COLUMNS = ("light_at_arrival", "n", "median", "q1", "q3", "whisker_low", "whisker_high", "min", "max", "outliers")
FIG4_COLUMNS = ("light_at_crossing", "successes", "failures", "success_rate")
FIG5_COLUMNS = ("bin_low_m", "bin_high_m", "successes", "failures")


def _fmt(x: Optional[float]) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def _parse_float(s: str) -> Optional[float]:
    return None if s == "" else float(s)


def trial_rows(outcomes: Sequence[TrialOutcome]) -> Iterable[list[str]]:
    for i, o in enumerate(outcomes):
        yield [
            str(i),
            str(o.seed),
            "1" if o.success else "0",
            "1" if o.timeout else "0",
            _fmt(o.wait_s),
            o.light_at_arrival.value,
            o.light_at_crossing.value if o.light_at_crossing is not None else "",
            _fmt(o.nearest_vehicle_at_decision_m),
            _fmt(o.crossing_duration_s),
            o.side.value,
            _fmt(o.ped_speed_mps),
        ]


def outcome_record(outcome: TrialOutcome, index: int = 0) -> dict[str, str]:
    """One trials.csv row as a column -> text mapping."""
    row = next(iter(trial_rows([outcome])))
    row[0] = str(index)
    return dict(zip(TRIAL_COLUMNS, row))


def write_trials_csv(path: Path, outcomes: Sequence[TrialOutcome]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRIAL_COLUMNS)
        w.writerows(trial_rows(outcomes))


def read_trials_csv(path: Path) -> list[TrialOutcome]:
    out = []
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                TrialOutcome(
                    seed=int(row["seed"]),
                    success=row["success"] == "1",
                    timeout=row["timeout"] == "1",
                    wait_s=_parse_float(row["wait_s"]),
                    light_at_arrival=LightState(row["light_at_arrival"]),
                    light_at_crossing=LightState(row["light_at_crossing"]) if row["light_at_crossing"] else None,
                    nearest_vehicle_at_decision_m=_parse_float(row["nearest_vehicle_at_decision_m"]),
                    crossing_duration_s=_parse_float(row["crossing_duration_s"]),
                    side=Side(row["side"]),
                    ped_speed_mps=float(row["ped_speed_mps"]),
                )
            )
    return out


def _json_num(x: Optional[float]) -> Any:
    if x is None or math.isfinite(x):
        return x
    return "inf" if x > 0 else "-inf"


def aggregate_to_dict(stats: AggregateStats) -> dict[str, Any]:
    waits = {}
    for s in PHASE_ORDER:
        b = stats.wait_stats_by_light_at_arrival[s]
        waits[s.value] = {
            "n": b.n,
            "median": b.median,
            "q1": b.q1,
            "q3": b.q3,
            "min": b.min,
            "max": b.max,
            "whisker_low": b.whisker_low,
            "whisker_high": b.whisker_high,
            "outliers": list(b.outliers),
        }
    return {
        "schema_version": SCHEMA_VERSION,
        "n_trials": stats.n_trials,
        "timeout_count": stats.timeout_count,
        "success_count": stats.success_count,
        "failure_count": stats.failure_count,
        "success_rate_overall": stats.success_rate_overall,
        "success_rate_by_light_at_crossing": {
            s.value: {"successes": c[0], "failures": c[1]}
            for s, c in stats.success_rate_by_light_at_crossing.items()
        },
        "wait_stats_by_light_at_arrival": waits,
        "distance_histogram": [
            {"bin": label, "successes": ns, "failures": nf} for label, ns, nf in stats.distance_histogram
        ],
        "correlations": {k: _json_num(v) for k, v in stats.correlations.items()},
        "correlation_notes": dict(stats.correlation_notes),
    }


def write_json(path: Path, data: Any) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh, indent=2, sort_keys=False)
        fh.write("\n")


def write_aggregate_csv(path: Path, stats: AggregateStats) -> None:
    """Flat ``metric,value`` rows mirroring aggregate.json."""
    rows: list[tuple[str, Any]] = [
        ("n_trials", stats.n_trials),
        ("timeout_count", stats.timeout_count),
        ("success_count", stats.success_count),
        ("failure_count", stats.failure_count),
        ("success_rate_overall", _fmt(stats.success_rate_overall)),
    ]
    for s, (ns, nf) in stats.success_rate_by_light_at_crossing.items():
        rows += [(f"crossing.{s.value}.successes", ns), (f"crossing.{s.value}.failures", nf)]
    for s, b in stats.wait_stats_by_light_at_arrival.items():
        for key in ("n", "median", "q1", "q3", "min", "max", "whisker_low", "whisker_high"):
            val = getattr(b, key)
            rows.append((f"wait.{s.value}.{key}", val if isinstance(val, int) else _fmt(val)))
    for label, ns, nf in stats.distance_histogram:
        rows += [(f"distance.{label}.successes", ns), (f"distance.{label}.failures", nf)]
    for name, r in stats.correlations.items():
        rows.append((f"correlation.{name}", _fmt(r)))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("metric", "value"))
        w.writerows(rows)


def write_plot_data(out_dir: Path, stats: AggregateStats) -> list[Path]:
    paths = [out_dir / "fig3_wait_by_light.csv", out_dir / "fig4_success_by_light.csv", out_dir / "fig5_distance_hist.csv"]
    with open(paths[0], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIG3_COLUMNS)
        for s, b in stats.wait_stats_by_light_at_arrival.items():
            w.writerow([s.value, b.n] + [_fmt(getattr(b, k)) for k in FIG3_COLUMNS[2:-1]]
                       + [";".join(_fmt(x) for x in b.outliers)])
    with open(paths[1], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIG4_COLUMNS)
        for s, (ns, nf) in stats.success_rate_by_light_at_crossing.items():
            w.writerow([s.value, ns, nf, _fmt(ns / (ns + nf)) if ns + nf else ""])
    with open(paths[2], "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIG5_COLUMNS)
        edges = list(DISTANCE_BIN_EDGES) + [math.inf]
        for i, (_, ns, nf) in enumerate(stats.distance_histogram):
            w.writerow([f"{edges[i]:g}", "inf" if math.isinf(edges[i + 1]) else f"{edges[i + 1]:g}", ns, nf])
    return paths
