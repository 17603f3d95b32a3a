"""Batch execution and aggregate statistics over trial outcomes."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .config import ScenarioConfig, validate_config
from .engine import TrialOutcome, run_trial
from .light import PHASE_ORDER, LightState
from .seeding import derive_seed

DISTANCE_BIN_EDGES = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0)


class DegenerateInput(ValueError):
    pass


@dataclass(frozen=True)
class BatchConfig:
    scenario: ScenarioConfig
    n_trials: int = 500
    master_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")


def _run_indexed(args: tuple[int, ScenarioConfig]) -> TrialOutcome:
    seed, cfg = args
    return run_trial(seed, cfg)


def run_batch(batch: BatchConfig, jobs: int = 1) -> list[TrialOutcome]:
    """Run every trial; the result order is trial-index order for any ``jobs``."""
    cfg = validate_config(batch.scenario)
    seeds = [derive_seed(batch.master_seed, i) for i in range(batch.n_trials)]
    if jobs <= 1 or batch.n_trials == 1:
        return [run_trial(s, cfg) for s in seeds]
    chunk = max(1, batch.n_trials // (jobs * 4))
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_run_indexed, [(s, cfg) for s in seeds], chunksize=chunk))


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation (point-biserial when one series is 0/1)."""
    if len(xs) != len(ys):
        raise ValueError("series lengths differ")
    if len(xs) < 2:
        raise DegenerateInput("need at least two pairs")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    syy = float(np.dot(dy, dy))
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateInput("zero variance series")
    r = float(np.dot(dx, dy)) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


@dataclass(frozen=True)
class BoxStats:
    n: int
    median: Optional[float]
    q1: Optional[float]
    q3: Optional[float]
    min: Optional[float]
    max: Optional[float]
    whisker_low: Optional[float]
    whisker_high: Optional[float]
    outliers: tuple[float, ...] = ()


def box_stats(values: Sequence[float]) -> BoxStats:
    """Linear-interpolated quartiles with 1.5 IQR whiskers."""
    if len(values) == 0:
        return BoxStats(0, None, None, None, None, None, None, None)
    v = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = (float(q) for q in np.percentile(v, [25, 50, 75]))
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    outliers = tuple(float(x) for x in v[(v < lo_fence) | (v > hi_fence)])
    return BoxStats(
        n=len(v),
        median=med,
        q1=q1,
        q3=q3,
        min=float(v[0]),
        max=float(v[-1]),
        whisker_low=float(inside[0]),
        whisker_high=float(inside[-1]),
        outliers=outliers,
    )


def distance_bin(d: float) -> int:
    """Index into DISTANCE_BIN_EDGES; the last bin is open-ended."""
    for i in range(len(DISTANCE_BIN_EDGES) - 1, -1, -1):
        if d >= DISTANCE_BIN_EDGES[i]:
            return i
    raise ValueError(f"negative distance {d}")


def bin_label(i: int) -> str:
    lo = DISTANCE_BIN_EDGES[i]
    if i + 1 < len(DISTANCE_BIN_EDGES):
        return f"[{lo:g},{DISTANCE_BIN_EDGES[i + 1]:g})"
    return f"[{lo:g},inf)"


@dataclass(frozen=True)
class AggregateStats:
    n_trials: int
    timeout_count: int
    success_count: int
    failure_count: int
    success_rate_overall: Optional[float]
    success_rate_by_light_at_crossing: dict[LightState, tuple[int, int]]
    wait_stats_by_light_at_arrival: dict[LightState, BoxStats]
    distance_histogram: list[tuple[str, int, int]]  # (bin label, successes, failures)
    correlations: dict[str, Optional[float]] = field(default_factory=dict)
    correlation_notes: dict[str, str] = field(default_factory=dict)


def _safe_pearson(xs: list[float], ys: list[float]) -> tuple[Optional[float], str]:
    try:
        return pearson(xs, ys), ""
    except DegenerateInput as exc:
        return None, str(exc)


def aggregate(outcomes: Sequence[TrialOutcome], strict: bool = True) -> AggregateStats:
    """Fold outcomes into the grouped statistics.

    Timeout trials are counted but excluded from rates, waits, histogram and
    correlations. Correlations involving distance use only trials whose
    decision distance is finite. A degenerate correlation raises
    DegenerateInput unless ``strict`` is false, in which case it is reported
    as ``None`` with a note.
    """
    if not outcomes:
        raise ValueError("no outcomes to aggregate")
    done = [o for o in outcomes if not o.timeout]
    successes = sum(1 for o in done if o.success)
    failures = len(done) - successes

    by_cross = {s: [0, 0] for s in PHASE_ORDER}
    for o in done:
        if o.light_at_crossing is not None:
            by_cross[o.light_at_crossing][0 if o.success else 1] += 1

    waits = {s: [o.wait_s for o in done if o.light_at_arrival is s and o.wait_s is not None] for s in PHASE_ORDER}

    hist = [[0, 0] for _ in DISTANCE_BIN_EDGES]
    for o in done:
        d = o.nearest_vehicle_at_decision_m
        if d is None:
            continue
        hist[distance_bin(d)][0 if o.success else 1] += 1

    succ = [1.0 if o.success else 0.0 for o in done]
    wait = [o.wait_s for o in done]
    finite = [o for o in done if o.nearest_vehicle_at_decision_m is not None and math.isfinite(o.nearest_vehicle_at_decision_m)]
    f_succ = [1.0 if o.success else 0.0 for o in finite]
    f_wait = [o.wait_s for o in finite]
    f_dist = [o.nearest_vehicle_at_decision_m for o in finite]

    pairs = {
        "success_vs_wait": (succ, wait),
        "success_vs_distance": (f_succ, f_dist),
        "wait_vs_distance": (f_wait, f_dist),
    }
    correlations: dict[str, Optional[float]] = {}
    notes: dict[str, str] = {}
    for name, (xs, ys) in pairs.items():
        if strict:
            correlations[name] = pearson(xs, ys)
            continue
        r, note = _safe_pearson(xs, ys)
        correlations[name] = r
        if note:
            notes[name] = note

    return AggregateStats(
        n_trials=len(outcomes),
        timeout_count=len(outcomes) - len(done),
        success_count=successes,
        failure_count=failures,
        success_rate_overall=successes / len(done) if done else None,
        success_rate_by_light_at_crossing={s: (c[0], c[1]) for s, c in by_cross.items()},
        wait_stats_by_light_at_arrival={s: box_stats(w) for s, w in waits.items()},
        distance_histogram=[(bin_label(i), c[0], c[1]) for i, c in enumerate(hist)],
        correlations=correlations,
        correlation_notes=notes,
    )
