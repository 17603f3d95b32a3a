"""Command-line entry point: ``crosswalk-sim {run,trial,sweep}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path
from typing import Any, Optional, Sequence

from . import __version__
from .config import InvalidConfig, ScenarioConfig, config_to_dict, load_config, validate_config, with_override
from .engine import TrialOutcome, run_trial
from .outputs import (
    SCHEMA_VERSION,
    aggregate_to_dict,
    outcome_record,
    write_aggregate_csv,
    write_json,
    write_plot_data,
    write_trials_csv,
)
from .seeding import derive_seed
from .stats import BatchConfig, aggregate, run_batch

log = logging.getLogger("crosswalk_sim")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="crosswalk-sim", description="Signalized crosswalk pedestrian/vehicle Monte Carlo simulator.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=Path, help="JSON scenario file (defaults used for absent keys)")
        p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("-v", "--verbose", action="store_true")

    def batch(p: argparse.ArgumentParser) -> None:
        p.add_argument("--trials", type=int, default=500, help="number of trials (default 500)")
        p.add_argument("--format", choices=("csv", "json"), default="json", help="aggregate file format")
        p.add_argument("--emit-plot-data", action="store_true", help="also write fig3/fig4/fig5 series")
        p.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")

    run = sub.add_parser("run", help="run a batch and aggregate")
    common(run)
    batch(run)

    trial = sub.add_parser("trial", help="run one trial with its full event log")
    common(trial)
    trial.add_argument("--index", type=int, default=0, help="trial index within the batch seeded by --seed")

    sweep = sub.add_parser("sweep", help="vary one config key, one batch per value")
    common(sweep)
    batch(sweep)
    sweep.add_argument("assignment", help="KEY=[v1,v2,...], e.g. decision.base_threshold=[-0.4,-0.2,0.0]")
    return parser


def _load(path: Optional[Path]) -> ScenarioConfig:
    cfg = load_config(path) if path is not None else ScenarioConfig()
    return validate_config(cfg)


def _manifest(cfg: ScenarioConfig, seed: int, n_trials: int, started: float, files: list[Path], extra: Optional[dict] = None) -> dict[str, Any]:
    data = {
        "artifact": "crosswalk-sim",
        "version": __version__,
        "schema_version": SCHEMA_VERSION,
        "master_seed": seed,
        "n_trials": n_trials,
        "seed_derivation": "splitmix64(master + (i+1)*0x9E3779B97F4A7C15)",
        "config": config_to_dict(cfg),
        "wall_clock_s": round(time.perf_counter() - started, 3),
        "outputs": [str(p) for p in files],
    }
    if extra:
        data.update(extra)
    return data


def write_outputs(out_dir: Path, stats, outcomes: Sequence[TrialOutcome], manifest: dict[str, Any],
                  fmt: str = "json", emit_plot_data: bool = False) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = [out_dir / "trials.csv"]
    write_trials_csv(files[0], outcomes)
    agg_path = out_dir / f"aggregate.{fmt}"
    if fmt == "json":
        write_json(agg_path, aggregate_to_dict(stats))
    else:
        write_aggregate_csv(agg_path, stats)
    files.append(agg_path)
    if emit_plot_data:
        files += write_plot_data(out_dir, stats)
    manifest_path = out_dir / "manifest.json"
    files.append(manifest_path)
    manifest = dict(manifest, outputs=[p.name for p in files])
    write_json(manifest_path, manifest)
    return files


def _run_batch(cfg: ScenarioConfig, args: argparse.Namespace, out_dir: Optional[Path], extra: Optional[dict] = None):
    started = time.perf_counter()
    outcomes = run_batch(BatchConfig(cfg, args.trials, args.seed), jobs=args.jobs)
    stats = aggregate(outcomes, strict=False)
    if out_dir is not None:
        manifest = _manifest(cfg, args.seed, args.trials, started, [], extra)
        write_outputs(out_dir, stats, outcomes, manifest, args.format, args.emit_plot_data)
    return outcomes, stats


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    if args.trials < 1:
        raise InvalidConfig([("trials", "must be >= 1")])
    outcomes, stats = _run_batch(cfg, args, args.out)
    if args.out is None:
        json.dump(aggregate_to_dict(stats), sys.stdout, indent=2)
        sys.stdout.write("\n")
    return EXIT_OK


def cmd_trial(args: argparse.Namespace) -> int:
    cfg = _load(args.config)
    seed = derive_seed(args.seed, args.index)
    events: list[dict[str, Any]] = []
    outcome = run_trial(seed, cfg, events.append)
    record = {"master_seed": args.seed, "outcome": outcome_record(outcome, args.index)}
    lines = [json.dumps(_finite(e), allow_nan=False) for e in events]
    if args.out is None:
        for line in lines:
            print(line)
        print(json.dumps(record))
        return EXIT_OK
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "events.jsonl", "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    write_json(args.out / "trial.json", record)
    return EXIT_OK


def _finite(event: dict[str, Any]) -> dict[str, Any]:
    """Strict JSON has no infinity; write it as the string "inf" as in trials.csv."""
    return {k: ("inf" if isinstance(v, float) and math.isinf(v) else v) for k, v in event.items()}


def parse_assignment(text: str) -> tuple[str, list[Any]]:
    key, sep, values = text.partition("=")
    if not sep or not key:
        raise InvalidConfig([("sweep", "expected KEY=[v1,v2,...]")])
    try:
        parsed = json.loads(values)
    except json.JSONDecodeError as exc:
        raise InvalidConfig([("sweep", f"values are not a JSON list: {exc}")]) from exc
    if not isinstance(parsed, list) or not parsed:
        raise InvalidConfig([("sweep", "values must be a non-empty JSON list")])
    return key.strip(), parsed


def cmd_sweep(args: argparse.Namespace) -> int:
    base = _load(args.config)
    key, values = parse_assignment(args.assignment)
    configs = [validate_config(with_override(base, key, v)) for v in values]
    summary = []
    for value, cfg in zip(values, configs):
        out_dir = args.out / f"{key}={value}" if args.out is not None else None
        _, stats = _run_batch(cfg, args, out_dir, {"sweep_key": key, "sweep_value": value})
        entry = {"key": key, "value": value, **aggregate_to_dict(stats)}
        summary.append(entry)
        log.info("%s=%s done", key, value)
    if args.out is not None:
        write_json(args.out / "sweep.json", summary)
    else:
        json.dump(summary, sys.stdout, indent=2)
        sys.stdout.write("\n")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "trial": cmd_trial, "sweep": cmd_sweep}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except InvalidConfig as exc:
        for field, reason in exc.violations:
            print(f"invalid config: {field}: {reason}", file=sys.stderr)
        return EXIT_INVALID
    except (TypeError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
