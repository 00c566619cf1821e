"""Command-line entry point.

    emfsim run [--config PATH] [--scenario NAME ...] [--trials N] [--seed N]
               [--out DIR] [--parallelism N] [--record-level LEVEL] [--no-figures]
    emfsim explain [--config PATH] [--scenario NAME] --trial N --ue N

``run`` is assumed when no subcommand is given.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .config import ConfigError, RunConfig, apply_overrides, parse_config
from .engine import compare, run_campaign, run_trial, trial_seed
from .protocol import candidate_set, current_uplink_sar, initial_state, predicted_uplink_emissions
from .report import write_outputs

log = logging.getLogger("emfsim")


def load_config(path: Optional[str]) -> RunConfig:
    text = Path(path).read_text() if path else "{}"
    return parse_config(text)


def explain(config: RunConfig, trial_index: int, ue_index: int, scenario: Optional[str] = None) -> str:
    """Trace the uplink association decision of one UE in one trial."""
    if not 0 <= trial_index < config.trials:
        raise ConfigError(f"trial index {trial_index} out of range: valid range is 0..{config.trials - 1}")
    n_ue = config.deployment.ue_count
    if not 0 <= ue_index < n_ue:
        raise ConfigError(f"ue index {ue_index} out of range: valid range is 0..{n_ue - 1}")
    profile = config.scenario(scenario) if scenario else config.scenarios[0]
    settings = config.settings()
    seed = trial_seed(config.master_seed, trial_index)
    record = run_trial(profile, seed, settings, trial_index)
    lines = [f"technology {profile.name}  trial {trial_index}  seed {seed}  ue {ue_index}"]
    if record.skipped:
        lines.append("trial skipped: empty deployment")
        return "\n".join(lines)

    topo = record.topology
    tissue, limits = settings.tissue, settings.limits
    start = initial_state(topo, profile)
    serving = start.serving_bs[ue_index]
    sar = current_uplink_sar(start, topo, ue_index, profile, tissue, settings.head_distance_m)
    threshold = limits.sar_trigger_w_kg + settings.hysteresis_w_kg
    lines.append(f"initial serving BS: {serving} (nearest)")
    lines.append(f"uplink SAR on serving BS: {sar!r} W/kg (trigger {threshold!r} W/kg)")
    if not sar > threshold:
        lines.append("no trigger; serving BS retained")
        return "\n".join(lines)

    cands = candidate_set(topo, ue_index, profile)
    if not cands:
        lines.append("trigger fired; candidate set empty: outage, serving BS retained")
        return "\n".join(lines)
    emissions = predicted_uplink_emissions(topo, ue_index, cands, profile, tissue, settings.head_distance_m,
                                           settings.emission_metric)
    distances = topo.ue_bs_distances(ue_index)
    best = record.ul_serving[ue_index]
    lines.append(f"trigger fired; {len(cands)} candidate BS(s), metric {settings.emission_metric}:")
    lines.append(f"  {'bs':>4}  {'distance_m':>22}  {'predicted_emission':>24}")
    for b, e in zip(cands, emissions):
        mark = "  <- argmin" if b == int(min(zip(emissions, cands))[1]) else ""
        lines.append(f"  {b:>4}  {float(distances[b])!r:>22}  {float(e)!r:>24}{mark}")
    if best == serving:
        lines.append(f"serving BS {serving} is already the argmin: no handover, UE flagged")
    else:
        lines.append(f"handover: BS {serving} -> BS {best}")
    return "\n".join(lines)


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="emfsim", description="EMF exposure campaigns for 3.9G/4G/5G networks")
    sub = parser.add_subparsers(dest="command")

    run = sub.add_parser("run", help="run a Monte Carlo campaign")
    run.add_argument("--config", metavar="PATH")
    run.add_argument("--scenario", action="append", metavar="NAME", help="technology to run (repeatable)")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", metavar="DIR")
    run.add_argument("--parallelism", type=int)
    run.add_argument("--record-level", choices=("summary", "decisions", "full"))
    run.add_argument("--no-figures", action="store_true")

    ex = sub.add_parser("explain", help="trace one UE's uplink association decision")
    ex.add_argument("--config", metavar="PATH")
    ex.add_argument("--scenario", metavar="NAME")
    ex.add_argument("--seed", type=int)
    ex.add_argument("--trial", type=int, required=True)
    ex.add_argument("--ue", type=int, required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] not in ("run", "explain", "-h", "--help"):
        argv.insert(0, "run")
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)

    try:
        config = load_config(args.config)
        if args.command == "explain":
            config = apply_overrides(config, seed=args.seed)
            print(explain(config, args.trial, args.ue, args.scenario))
            return 0
        config = apply_overrides(config, scenarios=args.scenario, trials=args.trials, seed=args.seed,
                                 out=args.out, parallelism=args.parallelism, record_level=args.record_level)
    except (ConfigError, OSError) as exc:
        print(f"emfsim: error: {exc}", file=sys.stderr)
        return 2

    resolved = config.to_dict()
    print(config.to_json())
    out = Path(config.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_test"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"emfsim: error: output directory {str(out)!r} is not writable: {exc}", file=sys.stderr)
        return 1

    try:
        result = run_campaign(config.scenarios, config.trials, config.master_seed, config.parallelism,
                              config.settings())
    except (ValueError, RuntimeError) as exc:
        print(f"emfsim: error: {exc}", file=sys.stderr)
        return 1

    paths = write_outputs(result, out, resolved, config.record_level)
    if config.figures:
        from .plotting import plot_figure1

        paths["figure1"] = plot_figure1(result, out / "figure1.png")
    if len(result.technologies) >= 2:
        for rank in compare(result):
            sep = ", ".join("separated" if s else "overlapping" for s in rank.separated)
            log.info("%s SAR ranking: %s (%s)", rank.direction, " > ".join(rank.order), sep)
    for name, path in paths.items():
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
