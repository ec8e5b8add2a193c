"""Command-line front end.

Subcommands: run (one selector, Monte-Carlo CSV), compare (selector menu
over paired noise), analyze (equilibria of a frozen game snapshot),
sweep (noise-diversity sweep).  Exit codes: 0 success, 2 configuration
error, 3 numerical failure, 4 instance too large.
"""

from __future__ import annotations

import json
import re
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from .engine import run_monte_carlo, sweep_variance_spread, tail_mean
from .errors import (
    CovarianceDegeneracyError,
    InstanceTooLargeError,
    NumericalSingularityError,
    ScenarioError,
    TrackGameError,
)
from .filtering import predict
from .game import (
    EkfCovarianceGains,
    GameContext,
    best_profile_exhaustive,
    enumerate_nash,
    is_pure_nash,
    price_of_anarchy,
    social_welfare,
)
from .output import write_aggregate_csv, write_manifest, write_realization_csv
from .presets import (
    COMPARE_PRESETS,
    SWEEP_PRESETS,
    compare_preset,
    frozen_preset,
    sweep_preset,
    table12_config,
)
from .scenario import ScenarioConfig, SelectorSpec, load_scenario

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_TOO_LARGE = 4


def parse_selector(text: str) -> SelectorSpec:
    """Parse shorthand like lcbrd-K10, eps-lcbrd, random-K1, rm."""
    label = text
    parts = text.split("-")
    K = None
    if parts and re.fullmatch(r"K\d+", parts[-1]):
        K = int(parts[-1][1:])
        parts = parts[:-1]
    eps = 0.0
    if parts and parts[0] == "eps":
        eps = 0.02
        parts = parts[1:]
    kind = "-".join(parts)
    if kind == "exhaustive":
        kind, K = "centralized", K or 1
    if kind not in ("lcbrd", "rm", "standalone", "random", "centralized"):
        raise ScenarioError("selector", f"cannot parse selector {text!r}")
    if kind == "random" and K is None:
        K = 1
    return SelectorSpec(kind=kind, epsilon=eps, K=K, label=label)


def _load_config(scenario: str | None, preset: str | None):
    """Returns (config, menu-or-None)."""
    if scenario and preset:
        raise ScenarioError("scenario/preset", "give either a scenario or a preset")
    if preset:
        if preset in COMPARE_PRESETS:
            return compare_preset(preset)
        if preset in SWEEP_PRESETS:
            cfg, specs, spreads = sweep_preset(preset)
            return cfg, (specs, spreads)
        try:
            return frozen_preset(preset), None
        except KeyError:
            raise ScenarioError("preset", f"unknown preset {preset!r}") from None
    if scenario:
        return load_scenario(scenario), None
    return table12_config(), None


def _apply_overrides(config: ScenarioConfig, selector, seed, horizon, realizations):
    overrides = {}
    if selector is not None:
        config = replace(config, selector=parse_selector(selector))
        overrides["selector"] = selector
    if seed is not None:
        config = replace(config, seed=seed)
        overrides["seed"] = seed
    if horizon is not None:
        config = replace(config, horizon=horizon)
        overrides["horizon"] = horizon
    if realizations is not None:
        config = replace(config, realizations=realizations)
        overrides["realizations"] = realizations
    return config, overrides


def _out_dir(out: str | None) -> Path:
    import os

    d = Path(out or os.environ.get("TRACKGAME_OUT", "out"))
    d.mkdir(parents=True, exist_ok=True)
    return d


common_options = [
    click.option("--scenario", type=click.Path(), default=None, help="Scenario .scn file."),
    click.option("--preset", default=None, help="Bundled preset name (fig6..fig12, frozen-*)."),
    click.option("--selector", default=None, help="Selector override, e.g. lcbrd-K10, rm."),
    click.option("--seed", type=int, default=None),
    click.option("--horizon", type=int, default=None),
    click.option("--realizations", type=int, default=None),
    click.option("--out", default=None, help="Output directory (default $TRACKGAME_OUT or ./out)."),
    click.option("--jobs", type=int, default=1, help="Parallel workers over realizations."),
]


def add_options(opts):
    def wrap(fn):
        for opt in reversed(opts):
            fn = opt(fn)
        return fn

    return wrap


@click.group()
def main():
    """Game-theoretic track selection simulator for radar networks."""


@main.command("run")
@add_options(common_options)
@click.option("--save-realizations", is_flag=True, help="Also write one CSV per realization.")
def cmd_run(scenario, preset, selector, seed, horizon, realizations, out, jobs,
            save_realizations):
    """Run one selector and write aggregate (and per-realization) CSV."""
    config, _ = _load_config(scenario, preset)
    config, overrides = _apply_overrides(config, selector, seed, horizon, realizations)
    out_dir = _out_dir(out)
    agg, reals = run_monte_carlo(
        config, jobs=jobs, keep_realizations=save_realizations
    )
    name = config.selector.name
    outputs = []
    path = out_dir / f"{name}_aggregate.csv"
    write_aggregate_csv(path, agg, config.n_radars)
    outputs.append(path.name)
    if save_realizations and reals:
        for r, records in enumerate(reals):
            p = out_dir / f"{name}_r{r:03d}.csv"
            write_realization_csv(p, records, config.n_radars)
            outputs.append(p.name)
    write_manifest(out_dir, config, "run", overrides, outputs)
    final = agg[-1]["metric"]
    conv = next(
        (row["k"] for row in agg if row["nash_flag"] == 1.0), None
    )
    click.echo(f"selector={name} final_metric={final:.6g} tail_metric={tail_mean(agg):.6g}")
    if conv is not None:
        click.echo(f"first all-realization Nash scan: {conv}")
    click.echo(f"wrote {len(outputs)} file(s) to {out_dir}")


@main.command("compare")
@add_options(common_options)
@click.option("--tail", type=int, default=50, help="Tail window for the summary ordering.")
def cmd_compare(scenario, preset, selector, seed, horizon, realizations, out, jobs, tail):
    """Run a selector menu over identical noise substreams."""
    config, menu = _load_config(scenario, preset)
    if isinstance(menu, tuple):
        raise ScenarioError("preset", f"{preset!r} is a sweep preset; use the sweep command")
    if selector:
        menu = [parse_selector(s.strip()) for s in selector.split(",")]
    if not menu:
        raise ScenarioError("selector", "compare needs a preset menu or --selector list")
    config, overrides = _apply_overrides(config, None, seed, horizon, realizations)
    out_dir = _out_dir(out)
    outputs = []
    tails = {}
    for spec in menu:
        agg, _ = run_monte_carlo(config, spec=spec, jobs=jobs)
        path = out_dir / f"{spec.name}_aggregate.csv"
        write_aggregate_csv(path, agg, config.n_radars)
        outputs.append(path.name)
        tails[spec.name] = tail_mean(agg, tail)
    write_manifest(out_dir, config, "compare", overrides, outputs)
    ordering = sorted(tails, key=tails.get)
    for name in ordering:
        click.echo(f"{name}: tail_metric={tails[name]:.6g}")
    click.echo("ordering (best first): " + " < ".join(ordering))


@main.command("sweep")
@add_options(common_options)
@click.option("--spreads", default=None, help="Comma-separated spread points, e.g. 1,2,3,4.5.")
def cmd_sweep(scenario, preset, selector, seed, horizon, realizations, out, jobs, spreads):
    """Noise-diversity sweep: tail metric per selector vs b-coefficient spread."""
    preset = preset or "fig11"
    if preset not in SWEEP_PRESETS:
        raise ScenarioError("preset", f"{preset!r} is not a sweep preset")
    config, specs, points = sweep_preset(preset)
    if scenario:
        config = load_scenario(scenario)
    if selector:
        specs = [parse_selector(s.strip()) for s in selector.split(",")]
    if spreads:
        points = [float(v) for v in spreads.split(",")]
    config, overrides = _apply_overrides(config, None, seed, horizon, realizations)
    out_dir = _out_dir(out)
    rows = sweep_variance_spread(config, specs, points, jobs=jobs)
    path = out_dir / "sweep.csv"
    import csv as _csv

    names = [spec.name for spec in specs]
    with open(path, "w", newline="") as f:
        w = _csv.writer(f)
        w.writerow(["spread"] + names)
        for row in rows:
            w.writerow([repr(row["spread"])] + [repr(row[n]) for n in names])
    write_manifest(out_dir, config, "sweep", overrides, [path.name])
    for row in rows:
        vals = " ".join(f"{n}={row[n]:.6g}" for n in names)
        click.echo(f"spread={row['spread']}: {vals}")


def _analysis_context(config: ScenarioConfig) -> GameContext:
    mode = "multiset" if config.selector.kind == "rm" else "distinct"
    if config.gain_mode == "abstract":
        gains = config.gain_table
    else:
        from .engine import _initial_tracks
        from .filtering import TrackEstimate

        guesses = _initial_tracks(config, 0)
        preds = {}
        for i in range(config.n_radars):
            for j in range(config.n_targets):
                tr = TrackEstimate(j, 0, guesses[j].copy(), config.init_cov.copy())
                preds[(i, j)] = predict(tr, config.motion)
        gains = EkfCovarianceGains(preds, config.noise, config.radars)
    return GameContext(
        n_radars=config.n_radars,
        n_targets=config.n_targets,
        m=config.m,
        topology=config.topology,
        weights=config.weights,
        gains=gains,
        mode=mode,
    )


@main.command("analyze")
@add_options(common_options)
@click.option("--check-profile", type=click.Path(), default=None,
              help="JSON file with an N x T beam matrix to test for equilibrium.")
@click.option("--max-list", type=int, default=5, help="How many equilibria to print.")
def cmd_analyze(scenario, preset, selector, seed, horizon, realizations, out, jobs,
                check_profile, max_list):
    """Enumerate equilibria and efficiency of a frozen game snapshot."""
    config, _ = _load_config(scenario, preset)
    config, _ = _apply_overrides(config, selector, seed, horizon, realizations)
    ctx = _analysis_context(config)
    click.echo(f"joint strategy space: {ctx.joint_space_size()} profiles")
    ne = enumerate_nash(ctx)
    click.echo(f"pure Nash equilibria: {len(ne)}")
    for p in ne[:max_list]:
        click.echo(f"  NE: {p}")
    best = best_profile_exhaustive(ctx)
    best_w = social_welfare(np.array(best), ctx.gains, ctx.topology, ctx.weights)
    click.echo(f"welfare optimum: {best} welfare={best_w:.6g}")
    poa = price_of_anarchy(ctx)
    if poa is None:
        click.echo("price of anarchy: undefined (no pure NE)")
    else:
        worst = best_w / poa
        click.echo(f"price of anarchy: {poa:.6g} (worst NE welfare {worst:.6g})")
    if check_profile:
        with open(check_profile) as f:
            prof = np.asarray(json.load(f), dtype=int)
        ok, dev = is_pure_nash(prof, ctx)
        if ok:
            click.echo("checked profile: pure Nash equilibrium")
        else:
            click.echo(f"checked profile: NOT an equilibrium; radar {dev[0]} "
                       f"improves by playing {dev[1]}")


def entry() -> int:
    try:
        main.main(standalone_mode=False)
        return 0
    except click.ClickException as e:
        e.show()
        return EXIT_CONFIG
    except click.exceptions.Abort:
        return EXIT_CONFIG
    except ScenarioError as e:
        click.echo(f"configuration error: {e}", err=True)
        return EXIT_CONFIG
    except InstanceTooLargeError as e:
        click.echo(f"instance too large: {e}", err=True)
        return EXIT_TOO_LARGE
    except (NumericalSingularityError, CovarianceDegeneracyError) as e:
        click.echo(f"numerical failure: {e}", err=True)
        return EXIT_NUMERICAL
    except TrackGameError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(entry())
