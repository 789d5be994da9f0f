"""swipeguard command line: dataset ingestion and summary, synthetic
population generation, EER evaluation, learning curves, and the scoring
service.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import json
import sys
from collections import Counter, defaultdict
from pathlib import Path

import click

from . import config as config_mod
from . import eval_harness as harness
from . import synth
from .traces import StructuralError, quality_gate, read_traces_lenient, write_traces

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class DataError(Exception):
    pass


def _load_config(config_path, **flags) -> config_mod.RunConfig:
    document = None
    if config_path:
        try:
            document = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read config file: {exc}") from exc
    try:
        return config_mod.load_config(document, **flags)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


@click.group()
def cli():
    """Swipe-dynamics novelty-detection toolkit."""


@cli.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def ingest(path):
    """Parse and quality-gate a trace file, printing per-profile counts."""
    traces, bad_lines = read_traces_lenient(path)
    for lineno, message in bad_lines:
        click.echo(f"malformed line {lineno}: {message}", err=True)
    if not traces and not bad_lines:
        raise DataError(f"{path}: no traces found")

    policy = config_mod.RunConfig().quality_policy()
    per_profile: dict[str, Counter] = defaultdict(Counter)
    rejected: Counter = Counter()
    for trace in traces:
        verdict = quality_gate(trace, policy)
        if verdict.accepted:
            per_profile[trace.profile_id][trace.role] += 1
        else:
            rejected[verdict.reason] += 1

    click.echo(f"{len(per_profile)} profiles, {len(traces)} parsed traces")
    for pid in sorted(per_profile):
        counts = per_profile[pid]
        roles = ", ".join(f"{role}={counts[role]}" for role in sorted(counts))
        click.echo(f"  {pid}: {roles}")
    if rejected:
        click.echo("rejected: " + ", ".join(f"{r}={n}" for r, n in sorted(rejected.items())))
    if bad_lines:
        raise DataError(f"{len(bad_lines)} malformed line(s)")


@cli.command("synth")
@click.option("--users", default=20, show_default=True)
@click.option("--swipes", default=40, show_default=True, help="genuine swipes per user")
@click.option("--attacker-swipes", default=20, show_default=True)
@click.option("--fidelity", default=0.9, show_default=True, help="OTS attacker fidelity")
@click.option("--seed", default=0, show_default=True)
@click.option("--single-behaviour", is_flag=True, help="one behaviour per user")
@click.option("--uniform-jitter", type=float, default=None,
              help="force one positional noise scale population-wide")
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def synth_cmd(users, swipes, attacker_swipes, fidelity, seed, single_behaviour,
              uniform_jitter, out):
    """Generate a seeded synthetic population in the trace file format."""
    population = synth.gen_population(
        synth.PopulationConfig(
            n_users=users,
            n_genuine=swipes,
            n_attacker=attacker_swipes,
            ots_fidelity=fidelity,
            seed=seed,
            multi_behaviour=not single_behaviour,
            uniform_jitter_std=uniform_jitter,
        )
    )
    write_traces(out, population)
    click.echo(
        f"wrote {len(population)} traces for {users} users "
        f"(genuine={swipes}, attackers=2x{attacker_swipes}, fidelity={fidelity}) to {out}"
    )


_shared_eval_options = [
    click.option("--model", "models", multiple=True,
                 type=click.Choice(["shrunk", "bayes_gauss", "dp_mixture"]),
                 help="repeatable; default: all three"),
    click.option("--grid", type=int, default=None, help="time grid size G"),
    click.option("--alpha", type=float, default=None, help="fixed shrinkage strength"),
    click.option("--dp-alpha", type=float, default=None, help="CRP concentration"),
    click.option("--sigma-y", type=float, default=None, help="mixture noise variance"),
    click.option("--quantile", type=float, default=None, help="calibration percentile"),
    click.option("--n-train", type=int, default=None),
    click.option("--seed", type=int, default=None),
    click.option("--prior-source", type=click.Choice(["population", "cold_start"]),
                 default=None),
    click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="JSON config file"),
    click.option("--out", "out_dir", default="eval_out", show_default=True,
                 help="report output directory"),
]


def _with_options(options):
    def wrap(fn):
        for option in reversed(options):
            fn = option(fn)
        return fn
    return wrap


def _run_config(config_path, models, grid, alpha, dp_alpha, sigma_y, quantile,
                n_train, seed, prior_source):
    return _load_config(
        config_path,
        model_types=tuple(models) if models else None,
        grid=grid,
        alpha=alpha,
        dp_alpha=dp_alpha,
        sigma_y_sq=sigma_y,
        quantile_q=quantile,
        n_train=n_train,
        seed=seed,
        prior_source=prior_source,
    )


def _load_dataset(dataset_path, cfg):
    traces, bad_lines = read_traces_lenient(dataset_path)
    if bad_lines:
        for lineno, message in bad_lines:
            click.echo(f"malformed line {lineno}: {message}", err=True)
        raise DataError(f"{len(bad_lines)} malformed line(s) in {dataset_path}")
    if not traces:
        raise DataError(f"{dataset_path}: no traces found")
    return harness.build_profile_data(traces, cfg.quality_policy(), cfg.grid)


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@_with_options(_shared_eval_options)
@click.option("--learning-curve", "curve_range", default=None,
              help="n_train range, e.g. 2..10")
def evaluate(dataset, models, grid, alpha, dp_alpha, sigma_y, quantile, n_train,
             seed, prior_source, config_path, out_dir, curve_range):
    """Run the EER evaluation over a trace file and write report artifacts."""
    cfg = _run_config(config_path, models, grid, alpha, dp_alpha, sigma_y,
                      quantile, n_train, seed, prior_source)
    profile_data = _load_dataset(dataset, cfg)
    hcfg = cfg.harness()
    try:
        experiment = harness.run_experiment(profile_data, hcfg)
        curves = None
        if curve_range:
            curves = harness.learning_curve(profile_data, hcfg, _parse_range(curve_range))
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    report = harness.build_report(hcfg, experiment, curves)
    written = harness.emit_report(report, out_dir)
    click.echo(harness.render_table(report["aggregates"], list(hcfg.model_types)))
    click.echo("wrote " + ", ".join(str(p) for p in written))


@cli.command("learning-curve")
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@_with_options(_shared_eval_options)
@click.option("--n-range", default="2..10", show_default=True)
def learning_curve_cmd(dataset, models, grid, alpha, dp_alpha, sigma_y, quantile,
                       n_train, seed, prior_source, config_path, out_dir, n_range):
    """Mean/median EER against enrollment size on a fixed holdout."""
    cfg = _run_config(config_path, models, grid, alpha, dp_alpha, sigma_y,
                      quantile, n_train, seed, prior_source)
    profile_data = _load_dataset(dataset, cfg)
    hcfg = cfg.harness()
    try:
        ns = _parse_range(n_range)
        curves = harness.learning_curve(profile_data, hcfg, ns)
        experiment = harness.run_experiment(profile_data, hcfg, n_train=max(ns))
    except ValueError as exc:
        raise DataError(str(exc)) from exc
    report = harness.build_report(hcfg, experiment, curves)
    written = harness.emit_report(report, out_dir)
    click.echo("wrote " + ", ".join(str(p) for p in written))


def _parse_range(text) -> list[int]:
    try:
        if ".." in text:
            lo, hi = text.split("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(v) for v in text.split(",")]
    except ValueError as exc:
        raise click.UsageError(f"bad range {text!r}: use e.g. 2..10") from exc
    if not values or min(values) < 2:
        raise click.UsageError("training sizes must be >= 2")
    return values


@cli.command()
@click.option("--store", default="profiles", show_default=True,
              help="profile store directory")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--model", default="shrunk", show_default=True,
              type=click.Choice(["shrunk", "bayes_gauss", "dp_mixture"]))
@click.option("--quantile", type=float, default=None)
@click.option("--enrollment-target", type=int, default=None)
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              default=None)
@click.option("--demo-dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="serve the browser demo from this directory at /")
def serve(store, host, port, model, quantile, enrollment_target, config_path, demo_dir):
    """Run the scoring service (REST API consumed by the browser demo)."""
    import uvicorn

    from .service import create_app

    cfg = _load_config(
        config_path,
        model_types=(model,),
        quantile_q=quantile,
        enrollment_target=enrollment_target,
    )
    app = create_app(store_dir=store, config=cfg, static_dir=demo_dir)
    uvicorn.run(app, host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return EXIT_USAGE
    except (DataError, StructuralError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        click.echo(f"internal error: {exc}", err=True)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
