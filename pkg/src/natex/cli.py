"""Batch entry point: analyze a file, precompute embeddings, or serve HTTP."""

from __future__ import annotations

import datetime
import json
import sys

import click

from . import __version__
from .data import DataError, assign_roles, load_csv
from .embed import EmbedError, METHODS
from .server import DEFAULT_PORT, snapshot_to_wire
from .session import DEFAULT_K, DEFAULT_SEED, DEFAULT_METHOD, Session, SessionError


def _load_roles(path, outcome, extra_outcomes=(), exclude_cols=()):
    with open(path, newline="") as f:
        ds = load_csv(f, name=path)
    outcomes = [outcome, *extra_outcomes]
    return assign_roles(ds, outcomes=outcomes, force_exclude=exclude_cols)


@click.group()
@click.version_option(__version__)
def main():
    """Natural-experiment effect estimation on observational tables."""


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--treatment", required=True)
@click.option("--outcome", required=True)
@click.option("--k", default=DEFAULT_K, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int)
@click.option("--method", default=DEFAULT_METHOD, show_default=True,
              type=click.Choice(METHODS))
@click.option("--exclude-ids", default="", help="Comma-separated row-ids to exclude.")
@click.option("--select", "select_spec", default="auto", show_default=True,
              help="'auto', 'all', or comma-separated cluster ids.")
@click.option("--exclude-cols", default="", help="Columns to drop from the analysis.")
@click.option("--out", "out_path", type=click.Path(), default=None)
@click.option("--plot", "plot_path", type=click.Path(), default=None)
def analyze(input_path, treatment, outcome, k, seed, method, exclude_ids,
            select_spec, exclude_cols, out_path, plot_path):
    """Run the full pipeline once and write a report."""
    try:
        ds = _load_roles(
            input_path, outcome,
            exclude_cols=[c for c in exclude_cols.split(",") if c],
        )
        sess = Session(ds, treatment, outcome, k=k, seed=seed, method=method)
        if exclude_ids:
            sess.exclude(int(r) for r in exclude_ids.split(","))
        if select_spec == "all":
            sess.set_selection(
                c for c, f in sess.snapshot.fits.items() if f.defined
            )
        elif select_spec != "auto":
            sess.set_selection(int(c) for c in select_spec.split(","))
    except (DataError, EmbedError, SessionError, ValueError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    report = snapshot_to_wire(sess.snapshot)
    report["meta"] = {
        "input": input_path,
        "generated_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "tool_version": __version__,
    }
    text = json.dumps(report, indent=2)
    if out_path:
        with open(out_path, "w") as f:
            f.write(text + "\n")
    else:
        click.echo(text)
    if plot_path:
        from .plot import plot_effect_view

        plot_effect_view(sess.snapshot, plot_path)
    ate = report["ate"]
    click.echo(
        f"ate={ate['value']} n={ate['n_total']} "
        f"overall_slope={report['overall_fit']['slope']}",
        err=True,
    )


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--outcomes", required=True, help="Comma-separated outcome columns.")
@click.option("--seed", default=DEFAULT_SEED, show_default=True, type=int)
@click.option("--method", default=DEFAULT_METHOD, show_default=True,
              type=click.Choice(METHODS))
@click.option("--cache-dir", default="natex_cache", show_default=True,
              type=click.Path())
def precompute(input_path, outcomes, seed, method, cache_dir):
    """Build and cache embeddings for every (treatment, outcome) pair."""
    outcome_list = [c for c in outcomes.split(",") if c]
    try:
        ds = _load_roles(input_path, outcome_list[0], outcome_list[1:])
    except (DataError, IndexError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    pairs = [(t, o) for o in outcome_list for t in ds.treatments + ds.covariates]
    done = 0
    for t, o in pairs:
        try:
            Session(ds, t, o, k=1, seed=seed, method=method, cache_dir=cache_dir)
            done += 1
            click.echo(f"cached {t} -> {o}")
        except (EmbedError, SessionError) as e:
            click.echo(f"skipped {t} -> {o}: {e}", err=True)
    click.echo(f"{done}/{len(pairs)} embeddings cached in {cache_dir}")


@main.command()
@click.option("--port", default=DEFAULT_PORT, show_default=True, type=int)
def serve(port):
    """Start the HTTP server."""
    from .server import main as serve_main

    serve_main(port=port)


if __name__ == "__main__":
    main()
