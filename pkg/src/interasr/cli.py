"""Command-line interface: simulate, score, report, align, serve."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import reports as reports_mod
from . import simulate as sim_mod
from .config import load_config
from .errors import InterasrError
from .metrics import align as align_tokens
from .metrics import token_error_rate
from .textnorm import MODES, normalize, tokenize


@click.group()
def main():
    """Interactive ASR correction and semantic evaluation toolkit."""


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@main.command()
@click.option("--manifest", required=True, type=click.Path())
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--mode", type=click.Choice(sim_mod.SIM_MODES), default=None)
@click.option("--max-loops", type=int, default=None)
@click.option("--out", "out_dir", required=True, type=click.Path())
def simulate(manifest, config_path, mode, max_loops, out_dir):
    """Run the iterative correction simulation over a manifest."""
    try:
        config = load_config(config_path)
        entries = sim_mod.load_manifest(manifest)
        gateway = config.build_gateway()
        result = sim_mod.run_batch(
            entries,
            gateway,
            config.load_templates(),
            max_loops=max_loops if max_loops is not None else config.max_loops,
            mode=mode or config.mode,
            seed=config.seed,
            workers=config.workers,
        )
    except InterasrError as exc:
        _fail(exc)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sim_mod.write_trajectories(result.trajectories, out / "trajectories.jsonl")
    reports_mod.write_batch_result(result, out / "metrics.json")
    (out / "report.txt").write_text(reports_mod.render_table(result), encoding="utf-8")
    click.echo(reports_mod.render_table(result), nl=False)
    if result.stalled_ids:
        click.echo(f"stalled utterances: {', '.join(result.stalled_ids)}", err=True)


@main.command()
@click.option("--pairs", required=True, type=click.Path(),
              help="JSONL of {id, ref, hyp}.")
@click.option("--mode", type=click.Choice(MODES), default="word")
def score(pairs, mode):
    """Offline scoring of reference/hypothesis pairs."""
    rows = []
    try:
        with open(pairs, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    rows.append(json.loads(line))
        total_distance = total_ref = sentence_errors = 0
        click.echo("id,token_error_rate")
        for row in rows:
            ref = tokenize(normalize(row["ref"]), mode)
            hyp = tokenize(normalize(row["hyp"]), mode)
            rate = token_error_rate(ref, hyp)
            counts = align_tokens(ref, hyp)
            total_distance += counts.distance
            total_ref += counts.ref_len
            sentence_errors += 1 if counts.distance else 0
            click.echo(f"{row['id']},{round(rate, 4)}")
        if rows:
            click.echo(f"overall,{round(total_distance / total_ref, 4)}")
            click.echo(f"ser,{round(sentence_errors / len(rows), 4)}")
    except (InterasrError, KeyError, json.JSONDecodeError) as exc:
        _fail(exc)


@main.command()
@click.option("--runs", "runs_dir", required=True, type=click.Path(),
              help="Output directory of a previous simulate run.")
@click.option("--format", "fmt", type=click.Choice(reports_mod.REPORT_FORMATS),
              default="table")
def report(runs_dir, fmt):
    """Re-render the metric report of a simulation run."""
    try:
        result = reports_mod.read_batch_result(Path(runs_dir) / "metrics.json")
        click.echo(reports_mod.emit_report(result, fmt), nl=False)
    except (InterasrError, OSError, json.JSONDecodeError, KeyError) as exc:
        _fail(exc)


@main.command()
@click.option("--judgments", required=True, type=click.Path())
@click.option("--annotations", required=True, type=click.Path())
def align(judgments, annotations):
    """Judge-vs-human alignment study (Pearson correlations)."""
    try:
        rows = reports_mod.alignment_study(
            reports_mod.load_judgments(judgments),
            reports_mod.load_annotations(annotations),
        )
        click.echo(reports_mod.render_alignment_table(rows), nl=False)
    except InterasrError as exc:
        _fail(exc)


@main.command()
@click.option("--port", type=int, default=8080)
@click.option("--host", default="127.0.0.1")
@click.option("--config", "config_path", required=True, type=click.Path())
def serve(port, host, config_path):
    """Start the HTTP session service."""
    from .service import serve as run_server

    try:
        run_server(config_path, port=port, host=host)
    except InterasrError as exc:
        _fail(exc)


if __name__ == "__main__":
    main()
