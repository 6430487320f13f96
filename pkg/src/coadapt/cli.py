"""Command line interface.

    coadapt solve     --game canonical            equilibrium report
    coadapt design    --spec targets.txt          inverse design + verification
    coadapt simulate  --config exp.toml --out d/  run a simulated experiment
    coadapt analyze   --records d1 d2 --game ...  population statistics CSV
    coadapt serve     --port 8080 --data-dir d/   live session service

Every simulation honors --seed; the data directory for `serve` falls back to
the COADAPT_DATA_DIR environment variable.
"""

from __future__ import annotations

import os
import sys
from dataclasses import replace
from pathlib import Path

import click

from .design import design_game, spec_from_text, verify_design
from .equilibria import solve_report
from .games import (
    CANONICAL_GAME,
    COBB_GAME,
    CobbDouglasGame,
    ScalarQuadraticGame,
    game_from_text,
    game_to_text,
)
from .harness import (
    analysis_to_csv,
    analyze,
    export_records,
    load_config,
    run_experiment,
)


def _load_game(ref: str):
    if ref == "canonical":
        return CANONICAL_GAME
    if ref == "cobb":
        return COBB_GAME
    return game_from_text(Path(ref).read_text())


def _fmt(x: float) -> str:
    return f"{x:+.6f}"


@click.group()
def main() -> None:
    """Co-adaptation game engine."""


@main.command()
@click.option("--game", "game_ref", default="canonical", show_default=True,
              help="canonical | cobb | path to a game file")
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="also write the report as CSV rows")
def solve(game_ref: str, csv_path: str | None) -> None:
    """Solve every equilibrium of a game and print the report."""
    game = _load_game(game_ref)
    if isinstance(game, CobbDouglasGame):
        from .equilibria import cobb_ccve, cobb_nash, cobb_stackelberg

        ne = cobb_nash(game)
        se = cobb_stackelberg(game)
        ccve, lh, lm = cobb_ccve(game)
        click.echo(f"nash         h={_fmt(ne.h)} m={_fmt(ne.m)}")
        click.echo(f"stackelberg  h={_fmt(se.h)} m={_fmt(se.m)}")
        click.echo(f"ccve         h={_fmt(ccve.h)} m={_fmt(ccve.m)} "
                   f"L_H={_fmt(lh)} L_M={_fmt(lm)}")
        return
    report = solve_report(game)
    rows = report.rows()
    for row in rows:
        parts = [f"{row['name']:<16} h={_fmt(row['h'])} m={_fmt(row['m'])}"]
        if row["L_H"] is not None:
            parts.append(f"L_H={_fmt(row['L_H'])} L_M={_fmt(row['L_M'])}")
        if row["stability"]:
            parts.append(f"[{row['stability']}, diag={row['diagnostic']:.4g}]")
        click.echo(" ".join(parts))
    if csv_path:
        import csv as _csv

        with open(csv_path, "w", newline="") as fh:
            writer = _csv.DictWriter(fh, fieldnames=list(rows[0].keys()),
                                     lineterminator="\n")
            writer.writeheader()
            writer.writerows(rows)
        click.echo(f"wrote {csv_path}")


@main.command()
@click.option("--spec", "spec_path", type=click.Path(exists=True), required=True,
              help="design targets file (h_H, m_H, h_M, m_M, h_NE, m_NE, h_SE, m_SE)")
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="where to write the designed game file")
def design(spec_path: str, out_path: str) -> None:
    """Place the equilibrium constellation at the spec's target points."""
    spec = spec_from_text(Path(spec_path).read_text())
    result = design_game(spec)
    Path(out_path).write_text(game_to_text(result.game))
    if result.degenerate:
        click.echo("warning: degenerate design (" + "; ".join(result.notes) + ")")
    report = verify_design(result.game, spec)
    for name, err in report.errors.items():
        click.echo(f"{name:<22} reproduction error {err:.3e}")
    click.echo(("PASS" if report.passed else "FAIL")
               + f" (tolerance {report.tolerance:g}); wrote {out_path}")
    if not report.passed:
        sys.exit(1)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=None, help="override the config seed")
def simulate(config_path: str, out_dir: str, seed: int | None) -> None:
    """Run a simulated experiment and export its records."""
    cfg = load_config(config_path)
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    result = run_experiment(cfg)
    written = export_records(result, out_dir)
    for path in written:
        click.echo(f"wrote {path}")


@main.command()
@click.option("--records", "record_dirs", multiple=True, required=True,
              type=click.Path(exists=True),
              help="one exported record directory per subject")
@click.option("--game", "game_ref", default="canonical", show_default=True)
@click.option("--out", "out_path", type=click.Path(), default=None)
def analyze_cmd(record_dirs: tuple[str, ...], game_ref: str, out_path: str | None) -> None:
    """Population statistics against the game's equilibrium values."""
    import json

    from .harness import ExperimentResult, TraceRow, config_from_dict, load_records

    game = _load_game(game_ref)
    if not isinstance(game, ScalarQuadraticGame):
        raise click.ClickException("analyze needs a quadratic game reference")
    report = solve_report(game)
    results = []
    for directory in record_dirs:
        directory = Path(directory)
        cfg = config_from_dict(json.loads((directory / "manifest.json").read_text()))
        records = tuple(load_records(directory))
        trace: tuple[TraceRow, ...] = ()
        trace_path = directory / "trace.csv"
        if trace_path.exists():
            import csv as _csv

            with trace_path.open() as fh:
                rows = list(_csv.DictReader(fh))
            estimate_key = "conjecture" if cfg.experiment == 2 else "gradient"
            trace = tuple(TraceRow(int(r["k"]), float(r[estimate_key]),
                                   float(r["slope"]), float(r["intercept"]))
                          for r in rows)
        results.append(ExperimentResult(cfg, records, trace))
    text = analysis_to_csv(analyze(results, report))
    if out_path:
        Path(out_path).write_text(text)
        click.echo(f"wrote {out_path}")
    else:
        click.echo(text, nl=False)


main.add_command(analyze_cmd, name="analyze")


@main.command()
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--data-dir", "data_dir", type=click.Path(), default=None,
              help="session log directory [env: COADAPT_DATA_DIR]")
@click.option("--frontend", "frontend_dir", type=click.Path(), default=None,
              help="built browser client directory to host at /")
def serve(port: int, host: str, data_dir: str | None, frontend_dir: str | None) -> None:
    """Host the live session service."""
    from .service.server import serve as _serve

    resolved = data_dir or os.environ.get("COADAPT_DATA_DIR") or "./session-data"
    default_frontend = Path(__file__).resolve().parents[2] / "frontend"
    if frontend_dir is None and (default_frontend / "index.html").is_file():
        frontend_dir = str(default_frontend)
    click.echo(f"serving on http://{host}:{port} (data: {resolved})")
    _serve(port=port, data_dir=resolved, host=host, frontend_dir=frontend_dir)


if __name__ == "__main__":
    main()
