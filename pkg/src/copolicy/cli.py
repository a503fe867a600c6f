"""Command-line front door.

Subcommands: run (execute a scenario grid from a TOML config), figures
(extract figure-ready CSVs from a results file), validate (check a panel
CSV), synth (write a synthetic panel), serve (launch the scenario service).

Exit codes: 0 success, 1 runtime error, 2 config/validation error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load_run_config
from .errors import CopolicyError, InvalidConfig, ParseError, UnbalancedPanel
from .figures import figure_tables, load_results, write_figure_csvs
from .panel import SynthConfig, load_panel, synth_panel, write_panel
from .results import write_manifest, write_replication_csv, write_results_csv
from .runner import run_grid, validate_grid

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="copolicy",
                                     description="Monte Carlo lab for co-occurring policy enactments")
    parser.add_argument("--version", action="version", version=f"copolicy {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario grid from a TOML config")
    p.add_argument("--config", required=True, help="TOML run configuration")
    p.add_argument("--reps", type=int, help="override run.n_reps")
    p.add_argument("--seed", type=int, help="override run.master_seed")
    p.add_argument("--workers", type=int, help="override run.workers")
    p.add_argument("--out", help="override run.output_dir")
    p.add_argument("--keep-reps", action="store_true", help="persist per-replication records")
    p.add_argument("--quiet", action="store_true")

    p = sub.add_parser("figures", help="emit figure-ready CSVs from a results file")
    p.add_argument("results", help="results CSV produced by `run`")
    p.add_argument("--figure", required=True, help="figure id: 1, 2, 3, a1, a2")
    p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("validate", help="validate a panel CSV")
    p.add_argument("panel", help="panel CSV path")

    p = sub.add_parser("synth", help="write a synthetic panel CSV")
    p.add_argument("--out", required=True, help="output CSV path")
    p.add_argument("--units", type=int, default=50)
    p.add_argument("--years", type=int, default=18)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--base-rate", type=float, default=10.0)
    p.add_argument("--trend", type=float, default=0.35)

    p = sub.add_parser("serve", help="launch the scenario service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8787)
    p.add_argument("--workers", type=int, default=1, help="replication worker processes")
    p.add_argument("--panel", help="panel CSV (default: synthetic panel)")
    p.add_argument("--cache-dir", help="on-disk results cache directory")
    return parser


def _apply_overrides(config: RunConfig, args) -> RunConfig:
    updates = {}
    if args.reps is not None:
        updates["n_reps"] = args.reps
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.out is not None:
        updates["output_dir"] = args.out
    if args.keep_reps:
        updates["keep_reps"] = True
    if not updates:
        return config
    return config.model_copy(update={"run": config.run.model_copy(update=updates)})


def cmd_run(args) -> int:
    try:
        config = _apply_overrides(load_run_config(args.config), args)
        grid = config.grid.grid_spec()
        panel = config.panel.load()
        workers = config.resolve_workers()
        validate_grid(grid, panel)
    except (InvalidConfig, ParseError, UnbalancedPanel, CopolicyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    out_dir = Path(config.run.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def progress(done, total):
        if not args.quiet and (done % max(1, total // 100) == 0 or done == total):
            print(f"\r{done}/{total} replications", end="", file=sys.stderr, flush=True)

    try:
        results = run_grid(grid, panel, n_reps=config.run.n_reps,
                           master_seed=config.run.master_seed, workers=workers,
                           progress=progress, retain_records=config.run.keep_reps)
    except CopolicyError as exc:
        print(f"\nrun failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    if not args.quiet:
        print(file=sys.stderr)

    results_path = out_dir / "results.csv"
    write_results_csv(results, results_path)
    reps_path = None
    if config.run.keep_reps:
        reps_path = out_dir / "replications.csv"
        write_replication_csv(results, reps_path)
    write_manifest(
        out_dir / "manifest.json",
        config_echo=json.loads(config.model_dump_json()),
        master_seed=config.run.master_seed,
        panel_digest=panel.digest(),
        results_file=results_path.name,
        n_results=len(results),
        replication_file=reps_path.name if reps_path else None,
    )
    print(f"wrote {results_path}")
    return EXIT_OK


def cmd_figures(args) -> int:
    try:
        results = load_results(args.results)
    except FileNotFoundError:
        print(f"results file not found: {args.results}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        tables = figure_tables(results, args.figure)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CopolicyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    Path(args.out).mkdir(parents=True, exist_ok=True)
    for path in write_figure_csvs(tables, args.out, str(args.figure).lower()):
        print(f"wrote {path}")
    return EXIT_OK


def cmd_validate(args) -> int:
    try:
        panel = load_panel(args.panel)
    except FileNotFoundError:
        print(f"panel file not found: {args.panel}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except UnbalancedPanel as exc:
        print(f"unbalanced panel: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except CopolicyError as exc:
        print(f"invalid panel: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    lo, hi = panel.year_range
    print(f"balanced: {panel.n_units} units x {panel.n_years} years "
          f"({lo}-{hi}, {panel.n_rows} rows)")
    return EXIT_OK


def cmd_synth(args) -> int:
    try:
        config = SynthConfig(n_units=args.units, n_years=args.years, seed=args.seed,
                             base_rate=args.base_rate, trend_per_year=args.trend)
    except InvalidConfig as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    panel = synth_panel(config)
    write_panel(panel, args.out)
    print(f"wrote {args.out} ({panel.n_units} units x {panel.n_years} years)")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    try:
        panel = load_panel(args.panel) if args.panel else None
    except CopolicyError as exc:
        print(f"panel error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    app = create_app(panel, workers=args.workers, cache_dir=args.cache_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "figures": cmd_figures,
    "validate": cmd_validate,
    "synth": cmd_synth,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
