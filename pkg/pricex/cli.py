"""
Command-line interface

    pricex simulate-fixture --out bundle --days 120
    pricex ingest-check --bundle-dir bundle
    pricex run --config run.toml --start 2018-04-20 --end 2018-04-29

Every stage command works on the run directory of the configuration and
resumes from its manifest. Exit codes: 0 on success, 2 when more than half
of the forecast days failed, 3 on a configuration or bundle schema error.
"""

import argparse
import sys
from typing import Iterable, Optional

from loguru import logger

from pricex.config import PipelineConfig
from pricex.core import FAILURE_LIMIT, Pipeline
from pricex.errors import ConfigError, CoverageError, SchemaError, TooFewDays
from pricex.io.fixtures import simulate_bundle
from pricex.io.ingest import ingest

EXIT_OK = 0
EXIT_PARTIAL = 2
EXIT_CONFIG = 3

# command -> pipeline stages it executes
STAGE_COMMANDS = {
    "preprocess": ("preprocess",),
    "density": ("density",),
    "dispatch": ("dispatch",),
    "postprocess": ("postprocess",),
    "evaluate": ("evaluate",),
    "run": ("run",),
}

# flag -> (PipelineConfig section or None, field)
OVERRIDES = {
    "bundle_dir": (None, "bundle_dir"),
    "run_dir": (None, "run_dir"),
    "focal_zone": (None, "focal_zone"),
    "start": (None, "start"),
    "end": (None, "end"),
    "workers": (None, "workers"),
    "seed": (None, "seed"),
    "voll": ("dispatch", "voll"),
    "curtc": ("dispatch", "curtc"),
    "scenario_weighting": ("dispatch", "scenario_weighting"),
}


def _config_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="TOML file with a PipelineConfig")
    p.add_argument("--bundle-dir", help="Directory of the CSV bundle")
    p.add_argument("--run-dir", help="Directory receiving the run artifacts")
    p.add_argument("--focal-zone", help="Zone whose prices are forecast")
    p.add_argument("--start", help="First forecast day (YYYY-MM-DD)")
    p.add_argument("--end", help="Last forecast day (YYYY-MM-DD, inclusive)")
    p.add_argument("--workers", type=int, help="Worker processes for the dispatch sweep")
    p.add_argument("--seed", type=int, help="Random seed")
    p.add_argument("--voll", type=float, help="Value of lost load in EUR/MWh")
    p.add_argument("--curtc", type=float, help="Curtailment cost in EUR/MWh")
    p.add_argument(
        "--scenario-weighting", choices=("density", "equal"), help="Weights of the load scenarios"
    )
    p.add_argument(
        "--dispatch-only",
        action="store_true",
        help="Skip load pre-processing and the density step, dispatching on raw TSO forecasts",
    )
    p.add_argument(
        "--write-lp", action="store_true", help="Dump every dispatch LP under run_dir/dispatch/lp"
    )
    p.add_argument("--progress", action="store_true", help="Show progress bars")


def parse_args(argv: Optional[Iterable[str]] = None) -> argparse.Namespace:
    p = argparse.ArgumentParser(
        prog="pricex", description="Hybrid day-ahead electricity price forecast"
    )
    p.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    commands = p.add_subparsers(dest="command", required=True)

    check = commands.add_parser("ingest-check", help="Validate a CSV bundle")
    check.add_argument("--bundle-dir", required=True, help="Directory of the CSV bundle")

    for name in STAGE_COMMANDS:
        _config_flags(commands.add_parser(name, help=f"Run the {name} stage"))

    fixture = commands.add_parser("simulate-fixture", help="Write a synthetic CSV bundle")
    fixture.add_argument("--out", required=True, help="Output directory")
    fixture.add_argument("--seed", type=int, default=0)
    fixture.add_argument("--start", default="2018-01-01", help="First day (YYYY-MM-DD)")
    fixture.add_argument("--days", type=int, default=120, help="Number of days")
    fixture.add_argument("--zones", nargs="+", default=["A", "B"], help="Zone ids")
    return p.parse_args(None if argv is None else list(argv))


def build_config(args: argparse.Namespace) -> PipelineConfig:
    """Configuration file (or defaults) with the command-line flags applied on top."""
    config = PipelineConfig.from_toml(args.config) if args.config else PipelineConfig()
    for flag, (section, name) in OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is None:
            continue
        target = config if section is None else getattr(config, section)
        setattr(target, name, value)
    if args.dispatch_only:
        config.dispatch_only = True
    if args.write_lp:
        config.dispatch.write_lp = True
    return config.validate()


def _setup_logging(verbose: bool):
    logger.remove()
    logger.add(sys.stderr, level="DEBUG" if verbose else "INFO")


def _ingest_check(bundle_dir) -> int:
    market = ingest(bundle_dir)
    calendar = market.calendar
    logger.success(
        f"bundle ok: {len(market.zones)} zone(s) {', '.join(market.zones)}; "
        f"{len(market.clusters)} cluster(s); "
        f"{calendar.date(market.first_day)} to {calendar.date(market.last_day)}"
    )
    return EXIT_OK


def main(argv: Optional[Iterable[str]] = None) -> int:
    args = parse_args(argv)
    _setup_logging(args.verbose)

    try:
        if args.command == "simulate-fixture":
            simulate_bundle(
                args.out,
                seed=args.seed,
                start=args.start,
                n_days=args.days,
                zones=tuple(args.zones),
            )
            return EXIT_OK
        if args.command == "ingest-check":
            return _ingest_check(args.bundle_dir)

        pipeline = Pipeline(build_config(args), progress=args.progress)
        for stage in STAGE_COMMANDS[args.command]:
            getattr(pipeline, stage)()
    except (ConfigError, SchemaError, CoverageError) as e:
        logger.error(str(e))
        return EXIT_CONFIG
    except TooFewDays as e:
        logger.error(str(e))
        return EXIT_PARTIAL

    share = pipeline.failure_share()
    if share > FAILURE_LIMIT:
        logger.error(f"{share:.0%} of the forecast days failed")
        return EXIT_PARTIAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
