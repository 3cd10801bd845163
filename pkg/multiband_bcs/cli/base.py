import argparse
import logging
import logging.config
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from multiband_bcs import __version__
from multiband_bcs.exceptions import BcsError, InvalidArguments, InvalidGridSpec, InvalidOverride
from multiband_bcs.models.physics import load_model
from multiband_bcs.schemas.models import RunConfig
from multiband_bcs.settings import Settings, get_settings
from multiband_bcs.utils.action import ActionLogger
from multiband_bcs.utils.io import prepare_output

from .commands import COMMANDS, RunContext, finish
from .exc_handlers import handle


logger = logging.getLogger(__name__)

LOGGING_CONFIG = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {"generic": {"format": "%(levelname)-5.5s [%(name)s] %(message)s", "datefmt": "%H:%M:%S"}},
    "handlers": {"console": {"class": "logging.StreamHandler", "stream": "ext://sys.stderr", "formatter": "generic"}},
    "loggers": {"multiband_bcs": {"level": "INFO", "handlers": ["console"], "propagate": False}},
    "root": {"level": "WARNING", "handlers": ["console"]},
}

GRID_FLAGS = ("lambda", "kappa")
VALUE_FLAGS = tuple(f"--{name}{suffix}" for name in GRID_FLAGS for suffix in ("", "-range", "-logrange"))


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str):
        raise InvalidArguments(message)


def configure_logging(verbose: bool = False) -> None:
    config = {**LOGGING_CONFIG, "loggers": {"multiband_bcs": {**LOGGING_CONFIG["loggers"]["multiband_bcs"]}}}
    if verbose:
        config["loggers"]["multiband_bcs"]["level"] = "DEBUG"
    logging.config.dictConfig(config)


def _range(spec: str, log: bool) -> list[float]:
    try:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise InvalidGridSpec(spec)
    if count < 1 or (log and (start <= 0 or stop <= 0)):
        raise InvalidGridSpec(spec)
    values = np.geomspace(start, stop, count) if log else np.linspace(start, stop, count)
    return [float(value) for value in values]


def parse_grid(values: list[str] | None, ranges: list[str] | None, logranges: list[str] | None) -> list[float]:
    """Explicit values (comma separated, repeatable) followed by linear and logarithmic ranges a:b:n"""
    grid = []
    for item in values or []:
        try:
            grid += [float(value) for value in item.split(",") if value.strip()]
        except ValueError:
            raise InvalidGridSpec(item)
    for spec in ranges or []:
        grid += _range(spec, log=False)
    for spec in logranges or []:
        grid += _range(spec, log=True)
    if not all(np.isfinite(grid)):
        raise InvalidGridSpec(",".join(map(str, grid)))
    return grid


def parse_overrides(pairs: list[str] | None) -> dict[str, str]:
    overrides = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or key not in Settings.model_fields:
            raise InvalidOverride(pair)
        overrides[key] = value
    return overrides


def apply_overrides(overrides: dict[str, str]) -> Settings:
    if not overrides:
        return get_settings()
    try:
        return Settings(**{**get_settings().model_dump(), **overrides})
    except ValidationError:
        raise InvalidOverride(", ".join(f"{key}={value}" for key, value in overrides.items()))


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="multiband_bcs", description="Multi-band BCS critical temperatures and gaps")
    parser.add_argument("--version", action="version", version=__version__)
    commands = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        sub = commands.add_parser(name, help=help_text)
        sub.add_argument("--model", required=True, type=Path, help="TOML model file")
        for grid in GRID_FLAGS:
            sub.add_argument(f"--{grid}", action="append", dest=f"{grid}_values", help="value or comma list")
            sub.add_argument(f"--{grid}-range", action="append", dest=f"{grid}_ranges", help="linear range a:b:n")
            sub.add_argument(f"--{grid}-logrange", action="append", dest=f"{grid}_logranges", help="log range a:b:n")
        sub.add_argument("--temperature", type=float, help="gap: absolute temperature")
        sub.add_argument("--t-fraction", type=float, default=0.5, help="gap: temperature as a fraction of T_c")
        sub.add_argument("--set", action="append", dest="overrides", metavar="KEY=VALUE", help="solver option")
        sub.add_argument("--out", type=Path, help="output directory, results/<model name> by default")
        sub.add_argument("--workers", type=int, help="parallel worker processes")
        sub.add_argument("--verbose", action="store_true")
    return parser


def normalize_argv(argv: list[str]) -> list[str]:
    """Glue grid flags to their values so that ranges starting with a minus sign parse"""
    result, tokens = [], iter(argv)
    for token in tokens:
        if token in VALUE_FLAGS:
            value = next(tokens, None)
            result.append(token if value is None else f"{token}={value}")
        else:
            result.append(token)
    return result


def parse_config(argv: list[str]) -> RunConfig:
    args = build_parser().parse_args(normalize_argv(argv))
    try:
        return RunConfig(
            model_path=args.model,
            command=args.command,
            lambdas=parse_grid(args.lambda_values, args.lambda_ranges, args.lambda_logranges),
            kappas=parse_grid(args.kappa_values, args.kappa_ranges, args.kappa_logranges),
            temperature=args.temperature,
            t_fraction=args.t_fraction,
            overrides=parse_overrides(args.overrides),
            out=args.out or Path("results") / args.model.stem,
            workers=args.workers,
            verbose=args.verbose,
        )
    except ValidationError as e:
        raise InvalidArguments("; ".join(err["msg"] for err in e.errors()))


def run(argv: list[str]) -> int:
    """Run one command; 0 on success, 1 on configuration errors, 2 on partial results or numerical failures"""
    ctx = None
    try:
        config = parse_config(argv)
        configure_logging(config.verbose)
        opts = apply_overrides(config.overrides)
        model = load_model(config.model_path)
        out = prepare_output(config.out)
        ActionLogger.open(out)
        ctx = RunContext(config=config, model=model, opts=opts, out=out)
        ActionLogger.log_event(ctx.run_id, "command_start", {"command": config.command, "argv": argv})
        handler, _ = COMMANDS[config.command]
        code = handler(ctx)
        ActionLogger.log_event(ctx.run_id, "command_finished", {"exit_code": code})
        return code
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else 0
    except BcsError as e:
        code = handle(e)
        if ctx is not None:
            ActionLogger.log_event(ctx.run_id, "command_failed", {"error": e.eng, "exit_code": code})
            finish(ctx, code)
        return code
    finally:
        ActionLogger.close()
