"""Command-line entry point: ``gewisim {p2p,network,cluster,validate}``."""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, GewisimError, Kind, default_config, load_config
from .output import emit_outputs
from .sweep import expand, run_sweep

log = logging.getLogger("gewisim")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gewisim",
        description="Simulate entanglement-buffered communication and write CSV/SVG results.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in Kind:
        p = sub.add_parser(kind.value, help=f"run a {kind.value} sweep")
        p.add_argument("-c", "--config", type=Path, help="scenario TOML file (built-in defaults if omitted)")
        p.add_argument("-s", "--seed", type=int, help="master seed (overrides the config)")
        p.add_argument("-w", "--workers", type=int, help="parallel worker processes")
        p.add_argument("-o", "--out", type=Path, help="output directory")
        p.add_argument("--ticks", type=int, help="override ticks per run (p2p/network)")
        p.add_argument("--seeds", type=int, help="override seeds per sweep point")
    v = sub.add_parser("validate", help="check a scenario file without running it")
    v.add_argument("config", type=Path)
    return parser


def _apply_overrides(cfg, args):
    changes = {}
    if args.seed is not None:
        if args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        changes["master_seed"] = args.seed
    if args.workers is not None:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        changes["workers"] = args.workers
    if args.out is not None:
        changes["output_dir"] = args.out
    if args.seeds is not None:
        if args.seeds < 1:
            raise ConfigError("--seeds must be >= 1")
        changes["seeds_per_point"] = args.seeds
    if args.ticks is not None:
        if args.ticks < 1:
            raise ConfigError("--ticks must be >= 1")
        changes["link"] = cfg.link.with_(total_ticks=args.ticks)
        if cfg.topology is not None:
            changes["topology"] = replace(cfg.topology, total_ticks=args.ticks)
    return cfg.with_(**changes) if changes else cfg


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            cfg = load_config(args.config)
            n_points = len(expand(cfg))
            print(f"{args.config}: ok ({cfg.kind.value}, {n_points} points x "
                  f"{cfg.seeds_per_point} seeds = {n_points * cfg.seeds_per_point} runs)")
            return EXIT_OK
        cfg = load_config(args.config) if args.config else default_config(args.command)
        if cfg.kind.value != args.command:
            raise ConfigError(f"config describes a '{cfg.kind.value}' scenario, not '{args.command}'",
                              path=str(args.config))
        cfg = _apply_overrides(cfg, args)
        result = run_sweep(cfg)
        for path in emit_outputs(result):
            print(path)
        return EXIT_OK
    except ConfigError as exc:
        print(f"ConfigError: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"OSError: {exc}", file=sys.stderr)
        return EXIT_IO
    except GewisimError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
