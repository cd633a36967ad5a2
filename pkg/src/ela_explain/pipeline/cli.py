"""Command-line entry point: ``ela-explain <command> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys

from ..errors import ConfigError, DataError, ElaExplainError, NumericFailure
from . import commands
from .config import load_config

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4

COMMANDS = {
    "features": commands.cmd_features,
    "performance": commands.cmd_performance,
    "train-eval": commands.cmd_train_eval,
    "explain": commands.cmd_explain,
    "represent": commands.cmd_represent,
    "all": commands.cmd_all,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="YAML run configuration (overrides the profile)")
    common.add_argument("--profile", choices=("desk", "paper"), default="desk")
    common.add_argument("--seed", type=int, help="global seed")
    common.add_argument("--jobs", type=int, default=1, help="parallel workers")
    common.add_argument("--force", action="store_true", help="recompute existing outputs")
    common.add_argument("--trace", action="store_true", help="write per-generation optimiser traces")
    common.add_argument("--output-dir", metavar="DIR", help="override the configured output directory")
    common.add_argument("-v", "--verbose", action="store_true")
    p = argparse.ArgumentParser(prog="ela-explain", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "explain":
            sp.add_argument("--fold", type=int, help="fold whose model is explained")
            sp.add_argument("--fid", type=int, help="problem of the local explanation")
            sp.add_argument("--iid", type=int, help="instance of the local explanation")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = load_config(args.config, args.profile, args.seed, args.output_dir)
        ctx = commands.Context(cfg, force=args.force, jobs=args.jobs, trace=args.trace)
        if args.command == "explain":
            local = None
            if args.fid is not None or args.iid is not None:
                if args.fid is None or args.iid is None:
                    raise ConfigError("--fid and --iid go together")
                local = (args.fid, args.iid)
            commands.cmd_explain(ctx, args.fold, local)
        else:
            COMMANDS[args.command](ctx)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericFailure as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, ElaExplainError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
