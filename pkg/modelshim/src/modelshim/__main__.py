"""python -m modelshim --classifier model.json --bind STT=test --port 8100"""

import argparse
import sys

import uvicorn

from modelshim.config import ConfigurationError, ShimConfig, load_config
from modelshim.models import ModelLoadError
from modelshim.server import create_app


def parse_args(argv=None):
    parser = argparse.ArgumentParser(prog="modelshim")
    parser.add_argument("--config", help="INI config file")
    parser.add_argument("--host")
    parser.add_argument("--port", type=int)
    parser.add_argument("--classifier", help="path to a persisted classifier bundle")
    parser.add_argument(
        "--bind",
        action="append",
        default=[],
        metavar="STAGE=MODEL",
        help="bind a conversion stage, e.g. STT=test (repeatable)",
    )
    return parser.parse_args(argv)


def build_config(args) -> ShimConfig:
    cfg = load_config(args.config) if args.config else ShimConfig()
    host = args.host if args.host else cfg.host
    port = args.port if args.port is not None else cfg.port
    classifier = args.classifier if args.classifier else cfg.classifier_path
    stages = dict(cfg.stage_models)
    for binding in args.bind:
        stage, sep, identifier = binding.partition("=")
        if not sep or not identifier:
            raise ConfigurationError(f"--bind wants STAGE=MODEL, got {binding!r}")
        stages[stage.strip().upper()] = identifier.strip()
    return ShimConfig(host, port, classifier, stages)


def main(argv=None) -> int:
    args = parse_args(argv)
    try:
        cfg = build_config(args)
        app = create_app(cfg)
    except (ConfigurationError, ModelLoadError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
