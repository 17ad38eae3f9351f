"""Command line: ``jure-adapter --bind HOST:PORT [--model ID] [--threshold T]``."""

from __future__ import annotations

import argparse
import sys
import time

from jure_adapter.config import AdapterConfig, ModelLoadFailure
from jure_adapter.detector import MODEL_ID
from jure_adapter.service import BindFailure, adapter_serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jure-adapter", description="Raster object-detection expert service"
    )
    parser.add_argument("--bind", default="127.0.0.1:8080", help="host:port")
    parser.add_argument("--model", default=MODEL_ID)
    parser.add_argument("--threshold", type=float, default=0.5)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = AdapterConfig(model=args.model, threshold=args.threshold, bind=args.bind)
        handle = adapter_serve(config)
    except (ModelLoadFailure, BindFailure, ValueError) as exc:
        print(f"jure-adapter: {exc}", file=sys.stderr)
        return 1
    print(f"serving {config.model} at {handle.base_url} (Ctrl-C to stop)")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        handle.stop()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
