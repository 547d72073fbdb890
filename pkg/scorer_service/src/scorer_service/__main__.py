"""Command line entry point: ``scorer-service`` or ``python -m scorer_service``."""

from __future__ import annotations

import argparse

from .app import create_app
from .config import config_from_env


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="scorer-service",
        description="HTTP scoring service for track/detection prompt pairs.",
    )
    parser.add_argument("--mode", choices=["parity", "lm"], default=None,
                        help="scoring backend (default: env or parity)")
    parser.add_argument("--host", default=None, help="bind address")
    parser.add_argument("--port", type=int, default=None, help="bind port")
    parser.add_argument("--max-batch", type=int, default=None,
                        help="largest accepted pairs list per request")
    parser.add_argument("--model-path", default=None,
                        help="local checkpoint directory (lm mode only)")
    parser.add_argument("--w-iou", type=float, default=None,
                        help="overlap weight for the parity scorer")
    parser.add_argument("--tau-d", type=float, default=None,
                        help="distance decay scale for the parity scorer")
    args = parser.parse_args(argv)

    overrides = {
        key: value
        for key, value in {
            "mode": args.mode,
            "host": args.host,
            "port": args.port,
            "max_batch": args.max_batch,
            "model_path": args.model_path,
            "w_iou": args.w_iou,
            "tau_d": args.tau_d,
        }.items()
        if value is not None
    }
    cfg = config_from_env(**overrides)
    app = create_app(cfg)

    import uvicorn

    uvicorn.run(app, host=cfg.host, port=cfg.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
