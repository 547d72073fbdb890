"""Service configuration, from constructor arguments or environment."""

from __future__ import annotations

import os
from dataclasses import dataclass

MODE_PARITY = "parity"
MODE_LM = "lm"

ENV_PREFIX = "SCORER_SERVICE_"


@dataclass(frozen=True, slots=True)
class ServiceConfig:
    """Runtime settings.

    ``model_path`` is required exactly when ``mode`` is ``lm``; parity
    mode is fully determined by the geometric blend parameters, which
    must match the engine's scorer for the parity guarantee to hold.
    """

    mode: str = MODE_PARITY
    host: str = "127.0.0.1"
    port: int = 8701
    max_batch: int = 256
    model_path: str | None = None
    w_iou: float = 0.5
    tau_d: float = 2.0

    def __post_init__(self) -> None:
        if self.mode not in (MODE_PARITY, MODE_LM):
            raise ValueError(f"mode must be '{MODE_PARITY}' or '{MODE_LM}', got {self.mode!r}")
        if self.mode == MODE_LM and not self.model_path:
            raise ValueError("model_path is required in lm mode")
        if self.mode == MODE_PARITY and self.model_path:
            raise ValueError("model_path is only meaningful in lm mode")
        if self.max_batch < 1:
            raise ValueError(f"max_batch must be >= 1, got {self.max_batch}")
        if not (0.0 <= self.w_iou <= 1.0):
            raise ValueError(f"w_iou must be in [0, 1], got {self.w_iou}")
        if self.tau_d <= 0.0:
            raise ValueError(f"tau_d must be positive, got {self.tau_d}")
        if not (1 <= self.port <= 65535):
            raise ValueError(f"port must be in [1, 65535], got {self.port}")


def config_from_env(**overrides) -> ServiceConfig:
    """Build a config from SCORER_SERVICE_* variables; kwargs win."""
    env_map = {
        "mode": os.environ.get(ENV_PREFIX + "MODE"),
        "host": os.environ.get(ENV_PREFIX + "HOST"),
        "port": os.environ.get(ENV_PREFIX + "PORT"),
        "max_batch": os.environ.get(ENV_PREFIX + "MAX_BATCH"),
        "model_path": os.environ.get(ENV_PREFIX + "MODEL_PATH"),
        "w_iou": os.environ.get(ENV_PREFIX + "W_IOU"),
        "tau_d": os.environ.get(ENV_PREFIX + "TAU_D"),
    }
    kwargs = {}
    for key, raw in env_map.items():
        if raw is None:
            continue
        if key in ("port", "max_batch"):
            kwargs[key] = int(raw)
        elif key in ("w_iou", "tau_d"):
            kwargs[key] = float(raw)
        else:
            kwargs[key] = raw
    kwargs.update(overrides)
    return ServiceConfig(**kwargs)
