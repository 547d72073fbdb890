"""Standalone association-scoring microservice.

Speaks the tracking engine's scoring wire protocol over HTTP: POST
``/v1/score`` with a batch of serialized prompts, GET ``/v1/health`` for
liveness. Two modes exist behind the same endpoints: ``parity``
re-derives the deterministic geometric score from the prompt's box
slots (an independent implementation used for cross-checking the
protocol), and ``lm`` hosts a local causal language model whose Yes/No
decision-token probabilities become the score.
"""

from .app import create_app
from .config import ServiceConfig
from .errors import ModelUnavailable, OversizeBatch, ProtocolError
from .parity import parity_score, rotated_iou_3d
from .protocol import ScorePair, parse_score_request

__version__ = "0.1.0"

__all__ = [
    "ModelUnavailable",
    "OversizeBatch",
    "ProtocolError",
    "ScorePair",
    "ServiceConfig",
    "create_app",
    "parity_score",
    "parse_score_request",
    "rotated_iou_3d",
    "__version__",
]
