"""Service error types, mapped to HTTP statuses in the app layer."""

from __future__ import annotations


class ProtocolError(ValueError):
    """Request body violates the scoring wire protocol (HTTP 400)."""


class OversizeBatch(ValueError):
    """More pairs than the configured batch limit (HTTP 413)."""


class ModelUnavailable(RuntimeError):
    """LM mode is configured but no model could be loaded (HTTP 503)."""
