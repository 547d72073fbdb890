"""Shared helpers: hand-built wire protocol bodies and test clients.

Request bodies here are assembled from raw dicts on purpose, so the
protocol tests pin the JSON shape itself rather than whatever a client
library happens to emit.
"""

from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from scorer_service import ServiceConfig, create_app


def box_features(x: float, y: float, z: float = 0.0, l: float = 4.0, w: float = 2.0,
                 h: float = 1.5, yaw: float = 0.0, score: float = 0.9) -> list[float]:
    """Nine-number feature row: x, y, z, l, w, h, volume, yaw, score."""
    return [x, y, z, l, w, h, l * w * h, yaw, score]


def make_prompt(history: list[list[float]], candidate: list[float],
                track_class: str = "Car", det_class: str = "Car") -> dict:
    segments: list[dict] = [{"text": f"Track class: {track_class}; history:"}]
    for row in history:
        segments.append({"text": " "})
        segments.append({"box": list(row)})
    segments.append({"text": f". Candidate class: {det_class}: "})
    segments.append({"box": list(candidate)})
    segments.append({"text": ". Same object?"})
    return {
        "segments": segments,
        "track_class": track_class,
        "det_class": det_class,
        "history_len": len(history),
    }


def make_request(n_pairs: int = 1, template_id: str = "geo-v1") -> dict:
    pairs = []
    for i in range(n_pairs):
        prompt = make_prompt(
            [box_features(0.0, 0.0), box_features(1.0, 0.0)],
            box_features(2.0, 0.0),
        )
        pairs.append({"pair_id": f"p{i}", "prompt": prompt})
    return {"template_id": template_id, "pairs": pairs}


@pytest.fixture()
def parity_client():
    app = create_app(ServiceConfig())
    with TestClient(app) as client:
        yield client
