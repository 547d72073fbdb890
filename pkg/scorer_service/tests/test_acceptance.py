"""Release gates for the scoring service.

The parity gate drives the service with prompts produced by the tracking
engine's own serializer and compares against the engine's in-process
geometric scorer, so the two independently written scorers check each
other end to end across the wire format.
"""

from __future__ import annotations

import math

import numpy as np
from fastapi.testclient import TestClient

from ovmot3d.geometry import Box3D
from ovmot3d.scoring import GeometricScorer, GeoScorerParams, ScoreRequest
from ovmot3d.serializer import (
    ClassVocabulary,
    SerializerConfig,
    prompt_to_json,
    serialize_pair,
)
from scorer_service import ServiceConfig, create_app

N_PAIRS = 10_000
CHUNK = 250
TOLERANCE = 1e-9


def _report(name: str) -> None:
    print(f"[acceptance] {name}: PASS")


def _random_history_and_candidate(rng: np.random.Generator) -> tuple[list[Box3D], Box3D]:
    hist_len = int(rng.integers(1, 5))
    x = float(rng.uniform(-20.0, 20.0))
    y = float(rng.uniform(-20.0, 20.0))
    z = float(rng.uniform(-1.0, 1.0))
    vx = float(rng.normal(0.0, 0.5))
    vy = float(rng.normal(0.0, 0.5))
    l = float(rng.uniform(1.0, 6.0))
    w = float(rng.uniform(1.0, 3.0))
    h = float(rng.uniform(0.5, 3.0))
    yaw = float(rng.uniform(-math.pi, math.pi))

    history = [
        Box3D(x=x + t * vx, y=y + t * vy, z=z,
              l=l, w=w, h=h,
              yaw=yaw + float(rng.normal(0.0, 0.05)),
              score=float(rng.uniform(0.1, 1.0)))
        for t in range(hist_len)
    ]
    # Candidate lands near the next extrapolated center with enough spread
    # to cover strong overlap, partial overlap and clean misses.
    candidate = Box3D(
        x=x + hist_len * vx + float(rng.normal(0.0, 1.5)),
        y=y + hist_len * vy + float(rng.normal(0.0, 1.5)),
        z=z + float(rng.normal(0.0, 0.3)),
        l=l * float(np.exp(rng.normal(0.0, 0.1))),
        w=w * float(np.exp(rng.normal(0.0, 0.1))),
        h=h * float(np.exp(rng.normal(0.0, 0.1))),
        yaw=history[-1].yaw + float(rng.normal(0.0, 0.2)),
        score=float(rng.uniform(0.1, 1.0)),
    )
    return history, candidate


def test_parity_mode_tracks_engine_scorer_on_ten_thousand_pairs() -> None:
    rng = np.random.default_rng(7)
    vocab = ClassVocabulary(base_classes=frozenset({"Car", "Truck"}),
                            novel_classes=frozenset({"Bicycle"}))
    ser_cfg = SerializerConfig(history_len=4)
    labels = ("Car", "Truck", "Bicycle")

    requests: list[ScoreRequest] = []
    for i in range(N_PAIRS):
        history, candidate = _random_history_and_candidate(rng)
        prompt = serialize_pair(history, labels[int(rng.integers(0, 3))],
                                candidate, labels[int(rng.integers(0, 3))],
                                ser_cfg, vocab)
        requests.append(ScoreRequest(prompt=prompt, pair_id=f"r{i}"))

    reference = GeometricScorer(params=GeoScorerParams()).score_batch(requests)

    app = create_app(ServiceConfig())
    worst_p = 0.0
    worst_q = 0.0
    with TestClient(app) as client:
        for start in range(0, N_PAIRS, CHUNK):
            chunk = requests[start:start + CHUNK]
            body = {
                "template_id": "geo-v1",
                "pairs": [{"pair_id": r.pair_id, "prompt": prompt_to_json(r.prompt)}
                          for r in chunk],
            }
            resp = client.post("/v1/score", json=body)
            assert resp.status_code == 200
            scores = resp.json()["scores"]
            assert [s["pair_id"] for s in scores] == [r.pair_id for r in chunk]
            for s, ref in zip(scores, reference[start:start + CHUNK]):
                worst_p = max(worst_p, abs(s["p"] - ref.p))
                worst_q = max(worst_q, abs(s["q"] - ref.q))

    assert worst_p <= TOLERANCE, f"worst |dp| {worst_p:.3e}"
    assert worst_q <= TOLERANCE, f"worst |dq| {worst_q:.3e}"
    _report("service parity vs engine scorer on 10^4 pairs")


def test_malformed_body_and_oversize_batch_get_protocol_statuses() -> None:
    app = create_app(ServiceConfig(max_batch=256))
    rng = np.random.default_rng(11)
    vocab = ClassVocabulary(base_classes=frozenset({"Car"}), novel_classes=frozenset())
    ser_cfg = SerializerConfig(history_len=2)

    history, candidate = _random_history_and_candidate(rng)
    prompt = prompt_to_json(serialize_pair(history, "Car", candidate, "Car",
                                           ser_cfg, vocab))
    with TestClient(app) as client:
        bad = client.post("/v1/score", content=b"\x00 not json",
                          headers={"Content-Type": "application/json"})
        assert bad.status_code == 400

        missing = client.post("/v1/score", json={"pairs": []})
        assert missing.status_code == 400

        big = client.post("/v1/score", json={
            "template_id": "geo-v1",
            "pairs": [{"pair_id": f"p{i}", "prompt": prompt} for i in range(257)],
        })
        assert big.status_code == 413
    _report("malformed body 400 and oversize batch 413")
