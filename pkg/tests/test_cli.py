"""Command-line tests: the sim/track/eval/mine pipeline, config-file
precedence, exit codes, and parity checking against a live stub service.
"""

from __future__ import annotations

import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

import pytest

from ovmot3d import GeometricScorer, ScoreRequest, prompt_from_json
from ovmot3d.cli import main


class _ServiceHandler(BaseHTTPRequestHandler):
    """Minimal wire-protocol responder scoring prompts with the in-process
    reference scorer; ``server.p_offset`` injects a controlled error."""

    server_version = "stub/0"

    def log_message(self, fmt: str, *args: object) -> None:
        pass

    def do_POST(self) -> None:
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        requests = [ScoreRequest(prompt=prompt_from_json(p["prompt"]),
                                 pair_id=p["pair_id"])
                    for p in body["pairs"]]
        scores = GeometricScorer().score_batch(requests)
        out = []
        for req, s in zip(requests, scores):
            p = min(1.0, max(0.0, s.p + self.server.p_offset))
            out.append({"pair_id": req.pair_id, "p": p, "q": s.q})
        payload = json.dumps({"scores": out}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture
def stub_service():
    server = ThreadingHTTPServer(("127.0.0.1", 0), _ServiceHandler)
    server.p_offset = 0.0
    thread = threading.Thread(target=lambda: server.serve_forever(poll_interval=0.02),
                              daemon=True)
    thread.start()
    try:
        host, port = server.server_address
        yield server, f"http://{host}:{port}"
    finally:
        server.shutdown()
        server.server_close()


def _sim(tmp_path: Path, name: str = "scene.json", *extra: str) -> Path:
    path = tmp_path / name
    assert main(["sim", "--out", str(path), "--objects", "4", "--duration", "8",
                 "--seed", "3", *extra]) == 0
    return path


def test_sim_track_eval_pipeline(tmp_path: Path, capsys) -> None:
    scene = _sim(tmp_path)
    tracks = tmp_path / "tracks.jsonl"
    assert main(["track", "--scene", str(scene), "--out", str(tracks)]) == 0
    report = tmp_path / "report.json"
    assert main(["eval", "--scene", str(scene), "--hyp", str(tracks),
                 "--json", str(report)]) == 0
    out = capsys.readouterr().out
    assert "Split" in out
    assert "100.00" in out
    doc = json.loads(report.read_text())
    assert doc["splits"]["All"]["mota"] == 1.0
    assert doc["splits"]["All"]["ids"] == 0


def test_track_output_is_jsonl(tmp_path: Path) -> None:
    scene = _sim(tmp_path)
    tracks = tmp_path / "tracks.jsonl"
    assert main(["track", "--scene", str(scene), "--out", str(tracks)]) == 0
    lines = tracks.read_text().splitlines()
    assert lines
    rec = json.loads(lines[0])
    assert set(rec) == {"frame", "track_id", "class", "box", "score"}
    assert len(rec["box"]) == 7


def test_eval_splits_filter(tmp_path: Path, capsys) -> None:
    scene = _sim(tmp_path)
    tracks = tmp_path / "t.jsonl"
    main(["track", "--scene", str(scene), "--out", str(tracks)])
    capsys.readouterr()
    assert main(["eval", "--scene", str(scene), "--hyp", str(tracks),
                 "--splits", "all"]) == 0
    out = capsys.readouterr().out
    assert "All" in out
    assert "Base" not in out


def test_mine_writes_dataset(tmp_path: Path) -> None:
    scene = _sim(tmp_path)
    pairs = tmp_path / "pairs.jsonl"
    assert main(["mine", "--scene", str(scene), "--out", str(pairs),
                 "--strategy", "hard", "--negatives", "2"]) == 0
    lines = [json.loads(s) for s in pairs.read_text().splitlines()]
    assert lines
    assert {rec["label"] for rec in lines} <= {"Yes", "No"}
    assert all("prompt" in rec and "meta" in rec for rec in lines)


def test_config_file_supplies_defaults_and_cli_overrides(tmp_path: Path) -> None:
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"objects": 3, "duration": 2, "seed": 1}))
    out_a = tmp_path / "a.json"
    assert main(["sim", "--config", str(cfg), "--out", str(out_a)]) == 0
    doc = json.loads(out_a.read_text())
    assert len(doc["frames"]) == 2
    assert len(doc["frames"][0]["gt"]) == 3
    out_b = tmp_path / "b.json"
    assert main(["sim", f"--config={cfg}", "--out", str(out_b),
                 "--objects", "5"]) == 0
    doc = json.loads(out_b.read_text())
    assert len(doc["frames"][0]["gt"]) == 5


def test_unknown_config_key_exits_1(tmp_path: Path, capsys) -> None:
    cfg = tmp_path / "bad.json"
    cfg.write_text(json.dumps({"objcts": 3}))
    assert main(["sim", "--config", str(cfg), "--out", str(tmp_path / "x.json")]) == 1
    assert "objcts" in capsys.readouterr().err


def test_config_requires_subcommand(tmp_path: Path) -> None:
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"objects": 2}))
    assert main(["--config", str(cfg)]) == 1


def test_unknown_flag_exits_2(tmp_path: Path) -> None:
    with pytest.raises(SystemExit) as exc:
        main(["sim", "--out", str(tmp_path / "x.json"), "--frobnicate"])
    assert exc.value.code == 2


def test_missing_subcommand_exits_2() -> None:
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_missing_scene_exits_1(tmp_path: Path, capsys) -> None:
    assert main(["track", "--scene", str(tmp_path / "nope.json"),
                 "--out", str(tmp_path / "t.jsonl")]) == 1
    assert "error:" in capsys.readouterr().err


def test_bad_scorer_spec_exits_1(tmp_path: Path, capsys) -> None:
    scene = _sim(tmp_path)
    assert main(["track", "--scene", str(scene), "--out", str(tmp_path / "t.jsonl"),
                 "--scorer", "quantum"]) == 1
    assert "quantum" in capsys.readouterr().err


def test_remote_scorer_tracks_identically_to_local(tmp_path: Path,
                                                   stub_service) -> None:
    _, url = stub_service
    scene = _sim(tmp_path)
    local = tmp_path / "local.jsonl"
    remote = tmp_path / "remote.jsonl"
    assert main(["track", "--scene", str(scene), "--out", str(local)]) == 0
    assert main(["track", "--scene", str(scene), "--out", str(remote),
                 "--scorer", f"remote:{url}"]) == 0
    assert local.read_bytes() == remote.read_bytes()


def test_parity_check_passes_against_faithful_service(stub_service, capsys) -> None:
    _, url = stub_service
    assert main(["parity-check", "--endpoint", url, "--pairs", "50",
                 "--seed", "1"]) == 0
    assert "parity OK" in capsys.readouterr().out


def test_parity_check_detects_drift(stub_service, capsys) -> None:
    server, url = stub_service
    server.p_offset = 1e-6
    assert main(["parity-check", "--endpoint", url, "--pairs", "20",
                 "--seed", "1"]) == 1
    captured = capsys.readouterr()
    assert "FAILED" in captured.err


def test_unreachable_service_exits_1(capsys) -> None:
    assert main(["parity-check", "--endpoint", "http://127.0.0.1:9",
                 "--pairs", "1"]) == 1
    assert "error:" in capsys.readouterr().err
