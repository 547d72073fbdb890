"""Command-line surface: simulate, track, evaluate, mine, and check that a
remote scoring service agrees with the in-process reference scorer.

Each subcommand accepts ``--config FILE``, a flat JSON object whose keys are
the long flag names with underscores. Command-line flags override the file;
the file overrides built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import OvmotError
from .geometry import Box3D, JitterParams
from .lifecycle import (LifecycleConfig, Tracker, load_tracking_jsonl, scene_stream,
                        write_tracking_jsonl)
from .metrics import EvalBox, EvalConfig, render_report, report_to_json, split_eval
from .mining import MiningConfig, emit_dataset, mine_scene
from .scene import SceneFile, load_scene, write_scene
from .scoring import (GeometricScorer, GeoScorerParams, RemoteScorer, ScoreRequest,
                      Scorer, geometric_score)
from .serializer import (ClassVocabulary, SerializerConfig, serialize_pair,
                         DEFAULT_TEMPLATE_ID)
from .simulate import SimConfig, simulate


def _load_config_arg(argv: list[str]) -> dict:
    path: str | None = None
    for i, token in enumerate(argv):
        if token == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif token.startswith("--config="):
            path = token.split("=", 1)[1]
    if path is None:
        return {}
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise OvmotError(f"cannot read config file {path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise OvmotError(f"config file {path} must hold a flat JSON object")
    return doc


def _vocab_for(scene: SceneFile, novel_override: str | None) -> ClassVocabulary:
    vocab = scene.vocabulary
    if novel_override is None:
        return vocab
    novel = frozenset(s.strip() for s in novel_override.split(",") if s.strip())
    return ClassVocabulary(
        base_classes=(vocab.base_classes | vocab.novel_classes) - novel,
        novel_classes=novel,
        placeholder=vocab.placeholder,
    )


def _make_scorer(spec: str, w_iou: float, tau_d: float, template_id: str) -> Scorer:
    if spec == "geometric":
        return GeometricScorer(params=GeoScorerParams(w_iou=w_iou, tau_d=tau_d))
    if spec.startswith("remote:"):
        return RemoteScorer(endpoint=spec.split(":", 1)[1], template_id=template_id)
    raise OvmotError(f"unknown scorer {spec!r}; expected 'geometric' or 'remote:<url>'")


def _cmd_sim(args: argparse.Namespace) -> int:
    cfg = SimConfig(
        n_objects=args.objects,
        duration=args.duration,
        speed_min=args.speed_min,
        speed_max=args.speed_max,
        lane_gap=args.lane_gap,
        sigma_det=JitterParams(sigma_center=args.sigma_center,
                               sigma_size_log=args.sigma_size_log,
                               sigma_yaw=args.sigma_yaw),
        p_dropout=args.dropout,
        clutter_rate=args.clutter_rate,
        p_labelflip=args.labelflip,
        novel_fraction=args.novel_fraction,
        seed=args.seed,
    )
    scene = simulate(cfg)
    write_scene(scene, args.out)
    n_det = sum(len(f.detections) for f in scene.frames)
    print(f"wrote {args.out}: {len(scene.frames)} frames, "
          f"{cfg.n_objects} objects, {n_det} detections")
    return 0


def _cmd_track(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene)
    vocab = _vocab_for(scene, args.novel_classes)
    serializer = SerializerConfig(history_len=args.history_len,
                                  mask_novel=args.mask_novel == "on",
                                  template_id=args.template_id)
    lifecycle = LifecycleConfig(
        max_age=args.max_age,
        history_capacity=max(10, args.history_len),
        birth_score=args.birth_score,
        confirm_hits=args.confirm_hits,
        gate_dist=args.gate_dist,
        accept_max_cost=args.accept_max_cost,
    )
    scorer = _make_scorer(args.scorer, args.w_iou, args.tau_d, args.template_id)
    tracker = Tracker(scorer, lifecycle, serializer, vocab)
    results = tracker.run_sequence(scene_stream(scene))
    write_tracking_jsonl(results, args.out)
    n_out = sum(len(r.outputs) for r in results)
    n_born = sum(len(r.births) for r in results)
    print(f"wrote {args.out}: {len(results)} frames, {n_born} tracks, {n_out} output boxes")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene)
    hyp_frames = load_tracking_jsonl(args.hyp)
    gt_seq: list[list[EvalBox]] = []
    hyp_seq: list[list[EvalBox]] = []
    for frame in scene.frames:
        gt_seq.append([EvalBox(obj_id=g.gt_id, box=g.box, label=g.label) for g in frame.gt])
        hyp_seq.append([
            EvalBox(obj_id=o.track_id, box=o.box, label=o.class_label, score=o.score)
            for o in hyp_frames.get(frame.index, [])
        ])
    cfg = EvalConfig(iou_threshold=args.iou,
                     recall_points=args.recall_points,
                     motp_mode=args.motp_mode,
                     clamp_negative=not args.no_clamp)
    vocab = _vocab_for(scene, args.novel_classes)
    splits = split_eval(gt_seq, hyp_seq, vocab, cfg)
    wanted = {s.strip().lower() for s in args.splits.split(",") if s.strip()}
    shown = {name: m for name, m in splits.items() if name.lower() in wanted}
    print(render_report(shown or splits, cfg))
    if args.json:
        Path(args.json).write_text(json.dumps(report_to_json(splits, cfg), indent=2) + "\n")
        print(f"wrote {args.json}")
    return 0


def _cmd_mine(args: argparse.Namespace) -> int:
    scene = load_scene(args.scene)
    vocab = _vocab_for(scene, args.novel_classes)
    cfg = MiningConfig(
        jitter=JitterParams(sigma_center=args.sigma_center,
                            sigma_size_log=args.sigma_size_log,
                            sigma_yaw=args.sigma_yaw),
        hard_radius=args.hard_radius,
        negatives_per_positive=args.negatives,
        history_len=args.history_len,
        strategy=args.strategy,
        seed=args.seed,
    )
    serializer = SerializerConfig(history_len=args.history_len,
                                  mask_novel=args.mask_novel == "on")
    pairs = mine_scene(scene, cfg, serializer, vocab)
    emit_dataset(pairs, args.out)
    n_yes = sum(1 for p in pairs if p.label == "Yes")
    print(f"wrote {args.out}: {len(pairs)} pairs ({n_yes} Yes, {len(pairs) - n_yes} No)")
    return 0


def _random_history_and_candidate(rng: np.random.Generator,
                                  history_len: int) -> tuple[list[Box3D], Box3D]:
    x, y = rng.uniform(-40.0, 40.0, size=2)
    z = rng.uniform(0.5, 2.0)
    l, w, h = rng.uniform(0.5, 6.0, size=3)
    yaw = rng.uniform(-math.pi, math.pi)
    vx, vy = rng.uniform(-1.5, 1.5, size=2)
    history = []
    for t in range(history_len):
        history.append(Box3D(x=x + vx * t, y=y + vy * t, z=z, l=l, w=w, h=h,
                             yaw=yaw, score=rng.uniform(0.2, 1.0)))
    last = history[-1]
    candidate = Box3D(
        x=last.x + vx + rng.normal(0.0, 1.0),
        y=last.y + vy + rng.normal(0.0, 1.0),
        z=z, l=l, w=w, h=h, yaw=yaw, score=rng.uniform(0.2, 1.0),
    )
    return history, candidate


def _cmd_parity_check(args: argparse.Namespace) -> int:
    rng = np.random.default_rng(args.seed)
    vocab = ClassVocabulary(base_classes=frozenset({"Car"}), novel_classes=frozenset())
    ser_cfg = SerializerConfig(history_len=args.history_len, template_id=args.template_id)
    params = GeoScorerParams(w_iou=args.w_iou, tau_d=args.tau_d)
    requests = []
    local = []
    for i in range(args.pairs):
        history, candidate = _random_history_and_candidate(rng, args.history_len)
        prompt = serialize_pair(history, "Car", candidate, "Car", ser_cfg, vocab)
        requests.append(ScoreRequest(prompt=prompt, pair_id=f"pair-{i}"))
        local.append(geometric_score(history, candidate, params))
    remote = RemoteScorer(endpoint=args.endpoint, template_id=args.template_id)
    remote_scores = remote.score_batch(requests)
    dp = max(abs(a.p - b.p) for a, b in zip(local, remote_scores))
    dq = max(abs((a.q or 0.0) - (b.q or 0.0)) for a, b in zip(local, remote_scores))
    print(f"{args.pairs} pairs: max |dp| = {dp:.3e}, max |dq| = {dq:.3e}")
    if dp > args.tolerance or dq > args.tolerance:
        print(f"parity FAILED: tolerance {args.tolerance:.1e}", file=sys.stderr)
        return 1
    print("parity OK")
    return 0


def _build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="ovmot3d",
        description="Online open-vocabulary 3D multi-object tracking toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    subparsers: dict[str, argparse.ArgumentParser] = {}

    def new_sub(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat JSON file of flag defaults")
        subparsers[name] = p
        return p

    p = new_sub("sim", "generate a synthetic scene with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--objects", type=int, default=10)
    p.add_argument("--duration", type=int, default=100)
    p.add_argument("--speed-min", type=float, default=0.3)
    p.add_argument("--speed-max", type=float, default=1.0)
    p.add_argument("--lane-gap", type=float, default=4.0)
    p.add_argument("--sigma-center", type=float, default=0.0)
    p.add_argument("--sigma-size-log", type=float, default=0.0)
    p.add_argument("--sigma-yaw", type=float, default=0.0)
    p.add_argument("--dropout", type=float, default=0.0)
    p.add_argument("--clutter-rate", type=float, default=0.0)
    p.add_argument("--labelflip", type=float, default=0.0)
    p.add_argument("--novel-fraction", type=float, default=0.3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_sim)

    p = new_sub("track", "run the online tracker over a scene")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scorer", default="geometric",
                   help="'geometric' or 'remote:<url>'")
    p.add_argument("--history-len", type=int, default=3)
    p.add_argument("--max-age", type=int, default=3)
    p.add_argument("--gate-dist", type=float, default=10.0)
    p.add_argument("--birth-score", type=float, default=0.3)
    p.add_argument("--confirm-hits", type=int, default=1)
    p.add_argument("--accept-max-cost", type=float, default=0.9)
    p.add_argument("--w-iou", type=float, default=0.5)
    p.add_argument("--tau-d", type=float, default=2.0)
    p.add_argument("--mask-novel", choices=("on", "off"), default="on")
    p.add_argument("--novel-classes", help="comma list overriding the scene vocabulary")
    p.add_argument("--template-id", default=DEFAULT_TEMPLATE_ID)
    p.set_defaults(func=_cmd_track)

    p = new_sub("eval", "score tracking output against ground truth")
    p.add_argument("--scene", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--iou", type=float, default=0.25)
    p.add_argument("--recall-points", type=int, default=40)
    p.add_argument("--motp-mode", choices=("iou", "distance"), default="iou")
    p.add_argument("--no-clamp", action="store_true")
    p.add_argument("--splits", default="base,novel,all")
    p.add_argument("--novel-classes", help="comma list overriding the scene vocabulary")
    p.add_argument("--json", help="also write the full report as JSON")
    p.set_defaults(func=_cmd_eval)

    p = new_sub("mine", "emit training pairs from scene ground truth")
    p.add_argument("--scene", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strategy", choices=("hard", "local", "random"), default="hard")
    p.add_argument("--hard-radius", type=float, default=8.0)
    p.add_argument("--negatives", type=int, default=3)
    p.add_argument("--history-len", type=int, default=3)
    p.add_argument("--sigma-center", type=float, default=0.2)
    p.add_argument("--sigma-size-log", type=float, default=0.05)
    p.add_argument("--sigma-yaw", type=float, default=0.05)
    p.add_argument("--mask-novel", choices=("on", "off"), default="on")
    p.add_argument("--novel-classes", help="comma list overriding the scene vocabulary")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_mine)

    p = new_sub("parity-check", "compare a remote scorer against the local reference")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--pairs", type=int, default=1000)
    p.add_argument("--history-len", type=int, default=3)
    p.add_argument("--w-iou", type=float, default=0.5)
    p.add_argument("--tau-d", type=float, default=2.0)
    p.add_argument("--tolerance", type=float, default=1e-9)
    p.add_argument("--template-id", default=DEFAULT_TEMPLATE_ID)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_parity_check)

    return parser, subparsers


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, subparsers = _build_parser()
    try:
        file_cfg = _load_config_arg(argv)
        if file_cfg:
            command = argv[0] if argv and not argv[0].startswith("-") else None
            target = subparsers.get(command or "")
            if target is None:
                raise OvmotError("--config requires a subcommand")
            valid = {a.dest for a in target._actions}
            unknown = set(file_cfg) - valid
            if unknown:
                raise OvmotError(f"unknown config keys: {sorted(unknown)}")
            target.set_defaults(**file_cfg)
        args = parser.parse_args(argv)
        return args.func(args)
    except OvmotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
