"""End-to-end acceptance checklist for the tracking engine.

Each test here covers one release gate and prints a single PASS line so
the suite output doubles as a sign-off report.  The checks deliberately
go through independent oracles where one exists: the exhaustive
assignment enumerator, the Monte Carlo volume estimator, and the
self-contained CLEAR re-implementation in ``clear_oracle.py``.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

import numpy as np
import pytest

import clear_oracle
from conftest import unit_cube
from oracles import monte_carlo_iou_3d, random_overlapping_pair
from ovmot3d import (
    FORBIDDEN,
    Box3D,
    CostMatrix,
    Detection,
    EvalBox,
    EvalConfig,
    GeometricScorer,
    GeoScorerParams,
    JitterParams,
    LifecycleConfig,
    MiningConfig,
    SerializerConfig,
    SimConfig,
    Tracker,
    amota,
    center_distance_bev,
    clear_mot,
    default_vocabulary,
    iou_3d,
    mine_scene,
    scene_stream,
    select_threshold,
    serialize_pair,
    simulate,
    solve,
    solve_brute,
    total_cost,
)


def _report(name: str) -> None:
    print(f"[acceptance] {name}: PASS")


def test_solver_total_cost_equals_brute_force_on_random_instances() -> None:
    """1,000 random rectangular instances up to 7x7 with 20% forbidden pairs."""
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    for _ in range(1000):
        n_rows = int(rng.integers(1, 8))
        n_cols = int(rng.integers(1, 8))
        values = rng.uniform(0.0, 1.0, size=(n_rows, n_cols))
        values[rng.uniform(size=(n_rows, n_cols)) < 0.2] = FORBIDDEN
        cost = CostMatrix(entries=values)
        fast = solve(cost)
        brute = solve_brute(cost)
        assert len(fast.matches) == len(brute.matches)
        assert total_cost(cost, fast) == total_cost(cost, brute)
    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"solver comparison took {elapsed:.2f}s"
    _report("assignment equals brute force on 1000 random instances")


def test_rotated_iou_tracks_monte_carlo_estimates() -> None:
    """50 overlapping pairs against a 1e6-sample volume estimate, then the
    quarter-turn case whose analytic value is 1/sqrt(2)."""
    rng = np.random.default_rng(99)
    worst = 0.0
    for i in range(50):
        a, b = random_overlapping_pair(rng)
        exact = iou_3d(a, b)
        estimate = monte_carlo_iou_3d(a, b, n_samples=1_000_000, seed=i)
        worst = max(worst, abs(exact - estimate))
    assert worst <= 0.01, f"worst |analytic - MC| = {worst:.4f}"

    straight = unit_cube()
    turned = unit_cube(yaw=math.pi / 4.0)
    assert iou_3d(straight, turned) == pytest.approx(0.7071, abs=1e-4)
    assert iou_3d(straight, turned) == pytest.approx(2.0 ** -0.5, abs=1e-6)
    _report("rotated IoU matches Monte Carlo and the quarter-turn constant")


def test_noise_free_scene_is_tracked_perfectly() -> None:
    """10 well-spaced objects over 100 clean frames: no misses, no switches."""
    start = time.perf_counter()
    scene = simulate(SimConfig(n_objects=10, duration=100, lane_gap=4.0, seed=5))
    for frame in scene.frames:
        centers = [(g.box.x, g.box.y) for g in frame.gt]
        for i, (xi, yi) in enumerate(centers):
            for xj, yj in centers[i + 1:]:
                assert math.hypot(xi - xj, yi - yj) >= 2.0

    tracker = Tracker(GeometricScorer(), LifecycleConfig(), SerializerConfig(),
                      default_vocabulary())
    results = tracker.run_sequence(scene_stream(scene))

    gt_seq = [[EvalBox(obj_id=g.gt_id, box=g.box, label=g.label) for g in f.gt]
              for f in scene.frames]
    hyp_seq = [[EvalBox(obj_id=o.track_id, box=o.box, label=o.class_label, score=o.score)
                for o in r.outputs] for r in results]

    clear = clear_mot(gt_seq, hyp_seq, EvalConfig())
    assert clear.mota == 1.0
    assert clear.ids == 0
    curve = amota(gt_seq, hyp_seq, EvalConfig(clamp_negative=True))
    assert curve.amota == 1.0
    elapsed = time.perf_counter() - start
    assert elapsed < 5.0, f"noise-free pipeline took {elapsed:.2f}s"
    _report("noise-free scene gives MOTA=1.0, IDS=0, AMOTA=1.0")


def test_track_death_is_reported_exactly_at_age_limit() -> None:
    """A track last matched at frame t with max_age=3 dies exactly at t+4."""
    tracker = Tracker(GeometricScorer(), LifecycleConfig(max_age=3),
                      SerializerConfig(), default_vocabulary())
    det = Detection(box=unit_cube(score=0.9), label="Car")
    tracker.step(0, [det])
    result = tracker.step(1, [Detection(box=unit_cube(x=0.1, score=0.9), label="Car")])
    assert result.deaths == ()
    track_id = result.outputs[0].track_id

    deaths_by_frame = {}
    for frame in range(2, 7):
        deaths_by_frame[frame] = tracker.step(frame, []).deaths
    assert deaths_by_frame[2] == ()
    assert deaths_by_frame[3] == ()
    assert deaths_by_frame[4] == ()
    assert deaths_by_frame[5] == (track_id,)
    _report("death reported exactly at last_match + max_age + 1")


def test_single_identity_switch_matches_independent_oracle() -> None:
    """Three frames, one object, one switch: MOTA must be exactly 2/3."""
    gt_seq = [[EvalBox(obj_id=1, box=unit_cube(x=float(t)), label="Car")]
              for t in range(3)]
    hyp_ids = [10, 10, 20]
    hyp_seq = [[EvalBox(obj_id=hyp_ids[t], box=unit_cube(x=float(t)), label="Car")]
               for t in range(3)]
    clear = clear_mot(gt_seq, hyp_seq, EvalConfig())
    assert clear.ids == 1
    assert clear.fp == 0
    assert clear.fn == 0
    assert abs(clear.mota - float(Fraction(2, 3))) <= 1e-9

    oracle_gt, oracle_hyp = clear_oracle.identity_switch_case()
    oracle = clear_oracle.evaluate(oracle_gt, oracle_hyp)
    assert oracle["ids"] == 1
    assert abs(clear.mota - oracle["mota"]) <= 1e-9
    assert abs(clear.mota - 0.6667) <= 1e-4
    _report("single switch scores MOTA=2/3 against the independent script")


def test_masked_prompts_never_contain_novel_class_names() -> None:
    """10,000 randomized serializations with masking on leak no novel name."""
    vocab = default_vocabulary()
    cfg = SerializerConfig(history_len=3, mask_novel=True)
    unknown = ("Excavator", "Forklift")
    labels = sorted(vocab.base_classes) + sorted(vocab.novel_classes) + list(unknown)
    banned = sorted(vocab.novel_classes) + list(unknown)
    rng = np.random.default_rng(0)

    for _ in range(10_000):
        n_hist = int(rng.integers(1, 5))
        history = [Box3D(x=float(rng.uniform(-50, 50)), y=float(rng.uniform(-50, 50)),
                         z=float(rng.uniform(0, 4)), l=float(rng.uniform(0.5, 12)),
                         w=float(rng.uniform(0.5, 3)), h=float(rng.uniform(0.5, 4)),
                         yaw=float(rng.uniform(-3.1, 3.1)), score=float(rng.uniform(0, 1)))
                   for _ in range(n_hist)]
        candidate = history[-1]
        track_label = labels[int(rng.integers(0, len(labels)))]
        det_label = labels[int(rng.integers(0, len(labels)))]
        text = serialize_pair(history, track_label, candidate, det_label,
                              cfg, vocab).rendered_text()
        for name in banned:
            assert name not in text
    _report("masking leaks no novel class string over 10k prompts")


def test_mined_pairs_are_identity_consistent_and_iou_exact() -> None:
    """Yes pairs share an identity, No pairs differ inside the radius, and
    every stored IoU target is reproducible from the prompt itself."""
    scene = simulate(SimConfig(
        n_objects=8, duration=30, lane_gap=2.5, seed=3,
        sigma_det=JitterParams(sigma_center=0.2, sigma_size_log=0.03, sigma_yaw=0.05),
        p_dropout=0.1, clutter_rate=1.0))
    cfg = MiningConfig(strategy="hard", hard_radius=8.0, negatives_per_positive=3,
                       history_len=3, seed=11)
    pairs = mine_scene(scene, cfg, SerializerConfig(), default_vocabulary())
    assert len(pairs) > 100

    true_boxes = {(f.index, g.gt_id): g.box for f in scene.frames for g in f.gt}
    n_yes = n_no = 0
    for pair in pairs:
        v = pair.prompt.box_slots()[-1].values
        candidate = Box3D(x=v[0], y=v[1], z=v[2], l=v[3], w=v[4], h=v[5],
                          yaw=v[7], score=v[8])
        anchor = true_boxes[(pair.frame, pair.track_gt_id)]
        if pair.label == "Yes":
            n_yes += 1
            assert pair.track_gt_id == pair.candidate_gt_id
        else:
            n_no += 1
            assert pair.label == "No"
            assert pair.track_gt_id != pair.candidate_gt_id
            assert center_distance_bev(candidate, anchor) <= cfg.hard_radius
        assert abs(pair.iou_target - iou_3d(candidate, anchor)) <= 1e-9
    assert n_yes > 0 and n_no > 0
    _report(f"mining soundness holds over {n_yes} Yes / {n_no} No pairs")


def _samota_for_strategy(train, test, strategy: str) -> float:
    scorer = GeometricScorer(GeoScorerParams(w_iou=0.0, tau_d=2.0))
    cfg = MiningConfig(
        jitter=JitterParams(sigma_center=0.5, sigma_size_log=0.05, sigma_yaw=0.08),
        strategy=strategy, negatives_per_positive=2, hard_radius=2.0,
        history_len=3, seed=0)
    pairs = mine_scene(train, cfg, SerializerConfig(history_len=3),
                       default_vocabulary())
    sel = select_threshold(pairs, scorer)
    lifecycle = LifecycleConfig(
        accept_max_cost=min(1.0, max(0.0, 1.0 - sel.threshold)), confirm_hits=2)
    tracker = Tracker(scorer, lifecycle, SerializerConfig(history_len=3),
                      default_vocabulary())
    results = tracker.run_sequence(scene_stream(test))

    gt_seq = [[EvalBox(obj_id=g.gt_id, box=g.box, label=g.label) for g in f.gt]
              for f in test.frames]
    by_frame = {r.frame_index: r for r in results}
    hyp_seq = [[EvalBox(obj_id=o.track_id, box=o.box, label=o.class_label, score=o.score)
                for o in by_frame[f.index].outputs] for f in test.frames]
    return amota(gt_seq, hyp_seq, EvalConfig()).samota


def test_hard_negative_mining_beats_random_negatives_on_held_out_scene() -> None:
    """Threshold selected from hard negatives must outscore the one selected
    from random negatives on a held-out noisy scene (direction only)."""
    dense = dict(
        n_objects=60, duration=50, lane_gap=1.2,
        sigma_det=JitterParams(sigma_center=0.05, sigma_size_log=0.02, sigma_yaw=0.03),
        p_dropout=0.05, clutter_rate=20.0, p_labelflip=0.1)
    train = simulate(SimConfig(seed=33, **dense))
    test = simulate(SimConfig(seed=34, **dense))

    hard = _samota_for_strategy(train, test, "hard")
    random_neg = _samota_for_strategy(train, test, "random")
    assert hard > random_neg, f"hard {hard:.4f} <= random {random_neg:.4f}"
    _report(f"hard negatives win sAMOTA {hard:.4f} > {random_neg:.4f}")


def test_zero_length_history_window_is_rejected() -> None:
    with pytest.raises(ValueError, match="history_len"):
        SerializerConfig(history_len=0)
    with pytest.raises(ValueError, match="history_len"):
        MiningConfig(history_len=0)
    _report("zero-length history window rejected at config time")
