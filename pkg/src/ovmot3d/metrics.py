"""CLEAR tracking metrics and recall-swept AMOTA evaluation.

Matching follows the CLEAR protocol: correspondences persist from frame to
frame while their overlap stays above the IoU threshold, and the remainder is
matched by minimum-cost assignment on 1 - IoU. The recall sweep re-runs the
accumulation at every observed confidence cutoff; hypothesis columns are
pre-sorted by score so each cutoff is a prefix of the same per-frame IoU
matrix and nothing geometric is recomputed.

This module deliberately calls scipy's assignment solver directly instead of
reusing :mod:`ovmot3d.assignment`, so the evaluator does not share code with
the system under test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import EmptyGroundTruth
from .geometry import Box3D, center_distance_bev, iou_3d_matrix
from .serializer import ClassVocabulary

MOTP_IOU = "iou"
MOTP_DISTANCE = "distance"

MT_COVERAGE = 0.8
ML_COVERAGE = 0.2

# Stand-in cost for below-threshold pairs inside the assignment step; large
# enough that real pairs always win, small enough to stay finite for scipy.
_BIG = 1.0e9


@dataclass(frozen=True, slots=True)
class EvalBox:
    """One evaluated box: identity, geometry, class and (for hyps) confidence."""

    obj_id: int
    box: Box3D
    label: str
    score: float = 1.0


@dataclass(frozen=True, slots=True)
class EvalConfig:
    iou_threshold: float = 0.25
    recall_points: int = 40
    motp_mode: str = MOTP_IOU
    clamp_negative: bool = True

    def __post_init__(self) -> None:
        if not (0.0 < self.iou_threshold < 1.0):
            raise ValueError(f"iou_threshold must be in (0, 1), got {self.iou_threshold}")
        if self.recall_points < 2:
            raise ValueError(f"recall_points must be >= 2, got {self.recall_points}")
        if self.motp_mode not in (MOTP_IOU, MOTP_DISTANCE):
            raise ValueError(f"motp_mode must be {MOTP_IOU!r} or {MOTP_DISTANCE!r}")


@dataclass(frozen=True, slots=True)
class ClearResult:
    mota: float
    motp: float | None
    fp: int
    fn: int
    ids: int
    mt: float
    ml: float
    gt_count: int
    match_count: int
    gt_track_count: int


@dataclass(frozen=True, slots=True)
class RecallPoint:
    """One recall target with its chosen operating point, if achievable."""

    target: float
    achieved: float | None
    cutoff: float | None
    motar: float
    motp: float | None
    fp: int
    fn: int
    ids: int


@dataclass(frozen=True, slots=True)
class AmotaResult:
    amota: float
    samota: float
    amotp: float | None
    curve: tuple[RecallPoint, ...]


class _FrameData:
    """Per-frame matching inputs with hypothesis columns sorted by score."""

    __slots__ = ("gt_ids", "n_gt", "hyp_ids", "hyp_col", "neg_scores", "n_hyp",
                 "iou_rows", "dist_rows", "feasible")

    def __init__(self, gt: list[EvalBox], hyp: list[EvalBox], threshold: float,
                 need_dist: bool) -> None:
        order = sorted(range(len(hyp)), key=lambda j: (-hyp[j].score, hyp[j].obj_id))
        hyp_sorted = [hyp[j] for j in order]
        self.gt_ids = [g.obj_id for g in gt]
        self.n_gt = len(gt)
        self.hyp_ids = [h.obj_id for h in hyp_sorted]
        self.hyp_col = {h: j for j, h in enumerate(self.hyp_ids)}
        self.neg_scores = np.array([-h.score for h in hyp_sorted], dtype=np.float64)
        self.n_hyp = len(hyp_sorted)
        mat = iou_3d_matrix([g.box for g in gt], [h.box for h in hyp_sorted])
        self.iou_rows: list[list[float]] = mat.tolist()
        self.dist_rows: list[list[float]] | None = None
        if need_dist:
            self.dist_rows = [
                [center_distance_bev(g.box, h.box) for h in hyp_sorted] for g in gt
            ]
        # Columns each gt can legally match, precomputed once per frame.
        self.feasible: list[list[int]] = [
            [j for j in range(self.n_hyp) if row[j] >= threshold] for row in self.iou_rows
        ]

    def prefix_len(self, cutoff: float) -> int:
        """Number of hypotheses with score >= cutoff."""
        return int(np.searchsorted(self.neg_scores, -cutoff, side="right"))


class _PassTotals:
    __slots__ = ("matched", "fp", "fn", "ids", "motp_sum", "coverage")

    def __init__(self) -> None:
        self.matched = 0
        self.fp = 0
        self.fn = 0
        self.ids = 0
        self.motp_sum = 0.0
        self.coverage: dict[int, int] = {}


def _match_one_frame(fd: _FrameData, k: int, last_match: dict[int, int],
                     threshold: float) -> list[tuple[int, int]]:
    """Match one frame against hypothesis columns [0, k); returns index pairs."""
    matches: list[tuple[int, int]] = []
    used_g: set[int] = set()
    used_h: set[int] = set()

    # Continuity: persisting pairs survive while still above threshold. Two gt
    # ids can point at the same hypothesis id after a gap, so claims on one
    # column are resolved by overlap (then lower gt index).
    claims: dict[int, tuple[float, int]] = {}
    for gi in range(fd.n_gt):
        h = last_match.get(fd.gt_ids[gi])
        if h is None:
            continue
        j = fd.hyp_col.get(h)
        if j is None or j >= k:
            continue
        ov = fd.iou_rows[gi][j]
        if ov < threshold:
            continue
        held = claims.get(j)
        if held is None or (ov, -gi) > (held[0], -held[1]):
            claims[j] = (ov, gi)
    for j, (_, gi) in claims.items():
        matches.append((gi, j))
        used_g.add(gi)
        used_h.add(j)

    # Remainder: only gts with a feasible free column take part.
    rem: list[tuple[int, list[int]]] = []
    for gi in range(fd.n_gt):
        if gi in used_g:
            continue
        cols = [j for j in fd.feasible[gi] if j < k and j not in used_h]
        if cols:
            rem.append((gi, cols))
    if not rem:
        return matches

    # When every remaining gt has one option and the options are distinct the
    # matching is forced; skip the solver.
    if all(len(cols) == 1 for _, cols in rem):
        singles = [cols[0] for _, cols in rem]
        if len(set(singles)) == len(singles):
            for (gi, cols) in rem:
                matches.append((gi, cols[0]))
            return matches

    rows = [gi for gi, _ in rem]
    col_set = sorted({j for _, cols in rem for j in cols})
    cost = np.full((len(rows), len(col_set)), _BIG, dtype=np.float64)
    col_pos = {j: a for a, j in enumerate(col_set)}
    for a, (gi, cols) in enumerate(rem):
        row = fd.iou_rows[gi]
        for j in cols:
            cost[a, col_pos[j]] = 1.0 - row[j]
    ri, ci = linear_sum_assignment(cost)
    for a, b in zip(ri, ci):
        if cost[a, b] < _BIG:
            matches.append((rows[a], col_set[b]))
    return matches


def _clear_pass(frames: list[_FrameData], cutoff: float | None, cfg: EvalConfig) -> _PassTotals:
    totals = _PassTotals()
    last_match: dict[int, int] = {}
    use_dist = cfg.motp_mode == MOTP_DISTANCE
    for fd in frames:
        k = fd.n_hyp if cutoff is None else fd.prefix_len(cutoff)
        pairs = _match_one_frame(fd, k, last_match, cfg.iou_threshold)
        for gi, j in pairs:
            g = fd.gt_ids[gi]
            h = fd.hyp_ids[j]
            prev = last_match.get(g)
            if prev is not None and prev != h:
                totals.ids += 1
            last_match[g] = h
            totals.coverage[g] = totals.coverage.get(g, 0) + 1
            if use_dist:
                totals.motp_sum += fd.dist_rows[gi][j]
            else:
                totals.motp_sum += fd.iou_rows[gi][j]
        n = len(pairs)
        totals.matched += n
        totals.fp += k - n
        totals.fn += fd.n_gt - n
    return totals


def _prepare(gt_seq: list[list[EvalBox]], hyp_seq: list[list[EvalBox]],
             cfg: EvalConfig) -> tuple[list[_FrameData], int]:
    if len(gt_seq) != len(hyp_seq):
        raise ValueError(
            f"gt and hypothesis sequences must be frame-aligned: {len(gt_seq)} vs {len(hyp_seq)} frames")
    need_dist = cfg.motp_mode == MOTP_DISTANCE
    frames = [_FrameData(g, h, cfg.iou_threshold, need_dist) for g, h in zip(gt_seq, hyp_seq)]
    gt_count = sum(f.n_gt for f in frames)
    if gt_count == 0:
        raise EmptyGroundTruth("no ground-truth boxes; MOTA is undefined")
    return frames, gt_count


def match_frame(gt_boxes: list[EvalBox], hyp_boxes: list[EvalBox],
                prev_map: dict[int, int], cfg: EvalConfig) -> dict[int, int]:
    """Single-frame correspondence: returns {gt_id: hyp_id}; prev_map is not
    mutated."""
    fd = _FrameData(gt_boxes, hyp_boxes, cfg.iou_threshold, need_dist=False)
    pairs = _match_one_frame(fd, fd.n_hyp, dict(prev_map), cfg.iou_threshold)
    return {fd.gt_ids[gi]: fd.hyp_ids[j] for gi, j in pairs}


def clear_mot(gt_seq: list[list[EvalBox]], hyp_seq: list[list[EvalBox]],
              cfg: EvalConfig) -> ClearResult:
    """Full-sequence CLEAR accumulation at a single operating point."""
    frames, gt_count = _prepare(gt_seq, hyp_seq, cfg)
    totals = _clear_pass(frames, None, cfg)

    lifetime: dict[int, int] = {}
    for fd in frames:
        for g in fd.gt_ids:
            lifetime[g] = lifetime.get(g, 0) + 1
    n_tracks = len(lifetime)
    mt = sum(1 for g, life in lifetime.items()
             if totals.coverage.get(g, 0) / life >= MT_COVERAGE) / n_tracks
    ml = sum(1 for g, life in lifetime.items()
             if totals.coverage.get(g, 0) / life <= ML_COVERAGE) / n_tracks

    mota = 1.0 - (totals.fp + totals.fn + totals.ids) / gt_count
    motp = totals.motp_sum / totals.matched if totals.matched else None
    return ClearResult(
        mota=mota, motp=motp, fp=totals.fp, fn=totals.fn, ids=totals.ids,
        mt=mt, ml=ml, gt_count=gt_count, match_count=totals.matched,
        gt_track_count=n_tracks,
    )


def _motar(fp: int, ids: int, matched: int, clamp: bool) -> float:
    # Scaled accuracy at an achieved operating point. With achieved recall
    # r = matched / P the scaled form 1 - (FP+FN+IDS-(1-r)P)/(rP) reduces to
    # 1 - (FP+IDS)/matched because FN = P - matched cancels exactly.
    if matched == 0:
        return 0.0
    value = 1.0 - (fp + ids) / matched
    if clamp and value < 0.0:
        return 0.0
    return value


def amota(gt_seq: list[list[EvalBox]], hyp_seq: list[list[EvalBox]],
          cfg: EvalConfig) -> AmotaResult:
    """Recall-swept evaluation over observed confidence cutoffs.

    For each of the ``recall_points - 1`` targets the operating point is the
    cutoff whose achieved recall is smallest among those >= target (largest
    cutoff on ties). Targets no cutoff reaches contribute zero in both clamp
    modes. sAMOTA is the scaled accuracy at the maximum-recall operating
    point; AMOTP averages matched overlap (or distance) over achieved targets.
    """
    frames, gt_count = _prepare(gt_seq, hyp_seq, cfg)

    cutoffs = sorted({-s for fd in frames for s in fd.neg_scores.tolist()}, reverse=True)
    stats: list[tuple[float, float, _PassTotals]] = []
    for c in cutoffs:
        totals = _clear_pass(frames, c, cfg)
        stats.append((c, totals.matched / gt_count, totals))

    n = cfg.recall_points
    targets = [k / (n - 1) for k in range(1, n)]
    curve: list[RecallPoint] = []
    achieved_motps: list[float] = []
    for target in targets:
        eligible = [(recall, -c, totals, c) for c, recall, totals in stats if recall >= target]
        if not eligible:
            curve.append(RecallPoint(target=target, achieved=None, cutoff=None,
                                     motar=0.0, motp=None, fp=0, fn=0, ids=0))
            continue
        recall, _, totals, c = min(eligible)
        motar = _motar(totals.fp, totals.ids, totals.matched, cfg.clamp_negative)
        motp = totals.motp_sum / totals.matched if totals.matched else None
        if motp is not None:
            achieved_motps.append(motp)
        curve.append(RecallPoint(target=target, achieved=recall, cutoff=c, motar=motar,
                                 motp=motp, fp=totals.fp, fn=totals.fn, ids=totals.ids))

    amota_value = math.fsum(p.motar for p in curve) / len(curve)
    if stats:
        # Maximum achievable recall; the largest cutoff wins ties.
        best = max(stats, key=lambda item: (item[1], item[0]))
        samota = _motar(best[2].fp, best[2].ids, best[2].matched, cfg.clamp_negative)
    else:
        samota = 0.0
    amotp = math.fsum(achieved_motps) / len(achieved_motps) if achieved_motps else None
    return AmotaResult(amota=amota_value, samota=samota, amotp=amotp, curve=tuple(curve))


@dataclass(frozen=True, slots=True)
class SplitMetrics:
    """Aggregated metrics for one class split; absent when the split has no gt."""

    present: bool
    gt_count: int
    samota: float | None = None
    amota: float | None = None
    amotp: float | None = None
    mota: float | None = None
    motp: float | None = None
    mt: float | None = None
    ml: float | None = None
    fp: int = 0
    fn: int = 0
    ids: int = 0


def _weighted_mean(pairs: list[tuple[float | None, int]]) -> float | None:
    total = sum(w for v, w in pairs if v is not None)
    if total == 0:
        return None
    return math.fsum(v * w for v, w in pairs if v is not None) / total


def split_eval(gt_seq: list[list[EvalBox]], hyp_seq: list[list[EvalBox]],
               vocab: ClassVocabulary, cfg: EvalConfig) -> dict[str, SplitMetrics]:
    """Per-class evaluation aggregated into Base, Novel and All splits.

    A hypothesis only scores against ground truth of its own class. Classes
    absent from the vocabulary count as Novel. Within a split, per-class
    metrics are averaged weighted by ground-truth box count; hypothesis
    classes with no ground truth at all are skipped.
    """
    labels = sorted({b.label for frame in gt_seq for b in frame})
    per_class: dict[str, tuple[ClearResult, AmotaResult]] = {}
    for label in labels:
        gt_f = [[b for b in frame if b.label == label] for frame in gt_seq]
        hyp_f = [[b for b in frame if b.label == label] for frame in hyp_seq]
        per_class[label] = (clear_mot(gt_f, hyp_f, cfg), amota(gt_f, hyp_f, cfg))

    def aggregate(split_labels: list[str]) -> SplitMetrics:
        if not split_labels:
            return SplitMetrics(present=False, gt_count=0)
        rows = [(per_class[c][0], per_class[c][1]) for c in split_labels]
        weights = [cr.gt_count for cr, _ in rows]
        return SplitMetrics(
            present=True,
            gt_count=sum(weights),
            samota=_weighted_mean([(ar.samota, w) for (_, ar), w in zip(rows, weights)]),
            amota=_weighted_mean([(ar.amota, w) for (_, ar), w in zip(rows, weights)]),
            amotp=_weighted_mean([(ar.amotp, w) for (_, ar), w in zip(rows, weights)]),
            mota=_weighted_mean([(cr.mota, w) for (cr, _), w in zip(rows, weights)]),
            motp=_weighted_mean([(cr.motp, w) for (cr, _), w in zip(rows, weights)]),
            mt=_weighted_mean([(cr.mt, w) for (cr, _), w in zip(rows, weights)]),
            ml=_weighted_mean([(cr.ml, w) for (cr, _), w in zip(rows, weights)]),
            fp=sum(cr.fp for cr, _ in rows),
            fn=sum(cr.fn for cr, _ in rows),
            ids=sum(cr.ids for cr, _ in rows),
        )

    base = [c for c in labels if c in vocab.base_classes]
    novel = [c for c in labels if c not in vocab.base_classes]
    return {
        "Base": aggregate(base),
        "Novel": aggregate(novel),
        "All": aggregate(labels),
    }


_REPORT_COLUMNS = ("sAMOTA", "AMOTA", "AMOTP", "MOTA", "MOTP", "MT")


def report_to_json(splits: dict[str, SplitMetrics], cfg: EvalConfig) -> dict:
    return {
        "config": {
            "iou_threshold": cfg.iou_threshold,
            "recall_points": cfg.recall_points,
            "motp_mode": cfg.motp_mode,
            "clamp_negative": cfg.clamp_negative,
        },
        "splits": {
            name: {
                "present": m.present,
                "gt_count": m.gt_count,
                "samota": m.samota,
                "amota": m.amota,
                "amotp": m.amotp,
                "mota": m.mota,
                "motp": m.motp,
                "mt": m.mt,
                "ml": m.ml,
                "fp": m.fp,
                "fn": m.fn,
                "ids": m.ids,
            }
            for name, m in splits.items()
        },
    }


def render_report(splits: dict[str, SplitMetrics], cfg: EvalConfig) -> str:
    """Aligned text table; ratio metrics print as percentages, distance-mode
    AMOTP/MOTP in meters."""
    def fmt(value: float | None, as_percent: bool) -> str:
        if value is None:
            return "-"
        return f"{value * 100.0:.2f}" if as_percent else f"{value:.3f}"

    overlap_mode = cfg.motp_mode == MOTP_IOU
    header = ["Split", *_REPORT_COLUMNS]
    canonical = [n for n in ("Base", "Novel", "All") if n in splits]
    extras = [n for n in splits if n not in canonical]
    body: list[list[str]] = []
    for name in canonical + extras:
        m = splits[name]
        if not m.present:
            body.append([name, *("absent",) * len(_REPORT_COLUMNS)])
            continue
        body.append([
            name,
            fmt(m.samota, True),
            fmt(m.amota, True),
            fmt(m.amotp, overlap_mode),
            fmt(m.mota, True),
            fmt(m.motp, overlap_mode),
            fmt(m.mt, True),
        ])
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    lines = ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row))
             for row in [header, *body]]
    return "\n".join(lines)
