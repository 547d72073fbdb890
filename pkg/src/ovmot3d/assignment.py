"""Gating, cost-matrix construction and one-to-one bipartite assignment.

Costs are ``1 - p`` for scored pairs and FORBIDDEN for pairs excluded by
gating. The solver maximizes the number of matched non-FORBIDDEN pairs first
and minimizes total cost second; among equal-cost optima it returns the
lexicographically smallest match set so results are reproducible. A small
exhaustive solver with the same tie policy serves as a test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import MissingScore, SizeExceeded
from .geometry import Box3D, center_distance_bev
from .scoring import predict_next

FORBIDDEN = math.inf

BRUTE_MAX_SIDE = 8

# Conservative slack for cost-based pruning in the exhaustive solver: partial
# sums are plain float adds, exact totals are fsum, so allow for rounding.
_PRUNE_SLACK = 1e-9


@dataclass(frozen=True, slots=True)
class CandidateSet:
    """Pairs that survived gating, and why the others were dropped."""

    pairs: tuple[tuple[int, int], ...]
    excluded: dict[tuple[int, int], str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("duplicate candidate pair")


@dataclass(frozen=True)
class CostMatrix:
    """Dense (tracks x detections) cost matrix; FORBIDDEN marks gated-out pairs."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        e = self.entries
        if e.ndim != 2:
            raise ValueError(f"cost matrix must be 2-D, got shape {e.shape}")
        finite = e[~np.isinf(e)]
        if finite.size and (np.isnan(finite).any() or (finite < 0.0).any() or (finite > 1.0).any()):
            raise ValueError("finite costs must lie in [0, 1]")

    @property
    def n_tracks(self) -> int:
        return self.entries.shape[0]

    @property
    def n_dets(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True, slots=True)
class Assignment:
    """One-to-one matching outcome: matched pairs plus both leftover sides."""

    matches: frozenset[tuple[int, int]]
    unmatched_tracks: frozenset[int]
    unmatched_dets: frozenset[int]

    def sorted_matches(self) -> list[tuple[int, int]]:
        return sorted(self.matches)


def gate(track_histories: list[list[Box3D]], detections: list[Box3D],
         max_dist: float) -> CandidateSet:
    """Keep (track, detection) pairs whose predicted-position BEV distance is
    within ``max_dist``; every exclusion is recorded with its distance."""
    if max_dist <= 0.0:
        raise ValueError(f"max_dist must be positive, got {max_dist}")
    pairs: list[tuple[int, int]] = []
    excluded: dict[tuple[int, int], str] = {}
    preds = [predict_next(h, 1) for h in track_histories]
    for i, pred in enumerate(preds):
        for j, det in enumerate(detections):
            d = center_distance_bev(pred, det)
            if d <= max_dist:
                pairs.append((i, j))
            else:
                excluded[(i, j)] = f"distance {d:.3f} m exceeds gate {max_dist:.3f} m"
    return CandidateSet(pairs=tuple(pairs), excluded=excluded)


def build_cost(scores: dict[tuple[int, int], float], n_tracks: int, n_dets: int,
               candidates: CandidateSet) -> CostMatrix:
    """Fill candidate entries with ``1 - p``; everything else is FORBIDDEN."""
    entries = np.full((n_tracks, n_dets), FORBIDDEN, dtype=np.float64)
    for pair in candidates.pairs:
        i, j = pair
        if not (0 <= i < n_tracks and 0 <= j < n_dets):
            raise ValueError(f"candidate pair {pair} out of range for {n_tracks}x{n_dets}")
        if pair not in scores:
            raise MissingScore(f"no score for candidate pair {pair}")
        entries[i, j] = 1.0 - scores[pair]
    return CostMatrix(entries=entries)


def total_cost(cost: CostMatrix, assignment: Assignment) -> float:
    """Exact (fsum) total cost of the matched pairs."""
    return math.fsum(cost.entries[i, j] for i, j in assignment.matches)


def _subsolve(entries: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> list[tuple[int, int]]:
    # Max-cardinality-then-min-cost on the given submatrix. FORBIDDEN entries
    # are replaced by a finite cost exceeding any achievable true-cost sum, so
    # the solver stays feasible and prefers real pairs; pairs landing on a
    # replaced entry are discarded afterwards.
    if rows.size == 0 or cols.size == 0:
        return []
    sub = entries[np.ix_(rows, cols)]
    blocked = np.isinf(sub)
    if blocked.all():
        return []
    big = float(min(rows.size, cols.size) + 2)
    ri, ci = linear_sum_assignment(np.where(blocked, big, sub))
    return [(int(rows[a]), int(cols[b])) for a, b in zip(ri, ci) if not blocked[a, b]]


def solve(cost: CostMatrix) -> Assignment:
    """Optimal one-to-one matching over non-FORBIDDEN entries.

    Maximum matched count first, minimum total cost second, lexicographically
    smallest match set third. Rows and columns with no usable entry are left
    unmatched.
    """
    entries = cost.entries
    m, n = entries.shape
    base = _subsolve(entries, np.arange(m), np.arange(n))
    best_count = len(base)
    if best_count == 0:
        return _finish([], m, n)
    best_total = math.fsum(entries[i, j] for i, j in base)

    # Greedy lexicographic refinement: scan allowed pairs in (i, j) order and
    # keep a pair iff some optimal matching extends the kept prefix with it.
    # The current witness matching answers most queries without a solve.
    witness = set(base)
    prefix: list[tuple[int, int]] = []
    used_rows: set[int] = set()
    used_cols: set[int] = set()
    allowed = sorted(zip(*np.nonzero(~np.isinf(entries))))
    for i, j in allowed:
        if len(prefix) == best_count:
            break
        i = int(i)
        j = int(j)
        if i in used_rows or j in used_cols:
            continue
        if (i, j) in witness:
            prefix.append((i, j))
            used_rows.add(i)
            used_cols.add(j)
            continue
        sub_rows = np.array([r for r in range(m) if r not in used_rows and r != i], dtype=np.intp)
        sub_cols = np.array([c for c in range(n) if c not in used_cols and c != j], dtype=np.intp)
        completion = _subsolve(entries, sub_rows, sub_cols)
        candidate = prefix + [(i, j)] + completion
        if len(candidate) == best_count and \
                math.fsum(entries[a, b] for a, b in candidate) == best_total:
            prefix.append((i, j))
            used_rows.add(i)
            used_cols.add(j)
            witness = set(candidate)
    return _finish(prefix, m, n)


def _finish(matches: list[tuple[int, int]], m: int, n: int) -> Assignment:
    matched_rows = {i for i, _ in matches}
    matched_cols = {j for _, j in matches}
    return Assignment(
        matches=frozenset(matches),
        unmatched_tracks=frozenset(range(m)) - matched_rows,
        unmatched_dets=frozenset(range(n)) - matched_cols,
    )


def solve_brute(cost: CostMatrix) -> Assignment:
    """Exhaustive oracle with the same count/cost/lex tie policy as solve.

    Independent of the scipy path by construction; refuses matrices larger
    than BRUTE_MAX_SIDE per side.
    """
    entries = cost.entries
    m, n = entries.shape
    if m > BRUTE_MAX_SIDE or n > BRUTE_MAX_SIDE:
        raise SizeExceeded(f"brute-force solver capped at {BRUTE_MAX_SIDE}x{BRUTE_MAX_SIDE}, got {m}x{n}")

    allowed_cols = [
        sorted((entries[i, j], j) for j in range(n) if not math.isinf(entries[i, j]))
        for i in range(m)
    ]

    best: dict[str, object] = {"count": 0, "total": 0.0, "pairs": []}

    def consider(pairs: list[tuple[int, int]]) -> None:
        count = len(pairs)
        total = math.fsum(entries[i, j] for i, j in pairs)
        ordered = sorted(pairs)
        key = (-count, total, ordered)
        incumbent = (-best["count"], best["total"], best["pairs"])
        if key < incumbent:
            best["count"] = count
            best["total"] = total
            best["pairs"] = ordered

    free_cols = [True] * n

    def dfs(row: int, count: int, running: float, pairs: list[tuple[int, int]]) -> None:
        if row == m:
            consider(pairs)
            return
        remaining = m - row
        n_free = sum(free_cols)
        bound = count + min(remaining, n_free)
        if bound < best["count"]:
            return
        if bound == best["count"] and running > best["total"] + _PRUNE_SLACK:
            return
        for c, j in allowed_cols[row]:
            if free_cols[j]:
                free_cols[j] = False
                pairs.append((row, j))
                dfs(row + 1, count + 1, running + c, pairs)
                pairs.pop()
                free_cols[j] = True
        dfs(row + 1, count, running, pairs)

    dfs(0, 0, 0.0, [])
    return _finish(list(best["pairs"]), m, n)


def threshold_filter(a: Assignment, cost: CostMatrix, max_cost: float) -> Assignment:
    """Demote matches costing more than ``max_cost`` to unmatched on both sides."""
    if not (0.0 <= max_cost <= 1.0):
        raise ValueError(f"max_cost must be in [0, 1], got {max_cost}")
    kept = [pair for pair in a.matches if cost.entries[pair] <= max_cost]
    dropped = a.matches - set(kept)
    return Assignment(
        matches=frozenset(kept),
        unmatched_tracks=a.unmatched_tracks | frozenset(i for i, _ in dropped),
        unmatched_dets=a.unmatched_dets | frozenset(j for _, j in dropped),
    )
