"""Candidate-selection strategies: entropy-based uncertainty sampling plus
the two comparison baselines (uniform random, confident-zero-shot)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import DataError, ScoredPoint


@dataclass
class SelectionRequest:
    scored_pool: list[ScoredPoint]
    excluded: set[str]
    k: int
    rng: np.random.Generator | None = None


def binary_entropy(p: float) -> float:
    """H(p) in nats, with 0*ln(0) = 0. The unit only shifts scale, never the
    ranking, so nats vs bits is irrelevant to selection."""
    if not (0.0 <= p <= 1.0):
        raise DataError(f"probability out of [0,1]: {p}")
    h = 0.0
    if p > 0.0:
        h -= p * math.log(p)
    if p < 1.0:
        h -= (1.0 - p) * math.log(1.0 - p)
    return h


def _candidates(req: SelectionRequest) -> list[ScoredPoint]:
    return [s for s in req.scored_pool if s.point_id not in req.excluded]


def select_uncertain(req: SelectionRequest) -> list[str]:
    """The k non-excluded ids with the highest prediction entropy.

    For binary probabilities, descending H(p) is exactly ascending |p - 0.5|
    (entropy is symmetric around 0.5 and strictly decreasing away from it),
    so the sort key used here is |p - 0.5| with ties broken by ascending id.
    """
    remaining = _candidates(req)
    if len(remaining) < req.k:
        raise DataError(
            f"cannot select {req.k} points: only {len(remaining)} remaining"
        )
    ranked = sorted(remaining, key=lambda s: (abs(s.p_positive - 0.5), s.point_id))
    return [s.point_id for s in ranked[: req.k]]


def select_random(req: SelectionRequest) -> list[str]:
    """Uniform sample without replacement from non-excluded ids."""
    remaining = sorted(s.point_id for s in _candidates(req))
    if len(remaining) < req.k:
        raise DataError(
            f"cannot select {req.k} points: only {len(remaining)} remaining"
        )
    if req.rng is None:
        raise DataError("select_random requires a random stream")
    picked = req.rng.choice(len(remaining), size=req.k, replace=False)
    return [remaining[i] for i in picked]


def _top_decile(scored: list[ScoredPoint], excluded: set[str], reverse: bool):
    remaining = [s for s in scored if s.point_id not in excluded]
    decile = max(1, math.ceil(len(remaining) / 10))
    if reverse:
        ranked = sorted(remaining, key=lambda s: (-s.p_positive, s.point_id))
    else:
        ranked = sorted(remaining, key=lambda s: (s.p_positive, s.point_id))
    return [s.point_id for s in ranked[:decile]]


def select_confident_positive(
    scored_zero_shot: list[ScoredPoint],
    excluded: set[str],
    m: int,
    rng: np.random.Generator,
) -> list[str]:
    """Uniform sample of m ids from the top decile of zero-shot p_positive.

    "Highly confident" is fixed as the top 10% by score (ceil of remaining
    count / 10): scale-free and reproducible.
    """
    if m == 0:
        return []
    top = _top_decile(scored_zero_shot, excluded, reverse=True)
    if len(top) < m:
        raise DataError(f"top-decile set has {len(top)} points, need {m}")
    picked = rng.choice(len(top), size=m, replace=False)
    return [top[i] for i in picked]


def select_confident_negative(
    scored_zero_shot: list[ScoredPoint],
    excluded: set[str],
    m: int,
    rng: np.random.Generator,
) -> list[str]:
    """Mirror of select_confident_positive over the bottom decile.

    The confident-zero-shot baseline pairs each confident-positive batch with
    an equal-size confident-negative batch so binary training stays
    well-posed.
    """
    if m == 0:
        return []
    bottom = _top_decile(scored_zero_shot, excluded, reverse=False)
    if len(bottom) < m:
        raise DataError(f"bottom-decile set has {len(bottom)} points, need {m}")
    picked = rng.choice(len(bottom), size=m, replace=False)
    return [bottom[i] for i in picked]
