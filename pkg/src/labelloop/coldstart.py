"""Balanced cold-start seeding from a zero-shot scorer's most confident
predictions, followed by oracle annotation of the seed batch (iteration 0)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import Annotation, DataError, Pool, ScoredPoint
from .models import Scorer
from .oracles import Oracle, OracleRequest


@dataclass(frozen=True)
class ColdStartPlan:
    positive_candidates: list[str]  # top k/2 by p_positive
    negative_candidates: list[str]  # top k/2 by (1 - p_positive)
    scores_used: list[ScoredPoint]


def plan_coldstart(
    pool: Pool,
    scorer: Scorer,
    k: int,
    rng: Optional[np.random.Generator] = None,
    scores: Optional[list[ScoredPoint]] = None,
) -> ColdStartPlan:
    """Pick the k/2 highest-score and k/2 lowest-score points.

    Ties break by ascending point id, and the negative side is drawn from the
    points left after the positive side, so the lists stay disjoint even when
    every score is identical. `rng` is accepted for interface symmetry with
    the selection strategies; the plan itself is fully deterministic.
    """
    if k < 2 or k % 2 != 0:
        raise DataError(f"k must be an even integer >= 2, got {k}")
    if len(pool) < k:
        raise DataError(f"pool has {len(pool)} points but cold-start needs >= {k}")
    if scores is None:
        scores = [ScoredPoint(p.id, scorer.score(p)) for p in pool]
    half = k // 2
    by_p_desc = sorted(scores, key=lambda s: (-s.p_positive, s.point_id))
    positives = [s.point_id for s in by_p_desc[:half]]
    taken = set(positives)
    by_p_asc = sorted(
        (s for s in scores if s.point_id not in taken),
        key=lambda s: (s.p_positive, s.point_id),
    )
    negatives = [s.point_id for s in by_p_asc[:half]]
    return ColdStartPlan(positives, negatives, list(scores))


def coldstart_requests(plan: ColdStartPlan, pool: Pool) -> list[OracleRequest]:
    """Oracle requests for the planned candidates, positives first."""
    return [
        OracleRequest(
            request_id=f"coldstart-0-{pid}",
            point=pool.get(pid),
            purpose="coldstart",
            iteration=0,
        )
        for pid in plan.positive_candidates + plan.negative_candidates
    ]


def execute_coldstart(
    plan: ColdStartPlan, oracle: Oracle, pool: Pool
) -> list[Annotation]:
    """Collect iteration-0 annotations for the plan.

    The oracle's labels are recorded as given, even when they contradict the
    zero-shot guess. Any oracle failure propagates before anything is
    committed, so the whole cold-start is retriable.
    """
    from .core import now

    annotations = []
    for req in coldstart_requests(plan, pool):
        answer = oracle.annotate(req)
        annotations.append(
            Annotation(
                point_id=req.point.id,
                label=answer.label,
                oracle_id=answer.oracle_id,
                iteration=0,
                created_at=now(),
            )
        )
    return annotations
