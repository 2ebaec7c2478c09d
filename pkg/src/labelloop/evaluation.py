"""Precision estimation for the final model: classify the pool, sample the
inferred positives, and audit the sample against an oracle.

Evaluation answers are logged apart from training annotations and are never
fed back into training.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from .core import (
    Annotation,
    DataError,
    LabelLoopError,
    Pool,
    STREAM_EVAL,
    derive_rng,
    now,
)
from .models import ClassifierParams, predict_proba, predict_proba_matrix
from .oracles import AnnotationsPending, Oracle, OracleRequest, annotate_batch


class NoPositivesInferred(LabelLoopError):
    """The model inferred no positives: precision is undefined, not zero."""


@dataclass(frozen=True)
class EvaluationReport:
    n_sampled: int
    n_true_positive_in_sample: int
    estimated_precision: float
    inferred_positive_count: int
    decision_threshold: float = 0.5
    seed: int = 0
    oracle_id: str = ""

    def to_dict(self) -> dict:
        return {
            "n_sampled": self.n_sampled,
            "n_true_positive_in_sample": self.n_true_positive_in_sample,
            "estimated_precision": self.estimated_precision,
            "inferred_positive_count": self.inferred_positive_count,
            "decision_threshold": self.decision_threshold,
            "seed": self.seed,
            "oracle_id": self.oracle_id,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvaluationReport":
        return cls(
            n_sampled=int(d["n_sampled"]),
            n_true_positive_in_sample=int(d["n_true_positive_in_sample"]),
            estimated_precision=float(d["estimated_precision"]),
            inferred_positive_count=int(d["inferred_positive_count"]),
            decision_threshold=float(d.get("decision_threshold", 0.5)),
            seed=int(d.get("seed", 0)),
            oracle_id=d.get("oracle_id", ""),
        )


def infer_positives(
    params: ClassifierParams,
    pool: Pool,
    threshold: float = 0.5,
    X: Optional[sp.csr_matrix] = None,
) -> list[str]:
    """Ids with predicted probability >= threshold, in pool order."""
    if not (0.0 < threshold < 1.0):
        raise DataError(f"decision threshold must be inside (0,1), got {threshold}")
    if X is not None:
        probs = predict_proba_matrix(params, X)
        return [p.id for i, p in enumerate(pool) if probs[i] >= threshold]
    return [p.id for p in pool if predict_proba(params, p) >= threshold]


def estimate_precision(
    inferred: Sequence[str],
    oracle: Oracle,
    n: int,
    rng: np.random.Generator,
    pool: Pool,
    threshold: float = 0.5,
    seed: int = 0,
    store=None,
    category: str = "",
) -> EvaluationReport:
    """Audit a uniform sample (without replacement) of the inferred positives.

    Samples min(n, |inferred|) points; when the inferred set is smaller than
    n the whole set is audited and the estimate is exact. Answers are logged
    to the store's evaluation log when a store is given.
    """
    if n < 1:
        raise DataError(f"sample size must be >= 1, got {n}")
    inferred = list(inferred)
    if not inferred:
        raise NoPositivesInferred("the model inferred no positive points")
    m = min(n, len(inferred))
    picked = rng.choice(len(inferred), size=m, replace=False)
    sample_ids = [inferred[i] for i in picked]
    requests = [
        OracleRequest(
            request_id=f"evaluation-0-{pid}",
            point=pool.get(pid),
            purpose="evaluation",
            category=category,
        )
        for pid in sample_ids
    ]
    answers = annotate_batch(oracle, requests)
    if store is not None:
        for req, ans in zip(requests, answers):
            store.append_evaluation(
                Annotation(
                    point_id=req.point.id,
                    label=ans.label,
                    oracle_id=ans.oracle_id,
                    iteration=-1,
                    created_at=now(),
                )
            )
    hits = sum(1 for a in answers if a.label)
    report = EvaluationReport(
        n_sampled=m,
        n_true_positive_in_sample=hits,
        estimated_precision=hits / m,
        inferred_positive_count=len(inferred),
        decision_threshold=threshold,
        seed=seed,
        oracle_id=getattr(oracle, "oracle_id", ""),
    )
    if store is not None:
        store.save_report(report.to_dict())
    return report


def evaluate_run(
    params: ClassifierParams,
    pool: Pool,
    oracle: Oracle,
    config,
    threshold: float = 0.5,
    store=None,
    state=None,
    X: Optional[sp.csr_matrix] = None,
    category: str = "",
) -> EvaluationReport:
    """End-of-run evaluation using the run's n_eval and a dedicated rng
    substream of the run seed. Marks the state `done` when one is given."""
    inferred = infer_positives(params, pool, threshold, X=X)
    rng = derive_rng(config.seed, STREAM_EVAL)
    try:
        report = estimate_precision(
            inferred,
            oracle,
            config.n_eval,
            rng,
            pool,
            threshold=threshold,
            seed=config.seed,
            store=store,
            category=category,
        )
    except AnnotationsPending:
        raise
    if state is not None:
        state.phase = "done"
        if store is not None:
            store.save_state(state)
    return report


@dataclass(frozen=True)
class ComparisonRow:
    method: str
    oracle_id: str
    estimated_precision: float
    inferred_positive_count: int


def compare_methods(
    reports: Sequence[tuple[str, EvaluationReport]],
) -> tuple[list[ComparisonRow], dict[tuple[str, str], float]]:
    """Rows in the given order plus pairwise precision differences
    (diffs[(a, b)] = precision(a) - precision(b))."""
    if len(reports) < 2:
        raise DataError("need at least two reports to compare")
    rows = [
        ComparisonRow(
            method=name,
            oracle_id=rep.oracle_id,
            estimated_precision=rep.estimated_precision,
            inferred_positive_count=rep.inferred_positive_count,
        )
        for name, rep in reports
    ]
    diffs: dict[tuple[str, str], float] = {}
    for i, a in enumerate(rows):
        for b in rows[i + 1 :]:
            diffs[(a.method, b.method)] = (
                a.estimated_precision - b.estimated_precision
            )
    return rows, diffs


def format_comparison(
    rows: Sequence[ComparisonRow], diffs: dict[tuple[str, str], float]
) -> str:
    """Plain-text table: method / oracle / estimated precision / #inferred."""
    header = f"{'Method':<22}{'Oracle':<10}{'Precision':>10}{'#Inferred-Positive':>20}"
    lines = [header, "-" * len(header)]
    for r in rows:
        lines.append(
            f"{r.method:<22}{r.oracle_id:<10}{r.estimated_precision:>9.1%}"
            f"{r.inferred_positive_count:>20,}"
        )
    lines.append("")
    for (a, b), d in diffs.items():
        lines.append(f"{a} - {b}: {d:+.1%}")
    return "\n".join(lines)
