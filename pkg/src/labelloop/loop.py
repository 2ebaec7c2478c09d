"""Run controller: cold-start, then repeat (train -> stop-check -> select ->
annotate) until the iteration budget is exhausted, producing the final model.

The controller is the single writer of RunState. All randomness comes from
per-(purpose, iteration) substreams of the run seed, so a resumed run makes
exactly the same decisions as an uninterrupted one, and crash recovery can
recompute any in-flight selection instead of persisting generator state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp

from .core import (
    DataError,
    InvariantError,
    LoopConfig,
    PendingRequest,
    Pool,
    RunState,
    ScoredPoint,
    STREAM_SELECT,
    STREAM_TRAIN,
    Annotation,
    derive_rng,
    now,
)
from .coldstart import coldstart_requests, plan_coldstart
from .models import (
    ClassifierParams,
    Scorer,
    TrainConfig,
    featurize_pool,
    predict_proba_matrix,
    train_from_config,
)
from .oracles import (
    AnnotationsPending,
    Oracle,
    OracleRequest,
    annotate_batch,
)
from .store import MemoryStore
from .strategies import (
    SelectionRequest,
    select_confident_negative,
    select_confident_positive,
    select_random,
    select_uncertain,
)


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    selected_ids: list[str]
    annotations_added: int
    model_version: int
    train_loss_final: float

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "selected_ids": list(self.selected_ids),
            "annotations_added": self.annotations_added,
            "model_version": self.model_version,
            "train_loss_final": self.train_loss_final,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IterationRecord":
        return cls(
            iteration=int(d["iteration"]),
            selected_ids=list(d["selected_ids"]),
            annotations_added=int(d["annotations_added"]),
            model_version=int(d["model_version"]),
            train_loss_final=float(d["train_loss_final"]),
        )


@dataclass
class RunResult:
    params: ClassifierParams
    state: RunState
    records: list[IterationRecord]


def should_stop(state: RunState) -> bool:
    """Built-in budget criterion: stop once max_iterations are completed."""
    return state.iteration >= state.config.max_iterations


class LoopController:
    """Drives one run. Safe to reconstruct over an existing store at any time:
    the annotation log is authoritative, selections are recomputed
    deterministically, and partially committed iterations are completed rather
    than redone."""

    def __init__(
        self,
        pool: Pool,
        scorer: Scorer,
        oracle: Oracle,
        config: LoopConfig,
        train_config: Optional[TrainConfig] = None,
        store=None,
        state: Optional[RunState] = None,
        stop_predicate: Optional[Callable[[RunState], bool]] = None,
        features: Optional[tuple[sp.csr_matrix, dict[str, int]]] = None,
        zero_shot_scores: Optional[list[ScoredPoint]] = None,
    ):
        self.pool = pool
        self.scorer = scorer
        self.oracle = oracle
        self.config = config
        self.train_config = train_config or TrainConfig()
        self.store = store if store is not None else MemoryStore()
        self.stop = stop_predicate or should_stop

        snapshot = state or self.store.load_state()
        if snapshot is None:
            self.state = RunState(config=config)
        else:
            self.state = snapshot
            if snapshot.config != config:
                raise DataError("config does not match the stored run state")

        self._reconcile_with_log()
        missing = sorted(self.state.annotated_ids() - set(pool.ids()))
        if missing:
            raise DataError(
                f"pool is missing annotated points: {', '.join(missing)}"
            )

        self._features = features
        self._zero_shot = zero_shot_scores
        self.params: Optional[ClassifierParams] = None
        self.final_params: Optional[ClassifierParams] = None
        self.records: list[IterationRecord] = [
            IterationRecord.from_dict(r) for r in self.store.iterations()
        ]

    # -- derived inputs --------------------------------------------------------

    def pool_features(self) -> tuple[sp.csr_matrix, dict[str, int]]:
        if self._features is None:
            tc = self.train_config
            X = featurize_pool(
                (p.text for p in self.pool), tc.ngram_orders, tc.feature_dim
            )
            row_of = {p.id: i for i, p in enumerate(self.pool)}
            self._features = (X, row_of)
        return self._features

    def _zero_shot_scores(self) -> list[ScoredPoint]:
        if self._zero_shot is None:
            self._zero_shot = [
                ScoredPoint(p.id, self.scorer.score(p)) for p in self.pool
            ]
        return self._zero_shot

    def _reconcile_with_log(self) -> None:
        """The annotation log is the source of truth for committed work."""
        records = self.store.annotations()
        if records:
            self.state.annotations = [r.annotation for r in records]
        counts: dict[int, int] = {}
        for a in self.state.annotations:
            counts[a.iteration] = counts.get(a.iteration, 0) + 1
        completed = -1
        t = 0
        while counts.get(t, 0) == self.config.k:
            completed = t
            t += 1
        if counts.get(t, 0) > self.config.k:
            raise InvariantError(f"iteration {t} has more than k annotations")
        self.state.iteration = completed

    # -- annotation collection -------------------------------------------------

    def _collect(
        self, requests: list[OracleRequest], purpose: str, iteration: int
    ) -> None:
        """All-or-nothing: commit annotations for `requests` not yet logged.

        If the oracle parks (human), pending requests are persisted in the
        snapshot and AnnotationsPending propagates to the caller.
        """
        logged = self.state.annotated_ids()
        outstanding = [r for r in requests if r.point.id not in logged]
        if outstanding:
            try:
                answers = annotate_batch(self.oracle, outstanding)
            except AnnotationsPending:
                self.state.phase = "awaiting_annotations"
                self.state.pending = [
                    PendingRequest(r.request_id, r.point.id, purpose, iteration)
                    for r in outstanding
                ]
                self.store.save_state(self.state)
                raise
            for req, ans in zip(outstanding, answers):
                annotation = Annotation(
                    point_id=req.point.id,
                    label=ans.label,
                    oracle_id=ans.oracle_id,
                    iteration=iteration,
                    created_at=now(),
                )
                self.store.append_annotation(annotation, purpose)
                self.state.annotations.append(annotation)
        self.state.pending = []
        self.state.iteration = iteration

    # -- phases ----------------------------------------------------------------

    def _do_coldstart(self) -> None:
        self.state.phase = "initializing"
        plan = plan_coldstart(
            self.pool, self.scorer, self.config.k, scores=self._zero_shot_scores()
        )
        requests = coldstart_requests(plan, self.pool)
        self._collect(requests, "coldstart", 0)
        self.state.phase = "training"
        self.store.save_state(self.state)

    def _train(self, upto_iteration: int, rng_iteration: int) -> tuple[ClassifierParams, float]:
        pairs = [
            (a.point_id, a.label)
            for a in self.state.annotations
            if a.iteration <= upto_iteration
        ]
        X, row_of = self.pool_features()
        rng = derive_rng(self.config.seed, STREAM_TRAIN, rng_iteration)
        return train_from_config(
            pairs,
            self.pool,
            self.train_config,
            rng,
            X=X,
            row_of=row_of,
            warm_params=self.params,
        )

    def _select(self, t: int, params: ClassifierParams) -> list[str]:
        cfg = self.config
        excluded = {a.point_id for a in self.state.annotations if a.iteration < t}
        rng = derive_rng(cfg.seed, STREAM_SELECT, t)
        if cfg.strategy_id == "uncertainty":
            X, _ = self.pool_features()
            probs = predict_proba_matrix(params, X)
            scored = [
                ScoredPoint(p.id, float(probs[i])) for i, p in enumerate(self.pool)
            ]
            return select_uncertain(SelectionRequest(scored, excluded, cfg.k, rng))
        if cfg.strategy_id == "random":
            scored = self._zero_shot_scores()
            return select_random(SelectionRequest(scored, excluded, cfg.k, rng))
        if cfg.strategy_id == "confident_zero_shot":
            scored = self._zero_shot_scores()
            half = cfg.k // 2
            pos = select_confident_positive(scored, excluded, half, rng)
            neg = select_confident_negative(scored, excluded | set(pos), half, rng)
            return pos + neg
        raise DataError(f"unknown strategy {cfg.strategy_id!r}")

    def _do_iteration(self, t: int) -> None:
        pending_here = [p for p in self.state.pending if p.iteration == t]
        partial = {a.point_id for a in self.state.annotations if a.iteration == t}
        if pending_here:
            # Parked mid-iteration: the selection was already made and
            # persisted; do not retrain or reselect. Committed records come
            # first in log order, then the still-pending ids in request order.
            committed = [
                a.point_id for a in self.state.annotations if a.iteration == t
            ]
            selected = committed + [
                p.point_id for p in pending_here if p.point_id not in partial
            ]
            loss = self.state.pending_train_loss
            loss = float("nan") if loss is None else loss
        else:
            self.state.phase = "training"
            self.params, loss = self._train(upto_iteration=t - 1, rng_iteration=t)
            self.state.model_version = t
            self.state.phase = "selecting"
            selected = self._select(t, self.params)
            if not partial <= set(selected):
                raise InvariantError(
                    f"iteration {t}: logged annotations are not a subset of the "
                    "recomputed selection; state and log disagree"
                )
            self.state.pending_train_loss = loss
        requests = [
            OracleRequest(
                request_id=f"loop-{t}-{pid}",
                point=self.pool.get(pid),
                purpose="loop",
                iteration=t,
            )
            for pid in selected
        ]
        self._collect(requests, "loop", t)
        if not any(int(r["iteration"]) == t for r in self.store.iterations()):
            record = IterationRecord(
                iteration=t,
                selected_ids=list(selected),
                annotations_added=self.config.k,
                model_version=t,
                train_loss_final=loss,
            )
            self.store.append_iteration(record.to_dict())
            self.records.append(record)
        self.state.pending_train_loss = None
        self.state.phase = "training"
        self.store.save_state(self.state)

    def _finalize(self) -> None:
        # The final model is retrained from scratch on every annotation
        # collected, which is deterministic and at least as strong as keeping
        # the last in-loop model.
        self.state.phase = "training"
        final_version = self.config.max_iterations + 1
        self.final_params, _ = self._train(
            upto_iteration=self.config.max_iterations, rng_iteration=final_version
        )
        self.state.model_version = final_version
        self.state.phase = "evaluating"
        self.store.save_state(self.state)

    # -- driver ----------------------------------------------------------------

    def run(self) -> RunResult:
        """Advance to completion (phase `evaluating`) or park on a human batch.

        Raises AnnotationsPending when human answers are outstanding; calling
        run() again after submissions continues exactly where it left off.
        """
        cfg = self.config
        needed = cfg.k * (cfg.max_iterations + 1)
        if len(self.pool) < needed:
            raise DataError(
                f"pool has {len(self.pool)} points; a full run needs >= {needed}"
            )
        if (
            self.state.phase in ("done", "evaluating")
            and self.state.iteration >= cfg.max_iterations
        ):
            if self.final_params is None:
                # finished run reattached: rematerialize the final model (the
                # retrain is deterministic, so this matches the original)
                final_version = cfg.max_iterations + 1
                self.final_params, _ = self._train(
                    upto_iteration=cfg.max_iterations, rng_iteration=final_version
                )
                self.state.model_version = final_version
            return RunResult(self.final_params, self.state, self.records)
        while True:
            if self.state.iteration < 0:
                self._do_coldstart()
            elif self.stop(self.state):
                self._finalize()
                return RunResult(self.final_params, self.state, self.records)
            else:
                self._do_iteration(self.state.iteration + 1)


def run_loop(
    pool: Pool,
    scorer: Scorer,
    oracle: Oracle,
    config: LoopConfig,
    train_config: Optional[TrainConfig] = None,
    store=None,
    **kwargs,
) -> RunResult:
    """Execute a full run with a non-interactive oracle.

    Returns once the final model is trained (state phase `evaluating`).
    A human oracle parks instead of completing; drive those runs through the
    service, which resumes on each submitted batch.
    """
    controller = LoopController(
        pool, scorer, oracle, config, train_config, store, **kwargs
    )
    return controller.run()


def resume(
    state: RunState,
    pool: Pool,
    scorer: Scorer,
    oracle: Oracle,
    train_config: Optional[TrainConfig] = None,
    store=None,
) -> RunResult:
    """Continue a parked or interrupted run; completed iterations are never
    re-executed, and the outcome matches an uninterrupted run."""
    if state.phase == "done":
        controller = LoopController(
            pool, scorer, oracle, state.config, train_config, store, state=state
        )
        return RunResult(None, state, controller.records)
    if store is None:
        store = MemoryStore()
        for a in state.annotations:
            store.append_annotation(a, "coldstart" if a.iteration == 0 else "loop")
    controller = LoopController(
        pool, scorer, oracle, state.config, train_config, store, state=state
    )
    return controller.run()
