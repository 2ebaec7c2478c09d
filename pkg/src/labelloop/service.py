"""Web service driving runs and serving the human-annotation workflow.

One run per process. All run mutations funnel through RunManager under a
single lock (the controller is single-writer); API handlers read the current
snapshot and submit annotations through the exactly-once queue journal.
"""
from __future__ import annotations

import os
import threading
import time
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from .core import (
    DataError,
    LabelLoopError,
    PendingRequest,
    Pool,
)
from .evaluation import NoPositivesInferred, evaluate_run
from .loop import LoopController, RunResult
from .oracles import AnnotationsPending, HumanOracle, HumanQueue, OracleRequest
from .runcfg import RunSpec
from .store import DirectoryStore


class RunManager:
    """Owns the active run: controller, store, and (for human runs) the queue."""

    def __init__(self, runs_dir: str):
        self.runs_dir = runs_dir
        os.makedirs(runs_dir, exist_ok=True)
        self.lock = threading.Lock()
        self.run_id: Optional[str] = None
        self.spec: Optional[RunSpec] = None
        self.store: Optional[DirectoryStore] = None
        self.controller: Optional[LoopController] = None
        self.queue: Optional[HumanQueue] = None
        self.pool: Optional[Pool] = None
        self.result: Optional[RunResult] = None
        self.error: Optional[str] = None

    # -- lifecycle -------------------------------------------------------------

    def start_run(self, spec: RunSpec, run_id: Optional[str] = None, autostart: bool = True) -> str:
        with self.lock:
            if self.run_id is not None and not self._finished():
                raise DataError(f"run {self.run_id!r} is still active")
            run_id = run_id or f"run-{int(time.time() * 1000)}"
            run_dir = os.path.join(self.runs_dir, run_id)
            if os.path.exists(os.path.join(run_dir, "config.json")):
                raise DataError(f"run directory {run_id!r} already exists; resume it instead")
            os.makedirs(run_dir, exist_ok=True)
            spec.save(os.path.join(run_dir, "config.json"))
            self._attach(run_id, spec)
        if autostart:
            self.advance_async()
        return run_id

    def resume_run(self, run_id: str) -> None:
        with self.lock:
            run_dir = os.path.join(self.runs_dir, run_id)
            config_path = os.path.join(run_dir, "config.json")
            if not os.path.exists(config_path):
                raise DataError(f"no run directory named {run_id!r}")
            self._attach(run_id, RunSpec.load(config_path))
        self.advance_async()

    def _attach(self, run_id: str, spec: RunSpec) -> None:
        run_dir = os.path.join(self.runs_dir, run_id)
        self.run_id = run_id
        self.spec = spec
        self.result = None
        self.error = None
        self.store = DirectoryStore(run_dir)
        self.pool = spec.load_pool()
        self.queue = HumanQueue(on_submit=self.store.append_submission)
        oracle = spec.build_oracle(queue=self.queue)
        self.controller = LoopController(
            self.pool,
            spec.scorer(),
            oracle,
            spec.loop_config(),
            spec.train_config(),
            store=self.store,
        )
        self._restore_queue()

    def _restore_queue(self) -> None:
        """Re-enqueue snapshot pending requests and replay journaled answers."""
        state = self.controller.state
        if state.pending:
            self.queue.enqueue(
                [
                    OracleRequest(
                        request_id=p.request_id,
                        point=self.pool.get(p.point_id),
                        purpose=p.purpose,
                        iteration=p.iteration,
                        category=self.spec.category,
                    )
                    for p in state.pending
                ]
            )
        for sub in self.store.submissions():
            self.queue.restore(sub["request_id"], sub["label"], sub["oracle_id"])

    def _finished(self) -> bool:
        return self.controller is not None and self.controller.state.phase == "done"

    # -- advancement -----------------------------------------------------------

    def advance_async(self) -> None:
        threading.Thread(target=self.advance, daemon=True).start()

    def advance(self) -> None:
        with self.lock:
            if self.controller is None or self._finished():
                return
            spec, controller, store = self.spec, self.controller, self.store
            try:
                result = controller.run()
                self.result = result
                X, _ = controller.pool_features()
                evaluate_run(
                    result.params,
                    self.pool,
                    controller.oracle,
                    controller.config,
                    threshold=spec.threshold,
                    store=store,
                    state=controller.state,
                    X=X,
                    category=spec.category,
                )
            except AnnotationsPending as exc:
                state = controller.state
                if state.phase == "evaluating":
                    # evaluation audit parked on the human queue
                    state.pending = [
                        PendingRequest(
                            r.request_id, r.point.id, "evaluation",
                            controller.config.max_iterations + 1,
                        )
                        for r in exc.pending
                    ]
                    store.save_state(state)
            except NoPositivesInferred:
                controller.state.phase = "done"
                store.save_state(controller.state)
                store.save_report(
                    {"no_positives_inferred": True, "estimated_precision": None}
                )
            except LabelLoopError as exc:
                self.error = str(exc)

    # -- queries and submissions -----------------------------------------------

    def status(self) -> dict:
        if self.controller is None:
            raise DataError("no active run")
        state = self.controller.state
        cfg = state.config
        budget = cfg.k * (cfg.max_iterations + 1)
        return {
            "run_id": self.run_id,
            "phase": state.phase,
            "iteration": max(state.iteration, 0),
            "max_iterations": cfg.max_iterations,
            "annotations_used": len(state.annotations),
            "budget": budget,
            "model_version": state.model_version,
            "error": self.error,
        }

    def candidates(self) -> list[dict]:
        if self.queue is None:
            return []
        return [
            {
                "request_id": r.request_id,
                "text": r.point.text,
                "category": r.category or (self.spec.category if self.spec else ""),
                "purpose": r.purpose,
                "position": i,
            }
            for i, r in enumerate(self.queue.pending())
        ]

    def submit(self, request_id: str, label: bool) -> dict:
        if self.queue is None or self.controller is None:
            raise DataError("no active run")
        with self.lock:
            self.queue.submit(request_id, label)
            remaining = len(self.queue.pending())
        if remaining == 0:
            self.advance_async()
        return {"accepted": True, "remaining": remaining}


class SubmissionBody(BaseModel):
    request_id: str
    label: bool


class StartRunBody(BaseModel):
    config: dict
    run_id: Optional[str] = None
    autostart: bool = True


def create_app(runs_dir: str) -> FastAPI:
    app = FastAPI(title="labelloop")
    manager = RunManager(runs_dir)
    app.state.manager = manager

    def conflict(exc: LabelLoopError) -> HTTPException:
        return HTTPException(status_code=409, detail=str(exc))

    @app.get("/status")
    def status():
        try:
            return manager.status()
        except DataError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.get("/candidates")
    def candidates():
        return {"candidates": manager.candidates()}

    @app.post("/annotations")
    def annotations(body: SubmissionBody):
        try:
            return manager.submit(body.request_id, body.label)
        except DataError as exc:
            raise conflict(exc)

    @app.post("/runs")
    def start_run(body: StartRunBody):
        try:
            spec = RunSpec.from_dict(body.config)
            run_id = manager.start_run(spec, run_id=body.run_id, autostart=body.autostart)
        except DataError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"run_id": run_id}

    @app.post("/runs/{run_id}/resume")
    def resume_run(run_id: str):
        try:
            manager.resume_run(run_id)
        except DataError as exc:
            raise HTTPException(status_code=404, detail=str(exc))
        return {"run_id": run_id, "resumed": True}

    @app.get("/evaluation")
    def evaluation():
        if manager.store is None:
            raise HTTPException(status_code=404, detail="no active run")
        report = manager.store.load_report()
        if report is None:
            return {"report": None, "status": "not yet estimated"}
        return {"report": report, "status": "done"}

    @app.get("/iterations")
    def iterations():
        if manager.store is None:
            raise HTTPException(status_code=404, detail="no active run")
        return {"iterations": manager.store.iterations()}

    return app


def serve(runs_dir: str, host: str = "127.0.0.1", port: int = 8414) -> None:
    """Run the API server. LABELLOOP_ADDR overrides host:port."""
    import uvicorn

    addr = os.environ.get("LABELLOOP_ADDR")
    if addr:
        host, _, p = addr.rpartition(":")
        port = int(p)
        host = host or "127.0.0.1"
    uvicorn.run(create_app(runs_dir), host=host, port=port, log_level="warning")
