"""Annotation oracles: scripted ground truth, noisy, remote endpoint, and the
human queue. One oracle drives a run; it answers cold-start, loop, and
evaluation requests alike."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol

from .core import (
    DataError,
    DataPoint,
    LabelLoopError,
    OracleProtocolError,
    OracleTransportError,
    STREAM_ORACLE,
    new_rng,
    stable_hash64,
)
from .models import PromptTemplate, render_prompt

PURPOSES = ("coldstart", "loop", "evaluation")


@dataclass(frozen=True)
class OracleRequest:
    request_id: str
    point: DataPoint
    purpose: str  # coldstart | loop | evaluation
    iteration: int = 0
    category: str = ""


@dataclass(frozen=True)
class OracleAnswer:
    request_id: str
    label: bool
    oracle_id: str
    latency: float = 0.0


class Oracle(Protocol):
    oracle_id: str

    def annotate(self, request: OracleRequest) -> OracleAnswer: ...


class AnnotationsPending(LabelLoopError):
    """Raised by the human oracle when answers are not yet available; the
    controller parks the run and the service resumes it on submission."""

    def __init__(self, pending: list[OracleRequest]):
        super().__init__(f"{len(pending)} annotations pending")
        self.pending = pending


class ScriptedOracle:
    """Answers with the point's hidden ground-truth label (simulation only)."""

    def __init__(self, oracle_id: str = "scripted"):
        self.oracle_id = oracle_id

    def annotate(self, request: OracleRequest) -> OracleAnswer:
        if request.point.hidden_label is None:
            raise DataError(
                f"point {request.point.id!r} has no hidden label; "
                "the scripted oracle only works on simulation datasets"
            )
        return OracleAnswer(request.request_id, bool(request.point.hidden_label), self.oracle_id)


class NoisyOracle:
    """Ground truth flipped independently with probability `flip_probability`.

    The flip decision is derived statelessly from (seed, point_id), so the
    answer for a given point is identical across runs, resumes, and replay
    order -- a per-point substream rather than one sequential stream.
    """

    def __init__(self, flip_probability: float, seed: int, oracle_id: str = "noisy"):
        if not (0.0 <= flip_probability <= 0.5):
            raise DataError(
                f"flip probability must be in [0, 0.5], got {flip_probability}"
            )
        self.flip_probability = flip_probability
        self.seed = seed
        self.oracle_id = oracle_id

    def annotate(self, request: OracleRequest) -> OracleAnswer:
        if request.point.hidden_label is None:
            raise DataError(f"point {request.point.id!r} has no hidden label")
        rng = new_rng(self.seed ^ STREAM_ORACLE ^ stable_hash64(request.point.id))
        label = bool(request.point.hidden_label)
        if rng.random() < self.flip_probability:
            label = not label
        return OracleAnswer(request.request_id, label, self.oracle_id)


class RemoteOracle:
    """Oracle behind a web endpoint.

    Wire contract: POST {request_id, s1, s2, category}; the endpoint must
    answer {request_id, label} with label in {0, 1}. Free-text parsing is
    deliberately excluded -- adapters live server-side. Transport failures are
    retried with exponential backoff up to `max_retries`.
    """

    def __init__(
        self,
        endpoint: str,
        template: PromptTemplate,
        oracle_id: str = "remote",
        timeout: float = 10.0,
        max_retries: int = 3,
        backoff: float = 0.25,
    ):
        self.endpoint = endpoint
        self.template = template
        self.oracle_id = oracle_id
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff

    def annotate(self, request: OracleRequest) -> OracleAnswer:
        import httpx

        s1, s2 = render_prompt(self.template, request.point)
        payload = {
            "request_id": request.request_id,
            "s1": s1,
            "s2": s2,
            "category": request.category or self.template.category,
        }
        started = time.monotonic()
        last_exc: Exception | None = None
        for attempt in range(self.max_retries + 1):
            raw = None
            try:
                resp = httpx.post(self.endpoint, json=payload, timeout=self.timeout)
                resp.raise_for_status()
                raw = resp.text
                body = resp.json()
                label = body["label"]
                if label not in (0, 1, True, False):
                    raise ValueError(f"label not in {{0,1}}: {label!r}")
            except httpx.HTTPError as exc:
                last_exc = exc
                if attempt < self.max_retries:
                    time.sleep(self.backoff * 2**attempt)
                continue
            except (KeyError, TypeError, ValueError) as exc:
                raise OracleProtocolError(
                    f"remote oracle response violates schema: {exc}", payload=raw
                ) from exc
            return OracleAnswer(
                request.request_id,
                bool(label),
                self.oracle_id,
                latency=time.monotonic() - started,
            )
        raise OracleTransportError(
            f"remote oracle unreachable after {self.max_retries} retries: {last_exc}"
        )


# ---------------------------------------------------------------------------
# Human queue
# ---------------------------------------------------------------------------


class HumanQueue:
    """Pending-request queue for human annotators.

    Submissions are exactly-once: the first answer for a request_id wins and
    duplicates are rejected. `on_submit` (when set) persists each accepted
    submission before it is acknowledged, so the queue survives restarts.
    """

    def __init__(self, on_submit: Optional[Callable[[str, bool, str], None]] = None):
        self._requests: dict[str, OracleRequest] = {}
        self._order: list[str] = []
        self._answers: dict[str, OracleAnswer] = {}
        self._on_submit = on_submit

    def enqueue(self, requests: list[OracleRequest]) -> None:
        for req in requests:
            if req.request_id not in self._requests:
                self._requests[req.request_id] = req
                self._order.append(req.request_id)

    def pending(self) -> list[OracleRequest]:
        return [
            self._requests[rid] for rid in self._order if rid not in self._answers
        ]

    def submit(self, request_id: str, label: bool, oracle_id: str = "human") -> OracleAnswer:
        if request_id not in self._requests:
            raise DataError(f"unknown or expired request_id {request_id!r}")
        if request_id in self._answers:
            raise DataError(f"request {request_id!r} was already answered")
        answer = OracleAnswer(request_id, bool(label), oracle_id)
        if self._on_submit is not None:
            self._on_submit(request_id, bool(label), oracle_id)
        self._answers[request_id] = answer
        return answer

    def restore(self, request_id: str, label: bool, oracle_id: str) -> None:
        """Re-apply a persisted submission during recovery (no re-persist)."""
        if request_id not in self._answers:
            self._answers[request_id] = OracleAnswer(request_id, bool(label), oracle_id)

    def answer_for(self, request_id: str) -> Optional[OracleAnswer]:
        return self._answers.get(request_id)


class HumanOracle:
    """Oracle that parks the loop until a person answers through the queue."""

    def __init__(self, queue: Optional[HumanQueue] = None, oracle_id: str = "human"):
        self.queue = queue or HumanQueue()
        self.oracle_id = oracle_id

    def annotate(self, request: OracleRequest) -> OracleAnswer:
        answer = self.queue.answer_for(request.request_id)
        if answer is None:
            self.queue.enqueue([request])
            raise AnnotationsPending(self.queue.pending())
        return answer

    def annotate_batch(self, requests: list[OracleRequest]) -> list[OracleAnswer]:
        self.queue.enqueue(requests)
        answers = [self.queue.answer_for(r.request_id) for r in requests]
        if any(a is None for a in answers):
            raise AnnotationsPending(self.queue.pending())
        return answers  # type: ignore[return-value]


def annotate_batch(oracle: Oracle, requests: list[OracleRequest]) -> list[OracleAnswer]:
    """All-or-nothing batch annotation.

    Nothing is returned unless every request succeeds, which keeps
    whole-iteration rollback trivial for the controller.
    """
    batched = getattr(oracle, "annotate_batch", None)
    if batched is not None:
        return batched(requests)
    return [oracle.annotate(req) for req in requests]
