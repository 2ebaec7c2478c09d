"""Run persistence: append-only annotation logs, state snapshots, iteration
reports, and the human-submission journal.

Layout of a run directory:

    annotations.log    training annotations (coldstart + loop), append-only
    evaluation.log     evaluation-audit answers, kept apart from training
    iterations.report  one record per completed loop iteration
    state.snapshot     latest RunState (written atomically)
    queue.log          accepted human submissions (exactly-once journal)
    evaluation.report  latest EvaluationReport

All log files are newline-delimited JSON, UTF-8, with a schema-version header
line, so they stay diff-able and greppable.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable, Optional

from .core import Annotation, DataError, InvariantError, RunState

_ANNOTATIONS_HEADER = {"schema": "labelloop/annotations", "version": 1}
_EVALUATION_HEADER = {"schema": "labelloop/evaluation", "version": 1}

TRAINING_PURPOSES = ("coldstart", "loop")


@dataclass(frozen=True)
class AnnotationLogRecord:
    sequence_no: int
    annotation: Annotation
    purpose: str

    def to_dict(self) -> dict:
        return {
            "sequence_no": self.sequence_no,
            "purpose": self.purpose,
            "annotation": self.annotation.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "AnnotationLogRecord":
        return cls(
            sequence_no=int(d["sequence_no"]),
            annotation=Annotation.from_dict(d["annotation"]),
            purpose=d["purpose"],
        )


class MemoryStore:
    """In-memory store for library-driven runs and tests."""

    def __init__(self):
        self._annotations: list[AnnotationLogRecord] = []
        self._evaluations: list[AnnotationLogRecord] = []
        self._iterations: list[dict] = []
        self._state: Optional[dict] = None
        self._submissions: list[dict] = []
        self._report: Optional[dict] = None

    # -- training annotations -------------------------------------------------
    def append_annotation(self, annotation: Annotation, purpose: str) -> int:
        if purpose not in TRAINING_PURPOSES:
            raise DataError(f"training log rejects purpose {purpose!r}")
        if any(r.annotation.point_id == annotation.point_id for r in self._annotations):
            raise DataError(
                f"point {annotation.point_id!r} already has a training annotation"
            )
        seq = len(self._annotations) + 1
        self._annotations.append(AnnotationLogRecord(seq, annotation, purpose))
        return seq

    def annotations(self) -> list[AnnotationLogRecord]:
        return list(self._annotations)

    # -- evaluation answers ----------------------------------------------------
    def append_evaluation(self, annotation: Annotation) -> int:
        seq = len(self._evaluations) + 1
        self._evaluations.append(AnnotationLogRecord(seq, annotation, "evaluation"))
        return seq

    def evaluations(self) -> list[AnnotationLogRecord]:
        return list(self._evaluations)

    # -- iteration records -----------------------------------------------------
    def append_iteration(self, record: dict) -> None:
        self._iterations.append(dict(record))

    def iterations(self) -> list[dict]:
        return list(self._iterations)

    # -- snapshot --------------------------------------------------------------
    def save_state(self, state: RunState) -> None:
        self._state = state.to_dict()

    def load_state(self) -> Optional[RunState]:
        return RunState.from_dict(self._state) if self._state else None

    # -- human submissions -----------------------------------------------------
    def append_submission(self, request_id: str, label: bool, oracle_id: str) -> None:
        self._submissions.append(
            {"request_id": request_id, "label": label, "oracle_id": oracle_id}
        )

    def submissions(self) -> list[dict]:
        return list(self._submissions)

    # -- evaluation report -----------------------------------------------------
    def save_report(self, report: dict) -> None:
        self._report = dict(report)

    def load_report(self) -> Optional[dict]:
        return dict(self._report) if self._report else None


def _read_log(path: str, header: dict) -> list[dict]:
    """Parse a JSONL log; a torn trailing line (crash mid-append) is dropped,
    corruption anywhere else is an error."""
    if not os.path.exists(path):
        return []
    with open(path, "rb") as fh:
        raw = fh.read().decode("utf-8", errors="replace")
    lines = raw.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    records = []
    for i, line in enumerate(lines):
        try:
            rec = json.loads(line)
        except json.JSONDecodeError:
            if i == len(lines) - 1:
                break  # torn tail from an interrupted append
            raise InvariantError(f"{path}: corrupt record at line {i + 1}")
        if i == 0:
            if rec.get("schema") != header["schema"]:
                raise InvariantError(f"{path}: unexpected log schema {rec!r}")
            continue
        records.append(rec)
    return records


def _append_line(path: str, header: dict, obj: dict) -> None:
    """Durable append: the record is flushed and fsynced before returning."""
    new_file = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", encoding="utf-8") as fh:
        if new_file:
            fh.write(json.dumps(header, sort_keys=True) + "\n")
        fh.write(json.dumps(obj, ensure_ascii=False, sort_keys=True) + "\n")
        fh.flush()
        os.fsync(fh.fileno())


def _write_atomic(path: str, payload: dict) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, sort_keys=True, indent=1)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


class DirectoryStore:
    """Durable store rooted at a run directory. See module docstring."""

    def __init__(self, run_dir: str):
        self.run_dir = run_dir
        os.makedirs(run_dir, exist_ok=True)
        self._annotations = [
            AnnotationLogRecord.from_dict(r)
            for r in _read_log(self._path("annotations.log"), _ANNOTATIONS_HEADER)
        ]
        self._annotated_ids = {r.annotation.point_id for r in self._annotations}

    def _path(self, name: str) -> str:
        return os.path.join(self.run_dir, name)

    # -- training annotations -------------------------------------------------
    def append_annotation(self, annotation: Annotation, purpose: str) -> int:
        if purpose not in TRAINING_PURPOSES:
            raise DataError(f"training log rejects purpose {purpose!r}")
        if annotation.point_id in self._annotated_ids:
            raise DataError(
                f"point {annotation.point_id!r} already has a training annotation"
            )
        seq = len(self._annotations) + 1
        record = AnnotationLogRecord(seq, annotation, purpose)
        _append_line(self._path("annotations.log"), _ANNOTATIONS_HEADER, record.to_dict())
        self._annotations.append(record)
        self._annotated_ids.add(annotation.point_id)
        return seq

    def annotations(self) -> list[AnnotationLogRecord]:
        return list(self._annotations)

    # -- evaluation answers ----------------------------------------------------
    def append_evaluation(self, annotation: Annotation) -> int:
        seq = len(self.evaluations()) + 1
        record = AnnotationLogRecord(seq, annotation, "evaluation")
        _append_line(self._path("evaluation.log"), _EVALUATION_HEADER, record.to_dict())
        return seq

    def evaluations(self) -> list[AnnotationLogRecord]:
        return [
            AnnotationLogRecord.from_dict(r)
            for r in _read_log(self._path("evaluation.log"), _EVALUATION_HEADER)
        ]

    # -- iteration records -----------------------------------------------------
    def append_iteration(self, record: dict) -> None:
        _append_line(
            self._path("iterations.report"),
            {"schema": "labelloop/iterations", "version": 1},
            dict(record),
        )

    def iterations(self) -> list[dict]:
        return _read_log(
            self._path("iterations.report"),
            {"schema": "labelloop/iterations", "version": 1},
        )

    # -- snapshot --------------------------------------------------------------
    def save_state(self, state: RunState) -> None:
        _write_atomic(self._path("state.snapshot"), state.to_dict())

    def load_state(self) -> Optional[RunState]:
        path = self._path("state.snapshot")
        if not os.path.exists(path):
            return None
        with open(path, encoding="utf-8") as fh:
            return RunState.from_dict(json.load(fh))

    # -- human submissions -----------------------------------------------------
    def append_submission(self, request_id: str, label: bool, oracle_id: str) -> None:
        _append_line(
            self._path("queue.log"),
            {"schema": "labelloop/queue", "version": 1},
            {"request_id": request_id, "label": label, "oracle_id": oracle_id},
        )

    def submissions(self) -> list[dict]:
        return _read_log(
            self._path("queue.log"), {"schema": "labelloop/queue", "version": 1}
        )

    # -- evaluation report -----------------------------------------------------
    def save_report(self, report: dict) -> None:
        _write_atomic(self._path("evaluation.report"), report)

    def load_report(self) -> Optional[dict]:
        path = self._path("evaluation.report")
        if not os.path.exists(path):
            return None
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)


def canonical_log(records: Iterable[AnnotationLogRecord]) -> list[dict]:
    """Log content with the informational timestamp removed, for determinism
    comparisons (timestamps are excluded from determinism by contract)."""
    out = []
    for r in records:
        d = r.to_dict()
        d["annotation"].pop("created_at", None)
        out.append(d)
    return out
