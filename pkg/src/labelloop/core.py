"""Shared domain types, deterministic randomness, and pool ingestion."""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict
from typing import Iterable, Iterator, Optional

import numpy as np


class LabelLoopError(Exception):
    """Base class for all errors raised by this package."""


class DataError(LabelLoopError):
    """Bad input data: malformed records, duplicate ids, size violations."""


class InvariantError(LabelLoopError):
    """An internal invariant was violated (corrupt state, broken contract)."""


class OracleTransportError(LabelLoopError):
    """Could not reach an oracle (timeouts exhausted, connection refused)."""


class OracleProtocolError(LabelLoopError):
    """The oracle answered, but not in the documented response schema."""

    def __init__(self, message: str, payload=None):
        super().__init__(message)
        self.payload = payload


# ---------------------------------------------------------------------------
# Deterministic randomness.
#
# All randomness flows from a single 64-bit run seed through PCG64 (numpy's
# permuted congruential generator -- a named, portable algorithm with stable
# output across platforms and numpy versions). Substreams are derived
# statelessly: the run seed is XORed with a fixed per-purpose constant and
# with the iteration number mixed by an odd 64-bit constant. Any
# (purpose, iteration) stream can therefore be re-derived after a restart
# without carrying generator state in snapshots.
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
_ITER_MIX = 0x9E3779B97F4A7C15  # odd, so iteration mixing is a bijection

STREAM_COLDSTART = 0x434F4C445354_0001
STREAM_SELECT = 0x53454C454354_0002
STREAM_TRAIN = 0x545241494E00_0003
STREAM_EVAL = 0x4556414C0000_0004
STREAM_ORACLE = 0x4F5241434C45_0005
STREAM_SYNTH = 0x53594E544800_0006


def new_rng(seed: int) -> np.random.Generator:
    """A fresh PCG64 stream for `seed`; identical seeds give identical streams."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))


def derive_rng(seed: int, purpose: int, iteration: int = 0) -> np.random.Generator:
    """Substream for (seed, purpose, iteration); see module comment."""
    return new_rng((seed ^ purpose ^ ((iteration * _ITER_MIX) & _MASK64)) & _MASK64)


def stable_hash64(data: str) -> int:
    """Platform-stable 64-bit hash of a string (blake2b, unsalted)."""
    import hashlib

    return int.from_bytes(
        hashlib.blake2b(data.encode("utf-8"), digest_size=8).digest(), "little"
    )


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DataPoint:
    """One unlabeled pool item.

    `hidden_label` is simulation ground truth. By contract it is read only by
    the scripted/noisy oracles and the evaluation harness; scorers, strategies
    and the trainer receive only `id`/`text` (or ScoredPoint), never labels.
    """

    id: str
    text: str
    hidden_label: Optional[bool] = None

    def __post_init__(self):
        if not self.id:
            raise DataError("data point id must be non-empty")
        if not self.text:
            raise DataError(f"data point {self.id!r}: text must be non-empty")


class Pool:
    """Ordered, duplicate-free collection of DataPoints.

    Iteration order is ingestion order and is stable across runs.
    """

    def __init__(self, points: Iterable[DataPoint]):
        self._points: list[DataPoint] = []
        self._index: dict[str, int] = {}
        for p in points:
            if p.id in self._index:
                raise DataError(f"duplicate point id {p.id!r}")
            self._index[p.id] = len(self._points)
            self._points.append(p)

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self) -> Iterator[DataPoint]:
        return iter(self._points)

    def __contains__(self, point_id: str) -> bool:
        return point_id in self._index

    def get(self, point_id: str) -> DataPoint:
        try:
            return self._points[self._index[point_id]]
        except KeyError:
            raise DataError(f"unknown point id {point_id!r}") from None

    def ids(self) -> list[str]:
        return [p.id for p in self._points]


def ingest_pool(records: Iterable[dict]) -> Pool:
    """Build a Pool from records with `id`, `text` and optional `label`."""

    def points():
        for rec in records:
            if "id" not in rec or "text" not in rec:
                raise DataError(f"record missing id/text: {rec!r}")
            yield DataPoint(
                id=str(rec["id"]), text=rec["text"], hidden_label=rec.get("label")
            )

    return Pool(points())


def load_pool(path: str) -> Pool:
    """Read a newline-delimited JSON dataset file (UTF-8)."""

    def records():
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    yield json.loads(line)
                except json.JSONDecodeError as exc:
                    raise DataError(f"{path}:{lineno}: invalid record: {exc}") from None

    return ingest_pool(records())


def save_pool(pool: Pool, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for p in pool:
            rec = {"id": p.id, "text": p.text}
            if p.hidden_label is not None:
                rec["label"] = p.hidden_label
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


@dataclass(frozen=True)
class Label:
    value: bool


@dataclass(frozen=True)
class Annotation:
    """An oracle's label for one point, with provenance.

    `created_at` is informational only and excluded from determinism checks.
    """

    point_id: str
    label: bool
    oracle_id: str
    iteration: int
    created_at: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "Annotation":
        return cls(
            point_id=d["point_id"],
            label=bool(d["label"]),
            oracle_id=d["oracle_id"],
            iteration=int(d["iteration"]),
            created_at=float(d.get("created_at", 0.0)),
        )


@dataclass(frozen=True)
class ScoredPoint:
    point_id: str
    p_positive: float

    def __post_init__(self):
        if not (0.0 <= self.p_positive <= 1.0):
            raise DataError(
                f"p_positive out of [0,1] for {self.point_id!r}: {self.p_positive}"
            )


STRATEGY_IDS = ("uncertainty", "random", "confident_zero_shot")

PHASES = (
    "initializing",
    "awaiting_annotations",
    "training",
    "selecting",
    "evaluating",
    "done",
)


@dataclass(frozen=True)
class LoopConfig:
    """Loop constants. Defaults: k=16, max_iterations=9, n_eval=200."""

    k: int = 16
    max_iterations: int = 9
    n_eval: int = 200
    seed: int = 0
    strategy_id: str = "uncertainty"

    def __post_init__(self):
        if self.k < 2 or self.k % 2 != 0:
            raise DataError(f"k must be an even integer >= 2, got {self.k}")
        if self.max_iterations < 0:
            raise DataError(f"max_iterations must be >= 0, got {self.max_iterations}")
        if self.n_eval < 1:
            raise DataError(f"n_eval must be >= 1, got {self.n_eval}")
        if self.strategy_id not in STRATEGY_IDS:
            raise DataError(
                f"unknown strategy {self.strategy_id!r}; expected one of {STRATEGY_IDS}"
            )

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "LoopConfig":
        return cls(
            k=int(d["k"]),
            max_iterations=int(d["max_iterations"]),
            n_eval=int(d["n_eval"]),
            seed=int(d["seed"]),
            strategy_id=d["strategy_id"],
        )


@dataclass(frozen=True)
class PendingRequest:
    """An oracle request awaiting an answer (human-oracle runs)."""

    request_id: str
    point_id: str
    purpose: str  # coldstart | loop | evaluation
    iteration: int

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PendingRequest":
        return cls(d["request_id"], d["point_id"], d["purpose"], int(d["iteration"]))


@dataclass
class RunState:
    """Replayable state of one active-learning run (single-writer)."""

    config: LoopConfig
    iteration: int = -1  # last completed iteration; -1 = none (cold-start pending)
    annotations: list[Annotation] = field(default_factory=list)
    model_version: int = 0
    phase: str = "initializing"
    pending: list[PendingRequest] = field(default_factory=list)
    pending_train_loss: Optional[float] = None

    def annotated_ids(self) -> set[str]:
        return {a.point_id for a in self.annotations}

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "iteration": self.iteration,
            "annotations": [a.to_dict() for a in self.annotations],
            "model_version": self.model_version,
            "phase": self.phase,
            "pending": [p.to_dict() for p in self.pending],
            "pending_train_loss": self.pending_train_loss,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RunState":
        return cls(
            config=LoopConfig.from_dict(d["config"]),
            iteration=int(d["iteration"]),
            annotations=[Annotation.from_dict(a) for a in d["annotations"]],
            model_version=int(d["model_version"]),
            phase=d["phase"],
            pending=[PendingRequest.from_dict(p) for p in d.get("pending", [])],
            pending_train_loss=d.get("pending_train_loss"),
        )


def now() -> float:
    return time.time()
