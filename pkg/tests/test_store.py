import json
import os

import pytest

from labelloop.core import Annotation, DataError, InvariantError, LoopConfig, RunState
from labelloop.store import DirectoryStore, MemoryStore, canonical_log


def ann(pid, label=True, iteration=0, created=1.0):
    return Annotation(pid, label, "scripted", iteration, created)


@pytest.fixture(params=["memory", "directory"])
def store(request, tmp_path):
    if request.param == "memory":
        return MemoryStore()
    return DirectoryStore(str(tmp_path / "run"))


class TestAnnotationLog:
    def test_sequence_numbers_are_contiguous(self, store):
        assert store.append_annotation(ann("a"), "coldstart") == 1
        assert store.append_annotation(ann("b"), "loop") == 2
        records = store.annotations()
        assert [r.sequence_no for r in records] == [1, 2]
        assert [r.purpose for r in records] == ["coldstart", "loop"]

    def test_duplicate_point_rejected(self, store):
        store.append_annotation(ann("a"), "loop")
        with pytest.raises(DataError, match="already"):
            store.append_annotation(ann("a", False), "loop")

    def test_evaluation_purpose_rejected_in_training_log(self, store):
        with pytest.raises(DataError):
            store.append_annotation(ann("a"), "evaluation")

    def test_evaluation_log_is_separate(self, store):
        store.append_annotation(ann("a"), "loop")
        store.append_evaluation(ann("b", iteration=-1))
        assert [r.annotation.point_id for r in store.annotations()] == ["a"]
        assert [r.annotation.point_id for r in store.evaluations()] == ["b"]


class TestDurability:
    def test_annotations_survive_reopen(self, tmp_path):
        path = str(tmp_path / "run")
        store = DirectoryStore(path)
        store.append_annotation(ann("a"), "coldstart")
        store.append_annotation(ann("b", False, 1), "loop")
        reopened = DirectoryStore(path)
        assert canonical_log(reopened.annotations()) == canonical_log(store.annotations())
        with pytest.raises(DataError):
            reopened.append_annotation(ann("a"), "loop")

    def test_log_has_schema_header(self, tmp_path):
        path = str(tmp_path / "run")
        DirectoryStore(path).append_annotation(ann("a"), "loop")
        with open(os.path.join(path, "annotations.log"), encoding="utf-8") as fh:
            first = json.loads(fh.readline())
        assert first == {"schema": "labelloop/annotations", "version": 1}

    def test_torn_trailing_line_is_dropped(self, tmp_path):
        path = str(tmp_path / "run")
        store = DirectoryStore(path)
        store.append_annotation(ann("a"), "loop")
        store.append_annotation(ann("b"), "loop")
        log = os.path.join(path, "annotations.log")
        with open(log, "ab") as fh:
            fh.write(b'{"sequence_no": 3, "purpose": "loop", "annot')
        reopened = DirectoryStore(path)
        assert [r.annotation.point_id for r in reopened.annotations()] == ["a", "b"]

    def test_mid_file_corruption_is_an_invariant_error(self, tmp_path):
        path = str(tmp_path / "run")
        store = DirectoryStore(path)
        store.append_annotation(ann("a"), "loop")
        store.append_annotation(ann("b"), "loop")
        log = os.path.join(path, "annotations.log")
        lines = open(log, encoding="utf-8").read().splitlines()
        lines[1] = lines[1][:10]
        with open(log, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
        with pytest.raises(InvariantError, match="corrupt"):
            DirectoryStore(path)

    def test_wrong_schema_header_rejected(self, tmp_path):
        path = str(tmp_path / "run")
        os.makedirs(path)
        with open(os.path.join(path, "annotations.log"), "w", encoding="utf-8") as fh:
            fh.write('{"schema": "other/thing", "version": 9}\n')
        with pytest.raises(InvariantError, match="schema"):
            DirectoryStore(path)

    def test_snapshot_roundtrip_and_atomic_leftovers(self, tmp_path):
        path = str(tmp_path / "run")
        store = DirectoryStore(path)
        state = RunState(config=LoopConfig(seed=5, k=4), iteration=2, phase="selecting")
        store.save_state(state)
        assert store.load_state() == state
        assert not [f for f in os.listdir(path) if f.startswith(".tmp-")]

    def test_missing_snapshot_is_none(self, tmp_path):
        assert DirectoryStore(str(tmp_path / "run")).load_state() is None

    def test_submissions_roundtrip(self, tmp_path):
        path = str(tmp_path / "run")
        store = DirectoryStore(path)
        store.append_submission("loop-1-a", True, "human")
        store.append_submission("loop-1-b", False, "human")
        subs = DirectoryStore(path).submissions()
        assert [(s["request_id"], s["label"]) for s in subs] == [
            ("loop-1-a", True),
            ("loop-1-b", False),
        ]

    def test_report_roundtrip(self, tmp_path):
        store = DirectoryStore(str(tmp_path / "run"))
        store.save_report({"estimated_precision": 0.9, "n_sampled": 10})
        assert store.load_report()["estimated_precision"] == 0.9

    def test_iterations_roundtrip(self, tmp_path):
        store = DirectoryStore(str(tmp_path / "run"))
        store.append_iteration({"iteration": 1, "selected_ids": ["a"]})
        assert store.iterations() == [{"iteration": 1, "selected_ids": ["a"]}]


class TestCanonical:
    def test_timestamps_stripped(self):
        store = MemoryStore()
        store.append_annotation(ann("a", created=1.0), "loop")
        other = MemoryStore()
        other.append_annotation(ann("a", created=999.0), "loop")
        assert canonical_log(store.annotations()) == canonical_log(other.annotations())

    def test_labels_still_compared(self):
        a, b = MemoryStore(), MemoryStore()
        a.append_annotation(ann("a", True), "loop")
        b.append_annotation(ann("a", False), "loop")
        assert canonical_log(a.annotations()) != canonical_log(b.annotations())
