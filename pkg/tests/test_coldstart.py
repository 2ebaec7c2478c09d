import pytest
from hypothesis import given, settings, strategies as st

from labelloop.coldstart import coldstart_requests, execute_coldstart, plan_coldstart
from labelloop.core import DataError, DataPoint, Pool, ScoredPoint
from labelloop.oracles import ScriptedOracle


def pool_of(n):
    return Pool([DataPoint(f"p{i:03d}", f"item {i}", i % 2 == 0) for i in range(n)])


def scores_for(pool, values):
    return [ScoredPoint(p.id, v) for p, v in zip(pool, values)]


class FixedScorer:
    def __init__(self, by_id):
        self.by_id = by_id

    def score(self, point):
        return self.by_id[point.id]


class TestPlan:
    def test_picks_extremes(self):
        pool = pool_of(6)
        scores = scores_for(pool, [0.9, 0.1, 0.8, 0.2, 0.5, 0.6])
        plan = plan_coldstart(pool, None, 4, scores=scores)
        assert plan.positive_candidates == ["p000", "p002"]
        assert plan.negative_candidates == ["p001", "p003"]

    def test_balanced_halves(self):
        pool = pool_of(40)
        scores = scores_for(pool, [i / 40 for i in range(40)])
        plan = plan_coldstart(pool, None, 16, scores=scores)
        assert len(plan.positive_candidates) == 8
        assert len(plan.negative_candidates) == 8

    def test_all_ties_still_disjoint_and_ordered_by_id(self):
        pool = pool_of(8)
        scores = scores_for(pool, [0.5] * 8)
        plan = plan_coldstart(pool, None, 4, scores=scores)
        assert plan.positive_candidates == ["p000", "p001"]
        assert plan.negative_candidates == ["p002", "p003"]
        assert not set(plan.positive_candidates) & set(plan.negative_candidates)

    def test_uses_scorer_when_no_scores_given(self):
        pool = pool_of(4)
        scorer = FixedScorer({"p000": 0.1, "p001": 0.9, "p002": 0.4, "p003": 0.6})
        plan = plan_coldstart(pool, scorer, 2)
        assert plan.positive_candidates == ["p001"]
        assert plan.negative_candidates == ["p000"]

    @pytest.mark.parametrize("k", [3, 0, -4])
    def test_bad_k_rejected(self, k):
        with pytest.raises(DataError, match="even"):
            plan_coldstart(pool_of(10), None, k)

    def test_pool_smaller_than_k_rejected(self):
        with pytest.raises(DataError):
            plan_coldstart(pool_of(3), None, 4)

    @given(
        st.lists(
            st.floats(0.0, 1.0, allow_nan=False), min_size=8, max_size=40
        ),
        st.sampled_from([2, 4, 6, 8]),
    )
    @settings(max_examples=100)
    def test_balance_and_disjointness_property(self, values, k):
        pool = pool_of(len(values))
        plan = plan_coldstart(pool, None, k, scores=scores_for(pool, values))
        pos, neg = set(plan.positive_candidates), set(plan.negative_candidates)
        assert len(pos) == k // 2 and len(neg) == k // 2
        assert not pos & neg
        # every chosen positive scores >= every chosen negative
        by_id = {s.point_id: s.p_positive for s in plan.scores_used}
        assert min(by_id[p] for p in pos) >= max(by_id[n] for n in neg) or not (
            pos and neg
        )


class TestExecute:
    def test_requests_positives_first_iteration_zero(self):
        pool = pool_of(6)
        plan = plan_coldstart(
            pool, None, 4, scores=scores_for(pool, [0.9, 0.1, 0.8, 0.2, 0.5, 0.5])
        )
        reqs = coldstart_requests(plan, pool)
        assert [r.point.id for r in reqs] == ["p000", "p002", "p001", "p003"]
        assert all(r.purpose == "coldstart" and r.iteration == 0 for r in reqs)
        assert reqs[0].request_id == "coldstart-0-p000"

    def test_oracle_labels_recorded_even_when_contradicting_scores(self):
        pool = pool_of(6)  # p001/p003 hidden-negative but also low-scored
        scores = scores_for(pool, [0.1, 0.9, 0.2, 0.8, 0.5, 0.5])
        plan = plan_coldstart(pool, None, 4, scores=scores)
        # zero-shot says p001/p003 look positive; ground truth disagrees
        annotations = execute_coldstart(plan, ScriptedOracle(), pool)
        got = {a.point_id: a.label for a in annotations}
        assert got == {"p001": False, "p003": False, "p000": True, "p002": True}
        assert all(a.iteration == 0 for a in annotations)
