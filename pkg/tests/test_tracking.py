"""Edge scores, edge sets, edge calibration, and the FNR/AFP metrics."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacset import (
    BoundingBox,
    Detection,
    FramePair,
    RiskBudget,
    afp,
    calibrate_edges,
    compose_edge_budget,
    edge_score,
    edge_set,
    fnr,
    top_k_baseline,
    transition_stats,
    transitions,
)

A = BoundingBox(0, 0, 10, 10)
A_SHIFT = BoundingBox(2, 0, 12, 10)  # IoU 8/12 = 2/3 with A
B = BoundingBox(30, 30, 40, 40)
B_SHIFT = BoundingBox(31, 30, 41, 40)


def det(box, cls=0, presence=1, object_id=None):
    return Detection(box, cls, presence, object_id)


def pair_of(frame_t, frame_t1, t=0):
    return FramePair(frame_t=frame_t, frame_t1=frame_t1, sequence_id="s", t=t)


class TestEdgeScore:
    def test_identical_present_boxes(self):
        assert edge_score(det(A), det(A)) == 1.0

    def test_different_classes_zero(self):
        assert edge_score(det(A, cls=0), det(A, cls=1)) == 0.0

    def test_absent_flag_zero(self):
        assert edge_score(det(A), det(A, presence=0)) == 0.0
        assert edge_score(det(A, presence=0), det(A, presence=0)) == 0.0

    def test_overlap_value(self):
        assert edge_score(det(A), det(A_SHIFT)) == pytest.approx(2 / 3)

    @given(
        dx=st.floats(min_value=-15, max_value=15, allow_nan=False),
        dy=st.floats(min_value=-15, max_value=15, allow_nan=False),
    )
    @settings(max_examples=100, deadline=None)
    def test_symmetric_when_gates_pass(self, dx, dy):
        a, b = det(A), det(A.shifted(dx, dy))
        assert edge_score(a, b) == edge_score(b, a)


class TestEdgeSet:
    def test_zero_threshold_full_cross_product(self):
        dets_t = [det(A), det(B)]
        dets_t1 = [det(A_SHIFT), det(B_SHIFT)]
        assert len(edge_set(dets_t, dets_t1, 0.0)) == 4

    def test_filters_by_score(self):
        dets_t = [det(A), det(B)]
        dets_t1 = [det(A_SHIFT), det(B_SHIFT)]
        kept = edge_set(dets_t, dets_t1, 0.5)
        assert kept == [(dets_t[0], dets_t1[0]), (dets_t[1], dets_t1[1])]

    def test_empty_side_empty_set(self):
        assert edge_set([], [det(A)], 0.0) == []
        assert edge_set([det(A)], [], 0.0) == []

    @given(taus=st.tuples(st.floats(0, 1), st.floats(0, 1)))
    @settings(max_examples=50, deadline=None)
    def test_nesting(self, taus):
        lo, hi = sorted(taus)
        dets_t = [det(A), det(B)]
        dets_t1 = [det(A_SHIFT), det(B_SHIFT), det(A)]

        def keys(pairs):
            return {(id(a), id(b)) for a, b in pairs}

        assert keys(edge_set(dets_t, dets_t1, hi)) <= keys(edge_set(dets_t, dets_t1, lo))


class TestTransitions:
    def test_identity_matching(self):
        pair = pair_of(
            [det(A, object_id="a"), det(B, object_id="b")],
            [det(B_SHIFT, object_id="b"), det(A_SHIFT, object_id="a")],
        )
        found = transitions(pair)
        assert [(t.object_id, u.object_id) for t, u in found] == [("a", "a"), ("b", "b")]

    def test_vanishing_object_excluded(self):
        pair = pair_of(
            [det(A, object_id="a"), det(B, object_id="gone")],
            [det(A_SHIFT, object_id="a")],
        )
        assert len(transitions(pair)) == 1
        n_trans, n_excluded = transition_stats([pair])
        assert (n_trans, n_excluded) == (1, 1)

    def test_anonymous_detections_ignored(self):
        pair = pair_of([det(A)], [det(A_SHIFT)])
        assert transitions(pair) == []


class TestCalibrateEdges:
    def test_static_world_maximal_threshold(self):
        pairs = [
            pair_of([det(A, object_id="a")], [det(A, object_id="a")], t=t)
            for t in range(8)
        ]
        th = calibrate_edges(pairs, RiskBudget(0.5, 0.5))
        assert th.tau == 1.0
        assert fnr(pairs, th) == 0.0

    def test_single_record_infeasible(self):
        pairs = [pair_of([det(A, object_id="a")], [det(A, object_id="a")])]
        th = calibrate_edges(pairs, RiskBudget(0.1, 0.01))
        assert th.tau == 0.0
        assert th.infeasible

    def test_no_transitions_rejected(self):
        with pytest.raises(ValueError):
            calibrate_edges([pair_of([det(A)], [det(A)])], RiskBudget(0.5, 0.5))


class TestFnrAfp:
    def crossing_pair(self):
        # object "a" moves, object "b" sits on top of a's old position
        return pair_of(
            [det(A, object_id="a"), det(B, object_id="b")],
            [det(A_SHIFT, object_id="a"), det(B_SHIFT, object_id="b")],
        )

    def test_fnr_zero_at_trivial_threshold(self):
        assert fnr([self.crossing_pair()], 0.0) == 0.0

    def test_fnr_one_at_infinite_threshold(self):
        assert fnr([self.crossing_pair()], math.inf) == 1.0

    def test_fnr_counts_misses(self):
        # at tau 0.9 only exact overlaps survive; both moved objects are missed
        assert fnr([self.crossing_pair()], 0.9) == 1.0

    def test_afp_zero_for_singleton_sets(self):
        # tau 0.5 keeps exactly the two self pairs
        assert afp([self.crossing_pair()], 0.5) == 0.0

    def test_afp_global_full_cross_product(self):
        # tau = 0: m*n pairs in the set, true pair inside
        pair = self.crossing_pair()
        assert afp([pair], 0.0, anchoring="global") == 2 * 2 - 1

    def test_afp_object_anchoring_counts_out_edges(self):
        pair = self.crossing_pair()
        # each object's out-edges at tau 0: 2 partners, minus its true pair
        assert afp([pair], 0.0, anchoring="object") == 1.0

    def test_afp_rejects_unknown_anchoring(self):
        with pytest.raises(ValueError):
            afp([self.crossing_pair()], 0.0, anchoring="per-frame")

    def test_empty_eval_rejected(self):
        with pytest.raises(ValueError):
            fnr([pair_of([det(A)], [det(A)])], 0.0)

    @given(taus=st.tuples(st.floats(0, 1), st.floats(0, 1)))
    @settings(max_examples=60, deadline=None)
    def test_fnr_monotone_afp_antitone(self, taus):
        lo, hi = sorted(taus)
        pairs = [self.crossing_pair(), pair_of(
            [det(A, object_id="a"), det(A_SHIFT, object_id="c")],
            [det(A, object_id="a"), det(A_SHIFT, object_id="c")],
        )]
        assert fnr(pairs, lo) <= fnr(pairs, hi)
        assert afp(pairs, lo) >= afp(pairs, hi)


class TestTopKBaseline:
    def test_top1_picks_best_overlap(self):
        pair = pair_of(
            [det(A, object_id="a")],
            [det(A_SHIFT, object_id="a"), det(B, object_id="b")],
        )
        k_fnr, k_afp = top_k_baseline([pair], 1)
        assert (k_fnr, k_afp) == (0.0, 0.0)

    def test_top1_miss_on_crossing(self):
        # the impostor sits exactly on a's old position; a moved far enough
        # that the impostor does not pass for its new box (IoU 30/170 < 0.25)
        impostor = A
        moved = BoundingBox(7, 0, 17, 10)
        pair = pair_of(
            [det(A, object_id="a")],
            [det(impostor, object_id="b"), det(moved, object_id="a")],
        )
        k_fnr, k_afp = top_k_baseline([pair], 1)
        assert k_fnr == 1.0
        assert k_afp == 1.0

    def test_k_covering_all_detections(self):
        pair = pair_of(
            [det(A, object_id="a")],
            [det(B, object_id="b"), det(A_SHIFT, object_id="a")],
        )
        k_fnr, k_afp = top_k_baseline([pair], 5)
        assert k_fnr == 0.0  # the true partner is among the detections
        assert k_afp == 1.0  # both partners kept, one spurious

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            top_k_baseline([pair_of([det(A, object_id="a")], [det(A, object_id="a")])], 0)


class TestComposeEdgeBudget:
    def test_table_style_sums(self):
        assert compose_edge_budget((0.2, 1e-5), (0.005, 0.01)).epsilon == pytest.approx(0.205)
        assert compose_edge_budget((0.2, 1e-5), (0.01, 0.01)).epsilon == pytest.approx(0.21)
        assert compose_edge_budget((0.2, 1e-5), (0.001, 0.01)).epsilon == pytest.approx(0.201)

    def test_zero_edge_budget_keeps_detection(self):
        composed = compose_edge_budget((0.2, 0.05), (0.0, 0.0))
        assert composed.epsilon == 0.2
        assert composed.delta == 0.05

    def test_degenerate_flagged(self):
        assert compose_edge_budget((0.7, 0.5), (0.4, 0.6)).degenerate
