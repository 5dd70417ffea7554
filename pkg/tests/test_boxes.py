"""Box arithmetic against hand area computations and a rasterized pixel oracle."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacset import BoundingBox, iou, match_truth_to_proposals, same_box


def pixel_iou(a: BoundingBox, b: BoundingBox) -> float:
    """Independent oracle for integer boxes: count unit cells in each region."""

    def cells(box):
        return {
            (x, y)
            for x in range(int(box.x_min), int(box.x_max))
            for y in range(int(box.y_min), int(box.y_max))
        }

    ca, cb = cells(a), cells(b)
    union = ca | cb
    if not union:
        return 0.0
    return len(ca & cb) / len(union)


int_boxes = st.builds(
    lambda x, y, w, h: BoundingBox(x, y, x + w, y + h),
    st.integers(min_value=0, max_value=48),
    st.integers(min_value=0, max_value=48),
    st.integers(min_value=0, max_value=16),
    st.integers(min_value=0, max_value=16),
)

# Side lengths are zero or normal scale; subnormal sides would be absorbed
# by coordinate shifts and test float rounding instead of geometry.
side = st.one_of(st.just(0.0), st.floats(min_value=1e-3, max_value=30, allow_nan=False))

float_boxes = st.builds(
    lambda x, y, w, h: BoundingBox(x, y, x + w, y + h),
    st.floats(min_value=-50, max_value=50, allow_nan=False),
    st.floats(min_value=-50, max_value=50, allow_nan=False),
    side,
    side,
)


class TestBoundingBox:
    def test_rejects_inverted_coordinates(self):
        with pytest.raises(ValueError):
            BoundingBox(3, 0, 1, 2)
        with pytest.raises(ValueError):
            BoundingBox(0, 5, 2, 1)

    def test_zero_area_permitted(self):
        assert BoundingBox(1, 1, 1, 1).area == 0.0

    def test_area_has_no_pixel_correction(self):
        assert BoundingBox(0, 0, 2, 3).area == 6.0


class TestIou:
    def test_identity(self):
        box = BoundingBox(0, 0, 2, 2)
        assert iou(box, box) == 1.0

    def test_disjoint(self):
        assert iou(BoundingBox(0, 0, 1, 1), BoundingBox(5, 5, 6, 6)) == 0.0

    def test_hand_area_arithmetic(self):
        # intersection 1, union 4 + 4 - 1
        value = iou(BoundingBox(0, 0, 2, 2), BoundingBox(1, 1, 3, 3))
        assert value == pytest.approx(1 / 7)

    def test_zero_area_union(self):
        point = BoundingBox(2, 2, 2, 2)
        assert iou(point, point) == 0.0

    @given(a=float_boxes, b=float_boxes)
    @settings(max_examples=250, deadline=None)
    def test_symmetric_and_bounded(self, a, b):
        value = iou(a, b)
        assert value == iou(b, a)
        assert 0.0 <= value <= 1.0

    @given(
        a=float_boxes,
        b=float_boxes,
        dx=st.floats(min_value=-100, max_value=100, allow_nan=False),
        dy=st.floats(min_value=-100, max_value=100, allow_nan=False),
    )
    @settings(max_examples=250, deadline=None)
    def test_translation_invariance(self, a, b, dx, dy):
        assert iou(a.shifted(dx, dy), b.shifted(dx, dy)) == pytest.approx(
            iou(a, b), abs=1e-12
        )

    @given(a=int_boxes, b=int_boxes)
    @settings(max_examples=300, deadline=None)
    def test_matches_pixel_count_oracle(self, a, b):
        assert iou(a, b) == pytest.approx(pixel_iou(a, b), abs=1e-12)


class TestSameBox:
    def test_identical_boxes_match(self):
        box = BoundingBox(0, 0, 4, 4)
        assert same_box(box, box)

    def test_low_overlap_rejected(self):
        assert not same_box(BoundingBox(0, 0, 2, 2), BoundingBox(1, 1, 3, 3))  # IoU 1/7

    def test_constructed_pair_above_threshold(self):
        # IoU 10/13 > 0.25
        assert same_box(BoundingBox(0, 0, 10, 10), BoundingBox(0, 0, 10, 13))

    def test_exactly_quarter_is_not_same(self):
        # IoU exactly 1/4: intersection 1x1 against union 4
        a = BoundingBox(0, 0, 1, 1)
        b = BoundingBox(0, 0, 2, 2)
        assert iou(a, b) == 0.25
        assert not same_box(a, b)

    @given(a=int_boxes, b=int_boxes)
    @settings(max_examples=300, deadline=None)
    def test_agrees_with_pixel_oracle(self, a, b):
        assert same_box(a, b) == (pixel_iou(a, b) > 0.25)


class TestMatchTruthToProposals:
    truth = BoundingBox(10, 10, 20, 20)

    def test_no_match_returns_none(self):
        proposals = [(BoundingBox(50, 50, 60, 60), 0.9)]
        assert match_truth_to_proposals(self.truth, proposals) is None

    def test_smallest_score_wins(self):
        proposals = [
            (BoundingBox(10, 10, 20, 21), 0.9),
            (BoundingBox(9, 10, 20, 20), 0.4),
        ]
        matched = match_truth_to_proposals(self.truth, proposals)
        assert matched is not None
        assert matched.score == 0.4
        assert matched.index == 1

    def test_equal_scores_keep_first(self):
        proposals = [
            (BoundingBox(10, 10, 20, 21), 0.5),
            (BoundingBox(9, 10, 20, 20), 0.5),
        ]
        matched = match_truth_to_proposals(self.truth, proposals)
        assert matched.index == 0

    def test_empty_proposals(self):
        assert match_truth_to_proposals(self.truth, []) is None
