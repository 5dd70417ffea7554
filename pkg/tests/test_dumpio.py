"""Dump parsing: golden fixture, round-trip, strict/lenient modes, versioning."""

import io

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pacset import (
    BoundingBox,
    Dataset,
    Detection,
    ImageRecord,
    IntegrityError,
    ParseError,
    gen_world,
    crowded_tracking_config,
    parse_dump,
    serialize_dump,
)

GOLDEN = """\
{"kind": "header", "version": 1}
{"kind": "image", "image_id": "a", "proposals": [[0, 0, 10, 10, 0.9], [20, 20, 30, 30, 0.4]], "sequence_id": "s0", "frame_index": 0}
{"kind": "presence", "image_id": "a", "proposal_index": 0, "class_label": 1, "score": 0.85}
{"kind": "location", "image_id": "a", "proposal_index": 0, "class_label": 1, "box": [1, 0, 11, 10], "density": 0.7}
{"kind": "truth", "image_id": "a", "box": [0, 0, 10, 10], "class_label": 1, "presence": 1, "object_id": "obj-1", "sequence_id": "s0", "frame_index": 0}
{"kind": "image", "image_id": "b", "proposals": [[0, 1, 10, 11, 0.8]], "sequence_id": "s0", "frame_index": 1}
{"kind": "truth", "image_id": "b", "box": [0, 1, 10, 11], "class_label": 1, "presence": 1, "object_id": "obj-1", "sequence_id": "s0", "frame_index": 1}
"""


class TestParseGolden:
    def test_two_image_fixture(self):
        dataset = parse_dump(io.StringIO(GOLDEN))
        assert list(dataset.images) == ["a", "b"]
        a = dataset.images["a"]
        assert a.proposals == [
            (BoundingBox(0, 0, 10, 10), 0.9),
            (BoundingBox(20, 20, 30, 30), 0.4),
        ]
        assert a.presence_scores == {(0, 1): 0.85}
        assert a.location_candidates == {(0, 1): [(BoundingBox(1, 0, 11, 10), 0.7)]}
        assert a.ground_truth == [Detection(BoundingBox(0, 0, 10, 10), 1, 1, "obj-1")]
        assert (a.sequence_id, a.frame_index) == ("s0", 0)

    def test_frame_pairs_from_fixture(self):
        dataset = parse_dump(io.StringIO(GOLDEN))
        pairs = dataset.frame_pairs()
        assert len(pairs) == 1
        assert pairs[0].sequence_id == "s0"
        assert pairs[0].t == 0
        assert pairs[0].frame_t[0].object_id == "obj-1"
        assert pairs[0].image_t is dataset.images["a"]

    def test_empty_file_gives_empty_dataset(self):
        dataset = parse_dump(io.StringIO(""))
        assert dataset.images == {}


class TestParseErrors:
    def test_missing_header(self):
        with pytest.raises(ParseError, match="header"):
            parse_dump(io.StringIO('{"kind": "image", "image_id": "a", "proposals": []}\n'))

    def test_unknown_version_rejected(self):
        with pytest.raises(ParseError, match="version"):
            parse_dump(io.StringIO('{"kind": "header", "version": 99}\n'))

    def test_malformed_line_reports_number(self):
        text = '{"kind": "header", "version": 1}\nnot json\n'
        with pytest.raises(ParseError, match="line 2"):
            parse_dump(io.StringIO(text))

    def test_unknown_kind_rejected(self):
        text = '{"kind": "header", "version": 1}\n{"kind": "banana"}\n'
        with pytest.raises(ParseError):
            parse_dump(io.StringIO(text))

    def test_non_finite_number_rejected(self):
        text = (
            '{"kind": "header", "version": 1}\n'
            '{"kind": "image", "image_id": "a", "proposals": [[0, 0, 1, 1, Infinity]]}\n'
        )
        with pytest.raises(ParseError):
            parse_dump(io.StringIO(text))

    def test_dangling_image_reference_strict(self):
        text = (
            '{"kind": "header", "version": 1}\n'
            '{"kind": "presence", "image_id": "ghost", "proposal_index": 0,'
            ' "class_label": 0, "score": 0.5}\n'
        )
        with pytest.raises(IntegrityError, match="ghost"):
            parse_dump(io.StringIO(text))

    def test_dangling_proposal_index_strict(self):
        text = (
            '{"kind": "header", "version": 1}\n'
            '{"kind": "image", "image_id": "a", "proposals": []}\n'
            '{"kind": "presence", "image_id": "a", "proposal_index": 3,'
            ' "class_label": 0, "score": 0.5}\n'
        )
        with pytest.raises(IntegrityError):
            parse_dump(io.StringIO(text))

    def test_lenient_mode_drops_and_counts(self):
        text = (
            '{"kind": "header", "version": 1}\n'
            '{"kind": "image", "image_id": "a", "proposals": []}\n'
            '{"kind": "presence", "image_id": "ghost", "proposal_index": 0,'
            ' "class_label": 0, "score": 0.5}\n'
        )
        dataset = parse_dump(io.StringIO(text), strict=False)
        assert dataset.dropped_records == 1
        assert list(dataset.images) == ["a"]

    def test_conflicting_sequence_metadata(self):
        text = (
            '{"kind": "header", "version": 1}\n'
            '{"kind": "image", "image_id": "a", "proposals": []}\n'
            '{"kind": "truth", "image_id": "a", "box": [0, 0, 1, 1], "class_label": 0,'
            ' "presence": 1, "object_id": null, "sequence_id": "s0", "frame_index": 0}\n'
            '{"kind": "truth", "image_id": "a", "box": [0, 0, 1, 1], "class_label": 0,'
            ' "presence": 1, "object_id": null, "sequence_id": "s1", "frame_index": 0}\n'
        )
        with pytest.raises(IntegrityError, match="conflicting"):
            parse_dump(io.StringIO(text))


class TestRoundTrip:
    def test_world_round_trips_exactly(self):
        dataset = gen_world(crowded_tracking_config(seed=8))
        text = serialize_dump(dataset)
        assert parse_dump(io.StringIO(text)) == dataset

    def test_serialize_is_stable(self):
        dataset = gen_world(crowded_tracking_config(seed=8))
        assert serialize_dump(dataset) == serialize_dump(dataset)

    @given(
        scores=st.lists(
            st.floats(min_value=0, max_value=1, allow_nan=False), min_size=1, max_size=4
        ),
        coords=st.lists(st.integers(min_value=0, max_value=40), min_size=4, max_size=4),
    )
    @settings(max_examples=50, deadline=None)
    def test_random_records_round_trip(self, scores, coords):
        x, y, w, h = coords
        box = BoundingBox(x, y, x + w + 1, y + h + 1)
        image = ImageRecord(
            image_id="im",
            proposals=[(box, s) for s in scores],
            presence_scores={(0, 0): scores[0]},
            location_candidates={(0, 0): [(box, s) for s in scores]},
            ground_truth=[Detection(box, 0, 1, "obj")],
            sequence_id="s",
            frame_index=2,
        )
        dataset = Dataset(images={"im": image})
        assert parse_dump(io.StringIO(serialize_dump(dataset))) == dataset
