"""Line-oriented dump format bridging external detectors and this library.

One JSON object per line; the first line of any non-empty dump is a header
carrying the mandatory format version.  Real detector stacks can produce the
format with a few lines of export code, and the simulator writes it too, so
synthetic and real dumps are interchangeable downstream.

Record kinds:

    {"kind": "header", "version": 1}
    {"kind": "image", "image_id", "proposals": [[x0, y0, x1, y1, score], ...],
     "sequence_id"?, "frame_index"?}
    {"kind": "presence", "image_id", "proposal_index", "class_label", "score"}
    {"kind": "location", "image_id", "proposal_index", "class_label",
     "box": [x0, y0, x1, y1], "density"}
    {"kind": "truth", "image_id", "box": [x0, y0, x1, y1], "class_label",
     "presence", "object_id", "sequence_id", "frame_index"}

Score/presence/location lines may appear before or after the image they
reference; references are resolved once the whole file is read.  Strict mode
rejects dangling references; lenient mode drops them and counts the drops.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import TextIO

from .boxes import BoundingBox
from .detection import Detection, ImageRecord
from .tracking import FramePair

__all__ = [
    "DUMP_VERSION",
    "DumpError",
    "ParseError",
    "IntegrityError",
    "Dataset",
    "parse_dump",
    "serialize_dump",
]

DUMP_VERSION = 1


class DumpError(ValueError):
    """Base class for dump format failures."""


class ParseError(DumpError):
    """A line could not be understood; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class IntegrityError(DumpError):
    """A well-formed record references something that does not exist."""


@dataclass
class Dataset:
    """Parsed dump: image records keyed by id, in file order."""

    images: dict[str, ImageRecord] = field(default_factory=dict)
    dropped_records: int = 0

    def image_list(self) -> list[ImageRecord]:
        return list(self.images.values())

    def frame_pairs(self) -> list[FramePair]:
        """Adjacent-frame pairs per sequence, in (sequence, frame) order.

        Only consecutive frame indices pair up; a missing frame splits the
        sequence rather than bridging the gap.
        """
        sequences: dict[str, list[ImageRecord]] = {}
        for image in self.images.values():
            if image.sequence_id is None or image.frame_index is None:
                continue
            sequences.setdefault(image.sequence_id, []).append(image)
        pairs: list[FramePair] = []
        for seq_id in sorted(sequences):
            frames = sorted(sequences[seq_id], key=lambda im: im.frame_index)
            for earlier, later in zip(frames, frames[1:]):
                if later.frame_index != earlier.frame_index + 1:
                    continue
                pairs.append(
                    FramePair(
                        frame_t=list(earlier.ground_truth),
                        frame_t1=list(later.ground_truth),
                        sequence_id=seq_id,
                        t=earlier.frame_index,
                        image_t=earlier,
                        image_t1=later,
                    )
                )
        return pairs


def _reject_nonfinite(value: str) -> float:
    raise ValueError(f"non-finite numeric field: {value}")


def _require(record: dict, key: str):
    if key not in record:
        raise KeyError(f"missing field {key!r}")
    return record[key]


def _as_box(values) -> BoundingBox:
    x0, y0, x1, y1 = (float(v) for v in values)
    return BoundingBox(x0, y0, x1, y1)


def parse_dump(source: str | Path | TextIO, strict: bool = True) -> Dataset:
    """Parse a dump into a fully resolved Dataset.

    ``source`` is a path or an open text stream.  Malformed lines raise
    ParseError with the line number.  Dangling references raise
    IntegrityError in strict mode and are dropped (counted) otherwise.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            return parse_dump(handle, strict=strict)

    images: dict[str, ImageRecord] = {}
    deferred: list[tuple[int, dict]] = []
    saw_header = False

    for line_number, raw in enumerate(source, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line, parse_constant=_reject_nonfinite)
        except ValueError as exc:
            raise ParseError(line_number, f"invalid JSON: {exc}") from exc
        if not isinstance(record, dict) or "kind" not in record:
            raise ParseError(line_number, "record must be an object with a 'kind' field")
        kind = record["kind"]
        if not saw_header:
            if kind != "header":
                raise ParseError(line_number, "first record must be the header")
            version = record.get("version")
            if version != DUMP_VERSION:
                raise ParseError(
                    line_number,
                    f"unsupported dump version {version!r} (expected {DUMP_VERSION})",
                )
            saw_header = True
            continue
        try:
            if kind == "header":
                raise ValueError("duplicate header")
            elif kind == "image":
                image_id = str(_require(record, "image_id"))
                if image_id in images:
                    raise ValueError(f"duplicate image_id {image_id!r}")
                proposals = [
                    (_as_box(entry[:4]), float(entry[4]))
                    for entry in _require(record, "proposals")
                ]
                seq = record.get("sequence_id")
                frame = record.get("frame_index")
                images[image_id] = ImageRecord(
                    image_id=image_id,
                    proposals=proposals,
                    sequence_id=None if seq is None else str(seq),
                    frame_index=None if frame is None else int(frame),
                )
            elif kind in ("presence", "location", "truth"):
                deferred.append((line_number, record))
            else:
                raise ValueError(f"unknown record kind {kind!r}")
        except (KeyError, ValueError, TypeError, IndexError) as exc:
            raise ParseError(line_number, str(exc)) from exc

    dataset = Dataset(images=images)
    for line_number, record in deferred:
        try:
            _resolve(dataset, record, strict)
        except IntegrityError:
            raise
        except (KeyError, ValueError, TypeError, IndexError) as exc:
            raise ParseError(line_number, str(exc)) from exc
    return dataset


def _resolve(dataset: Dataset, record: dict, strict: bool) -> None:
    image_id = str(_require(record, "image_id"))
    image = dataset.images.get(image_id)
    if image is None:
        if strict:
            raise IntegrityError(
                f"{record['kind']} record references unknown image_id {image_id!r}"
            )
        dataset.dropped_records += 1
        return
    kind = record["kind"]
    if kind == "truth":
        truth = Detection(
            box=_as_box(_require(record, "box")),
            class_label=int(_require(record, "class_label")),
            presence=int(_require(record, "presence")),
            object_id=None if record.get("object_id") is None else str(record["object_id"]),
        )
        image.ground_truth.append(truth)
        seq = record.get("sequence_id")
        frame = record.get("frame_index")
        seq = None if seq is None else str(seq)
        frame = None if frame is None else int(frame)
        for attr, value in (("sequence_id", seq), ("frame_index", frame)):
            if value is None:
                continue
            current = getattr(image, attr)
            if current is None:
                setattr(image, attr, value)
            elif current != value:
                raise IntegrityError(
                    f"conflicting {attr} for image {image_id!r}: {current!r} vs {value!r}"
                )
        return

    index = int(_require(record, "proposal_index"))
    if not 0 <= index < len(image.proposals):
        if strict:
            raise IntegrityError(
                f"{kind} record references proposal {index} of image {image_id!r} "
                f"which has {len(image.proposals)} proposals"
            )
        dataset.dropped_records += 1
        return
    class_label = int(_require(record, "class_label"))
    if kind == "presence":
        score = float(_require(record, "score"))
        if not 0.0 <= score <= 1.0:
            raise ValueError(f"presence score must lie in [0, 1], got {score}")
        image.presence_scores[(index, class_label)] = score
    else:
        density = float(_require(record, "density"))
        if density < 0.0:
            raise ValueError(f"density must be >= 0, got {density}")
        image.location_candidates.setdefault((index, class_label), []).append(
            (_as_box(_require(record, "box")), density)
        )


def _box_fields(box: BoundingBox) -> list[float]:
    return [box.x_min, box.y_min, box.x_max, box.y_max]


def serialize_dump(dataset: Dataset, target: str | Path | TextIO | None = None) -> str | None:
    """Write a dataset in the dump format; returns the text when target is None.

    Floats serialize at full round-trip precision, so parse(serialize(d))
    reproduces d exactly.
    """
    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as handle:
            serialize_dump(dataset, handle)
        return None
    buffer = io.StringIO() if target is None else target

    def emit(record: dict) -> None:
        buffer.write(json.dumps(record) + "\n")

    emit({"kind": "header", "version": DUMP_VERSION})
    for image in dataset.images.values():
        record = {
            "kind": "image",
            "image_id": image.image_id,
            "proposals": [[*_box_fields(box), score] for box, score in image.proposals],
        }
        if image.sequence_id is not None:
            record["sequence_id"] = image.sequence_id
        if image.frame_index is not None:
            record["frame_index"] = image.frame_index
        emit(record)
        for (index, class_label) in sorted(image.presence_scores):
            emit(
                {
                    "kind": "presence",
                    "image_id": image.image_id,
                    "proposal_index": index,
                    "class_label": class_label,
                    "score": image.presence_scores[(index, class_label)],
                }
            )
        for (index, class_label) in sorted(image.location_candidates):
            for box, density in image.location_candidates[(index, class_label)]:
                emit(
                    {
                        "kind": "location",
                        "image_id": image.image_id,
                        "proposal_index": index,
                        "class_label": class_label,
                        "box": _box_fields(box),
                        "density": density,
                    }
                )
        for truth in image.ground_truth:
            emit(
                {
                    "kind": "truth",
                    "image_id": image.image_id,
                    "box": _box_fields(truth.box),
                    "class_label": truth.class_label,
                    "presence": truth.presence,
                    "object_id": truth.object_id,
                    "sequence_id": image.sequence_id,
                    "frame_index": image.frame_index,
                }
            )
    if target is None:
        return buffer.getvalue()
    return None
