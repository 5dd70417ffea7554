"""Axis-aligned box arithmetic: IoU and the overlap-based box identity relation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

__all__ = [
    "BOX_IDENTITY_MIN_IOU",
    "BoundingBox",
    "MatchedProposal",
    "iou",
    "same_box",
    "match_truth_to_proposals",
]

# Two boxes count as the same object when their IoU is strictly above this.
# Strict >, so an IoU of exactly 0.25 is deterministically "different".
BOX_IDENTITY_MIN_IOU = 0.25


@dataclass(frozen=True)
class BoundingBox:
    """Closed-interval box; area has no +1 pixel correction, so coordinates
    may be pixels or normalized units as long as one unit is used per dataset."""

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self) -> None:
        for v in (self.x_min, self.y_min, self.x_max, self.y_max):
            if not math.isfinite(v):
                raise ValueError(f"box coordinates must be finite, got {self}")
        if self.x_min > self.x_max or self.y_min > self.y_max:
            raise ValueError(f"box must satisfy min <= max on both axes, got {self}")

    @property
    def area(self) -> float:
        return (self.x_max - self.x_min) * (self.y_max - self.y_min)

    def shifted(self, dx: float, dy: float) -> "BoundingBox":
        return BoundingBox(self.x_min + dx, self.y_min + dy, self.x_max + dx, self.y_max + dy)


def iou(a: BoundingBox, b: BoundingBox) -> float:
    """Intersection area over union area; 0 when the union has zero area."""
    ix = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    iy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    inter = max(0.0, ix) * max(0.0, iy)
    union = a.area + b.area - inter
    if union <= 0.0:
        return 0.0
    return inter / union


def same_box(pred: BoundingBox, truth: BoundingBox) -> bool:
    """Box identity: IoU strictly above BOX_IDENTITY_MIN_IOU."""
    return iou(pred, truth) > BOX_IDENTITY_MIN_IOU


class MatchedProposal(NamedTuple):
    index: int
    box: BoundingBox
    score: float


def match_truth_to_proposals(
    truth: BoundingBox,
    proposals: Sequence[tuple[BoundingBox, float]],
) -> MatchedProposal | None:
    """Among proposals that are the same box as ``truth``, the one with the
    smallest score; equal scores keep the first occurrence in input order."""
    best: MatchedProposal | None = None
    for index, (box, score) in enumerate(proposals):
        if not same_box(box, truth):
            continue
        if best is None or score < best.score:
            best = MatchedProposal(index, box, score)
    return best
