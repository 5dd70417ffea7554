"""Edge prediction sets linking detections across adjacent frames.

An edge scores a pair of detections by box overlap, gated on matching class
labels and both-present flags.  Calibrating the edge threshold reduces to
the generic one-dimensional problem: each true frame-to-frame transition
(an object identity present in both frames) contributes the score of its
identity-matched detection pair as one calibration record.

Evaluation walks every true transition.  A transition is covered when some
pair in the edge set represents it, i.e. both pair members match the true
detections (equal class and flag, same box by identity).  Objects with no
transition (exited or occluded at t+1) carry no loss and are excluded; use
:func:`transition_stats` to report how many were skipped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .binomial import RiskBudget
from .boxes import iou
from .calibration import Threshold, _tau_value, calibrate_threshold
from .detection import (
    ComposedBudget,
    Detection,
    DetectorThresholds,
    ImageRecord,
    _eps_delta,
    detection_matches,
    detection_set,
)

__all__ = [
    "FramePair",
    "EdgeThreshold",
    "edge_score",
    "edge_set",
    "transitions",
    "transition_stats",
    "true_detections",
    "detector_provider",
    "calibrate_edges",
    "fnr",
    "afp",
    "top_k_baseline",
    "compose_edge_budget",
]


@dataclass
class FramePair:
    """Ground truth for two adjacent frames of one sequence.

    ``image_t``/``image_t1`` optionally carry the full detector dumps so an
    estimated detection provider can be evaluated on the pair; providers
    built from ground truth alone ignore them.
    """

    frame_t: list[Detection]
    frame_t1: list[Detection]
    sequence_id: str
    t: int
    image_t: ImageRecord | None = None
    image_t1: ImageRecord | None = None


# An edge threshold is an ordinary calibrated threshold.
EdgeThreshold = Threshold

DetectionProvider = Callable[[FramePair], tuple[list[Detection], list[Detection]]]


def edge_score(a: Detection, b: Detection) -> float:
    """Box IoU when classes match and both flags are present, else 0."""
    if a.class_label == b.class_label and a.presence == 1 and b.presence == 1:
        return iou(a.box, b.box)
    return 0.0


def edge_set(
    dets_t: Sequence[Detection],
    dets_t1: Sequence[Detection],
    tau: EdgeThreshold | float,
) -> list[tuple[Detection, Detection]]:
    """All cross pairs whose edge score clears the threshold.

    tau = 0 keeps the full cross product (every score is >= 0 by design).
    """
    t = _tau_value(tau)
    return [
        (a, b)
        for a in dets_t
        for b in dets_t1
        if edge_score(a, b) >= t
    ]


def transitions(pair: FramePair) -> list[tuple[Detection, Detection]]:
    """Identity-matched (truth_t, truth_t1) pairs: the true transitions."""
    later = {
        det.object_id: det
        for det in pair.frame_t1
        if det.object_id is not None and det.presence == 1
    }
    out = []
    for det in pair.frame_t:
        if det.object_id is None or det.presence != 1:
            continue
        partner = later.get(det.object_id)
        if partner is not None:
            out.append((det, partner))
    return out


def transition_stats(pairs: Iterable[FramePair]) -> tuple[int, int]:
    """(number of true transitions, number of objects excluded for having none)."""
    n_transitions = 0
    n_excluded = 0
    for pair in pairs:
        trans = transitions(pair)
        n_transitions += len(trans)
        present = sum(1 for d in pair.frame_t if d.object_id is not None and d.presence == 1)
        n_excluded += present - len(trans)
    return n_transitions, n_excluded


def true_detections(pair: FramePair) -> tuple[list[Detection], list[Detection]]:
    """The true detection provider: each frame's ground truth, verbatim."""
    return pair.frame_t, pair.frame_t1


def detector_provider(
    thresholds: DetectorThresholds,
    classes: Iterable[int] | None = None,
) -> DetectionProvider:
    """Detection provider backed by the composed detector prediction set."""
    class_list = None if classes is None else list(classes)

    def provider(pair: FramePair) -> tuple[list[Detection], list[Detection]]:
        if pair.image_t is None or pair.image_t1 is None:
            raise ValueError(
                f"frame pair {pair.sequence_id}@{pair.t} carries no detector dumps"
            )
        return (
            detection_set(pair.image_t, thresholds, class_list),
            detection_set(pair.image_t1, thresholds, class_list),
        )

    return provider


def calibrate_edges(
    pairs: Sequence[FramePair],
    budget: RiskBudget,
    detection_provider: DetectionProvider = true_detections,
) -> EdgeThreshold:
    """Calibrate the edge threshold on true transitions.

    Each transition's record is the edge score of the identity-matched
    detection pair under the provider (normally the true detections); an
    identity the provider does not carry scores 0.
    """
    records: list[float] = []
    for pair in pairs:
        dets_t, dets_t1 = detection_provider(pair)
        by_id_t = {d.object_id: d for d in dets_t if d.object_id is not None}
        by_id_t1 = {d.object_id: d for d in dets_t1 if d.object_id is not None}
        for truth_t, truth_t1 in transitions(pair):
            a = by_id_t.get(truth_t.object_id)
            b = by_id_t1.get(truth_t1.object_id)
            records.append(edge_score(a, b) if a is not None and b is not None else 0.0)
    if not records:
        raise ValueError("no true transitions found in the calibration pairs")
    return calibrate_threshold(records, budget)


def _covered(
    dets_t: Sequence[Detection],
    dets_t1: Sequence[Detection],
    truth_t: Detection,
    truth_t1: Detection,
    tau: float,
) -> bool:
    for a in dets_t:
        if not detection_matches(a, truth_t):
            continue
        for b in dets_t1:
            if detection_matches(b, truth_t1) and edge_score(a, b) >= tau:
                return True
    return False


def fnr(
    eval_pairs: Sequence[FramePair],
    tau: EdgeThreshold | float,
    detection_provider: DetectionProvider = true_detections,
) -> float:
    """Rate at which true transitions are missing from the edge set."""
    t = _tau_value(tau)
    total = 0
    missed = 0
    for pair in eval_pairs:
        trans = transitions(pair)
        if not trans:
            continue
        dets_t, dets_t1 = detection_provider(pair)
        for truth_t, truth_t1 in trans:
            total += 1
            if not _covered(dets_t, dets_t1, truth_t, truth_t1, t):
                missed += 1
    if total == 0:
        raise ValueError("no true transitions to evaluate")
    return missed / total


def afp(
    eval_pairs: Sequence[FramePair],
    tau: EdgeThreshold | float,
    detection_provider: DetectionProvider = true_detections,
    anchoring: str = "object",
) -> float:
    """Mean count of spurious pairs in the edge set per evaluated transition.

    anchoring="object" restricts the counted pairs to those whose t-side
    detection represents the evaluated object (its out-edges), so a spurious
    pair is charged to one object rather than once per object in the frame.
    anchoring="global" counts the whole edge set's cardinality per
    transition instead.
    """
    if anchoring not in ("object", "global"):
        raise ValueError(f"anchoring must be 'object' or 'global', got {anchoring!r}")
    t = _tau_value(tau)
    total = 0
    spurious = 0.0
    for pair in eval_pairs:
        trans = transitions(pair)
        if not trans:
            continue
        dets_t, dets_t1 = detection_provider(pair)
        pairs_in_set = edge_set(dets_t, dets_t1, t)
        for truth_t, truth_t1 in trans:
            total += 1
            if anchoring == "object":
                anchored = [
                    (a, b) for a, b in pairs_in_set if detection_matches(a, truth_t)
                ]
            else:
                anchored = pairs_in_set
            hit = any(
                detection_matches(a, truth_t) and detection_matches(b, truth_t1)
                for a, b in anchored
            )
            spurious += len(anchored) - (1 if hit else 0)
    if total == 0:
        raise ValueError("no true transitions to evaluate")
    return spurious / total


def top_k_baseline(
    eval_pairs: Sequence[FramePair],
    k: int,
    detection_provider: DetectionProvider = true_detections,
) -> tuple[float, float]:
    """(fnr, afp) of the naive set keeping each anchor's k best-scoring partners.

    The anchor detections at t are those representing the evaluated object;
    ties in the partner ranking keep earlier input order.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    total = 0
    missed = 0
    spurious = 0.0
    for pair in eval_pairs:
        trans = transitions(pair)
        if not trans:
            continue
        dets_t, dets_t1 = detection_provider(pair)
        for truth_t, truth_t1 in trans:
            total += 1
            chosen: list[tuple[int, int]] = []
            for ai, anchor in enumerate(dets_t):
                if not detection_matches(anchor, truth_t):
                    continue
                ranked = sorted(
                    range(len(dets_t1)),
                    key=lambda bi: (-edge_score(anchor, dets_t1[bi]), bi),
                )
                chosen.extend((ai, bi) for bi in ranked[:k])
            hit = any(
                detection_matches(dets_t1[bi], truth_t1) for _, bi in chosen
            )
            missed += 0 if hit else 1
            spurious += len(chosen) - (1 if hit else 0)
    if total == 0:
        raise ValueError("no true transitions to evaluate")
    return missed / total, spurious / total


def compose_edge_budget(detection, edge) -> ComposedBudget:
    """Composed tracking budget: detection and edge budgets add in both
    coordinates; values reaching 1 are flagged degenerate, not rejected."""
    e_det, d_det = _eps_delta(detection)
    e_edge, d_edge = _eps_delta(edge)
    return ComposedBudget(e_det + e_edge, d_det + d_edge, "edge-composed")
