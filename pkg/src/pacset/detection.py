"""Component prediction sets of a two-stage detector and their composition.

The detector splits into three thresholded components: proposal (which
candidate regions to keep), presence (is the class there or not), and
location (which regressed boxes to keep).  Each component calibrates its own
threshold through :mod:`pacset.calibration`.  Presence and location are
calibrated against the ground-truth proposer (truths stand in for proposals,
with scores read through the smallest-score overlapping detector proposal)
and the budget algebra for the composed detector is additive in both the
error rates and the confidence failures.

A truth's box may overlap several proposals.  Calibration records use the
smallest-score overlapping proposal (conservative); loss evaluation uses the
union over all overlapping in-set proposals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .binomial import RiskBudget
from .boxes import BoundingBox, match_truth_to_proposals, same_box
from .calibration import Threshold, _tau_value, calibrate_threshold

__all__ = [
    "Detection",
    "ImageRecord",
    "DetectorBudgets",
    "ComposedBudget",
    "DetectorThresholds",
    "proposal_set",
    "presence_set",
    "location_set",
    "detection_set",
    "estimated_proposer",
    "ground_truth_proposer",
    "proposal_loss",
    "presence_loss",
    "location_loss",
    "detection_loss",
    "detection_matches",
    "proposal_record",
    "presence_record",
    "location_record",
    "proposal_error_floor",
    "compose_budgets",
    "calibrate_detector",
]

MODE_STRICT_CHAIN = "strict-chain"
MODE_SHARED_EVENT = "shared-event"


@dataclass(frozen=True)
class Detection:
    """One labeled output or ground-truth object: box, class, presence flag.

    ``object_id`` carries a persistent identity for ground truth in tracking
    sequences; it is None for detector outputs and plain detection datasets.
    """

    box: BoundingBox
    class_label: int
    presence: int
    object_id: str | None = None

    def __post_init__(self) -> None:
        if self.presence not in (0, 1):
            raise ValueError(f"presence flag must be 0 or 1, got {self.presence}")


@dataclass
class ImageRecord:
    """Everything the detector emitted for one image, plus its ground truth.

    ``presence_scores`` maps (proposal_index, class_label) to the probability
    that the class is present in that proposal; a missing entry means the
    detector never scored the pair (e.g. it was suppressed) and is treated as
    probability 0.  ``location_candidates`` maps the same keys to (box,
    density) candidates from the location head.
    """

    image_id: str
    proposals: list[tuple[BoundingBox, float]]
    presence_scores: dict[tuple[int, int], float] = field(default_factory=dict)
    location_candidates: dict[tuple[int, int], list[tuple[BoundingBox, float]]] = field(
        default_factory=dict
    )
    ground_truth: list[Detection] = field(default_factory=list)
    sequence_id: str | None = None
    frame_index: int | None = None

    def __post_init__(self) -> None:
        n = len(self.proposals)
        for _, score in self.proposals:
            if score < 0.0:
                raise ValueError(f"objectness scores must be >= 0, got {score}")
        for (idx, _), value in self.presence_scores.items():
            if not 0 <= idx < n:
                raise ValueError(f"presence score references proposal {idx} of {n}")
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"presence scores are probabilities, got {value}")
        for (idx, _), candidates in self.location_candidates.items():
            if not 0 <= idx < n:
                raise ValueError(f"location candidates reference proposal {idx} of {n}")
            for _, density in candidates:
                if density < 0.0:
                    raise ValueError(f"densities must be >= 0, got {density}")


@dataclass(frozen=True)
class DetectorBudgets:
    proposal: RiskBudget
    presence: RiskBudget
    location: RiskBudget


@dataclass(frozen=True)
class ComposedBudget:
    """Additively composed (epsilon, delta); degenerate when either reaches 1."""

    epsilon: float
    delta: float
    mode: str

    @property
    def degenerate(self) -> bool:
        return self.epsilon >= 1.0 or self.delta >= 1.0


@dataclass(frozen=True)
class DetectorThresholds:
    """Calibrated component thresholds plus the budgets that produced them.

    ``proposal_error_floor`` is the fraction of truths with no overlapping
    proposal at all: no threshold can push the proposal error below it, so a
    proposal budget under the floor is unattainable regardless of n.
    """

    tau_prp: Threshold | float
    tau_prs: Threshold | float
    tau_loc: Threshold | float
    budgets: DetectorBudgets | None = None
    composed_strict: ComposedBudget | None = None
    composed_shared: ComposedBudget | None = None
    proposal_error_floor: float | None = None

    def taus(self) -> tuple[float, float, float]:
        return _tau_value(self.tau_prp), _tau_value(self.tau_prs), _tau_value(self.tau_loc)

    @property
    def any_infeasible(self) -> bool:
        return any(
            isinstance(t, Threshold) and t.infeasible
            for t in (self.tau_prp, self.tau_prs, self.tau_loc)
        )


# ── Component prediction sets ───────────────────────────────────────────


def _in_set_indices(image: ImageRecord, tau_prp: float) -> list[int]:
    return [i for i, (_, score) in enumerate(image.proposals) if score >= tau_prp]


def proposal_set(image: ImageRecord, tau_prp: Threshold | float) -> list[BoundingBox]:
    """Proposals whose objectness score clears the threshold."""
    t = _tau_value(tau_prp)
    return [box for box, score in image.proposals if score >= t]


def presence_set(score: float | None, tau_prs: Threshold | float) -> set[int]:
    """Subset of {0, 1}: flag e is kept when e*f + (1-e)*(1-f) >= tau.

    A missing score (None) is the suppressed case and behaves as f = 0: the
    present flag can never clear a positive threshold, the absent flag always
    does for tau <= 1.
    """
    if score is None:
        f = 0.0
    else:
        f = float(score)
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"presence score must lie in [0, 1], got {score}")
    t = _tau_value(tau_prs)
    kept = set()
    if f >= t:
        kept.add(1)
    if 1.0 - f >= t:
        kept.add(0)
    return kept


def location_set(
    candidates: Sequence[tuple[BoundingBox, float]] | None,
    tau_loc: Threshold | float,
) -> list[BoundingBox]:
    """Candidate boxes whose density clears the threshold; None means no candidates."""
    if candidates is None:
        return []
    t = _tau_value(tau_loc)
    kept = []
    for box, density in candidates:
        if density < 0.0:
            raise ValueError(f"densities must be >= 0, got {density}")
        if density >= t:
            kept.append(box)
    return kept


def detection_set(
    image: ImageRecord,
    thresholds: DetectorThresholds,
    classes: Iterable[int] | None = None,
) -> list[Detection]:
    """Union over in-set proposals r and classes c of the presence/location
    cross product at (r, c): one Detection per (box, class, flag) triple.

    ``classes`` defaults to every class featuring in the image's presence or
    location maps; triples need a location candidate, so absent classes can
    never contribute.  Flag 0 elements pair the absence flag with the same
    candidate boxes, mirroring the cross product; consumers usually filter to
    flag 1.
    """
    tau_prp, tau_prs, tau_loc = thresholds.taus()
    if classes is None:
        class_set = {c for _, c in image.presence_scores} | {
            c for _, c in image.location_candidates
        }
    else:
        class_set = set(classes)
    out: dict[Detection, None] = {}
    for r in _in_set_indices(image, tau_prp):
        for c in sorted(class_set):
            flags = presence_set(image.presence_scores.get((r, c)), tau_prs)
            if not flags:
                continue
            boxes = location_set(image.location_candidates.get((r, c)), tau_loc)
            for box in boxes:
                for e in sorted(flags):
                    out[Detection(box, c, e)] = None
    return list(out)


# ── Proposal-set providers ──────────────────────────────────────────────

# A provider yields (box, score_index) views: the box to match truths against
# and the detector proposal index used to look up presence/location scores
# (None when no detector proposal corresponds, i.e. every score is missing).
ProposalView = tuple[BoundingBox, "int | None"]
Proposer = Callable[[ImageRecord], list[ProposalView]]


def estimated_proposer(tau_prp: Threshold | float) -> Proposer:
    """The detector's own proposal prediction set at the given threshold."""
    t = _tau_value(tau_prp)

    def proposer(image: ImageRecord) -> list[ProposalView]:
        return [(image.proposals[i][0], i) for i in _in_set_indices(image, t)]

    return proposer


def ground_truth_proposer(image: ImageRecord) -> list[ProposalView]:
    """The ground-truth proposer: outputs the true boxes themselves.

    Detector scores are only keyed by proposal index, so each truth box reads
    its scores through the smallest-score overlapping proposal; with no
    overlapping proposal all its scores are missing.
    """
    views: list[ProposalView] = []
    for det in image.ground_truth:
        matched = match_truth_to_proposals(det.box, image.proposals)
        views.append((det.box, matched.index if matched is not None else None))
    return views


# ── Component 0/1 losses ────────────────────────────────────────────────


def proposal_loss(image: ImageRecord, truth: Detection, tau_prp: Threshold | float) -> int:
    """0 iff some in-set proposal is the same box as the truth."""
    t = _tau_value(tau_prp)
    for box, score in image.proposals:
        if score >= t and same_box(box, truth.box):
            return 0
    return 1


def presence_loss(
    image: ImageRecord,
    truth: Detection,
    tau_prs: Threshold | float,
    proposer: Proposer,
) -> int:
    """0 iff the true flag is in the union of presence sets over the
    proposer's boxes that are the same box as the truth."""
    t = _tau_value(tau_prs)
    for box, idx in proposer(image):
        if not same_box(box, truth.box):
            continue
        score = image.presence_scores.get((idx, truth.class_label)) if idx is not None else None
        if truth.presence in presence_set(score, t):
            return 0
    return 1


def location_loss(
    image: ImageRecord,
    truth: Detection,
    tau_loc: Threshold | float,
    proposer: Proposer,
) -> int:
    """0 iff the true box is in the union of location sets over the
    proposer's boxes that are the same box as the truth (membership by box
    identity)."""
    t = _tau_value(tau_loc)
    for box, idx in proposer(image):
        if not same_box(box, truth.box):
            continue
        if idx is None:
            continue
        for cand, density in image.location_candidates.get((idx, truth.class_label), []):
            if density >= t and same_box(cand, truth.box):
                return 0
    return 1


def detection_loss(image: ImageRecord, truth: Detection, thresholds: DetectorThresholds) -> int:
    """0 iff the truth is covered by the composed detector: its presence flag
    and its box must both be covered through in-set proposals overlapping the
    true box.

    Coverage is the conjunction of the presence and location losses under the
    estimated proposer, which keeps every detection error a presence error or
    a location error; the composed budget arithmetic relies on exactly that
    containment.
    """
    proposer = estimated_proposer(_tau_value(thresholds.tau_prp))
    covered = (
        presence_loss(image, truth, thresholds.tau_prs, proposer) == 0
        and location_loss(image, truth, thresholds.tau_loc, proposer) == 0
    )
    return 0 if covered else 1


def detection_matches(candidate: Detection, truth: Detection) -> bool:
    """Whether a detection-set element represents the truth: equal class and
    flag, same box by identity."""
    return (
        candidate.class_label == truth.class_label
        and candidate.presence == truth.presence
        and same_box(candidate.box, truth.box)
    )


# ── Calibration records ─────────────────────────────────────────────────


def proposal_record(image: ImageRecord, truth: Detection) -> float:
    """Objectness score of the smallest-score proposal overlapping the truth;
    0 when nothing overlaps (the missing-score convention)."""
    matched = match_truth_to_proposals(truth.box, image.proposals)
    return matched.score if matched is not None else 0.0


def presence_record(image: ImageRecord, truth: Detection) -> float:
    """True-flag score at the truth box: f for a present truth, 1-f for an
    absent one, with f read through the bridging proposal (missing -> 0)."""
    matched = match_truth_to_proposals(truth.box, image.proposals)
    if matched is None:
        f = 0.0
    else:
        f = image.presence_scores.get((matched.index, truth.class_label), 0.0)
    return f if truth.presence == 1 else 1.0 - f


def location_record(image: ImageRecord, truth: Detection) -> float:
    """Best density among candidates at the bridging proposal that are the
    same box as the truth; 0 when there is no bridge or no matching candidate."""
    matched = match_truth_to_proposals(truth.box, image.proposals)
    if matched is None:
        return 0.0
    candidates = image.location_candidates.get((matched.index, truth.class_label), [])
    return max(
        (density for box, density in candidates if same_box(box, truth.box)),
        default=0.0,
    )


def proposal_error_floor(dataset: Sequence[ImageRecord]) -> float:
    """Fraction of truths with no overlapping proposal at any threshold."""
    total = 0
    unmatched = 0
    for image in dataset:
        for truth in image.ground_truth:
            total += 1
            if match_truth_to_proposals(truth.box, image.proposals) is None:
                unmatched += 1
    if total == 0:
        raise ValueError("dataset has no ground-truth detections")
    return unmatched / total


# ── Budget algebra ──────────────────────────────────────────────────────

BudgetLike = "RiskBudget | ComposedBudget | tuple[float, float]"


def _eps_delta(budget) -> tuple[float, float]:
    if isinstance(budget, tuple):
        return float(budget[0]), float(budget[1])
    return float(budget.epsilon), float(budget.delta)


def compose_budgets(
    proposal,
    presence,
    location,
    mode: str = MODE_SHARED_EVENT,
) -> ComposedBudget:
    """Composed detector budget from the three component budgets.

    strict-chain: the presence and location guarantees are each first
    combined with the proposal guarantee (epsilon and delta both gain the
    proposal terms), then added; the proposal budget is counted twice.

    shared-event: a single union bound over the three calibration events,
    so epsilon and delta are each the plain three-way sums.

    Either mode can compose past 1; the result is then flagged degenerate
    (the guarantee is vacuous) rather than rejected.
    """
    e_prp, d_prp = _eps_delta(proposal)
    e_prs, d_prs = _eps_delta(presence)
    e_loc, d_loc = _eps_delta(location)
    if mode == MODE_STRICT_CHAIN:
        epsilon = (e_prs + e_prp) + (e_loc + e_prp)
        delta = (d_prs + d_prp) + (d_loc + d_prp)
    elif mode == MODE_SHARED_EVENT:
        epsilon = e_prp + e_prs + e_loc
        delta = d_prp + d_prs + d_loc
    else:
        raise ValueError(f"unknown composition mode: {mode!r}")
    return ComposedBudget(epsilon, delta, mode)


# ── Detector calibration ────────────────────────────────────────────────


def calibrate_detector(
    dataset: Sequence[ImageRecord],
    budgets: DetectorBudgets,
) -> DetectorThresholds:
    """Calibrate the three component thresholds on one dataset.

    The proposal threshold is calibrated on smallest-overlapping-proposal
    objectness scores; presence and location are calibrated against the
    ground-truth proposer, i.e. on the true-label scores at each truth box.
    Infeasible budgets yield tau = 0 with the infeasibility recorded on the
    returned Threshold objects.
    """
    prp_records: list[float] = []
    prs_records: list[float] = []
    loc_records: list[float] = []
    for image in dataset:
        for truth in image.ground_truth:
            prp_records.append(proposal_record(image, truth))
            prs_records.append(presence_record(image, truth))
            loc_records.append(location_record(image, truth))
    if not prp_records:
        raise ValueError("dataset has no ground-truth detections to calibrate on")
    return DetectorThresholds(
        tau_prp=calibrate_threshold(prp_records, budgets.proposal),
        tau_prs=calibrate_threshold(prs_records, budgets.presence),
        tau_loc=calibrate_threshold(loc_records, budgets.location),
        budgets=budgets,
        composed_strict=compose_budgets(
            budgets.proposal, budgets.presence, budgets.location, MODE_STRICT_CHAIN
        ),
        composed_shared=compose_budgets(
            budgets.proposal, budgets.presence, budgets.location, MODE_SHARED_EVENT
        ),
        proposal_error_floor=proposal_error_floor(dataset),
    )
