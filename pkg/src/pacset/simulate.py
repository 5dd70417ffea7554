"""Seeded synthetic worlds with exactly computable ground truth, plus the
Monte Carlo harness that certifies every calibration guarantee empirically.

Worlds live on an integer pixel lattice with detector scores snapped to a
small grid, so a frozen population of generated outcomes forms a finite
distribution whose true prediction-set error is a finite weighted sum rather
than an estimate.  Sampling that population with replacement is exactly
i.i.d. draws from the distribution, which turns the coverage statements into
assertable facts at desk scale.

The detector noise model is deliberately simple: independent per-object box
jitter, score draws from Beta tails, occasional drops and suppressed scores,
and Poisson clutter.  No attempt is made to imitate any particular network's
score statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterable, NamedTuple

import numpy as np

from .binomial import RiskBudget, max_failures
from .boxes import BoundingBox, iou, match_truth_to_proposals, same_box
from .calibration import calibrate_threshold
from .detection import (
    Detection,
    DetectorBudgets,
    ImageRecord,
    MODE_STRICT_CHAIN,
    compose_budgets,
)
from .dumpio import Dataset
from .tracking import transitions

__all__ = [
    "WorldConfig",
    "default_detection_config",
    "crowded_tracking_config",
    "gen_world",
    "FiniteDistribution",
    "DetectionOutcome",
    "EdgeOutcome",
    "score_distribution",
    "detection_distribution",
    "edge_distribution",
    "true_error",
    "PacTrial",
    "pac_trial",
    "CoverageReport",
    "mc_verify",
    "trial_seed",
    "SuiteBudgets",
    "TheoremCheck",
    "TheoremSuiteReport",
    "theorem_suite",
]


# ── World generation ────────────────────────────────────────────────────


@dataclass(frozen=True)
class WorldConfig:
    """Knobs for the synthetic world and its noisy detector.

    ``score_sharpness`` concentrates true-label scores near 1 (Beta(a, 1))
    and impostor scores near 0 (Beta(1, a)).  ``score_grid`` snaps every
    emitted score onto a lattice, creating ties that keep the frozen
    populations genuinely finite-valued.
    """

    n_frames: int = 24
    n_objects: int = 4
    n_classes: int = 2
    n_sequences: int = 1
    arena_width: float = 64.0
    arena_height: float = 64.0
    box_size: float = 12.0
    motion_step: float = 2.0
    jump_prob: float = 0.0
    score_sharpness: float = 6.0
    impostor_rate: float = 1.0
    box_jitter: float = 1.0
    drop_prob: float = 0.02
    presence_miss_prob: float = 0.02
    location_miss_prob: float = 0.02
    decoy_rate: float = 0.2
    absent_truth_rate: float = 0.0
    score_grid: float = 0.05
    quantize_boxes: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_frames", "n_objects", "n_classes", "n_sequences"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in (
            "jump_prob",
            "drop_prob",
            "presence_miss_prob",
            "location_miss_prob",
            "decoy_rate",
            "absent_truth_rate",
        ):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        for name in ("motion_step", "score_sharpness", "impostor_rate", "box_jitter"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be >= 0")
        if self.box_size <= 0.0:
            raise ValueError("box_size must be > 0")
        if not 0.0 <= self.score_grid < 1.0:
            raise ValueError("score_grid must lie in [0, 1)")
        if self.arena_width < self.box_size or self.arena_height < self.box_size:
            raise ValueError("arena must fit at least one box")


def default_detection_config(seed: int = 0) -> WorldConfig:
    """Detection-flavored world: several classes, clutter, mild noise."""
    return WorldConfig(
        n_frames=32,
        n_objects=4,
        n_classes=2,
        arena_width=128.0,
        arena_height=128.0,
        box_size=14.0,
        motion_step=3.0,
        score_sharpness=6.0,
        impostor_rate=1.0,
        box_jitter=1.0,
        drop_prob=0.02,
        presence_miss_prob=0.02,
        location_miss_prob=0.02,
        decoy_rate=0.25,
        absent_truth_rate=0.05,
        seed=seed,
    )


def crowded_tracking_config(seed: int = 0) -> WorldConfig:
    """Tracking-flavored world: one class, dense arena, constant overlap.

    Lattice motion keeps every true transition's overlap on a small grid of
    values bounded away from zero, while the crowding makes greedy
    nearest-overlap association genuinely ambiguous."""
    return WorldConfig(
        n_frames=40,
        n_objects=6,
        n_classes=1,
        arena_width=40.0,
        arena_height=40.0,
        box_size=12.0,
        motion_step=4.0,
        jump_prob=0.0,
        score_sharpness=8.0,
        impostor_rate=0.5,
        box_jitter=1.0,
        drop_prob=0.0,
        presence_miss_prob=0.0,
        location_miss_prob=0.0,
        decoy_rate=0.1,
        seed=seed,
    )


def _snap(value: float, grid: float) -> float:
    if grid <= 0.0:
        return float(min(1.0, max(0.0, value)))
    snapped = round(value / grid) * grid
    return float(min(1.0, max(0.0, snapped)))


def _jitter_box(box: BoundingBox, config: WorldConfig, rng: np.random.Generator) -> BoundingBox:
    j = config.box_jitter
    if j == 0.0:
        return box
    if config.quantize_boxes:
        m = max(1, int(round(j)))
        d = rng.integers(-m, m + 1, size=4).astype(float)
    else:
        d = rng.uniform(-j, j, size=4)
    x0, y0 = box.x_min + d[0], box.y_min + d[1]
    x1, y1 = box.x_max + d[2], box.y_max + d[3]
    return BoundingBox(min(x0, x1), min(y0, y1), max(x0, x1), max(y0, y1))


def _random_box(config: WorldConfig, rng: np.random.Generator) -> BoundingBox:
    max_x = config.arena_width - config.box_size
    max_y = config.arena_height - config.box_size
    x = rng.uniform(0.0, max_x)
    y = rng.uniform(0.0, max_y)
    if config.quantize_boxes:
        x, y = float(round(x)), float(round(y))
    return BoundingBox(x, y, x + config.box_size, y + config.box_size)


def _emit_frame(
    config: WorldConfig,
    rng: np.random.Generator,
    seq_id: str,
    t: int,
    positions: list[tuple[float, float]],
    classes: list[int],
) -> ImageRecord:
    sharp = config.score_sharpness
    grid = config.score_grid
    b = config.box_size
    ground_truth: list[Detection] = []
    proposals: list[tuple[BoundingBox, float]] = []
    presence: dict[tuple[int, int], float] = {}
    location: dict[tuple[int, int], list[tuple[BoundingBox, float]]] = {}

    for i, ((x, y), cls) in enumerate(zip(positions, classes)):
        box = BoundingBox(x, y, x + b, y + b)
        ground_truth.append(Detection(box, cls, 1, f"{seq_id}-o{i:02d}"))
        if rng.random() < config.drop_prob:
            continue
        index = len(proposals)
        proposals.append((_jitter_box(box, config, rng), _snap(rng.beta(sharp, 1.0), grid)))
        if rng.random() >= config.presence_miss_prob:
            presence[(index, cls)] = _snap(rng.beta(sharp, 1.0), grid)
        if config.n_classes > 1 and rng.random() < 0.3:
            other = int((cls + 1 + rng.integers(config.n_classes - 1)) % config.n_classes)
            presence[(index, other)] = _snap(rng.beta(1.0, sharp), grid)
        candidates: list[tuple[BoundingBox, float]] = []
        if rng.random() >= config.location_miss_prob:
            candidates.append((_jitter_box(box, config, rng), _snap(rng.beta(sharp, 1.0), grid)))
        if rng.random() < config.decoy_rate:
            candidates.append((_random_box(config, rng), _snap(rng.beta(1.0, sharp), grid)))
        if candidates:
            location[(index, cls)] = candidates

    for _ in range(int(rng.poisson(config.impostor_rate))):
        clutter = _random_box(config, rng)
        index = len(proposals)
        proposals.append((clutter, _snap(rng.beta(1.0, sharp), grid)))
        cls = int(rng.integers(config.n_classes))
        if rng.random() < 0.5:
            presence[(index, cls)] = _snap(rng.beta(1.0, sharp), grid)
        if rng.random() < 0.3:
            location[(index, cls)] = [
                (_jitter_box(clutter, config, rng), _snap(rng.beta(1.0, sharp), grid))
            ]
        if rng.random() < config.absent_truth_rate:
            ground_truth.append(Detection(clutter, cls, 0, None))

    return ImageRecord(
        image_id=f"{seq_id}-f{t:04d}",
        proposals=proposals,
        presence_scores=presence,
        location_candidates=location,
        ground_truth=ground_truth,
        sequence_id=seq_id,
        frame_index=t,
    )


def gen_world(config: WorldConfig) -> Dataset:
    """Deterministic world: identical configs (seed included) give identical
    datasets, byte for byte once serialized."""
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    max_x = config.arena_width - config.box_size
    max_y = config.arena_height - config.box_size
    step = max(0, int(round(config.motion_step)))
    dataset = Dataset()

    for s in range(config.n_sequences):
        seq_id = f"s{s:02d}"
        classes = [i % config.n_classes for i in range(config.n_objects)]
        positions: list[tuple[float, float]] = []
        for _ in range(config.n_objects):
            x, y = rng.uniform(0.0, max_x), rng.uniform(0.0, max_y)
            if config.quantize_boxes:
                x, y = float(round(x)), float(round(y))
            positions.append((x, y))
        for t in range(config.n_frames):
            if t > 0:
                moved: list[tuple[float, float]] = []
                for x, y in positions:
                    if config.jump_prob > 0.0 and rng.random() < config.jump_prob:
                        x, y = rng.uniform(0.0, max_x), rng.uniform(0.0, max_y)
                        if config.quantize_boxes:
                            x, y = float(round(x)), float(round(y))
                    elif config.quantize_boxes:
                        x += float(rng.integers(-step, step + 1))
                        y += float(rng.integers(-step, step + 1))
                    else:
                        x += float(rng.uniform(-config.motion_step, config.motion_step))
                        y += float(rng.uniform(-config.motion_step, config.motion_step))
                    moved.append((min(max(x, 0.0), max_x), min(max(y, 0.0), max_y)))
                positions = moved
            image = _emit_frame(config, rng, seq_id, t, positions, classes)
            dataset.images[image.image_id] = image
    return dataset


# ── Finite distributions ────────────────────────────────────────────────


@dataclass(frozen=True)
class FiniteDistribution:
    """Enumerable support with probabilities; the oracle behind every check."""

    outcomes: tuple
    probabilities: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        probs = np.asarray(self.probabilities, dtype=float)
        object.__setattr__(self, "probabilities", probs)
        if len(probs) != len(self.outcomes):
            raise ValueError("probabilities and outcomes must have the same length")
        if len(probs) == 0:
            raise ValueError("a distribution needs at least one outcome")
        if np.any(probs < 0.0):
            raise ValueError("probabilities must be nonnegative")
        if abs(float(probs.sum()) - 1.0) > 1e-12:
            raise ValueError(f"probabilities must sum to 1, got {probs.sum()!r}")

    @classmethod
    def uniform(cls, outcomes: Iterable[Any]) -> "FiniteDistribution":
        items = tuple(outcomes)
        return cls(items, np.full(len(items), 1.0 / len(items)))

    @property
    def size(self) -> int:
        return len(self.outcomes)


class DetectionOutcome(NamedTuple):
    image: ImageRecord
    truth: Detection


class EdgeOutcome(NamedTuple):
    image_t: ImageRecord
    image_t1: ImageRecord
    truth_t: Detection
    truth_t1: Detection


def score_distribution(size: int = 200, seed: int = 11) -> FiniteDistribution:
    """A fixed population of grid-snapped scores for scalar coverage checks."""
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    values = np.clip(np.round(rng.beta(2.0, 4.0, size=size) / 0.02) * 0.02, 0.0, 1.0)
    return FiniteDistribution.uniform(float(v) for v in values)


def detection_distribution(
    config: WorldConfig,
    size: int = 240,
    seed: int | None = None,
) -> FiniteDistribution:
    """Uniform population of (image, truth) outcomes from a generated world."""
    cfg = config if seed is None else replace(config, seed=seed)
    frames_needed = math.ceil(size / cfg.n_objects) + 2
    cfg = replace(cfg, n_frames=frames_needed, n_sequences=1)
    dataset = gen_world(cfg)
    outcomes = [
        DetectionOutcome(image, truth)
        for image in dataset.image_list()
        for truth in image.ground_truth
    ]
    if len(outcomes) < size:
        raise ValueError(f"world produced only {len(outcomes)} outcomes, need {size}")
    return FiniteDistribution.uniform(outcomes[:size])


def edge_distribution(
    config: WorldConfig,
    size: int = 160,
    seed: int | None = None,
) -> FiniteDistribution:
    """Uniform population of frame-pair transition outcomes."""
    cfg = config if seed is None else replace(config, seed=seed)
    frames_needed = math.ceil(size / cfg.n_objects) + 3
    cfg = replace(cfg, n_frames=frames_needed, n_sequences=1)
    dataset = gen_world(cfg)
    outcomes = []
    for pair in dataset.frame_pairs():
        for truth_t, truth_t1 in transitions(pair):
            outcomes.append(EdgeOutcome(pair.image_t, pair.image_t1, truth_t, truth_t1))
    if len(outcomes) < size:
        raise ValueError(f"world produced only {len(outcomes)} outcomes, need {size}")
    return FiniteDistribution.uniform(outcomes[:size])


def true_error(dist: FiniteDistribution, loss_fn: Callable[[Any], int]) -> float:
    """Probability-weighted exact 0/1 loss over the support."""
    losses = np.array([loss_fn(outcome) for outcome in dist.outcomes], dtype=float)
    return float(np.dot(dist.probabilities, losses))


# ── Coverage trials ─────────────────────────────────────────────────────


class PacTrial(NamedTuple):
    tau: float
    true_error: float
    violated: bool


def trial_seed(base_seed: int, index: int) -> np.random.SeedSequence:
    """Seed for trial ``index``: reproducible in isolation from the base seed."""
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(index,))


def pac_trial(
    dist: FiniteDistribution,
    n: int,
    budget: RiskBudget,
    seed: "int | np.random.SeedSequence",
) -> PacTrial:
    """One calibrate-then-check trial on a scalar-score distribution.

    Sampling contract (reproduction tests rely on it): the trial builds
    ``rng = np.random.default_rng(seed)`` and makes exactly one call
    ``rng.choice(dist.size, size=n, p=dist.probabilities)``.
    """
    if n < 1:
        raise ValueError(f"calibration size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    indices = rng.choice(dist.size, size=n, p=dist.probabilities)
    scores = [float(dist.outcomes[i]) for i in indices]
    threshold = calibrate_threshold(scores, budget)
    err = true_error(dist, lambda s: 1 if s < threshold.tau else 0)
    return PacTrial(threshold.tau, err, err > budget.epsilon)


def _wilson(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


class CoverageReport(NamedTuple):
    trials: int
    violations: int
    violation_fraction: float
    ci_low: float
    ci_high: float


def mc_verify(
    dist: FiniteDistribution,
    n: int,
    budget: RiskBudget,
    trials: int,
    base_seed: int,
    map_fn: Callable = map,
) -> CoverageReport:
    """Violation fraction over independent trials, with a 95% Wilson interval.

    Per-trial seeds come from :func:`trial_seed`, so the result does not
    depend on execution order; ``map_fn`` may be a parallel map.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")

    def run(index: int) -> bool:
        return pac_trial(dist, n, budget, trial_seed(base_seed, index)).violated

    violations = sum(1 for v in map_fn(run, range(trials)) if v)
    low, high = _wilson(violations, trials)
    return CoverageReport(trials, violations, violations / trials, low, high)


# ── Composition certification ───────────────────────────────────────────


@dataclass(frozen=True)
class SuiteBudgets:
    detector: DetectorBudgets
    edge: RiskBudget


@dataclass(frozen=True)
class TheoremCheck:
    """One composition guarantee checked over many calibration draws."""

    label: str
    epsilon_bound: float
    delta_bound: float
    trials: int
    violations: int
    trivial_calibrations: int
    flagged_infeasible: bool = False

    @property
    def violation_fraction(self) -> float:
        return self.violations / self.trials

    @property
    def passed(self) -> bool:
        return self.violation_fraction <= self.delta_bound


@dataclass(frozen=True)
class TheoremSuiteReport:
    checks: tuple[TheoremCheck, ...]
    trials: int
    n_calibration: int
    proposal_floor: float

    def by_label(self, label: str) -> TheoremCheck:
        for check in self.checks:
            if check.label == label:
                return check
        raise KeyError(label)


class _DetectionTables:
    """Per-outcome records and threshold-indexed loss tables for a detection
    distribution; exact errors become vectorized masked sums.

    Row arrays hold one entry per (outcome, overlapping proposal) pair:
    objectness, the presence value for the true flag, and the best matching
    candidate density.  A component covers an outcome when any of its rows
    clears the relevant thresholds, matching the union-over-matching-
    proposals loss definitions exactly.
    """

    def __init__(self, dist: FiniteDistribution):
        self.probs = dist.probabilities
        self.size = dist.size
        prp, prs, loc = [], [], []
        owner, obj, pv, md = [], [], [], []
        unmatched = 0.0
        for k, (image, truth) in enumerate(dist.outcomes):
            matched = match_truth_to_proposals(truth.box, image.proposals)
            if matched is None:
                unmatched += float(self.probs[k])
                prp.append(0.0)
                prs.append(1.0 - truth.presence)
                loc.append(0.0)
            else:
                f = image.presence_scores.get((matched.index, truth.class_label), 0.0)
                prp.append(matched.score)
                prs.append(f if truth.presence == 1 else 1.0 - f)
                loc.append(
                    max(
                        (
                            d
                            for b, d in image.location_candidates.get(
                                (matched.index, truth.class_label), []
                            )
                            if same_box(b, truth.box)
                        ),
                        default=0.0,
                    )
                )
            for index, (box, score) in enumerate(image.proposals):
                if not same_box(box, truth.box):
                    continue
                f = image.presence_scores.get((index, truth.class_label), 0.0)
                best = max(
                    (
                        d
                        for b, d in image.location_candidates.get(
                            (index, truth.class_label), []
                        )
                        if same_box(b, truth.box)
                    ),
                    default=0.0,
                )
                owner.append(k)
                obj.append(score)
                pv.append(f if truth.presence == 1 else 1.0 - f)
                md.append(best)
        self.prp_records = np.array(prp)
        self.prs_records = np.array(prs)
        self.loc_records = np.array(loc)
        self.owner = np.array(owner, dtype=int)
        self.obj = np.array(obj)
        self.pv = np.array(pv)
        self.md = np.array(md)
        self.proposal_floor = unmatched

    def _coverage(self, row_mask: np.ndarray) -> np.ndarray:
        if len(self.owner) == 0:
            return np.zeros(self.size, dtype=bool)
        return np.bincount(self.owner[row_mask], minlength=self.size) > 0

    def exact_errors(
        self, tau_prp: float, tau_prs: float, tau_loc: float
    ) -> tuple[float, float, float, float]:
        in_set = self.obj >= tau_prp
        cov_prp = self._coverage(in_set)
        cov_prs = self._coverage(in_set & (self.pv >= tau_prs))
        cov_loc = self._coverage(in_set & (self.md >= tau_loc))
        e_prp = 1.0 - float(self.probs[cov_prp].sum())
        e_prs = 1.0 - float(self.probs[cov_prs].sum())
        e_loc = 1.0 - float(self.probs[cov_loc].sum())
        e_det = 1.0 - float(self.probs[cov_prs & cov_loc].sum())
        return e_prp, e_prs, e_loc, e_det


class _EdgeTables:
    """Records and representative-pair tables for an edge distribution.

    A transition is covered under the estimated detector when some pair of
    detection-set elements representing the two truths has edge score above
    the edge threshold.  Each row is one candidate representative pair with
    the six gate values (objectness, presence value, density on each side)
    plus the pair overlap; gates may come from any proposal since set
    elements do."""

    def __init__(self, dist: FiniteDistribution):
        self.probs = dist.probabilities
        self.size = dist.size
        self.records = np.array(
            [
                iou(o.truth_t.box, o.truth_t1.box)
                if o.truth_t.class_label == o.truth_t1.class_label
                and o.truth_t.presence == o.truth_t1.presence == 1
                else 0.0
                for o in dist.outcomes
            ]
        )
        owner = []
        gates: list[list[float]] = [[] for _ in range(7)]
        for k, outcome in enumerate(dist.outcomes):
            side_t = self._side(outcome.image_t, outcome.truth_t)
            side_t1 = self._side(outcome.image_t1, outcome.truth_t1)
            for sa, pa, da, box_a in side_t:
                for sb, pb, db, box_b in side_t1:
                    owner.append(k)
                    for slot, value in enumerate(
                        (sa, pa, da, sb, pb, db, iou(box_a, box_b))
                    ):
                        gates[slot].append(value)
        self.owner = np.array(owner, dtype=int)
        (
            self.obj_a,
            self.pv_a,
            self.md_a,
            self.obj_b,
            self.pv_b,
            self.md_b,
            self.pair,
        ) = (np.array(g) for g in gates)

    @staticmethod
    def _side(image: ImageRecord, truth: Detection):
        rows = []
        for index, (_, score) in enumerate(image.proposals):
            f = image.presence_scores.get((index, truth.class_label), 0.0)
            pv = f if truth.presence == 1 else 1.0 - f
            for box, density in image.location_candidates.get(
                (index, truth.class_label), []
            ):
                if same_box(box, truth.box):
                    rows.append((score, pv, density, box))
        return rows

    def composed_error(
        self, tau_prp: float, tau_prs: float, tau_loc: float, tau_edge: float
    ) -> float:
        if len(self.owner) == 0:
            return 1.0
        mask = (
            (self.obj_a >= tau_prp)
            & (self.pv_a >= tau_prs)
            & (self.md_a >= tau_loc)
            & (self.obj_b >= tau_prp)
            & (self.pv_b >= tau_prs)
            & (self.md_b >= tau_loc)
            & (self.pair >= tau_edge)
        )
        covered = np.bincount(self.owner[mask], minlength=self.size) > 0
        return 1.0 - float(self.probs[covered].sum())


def _order_stat(values: np.ndarray, k: int | None) -> float:
    if k is None:
        return 0.0
    return float(np.partition(values, k)[k])


def theorem_suite(
    dist_detection: FiniteDistribution,
    dist_edge: FiniteDistribution,
    budgets: SuiteBudgets,
    trials: int,
    base_seed: int,
    n_calibration: int = 300,
) -> TheoremSuiteReport:
    """Certify each composition guarantee over many calibration draws.

    Per trial: draw a detection calibration set, calibrate the three
    component thresholds, and compute the exact presence-given-proposal,
    location-given-proposal, and composed detection errors over the support;
    then draw an edge calibration set, calibrate the edge threshold against
    the true detections, and compute the exact composed edge error under the
    freshly calibrated detector.  Each check counts trials whose exact error
    exceeds its additively composed epsilon; the certified claim is that the
    count stays within the composed delta (strict-chain accounting).
    """
    det = budgets.detector
    det_tables = _DetectionTables(dist_detection)
    edge_tables = _EdgeTables(dist_edge)

    k_prp = max_failures(n_calibration, det.proposal)
    k_prs = max_failures(n_calibration, det.presence)
    k_loc = max_failures(n_calibration, det.location)
    k_edge = max_failures(n_calibration, budgets.edge)
    any_component_trivial = any(k is None for k in (k_prp, k_prs, k_loc))

    composed_det = compose_budgets(det.proposal, det.presence, det.location, MODE_STRICT_CHAIN)
    bounds = {
        "presence-given-proposal": (
            det.proposal.epsilon + det.presence.epsilon,
            det.proposal.delta + det.presence.delta,
        ),
        "location-given-proposal": (
            det.proposal.epsilon + det.location.epsilon,
            det.proposal.delta + det.location.delta,
        ),
        "composed-detection": (composed_det.epsilon, composed_det.delta),
        "edge-given-detection": (
            composed_det.epsilon + budgets.edge.epsilon,
            composed_det.delta + budgets.edge.delta,
        ),
    }
    violations = dict.fromkeys(bounds, 0)

    for i in range(trials):
        rng = np.random.default_rng(trial_seed(base_seed, i))
        det_idx = rng.choice(det_tables.size, size=n_calibration, p=det_tables.probs)
        tau_prp = _order_stat(det_tables.prp_records[det_idx], k_prp)
        tau_prs = _order_stat(det_tables.prs_records[det_idx], k_prs)
        tau_loc = _order_stat(det_tables.loc_records[det_idx], k_loc)
        _, e_prs, e_loc, e_det = det_tables.exact_errors(tau_prp, tau_prs, tau_loc)
        if e_prs > bounds["presence-given-proposal"][0]:
            violations["presence-given-proposal"] += 1
        if e_loc > bounds["location-given-proposal"][0]:
            violations["location-given-proposal"] += 1
        if e_det > bounds["composed-detection"][0]:
            violations["composed-detection"] += 1

        edge_idx = rng.choice(edge_tables.size, size=n_calibration, p=edge_tables.probs)
        tau_edge = _order_stat(edge_tables.records[edge_idx], k_edge)
        e_edge = edge_tables.composed_error(tau_prp, tau_prs, tau_loc, tau_edge)
        if e_edge > bounds["edge-given-detection"][0]:
            violations["edge-given-detection"] += 1

    floor = det_tables.proposal_floor
    det_infeasible = any_component_trivial or det.proposal.epsilon < floor
    flags = {
        "presence-given-proposal": det_infeasible,
        "location-given-proposal": det_infeasible,
        "composed-detection": det_infeasible,
        "edge-given-detection": det_infeasible or k_edge is None,
    }
    trivial = {
        "presence-given-proposal": trials if k_prp is None or k_prs is None else 0,
        "location-given-proposal": trials if k_prp is None or k_loc is None else 0,
        "composed-detection": trials if any_component_trivial else 0,
        "edge-given-detection": trials if any_component_trivial or k_edge is None else 0,
    }
    checks = tuple(
        TheoremCheck(
            label=label,
            epsilon_bound=bounds[label][0],
            delta_bound=bounds[label][1],
            trials=trials,
            violations=violations[label],
            trivial_calibrations=trivial[label],
            flagged_infeasible=flags[label],
        )
        for label in bounds
    )
    return TheoremSuiteReport(checks, trials, n_calibration, floor)
