"""Calibrated prediction sets with finite-sample guarantees for multi-object
detection and tracking: exact binomial-tail threshold calibration, composed
detector prediction sets, IoU-based edge prediction sets, a seeded synthetic
world simulator, and Monte Carlo verification of every guarantee."""

from .binomial import RiskBudget, binom_cdf, max_failures
from .boxes import (
    BOX_IDENTITY_MIN_IOU,
    BoundingBox,
    MatchedProposal,
    iou,
    match_truth_to_proposals,
    same_box,
)
from .calibration import Threshold, calibrate_threshold, empirical_error
from .detection import (
    ComposedBudget,
    Detection,
    DetectorBudgets,
    DetectorThresholds,
    ImageRecord,
    MODE_SHARED_EVENT,
    MODE_STRICT_CHAIN,
    calibrate_detector,
    compose_budgets,
    detection_loss,
    detection_matches,
    detection_set,
    estimated_proposer,
    ground_truth_proposer,
    location_loss,
    location_record,
    location_set,
    presence_loss,
    presence_record,
    presence_set,
    proposal_error_floor,
    proposal_loss,
    proposal_record,
    proposal_set,
)
from .dumpio import DUMP_VERSION, Dataset, DumpError, IntegrityError, ParseError, parse_dump, serialize_dump
from .reporting import (
    ComponentErrorRow,
    ComposedRow,
    TrackingRow,
    components_csv,
    components_text,
    composed_csv,
    composed_table,
    error_bars_report,
    tracking_csv,
    tracking_table,
)
from .simulate import (
    CoverageReport,
    DetectionOutcome,
    EdgeOutcome,
    FiniteDistribution,
    PacTrial,
    SuiteBudgets,
    TheoremCheck,
    TheoremSuiteReport,
    WorldConfig,
    crowded_tracking_config,
    default_detection_config,
    detection_distribution,
    edge_distribution,
    gen_world,
    mc_verify,
    pac_trial,
    score_distribution,
    theorem_suite,
    trial_seed,
    true_error,
)
from .tracking import (
    EdgeThreshold,
    FramePair,
    afp,
    calibrate_edges,
    compose_edge_budget,
    detector_provider,
    edge_score,
    edge_set,
    fnr,
    top_k_baseline,
    transition_stats,
    transitions,
    true_detections,
)

__version__ = "0.1.0"
