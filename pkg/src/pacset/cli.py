"""Command-line surface tying calibration, evaluation, simulation, and
verification together.

Exit codes: 0 success, 2 usage, 3 parse/integrity failure, 4 infeasible
budget under --strict-budget, 5 internal error.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .binomial import RiskBudget
from .calibration import Threshold
from .detection import (
    DetectorBudgets,
    DetectorThresholds,
    MODE_SHARED_EVENT,
    MODE_STRICT_CHAIN,
    calibrate_detector,
    compose_budgets,
    detection_loss,
    estimated_proposer,
    location_loss,
    presence_loss,
    proposal_loss,
)
from .dumpio import Dataset, DumpError, parse_dump, serialize_dump
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
    SuiteBudgets,
    WorldConfig,
    crowded_tracking_config,
    default_detection_config,
    detection_distribution,
    edge_distribution,
    gen_world,
    mc_verify,
    score_distribution,
    theorem_suite,
)
from .tracking import (
    afp,
    calibrate_edges,
    compose_edge_budget,
    detector_provider,
    fnr,
    top_k_baseline,
    transition_stats,
    true_detections,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4
EXIT_INTERNAL = 5

# Component epsilon fractions of a total detection budget under --split paper;
# delta always splits in thirds.
PAPER_EPS_FRACTIONS = {"proposal": 0.15, "presence": 0.05, "location": 0.30}

THRESHOLDS_VERSION = 1


class InfeasibleBudgetError(RuntimeError):
    pass


class ConfigError(ValueError):
    pass


# ── World config files (flat key = value text) ──────────────────────────

_WORLD_FIELDS = {f.name: f.type for f in dataclasses.fields(WorldConfig)}


def load_world_config(path: str | Path) -> WorldConfig:
    """Parse a `key = value` config file into a WorldConfig.

    Lines starting with '#' are comments; unknown keys are rejected.
    """
    values: dict[str, object] = {}
    with open(path, "r", encoding="utf-8") as handle:
        for line_number, raw in enumerate(handle, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_number}: expected 'key = value'")
            key, _, text = (part.strip() for part in line.partition("="))
            if key not in _WORLD_FIELDS:
                raise ConfigError(f"{path}:{line_number}: unknown config key {key!r}")
            field_type = _WORLD_FIELDS[key]
            try:
                if field_type in ("int", int):
                    values[key] = int(text)
                elif field_type in ("bool", bool):
                    if text.lower() not in ("true", "false"):
                        raise ValueError(f"expected true/false, got {text!r}")
                    values[key] = text.lower() == "true"
                else:
                    values[key] = float(text)
            except ValueError as exc:
                raise ConfigError(f"{path}:{line_number}: {exc}") from exc
    try:
        return WorldConfig(**values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# ── Threshold files ─────────────────────────────────────────────────────


def _threshold_payload(threshold: Threshold | float) -> dict:
    if isinstance(threshold, Threshold):
        return {
            "tau": threshold.tau,
            "max_failures": threshold.max_failures,
            "n_calibration": threshold.n_calibration,
            "budget": {"epsilon": threshold.budget.epsilon, "delta": threshold.budget.delta},
        }
    return {"tau": float(threshold)}


def _write_json(payload: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _read_json(path: str | Path, expected_kind: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except (OSError, ValueError) as exc:
        raise DumpError(f"cannot read {path}: {exc}") from exc
    if payload.get("kind") != expected_kind:
        raise DumpError(f"{path}: expected kind {expected_kind!r}, got {payload.get('kind')!r}")
    return payload


def _detector_thresholds_from_payload(payload: dict) -> tuple[DetectorThresholds, dict]:
    taus = payload["tau"]
    budgets = payload.get("budgets", {})
    thresholds = DetectorThresholds(
        tau_prp=float(taus["proposal"]),
        tau_prs=float(taus["presence"]),
        tau_loc=float(taus["location"]),
    )
    return thresholds, budgets


# ── Budget flag plumbing ────────────────────────────────────────────────


def _detector_budgets(args: argparse.Namespace) -> DetectorBudgets:
    total_given = args.total_eps is not None or args.total_delta is not None
    component_flags = (
        args.eps_prp,
        args.eps_prs,
        args.eps_loc,
        args.delta_prp,
        args.delta_prs,
        args.delta_loc,
    )
    if total_given:
        if any(v is not None for v in component_flags):
            raise ConfigError("give either --total-eps/--total-delta or component budgets")
        if args.total_eps is None or args.total_delta is None:
            raise ConfigError("--total-eps and --total-delta go together")
        if args.split != "paper":
            raise ConfigError(f"unknown split {args.split!r}")
        eps = {k: frac * args.total_eps for k, frac in PAPER_EPS_FRACTIONS.items()}
        delta = args.total_delta / 3.0
        return DetectorBudgets(
            proposal=RiskBudget(eps["proposal"], delta),
            presence=RiskBudget(eps["presence"], delta),
            location=RiskBudget(eps["location"], delta),
        )
    if any(v is None for v in component_flags):
        raise ConfigError(
            "need all of --eps-prp/--eps-prs/--eps-loc/--delta-prp/--delta-prs/--delta-loc"
            " (or --total-eps/--total-delta)"
        )
    return DetectorBudgets(
        proposal=RiskBudget(args.eps_prp, args.delta_prp),
        presence=RiskBudget(args.eps_prs, args.delta_prs),
        location=RiskBudget(args.eps_loc, args.delta_loc),
    )


# ── Commands ────────────────────────────────────────────────────────────


def _cmd_simulate(args: argparse.Namespace) -> int:
    if args.config is not None:
        config = load_world_config(args.config)
    elif args.preset == "detection":
        config = default_detection_config()
    else:
        config = crowded_tracking_config()
    if args.seed is not None:
        config = dataclasses.replace(config, seed=args.seed)
    dataset = gen_world(config)
    serialize_dump(dataset, args.out)
    print(f"wrote {len(dataset.images)} images to {args.out}")
    return EXIT_OK


def _cmd_calibrate_detector(args: argparse.Namespace) -> int:
    budgets = _detector_budgets(args)
    dataset = parse_dump(args.input, strict=not args.lenient)
    thresholds = calibrate_detector(dataset.image_list(), budgets)
    strict = thresholds.composed_strict
    shared = thresholds.composed_shared
    calibration = {
        "proposal": _threshold_payload(thresholds.tau_prp),
        "presence": _threshold_payload(thresholds.tau_prs),
        "location": _threshold_payload(thresholds.tau_loc),
    }
    payload = {
        "kind": "detector-thresholds",
        "version": THRESHOLDS_VERSION,
        "tau": {name: entry["tau"] for name, entry in calibration.items()},
        "calibration": calibration,
        "budgets": {
            "proposal": {"epsilon": budgets.proposal.epsilon, "delta": budgets.proposal.delta},
            "presence": {"epsilon": budgets.presence.epsilon, "delta": budgets.presence.delta},
            "location": {"epsilon": budgets.location.epsilon, "delta": budgets.location.delta},
        },
        "composed": {
            MODE_STRICT_CHAIN: {
                "epsilon": strict.epsilon,
                "delta": strict.delta,
                "degenerate": strict.degenerate,
            },
            MODE_SHARED_EVENT: {
                "epsilon": shared.epsilon,
                "delta": shared.delta,
                "degenerate": shared.degenerate,
            },
        },
        "composition_mode": args.compose,
        "proposal_error_floor": thresholds.proposal_error_floor,
    }
    _write_json(payload, args.out)
    if thresholds.any_infeasible:
        print(
            "warning: budget infeasible at this calibration size; trivial tau = 0 emitted",
            file=sys.stderr,
        )
        if args.strict_budget:
            raise InfeasibleBudgetError("infeasible budget under --strict-budget")
    print(f"wrote detector thresholds to {args.out}")
    return EXIT_OK


def _cmd_calibrate_edges(args: argparse.Namespace) -> int:
    dataset = parse_dump(args.input, strict=not args.lenient)
    pairs = dataset.frame_pairs()
    budget = RiskBudget(args.eps_edge, args.delta_edge)
    threshold = calibrate_edges(pairs, budget)
    n_transitions, n_excluded = transition_stats(pairs)
    payload = {
        "kind": "edge-threshold",
        "version": THRESHOLDS_VERSION,
        "tau": threshold.tau,
        "calibration": _threshold_payload(threshold),
        "n_transitions": n_transitions,
        "n_objects_without_transition": n_excluded,
    }
    _write_json(payload, args.out)
    if threshold.infeasible:
        print(
            "warning: budget infeasible at this calibration size; trivial tau = 0 emitted",
            file=sys.stderr,
        )
        if args.strict_budget:
            raise InfeasibleBudgetError("infeasible budget under --strict-budget")
    print(f"wrote edge threshold to {args.out}")
    return EXIT_OK


def _component_rows(dataset: Dataset, payload: dict) -> list[ComponentErrorRow]:
    thresholds, budget_payload = _detector_thresholds_from_payload(payload)
    proposer = estimated_proposer(thresholds.tau_prp)
    losses = {"proposal": 0, "presence": 0, "location": 0, "detection": 0}
    total = 0
    for image in dataset.image_list():
        for truth in image.ground_truth:
            total += 1
            losses["proposal"] += proposal_loss(image, truth, thresholds.tau_prp)
            losses["presence"] += presence_loss(image, truth, thresholds.tau_prs, proposer)
            losses["location"] += location_loss(image, truth, thresholds.tau_loc, proposer)
            losses["detection"] += detection_loss(image, truth, thresholds)
    if total == 0:
        raise DumpError("dump has no ground-truth detections to evaluate")
    measured = {name: count / total for name, count in losses.items()}
    composed = payload.get("composed", {}).get(payload.get("composition_mode", MODE_SHARED_EVENT))
    budgets = {}
    for name in ("proposal", "presence", "location"):
        entry = budget_payload.get(name, {})
        budgets[name] = (entry.get("epsilon", float("nan")), entry.get("delta", float("nan")))
    if composed:
        budgets["detection"] = (composed["epsilon"], composed["delta"])
    else:
        budgets["detection"] = (float("nan"), float("nan"))
    return error_bars_report(measured, budgets)


def _cmd_evaluate(args: argparse.Namespace) -> int:
    dataset = parse_dump(args.input, strict=not args.lenient)
    metrics: dict = {"kind": "metrics", "version": THRESHOLDS_VERSION}

    detector_payload = None
    if args.thresholds is not None:
        detector_payload = _read_json(args.thresholds, "detector-thresholds")
        rows = _component_rows(dataset, detector_payload)
        metrics["components"] = [dataclasses.asdict(r) for r in rows]

    if args.edge_thresholds is not None:
        edge_payload = _read_json(args.edge_thresholds, "edge-threshold")
        tau_edge = float(edge_payload["tau"])
        eps_edge = edge_payload.get("calibration", {}).get("budget", {}).get("epsilon")
        delta_edge = edge_payload.get("calibration", {}).get("budget", {}).get("delta")
        pairs = dataset.frame_pairs()
        if not pairs:
            raise DumpError("dump has no frame pairs to evaluate tracking on")
        n_transitions, n_excluded = transition_stats(pairs)
        rows = [
            TrackingRow(
                method="edge",
                fnr=fnr(pairs, tau_edge),
                afp=afp(pairs, tau_edge, anchoring=args.anchoring),
                eps_edge=eps_edge,
                delta_edge=delta_edge,
            )
        ]
        for k in range(1, args.topk + 1):
            k_fnr, k_afp = top_k_baseline(pairs, k)
            rows.append(TrackingRow(method=f"top-{k}", fnr=k_fnr, afp=k_afp))
        metrics["tracking"] = [dataclasses.asdict(r) for r in rows]
        metrics["tracking_eval"] = {
            "n_transitions": n_transitions,
            "n_objects_without_transition": n_excluded,
            "anchoring": args.anchoring,
        }

        if detector_payload is not None:
            thresholds, _ = _detector_thresholds_from_payload(detector_payload)
            provider = detector_provider(thresholds)
            mode = detector_payload.get("composition_mode", MODE_SHARED_EVENT)
            composed = detector_payload.get("composed", {}).get(mode, {})
            row = ComposedRow(
                eps_det=composed.get("epsilon", float("nan")),
                eps_edge=eps_edge if eps_edge is not None else float("nan"),
                delta_det=composed.get("delta", float("nan")),
                delta_edge=delta_edge if delta_edge is not None else float("nan"),
                fnr=fnr(pairs, tau_edge, provider),
                afp=afp(pairs, tau_edge, provider, anchoring=args.anchoring),
            )
            metrics["composed"] = [dataclasses.asdict(row)]

    if len(metrics) == 2:
        raise ConfigError("evaluate needs --thresholds and/or --edge-thresholds")
    _write_json(metrics, args.out)
    print(f"wrote metrics to {args.out}")
    return EXIT_OK


def _render_metrics(metrics: dict, kind: str, fmt: str) -> str:
    if kind == "components":
        rows = [ComponentErrorRow(**entry) for entry in metrics.get("components", [])]
        return components_csv(rows) if fmt == "csv" else components_text(rows)
    if kind == "tracking":
        rows = [TrackingRow(**entry) for entry in metrics.get("tracking", [])]
        if fmt == "csv":
            return tracking_csv(rows)
        eps = next((r.eps_edge for r in rows if r.eps_edge is not None), float("nan"))
        return tracking_table(rows, eps)
    if kind == "composed":
        rows = [ComposedRow(**entry) for entry in metrics.get("composed", [])]
        return composed_csv(rows) if fmt == "csv" else composed_table(rows)
    raise ConfigError(f"unknown report kind {kind!r}")


def _cmd_report(args: argparse.Namespace) -> int:
    metrics = _read_json(args.metrics, "metrics")
    text = _render_metrics(metrics, args.kind, args.format)
    if args.out is not None:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote report to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_verify_theorems(args: argparse.Namespace) -> int:
    budget = RiskBudget(args.eps, args.delta)
    base = mc_verify(
        score_distribution(seed=args.seed),
        n=args.n_calibration,
        budget=budget,
        trials=args.trials,
        base_seed=args.seed,
    )
    suite = theorem_suite(
        detection_distribution(default_detection_config(), seed=args.seed),
        edge_distribution(crowded_tracking_config(), seed=args.seed + 1),
        SuiteBudgets(
            detector=DetectorBudgets(budget, budget, budget),
            edge=budget,
        ),
        trials=args.trials,
        base_seed=args.seed + 2,
        n_calibration=args.n_calibration,
    )
    lines = [
        f"{'check':<26} {'bound eps':>10} {'bound delta':>12} {'violation rate':>15}  status",
        f"{'threshold-coverage':<26} {budget.epsilon:>10.3f} {budget.delta:>12.3f} "
        f"{base.violation_fraction:>15.4f}  "
        + ("ok" if base.violation_fraction <= budget.delta else "VIOLATED"),
    ]
    csv_lines = ["check,epsilon_bound,delta_bound,trials,violations,violation_fraction"]
    csv_lines.append(
        f"threshold-coverage,{budget.epsilon!r},{budget.delta!r},{base.trials},"
        f"{base.violations},{base.violation_fraction!r}"
    )
    for check in suite.checks:
        status = "ok" if check.passed else "VIOLATED"
        if check.flagged_infeasible:
            status += " (infeasible budget)"
        lines.append(
            f"{check.label:<26} {check.epsilon_bound:>10.3f} {check.delta_bound:>12.3f} "
            f"{check.violation_fraction:>15.4f}  {status}"
        )
        csv_lines.append(
            f"{check.label},{check.epsilon_bound!r},{check.delta_bound!r},"
            f"{check.trials},{check.violations},{check.violation_fraction!r}"
        )
    print("\n".join(lines))
    if args.out is not None:
        Path(args.out).write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
        print(f"wrote report to {args.out}")
    # A violated bound is reported in the table, not turned into a failing exit.
    return EXIT_OK


# ── Parser ──────────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pacset",
        description="Calibrated prediction sets for detection and tracking.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic world dump")
    sim.add_argument("--config", help="world config file (key = value lines)")
    sim.add_argument(
        "--preset",
        choices=["detection", "tracking"],
        default="tracking",
        help="built-in config when no --config is given",
    )
    sim.add_argument("--seed", type=int, help="override the config seed")
    sim.add_argument("--out", required=True, help="output dump path")
    sim.set_defaults(handler=_cmd_simulate)

    cal = sub.add_parser("calibrate-detector", help="calibrate the three component thresholds")
    cal.add_argument("--input", required=True, help="detector dump")
    cal.add_argument("--out", required=True, help="thresholds JSON path")
    cal.add_argument("--eps-prp", type=float)
    cal.add_argument("--eps-prs", type=float)
    cal.add_argument("--eps-loc", type=float)
    cal.add_argument("--delta-prp", type=float)
    cal.add_argument("--delta-prs", type=float)
    cal.add_argument("--delta-loc", type=float)
    cal.add_argument("--total-eps", type=float, help="total detection epsilon to split")
    cal.add_argument("--total-delta", type=float, help="total detection delta to split")
    cal.add_argument("--split", default="paper", help="split rule for total budgets")
    cal.add_argument(
        "--compose",
        choices=[MODE_STRICT_CHAIN, MODE_SHARED_EVENT, "strict", "shared"],
        default=MODE_SHARED_EVENT,
    )
    cal.add_argument("--strict-budget", action="store_true")
    cal.add_argument("--lenient", action="store_true", help="drop dangling dump references")
    cal.set_defaults(handler=_cmd_calibrate_detector)

    edge = sub.add_parser("calibrate-edges", help="calibrate the edge threshold")
    edge.add_argument("--input", required=True)
    edge.add_argument("--out", required=True)
    edge.add_argument("--eps-edge", type=float, required=True)
    edge.add_argument("--delta-edge", type=float, required=True)
    edge.add_argument("--strict-budget", action="store_true")
    edge.add_argument("--lenient", action="store_true")
    edge.set_defaults(handler=_cmd_calibrate_edges)

    ev = sub.add_parser("evaluate", help="measure component errors and tracking metrics")
    ev.add_argument("--input", required=True)
    ev.add_argument("--thresholds", help="detector thresholds JSON")
    ev.add_argument("--edge-thresholds", help="edge threshold JSON")
    ev.add_argument("--topk", type=int, default=5, help="evaluate top-1..k baselines")
    ev.add_argument("--anchoring", choices=["object", "global"], default="object")
    ev.add_argument("--out", required=True, help="metrics JSON path")
    ev.add_argument("--lenient", action="store_true")
    ev.set_defaults(handler=_cmd_evaluate)

    rep = sub.add_parser("report", help="render saved metrics as text or CSV")
    rep.add_argument("--metrics", required=True, help="metrics JSON from evaluate")
    rep.add_argument("--kind", choices=["components", "tracking", "composed"], required=True)
    rep.add_argument("--format", choices=["text", "csv"], default="text")
    rep.add_argument("--out")
    rep.set_defaults(handler=_cmd_report)

    ver = sub.add_parser("verify-theorems", help="Monte Carlo certification of the guarantees")
    ver.add_argument("--trials", type=int, default=1000)
    ver.add_argument("--n-calibration", type=int, default=300)
    ver.add_argument("--eps", type=float, default=0.1, help="per-component epsilon")
    ver.add_argument("--delta", type=float, default=0.2, help="per-component delta")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--out", help="CSV report path")
    ver.set_defaults(handler=_cmd_verify_theorems)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "calibrate-detector":
        args.compose = {"strict": MODE_STRICT_CHAIN, "shared": MODE_SHARED_EVENT}.get(
            args.compose, args.compose
        )
    try:
        return args.handler(args)
    except (DumpError, ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
