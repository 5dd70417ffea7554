#!/usr/bin/env python3
"""End-to-end detector calibration demo on synthetic worlds.

Generates a calibration world and a disjoint evaluation world, calibrates
the three component thresholds, measures the component and composed errors
on the evaluation world, and prints the budget-versus-measured table.
"""

import argparse
import dataclasses

from pacset import (
    DetectorBudgets,
    RiskBudget,
    calibrate_detector,
    components_csv,
    components_text,
    default_detection_config,
    detection_loss,
    error_bars_report,
    estimated_proposer,
    gen_world,
    location_loss,
    presence_loss,
    proposal_loss,
)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--eps", type=float, default=0.1, help="per-component epsilon")
    parser.add_argument("--delta", type=float, default=0.15, help="per-component delta")
    parser.add_argument("--frames", type=int, default=160, help="frames per world")
    parser.add_argument("--cal-seed", type=int, default=101)
    parser.add_argument("--eval-seed", type=int, default=202)
    parser.add_argument("--csv", help="also write the table as CSV")
    args = parser.parse_args()

    budget = RiskBudget(args.eps, args.delta)
    budgets = DetectorBudgets(budget, budget, budget)
    calibration = gen_world(
        dataclasses.replace(default_detection_config(seed=args.cal_seed), n_frames=args.frames)
    ).image_list()
    evaluation = gen_world(
        dataclasses.replace(default_detection_config(seed=args.eval_seed), n_frames=args.frames)
    ).image_list()

    thresholds = calibrate_detector(calibration, budgets)
    tau_prp, tau_prs, tau_loc = thresholds.taus()
    print(
        f"calibrated thresholds: proposal {tau_prp:.3f}, presence {tau_prs:.3f}, "
        f"location {tau_loc:.3f} (n = {thresholds.tau_prp.n_calibration}, "
        f"proposal error floor {thresholds.proposal_error_floor:.3f})"
    )

    proposer = estimated_proposer(tau_prp)
    counts = {"proposal": 0, "presence": 0, "location": 0, "detection": 0}
    total = 0
    for image in evaluation:
        for truth in image.ground_truth:
            total += 1
            counts["proposal"] += proposal_loss(image, truth, tau_prp)
            counts["presence"] += presence_loss(image, truth, tau_prs, proposer)
            counts["location"] += location_loss(image, truth, tau_loc, proposer)
            counts["detection"] += detection_loss(image, truth, thresholds)
    measured = {name: value / total for name, value in counts.items()}

    # presence/location are evaluated under the estimated proposer, so their
    # budget lines carry the proposal budget; detection carries the
    # shared-event composed budget.
    shared = thresholds.composed_shared
    rows = error_bars_report(
        measured,
        {
            "proposal": (budget.epsilon, budget.delta),
            "presence": (budget.epsilon * 2, budget.delta * 2),
            "location": (budget.epsilon * 2, budget.delta * 2),
            "detection": (shared.epsilon, shared.delta),
        },
    )
    print()
    print(components_text(rows))
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as handle:
            handle.write(components_csv(rows))
        print(f"wrote {args.csv}")


if __name__ == "__main__":
    main()
