"""Plot-ready tables for component error budgets and tracking metrics.

Emits aligned text for eyeballing plus CSV for external plotting tools.
Rendering rounds rates (epsilon, fnr, afp, desired_fnr) to three decimals;
confidence budgets (delta) render at full precision since they are often
far below 1e-3.  The raw values stay on the row dataclasses untouched.

CSV layouts (documented, fixed):

    components:  component,epsilon,delta,measured_error,within_budget
    tracking / composed (shared header):
        method,eps_det,eps_edge,delta_det,delta_edge,desired_fnr,fnr,afp
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

__all__ = [
    "DECIMALS",
    "ComponentErrorRow",
    "TrackingRow",
    "ComposedRow",
    "error_bars_report",
    "components_csv",
    "components_text",
    "tracking_table",
    "tracking_csv",
    "composed_table",
    "composed_csv",
]

DECIMALS = 3

COMPONENT_ORDER = ("proposal", "presence", "location", "detection")
TRACKING_CSV_HEADER = "method,eps_det,eps_edge,delta_det,delta_edge,desired_fnr,fnr,afp"


def _fmt_rate(value: float | None) -> str:
    return "" if value is None else f"{value:.{DECIMALS}f}"


def _fmt_delta(value: float | None) -> str:
    return "" if value is None else repr(value)


@dataclass(frozen=True)
class ComponentErrorRow:
    """One bar of the budget-vs-measured chart for a detector component."""

    component: str
    epsilon: float
    delta: float
    measured_error: float

    @property
    def within_budget(self) -> bool:
        return self.measured_error <= self.epsilon


@dataclass(frozen=True)
class TrackingRow:
    """One method row of the edge-versus-baselines table."""

    method: str
    fnr: float
    afp: float
    eps_edge: float | None = None
    delta_edge: float | None = None

    @property
    def desired_fnr(self) -> float | None:
        return self.eps_edge

    def meets_budget(self, eps_edge: float) -> bool:
        return self.fnr <= eps_edge


@dataclass(frozen=True)
class ComposedRow:
    """One (detector budget, edge budget) row of the composed-tracking table."""

    eps_det: float
    eps_edge: float
    delta_det: float
    delta_edge: float
    fnr: float
    afp: float

    @property
    def desired_fnr(self) -> float:
        return self.eps_det + self.eps_edge

    @property
    def within_budget(self) -> bool:
        return self.fnr <= self.desired_fnr


def error_bars_report(
    measured: Mapping[str, float],
    budgets: Mapping[str, tuple[float, float]],
) -> list[ComponentErrorRow]:
    """Rows pairing each component's measured error with its budget.

    Components appear in the fixed proposal/presence/location/detection
    order; both mappings must cover the same components.
    """
    if set(measured) != set(budgets):
        raise ValueError(
            f"measured components {sorted(measured)} != budgeted {sorted(budgets)}"
        )
    ordered = [c for c in COMPONENT_ORDER if c in measured]
    ordered += [c for c in sorted(measured) if c not in COMPONENT_ORDER]
    return [
        ComponentErrorRow(c, budgets[c][0], budgets[c][1], measured[c]) for c in ordered
    ]


def components_csv(rows: Sequence[ComponentErrorRow]) -> str:
    lines = ["component,epsilon,delta,measured_error,within_budget"]
    for row in rows:
        lines.append(
            f"{row.component},{_fmt_rate(row.epsilon)},{_fmt_delta(row.delta)},"
            f"{_fmt_rate(row.measured_error)},{str(row.within_budget).lower()}"
        )
    return "\n".join(lines) + "\n"


def components_text(rows: Sequence[ComponentErrorRow]) -> str:
    lines = [f"{'component':<12} {'budget':>8} {'measured':>9}  status"]
    for row in rows:
        status = "ok" if row.within_budget else "OVER BUDGET"
        lines.append(
            f"{row.component:<12} {_fmt_rate(row.epsilon):>8} "
            f"{_fmt_rate(row.measured_error):>9}  {status}"
        )
    return "\n".join(lines) + "\n"


def tracking_table(rows: Sequence[TrackingRow], eps_edge: float) -> str:
    """Text table of FNR/AFP per method, flagging rows over the FNR budget."""
    lines = [
        f"{'method':<8} {'fnr':>7} {'afp':>7}  status (budget fnr <= {_fmt_rate(eps_edge)})"
    ]
    for row in rows:
        status = "ok" if row.meets_budget(eps_edge) else "violates fnr budget"
        lines.append(f"{row.method:<8} {_fmt_rate(row.fnr):>7} {_fmt_rate(row.afp):>7}  {status}")
    return "\n".join(lines) + "\n"


def tracking_csv(rows: Sequence[TrackingRow]) -> str:
    lines = [TRACKING_CSV_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                (
                    row.method,
                    "",
                    _fmt_rate(row.eps_edge),
                    "",
                    _fmt_delta(row.delta_edge),
                    _fmt_rate(row.desired_fnr),
                    _fmt_rate(row.fnr),
                    _fmt_rate(row.afp),
                )
            )
        )
    return "\n".join(lines) + "\n"


def composed_table(rows: Sequence[ComposedRow]) -> str:
    """Text table over the edge-budget grid: desired versus measured FNR."""
    lines = [
        f"{'eps_det':>8} {'eps_edge':>9} {'desired_fnr':>12} {'fnr':>7} {'afp':>7}  status"
    ]
    for row in rows:
        status = "ok" if row.within_budget else "OVER BUDGET"
        lines.append(
            f"{_fmt_rate(row.eps_det):>8} {_fmt_rate(row.eps_edge):>9} "
            f"{_fmt_rate(row.desired_fnr):>12} {_fmt_rate(row.fnr):>7} "
            f"{_fmt_rate(row.afp):>7}  {status}"
        )
    return "\n".join(lines) + "\n"


def composed_csv(rows: Sequence[ComposedRow]) -> str:
    lines = [TRACKING_CSV_HEADER]
    for row in rows:
        lines.append(
            ",".join(
                (
                    "composed",
                    _fmt_rate(row.eps_det),
                    _fmt_rate(row.eps_edge),
                    _fmt_delta(row.delta_det),
                    _fmt_delta(row.delta_edge),
                    _fmt_rate(row.desired_fnr),
                    _fmt_rate(row.fnr),
                    _fmt_rate(row.afp),
                )
            )
        )
    return "\n".join(lines) + "\n"
