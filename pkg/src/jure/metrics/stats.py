"""Descriptive statistics over labeled instances and routing traces."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal

from jure.core.errors import JureError
from jure.core.trace import RoutingTrace
from jure.core.types import SubTask


class ZeroDenominator(JureError):
    def __init__(self):
        super().__init__("share denominator must be at least 1")


class UnlabeledTrace(JureError):
    def __init__(self, instance_id: str):
        super().__init__(f"trace for instance {instance_id!r} has no sub-task label")


def round_percent(numerator: int, denominator: int) -> float:
    """Round half away from zero to two decimals, e.g. 20/30 -> 66.67."""
    if denominator < 1:
        raise ZeroDenominator()
    share = Decimal(numerator) * 100 / Decimal(denominator)
    return float(share.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class DistributionRow:
    sub_task: SubTask
    count: int
    percentage: float


def subtask_distribution(labels: list[SubTask], denominator: int) -> list[DistributionRow]:
    """Counts plus two-decimal shares of ``denominator``, in taxonomy order.

    The denominator is explicit rather than ``len(labels)`` so callers can
    report shares of a wider population (e.g. before exclusions).
    """
    if denominator < 1:
        raise ZeroDenominator()
    rows = []
    for sub_task in SubTask:
        count = sum(1 for label in labels if label is sub_task)
        rows.append(DistributionRow(sub_task, count, round_percent(count, denominator)))
    return rows


@dataclass(frozen=True)
class InvocationStats:
    sub_task: SubTask
    expert: str
    count: int
    percentage: float  # share of all invocations within this sub-task


def invocation_frequency(
    traces: list[tuple[str, RoutingTrace]],
    labels: dict[str, SubTask],
) -> list[InvocationStats]:
    """How often each expert ran, per sub-task, across a batch of traces.

    ``traces`` pairs each trace with its instance id; ``labels`` maps every
    instance id to a sub-task.  Rows come back sorted by (taxonomy order,
    expert name).
    """
    counts: dict[tuple[SubTask, str], int] = {}
    totals: dict[SubTask, int] = {}
    for instance_id, trace in traces:
        if instance_id not in labels:
            raise UnlabeledTrace(instance_id)
        sub_task = labels[instance_id]
        for expert in trace.invoked_experts:
            counts[(sub_task, expert)] = counts.get((sub_task, expert), 0) + 1
            totals[sub_task] = totals.get(sub_task, 0) + 1
    rows = []
    order = {sub_task: i for i, sub_task in enumerate(SubTask)}
    for (sub_task, expert), count in sorted(
        counts.items(), key=lambda kv: (order[kv[0][0]], kv[0][1])
    ):
        rows.append(
            InvocationStats(sub_task, expert, count, round_percent(count, totals[sub_task]))
        )
    return rows
