"""
Performance and resource estimation.

Resources are the sum of per-instance costs: one function unit per node, the
shift registers of every delay element and, for pipelined builds, the control
counter. Library calls contribute the resources recorded at registration.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import pandas as pd

from core.codegen.verilog_writer import wrapper_spec
from core.cost_table import CostTable, OpCost
from core.design_interfaces import Mode, OpKind
from core.node_engine.dag_scheduler import ScheduledGraph, critical_path_cycles

logger = logging.getLogger(__name__)

RESOURCE_COLUMNS = ["lut", "ff", "dsp", "bram"]
BREAKDOWN_COLUMNS = ["item", "kind", "module"] + RESOURCE_COLUMNS


@dataclass
class Report:
    """Cycle count (pipelined only) and resource totals of one build."""

    design: str
    mode: Mode
    total_cycles: Optional[int]
    lut: int
    ff: int
    dsp: int
    bram: int
    breakdown: pd.DataFrame

    @property
    def cycles_text(self) -> str:
        return "NA" if self.total_cycles is None else str(self.total_cycles)


def _row(item: str, kind: str, module: str, cost: OpCost) -> dict:
    return {
        "item": item, "kind": kind, "module": module,
        "lut": cost.lut, "ff": cost.ff, "dsp": cost.dsp, "bram": cost.bram,
    }


def estimate(
    graph: ScheduledGraph, costs: Optional[CostTable] = None, mode: Mode = Mode.PIPELINED
) -> Report:
    """Estimate cycles and resources of a scheduled design.

    Args:
        graph: Scheduled design; delays are counted when present.
        costs: Per-operator costs, defaults when omitted.
        mode: Unrolled reports no cycle count and no control wrapper.
    """
    costs = costs or CostTable()
    tree = graph.tree
    rows: List[dict] = []
    for node in tree.nodes:
        if node.operator == OpKind.CALL:
            resources = node.entry.resources
            cost = OpCost(resources.lut, resources.ff, resources.dsp, resources.bram)
            rows.append(_row(f"u{node.address}", "call", node.label, cost))
        else:
            rows.append(_row(
                f"u{node.address}", "node", node.operator.hw_module, costs.cost(node.operator)
            ))
    for index, delay in enumerate(graph.delays):
        rows.append(_row(
            f"d{index}", "delay", f"Delay_V x{delay.stages}",
            costs.delay_cost(delay.stages, delay.width),
        ))
    if mode == Mode.PIPELINED and tree.nodes:
        width = wrapper_spec(graph.total_cycles).counter_width
        rows.append(_row("control", "wrapper", "counter", OpCost(lut=width, ff=width)))

    breakdown = pd.DataFrame(rows, columns=BREAKDOWN_COLUMNS)
    totals = {column: int(breakdown[column].sum()) for column in RESOURCE_COLUMNS}
    report = Report(
        design=tree.name,
        mode=mode,
        total_cycles=critical_path_cycles(graph) if mode == Mode.PIPELINED else None,
        breakdown=breakdown,
        **totals,
    )
    logger.info(
        f"Estimate for '{tree.name}' ({mode.value}): cycles {report.cycles_text}, "
        f"LUT {report.lut}, FF {report.ff}, DSP {report.dsp}, BRAM {report.bram}"
    )
    return report


def emit_report(report: Report) -> str:
    """Summary row, per-instance breakdown and a totals line."""
    summary = pd.DataFrame([{
        "Design": report.design,
        "Mode": report.mode.value,
        "Cycles": report.cycles_text,
        "LUT": report.lut,
        "FF": report.ff,
        "DSP": report.dsp,
        "BRAM": report.bram,
    }])
    lines = [summary.to_string(index=False), "", "Breakdown"]
    if report.breakdown.empty:
        lines.append("(no hardware)")
    else:
        lines.append(report.breakdown.to_string(index=False))
    lines.append(
        f"TOTAL lut={report.lut} ff={report.ff} dsp={report.dsp} bram={report.bram}"
    )
    return "\n".join(lines) + "\n"
