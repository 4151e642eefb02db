"""
Pipeline scheduler for the binary tree array.

This module assigns ASAP start levels to every node of a tree and, for the
pipelined architecture, inserts delay elements so every operand arrives exactly
when its consumer starts. Inputs are valid at time 0; a node starting at level
``s`` with latency ``L`` finishes at ``s + L - 1``.
"""

import logging
from dataclasses import dataclass, replace
from typing import Dict, Iterator, List, Tuple, Union

from core.design_interfaces import (
    WORD_BITS,
    Diagnostic,
    Mode,
    OpKind,
    ValidationSeverity,
)
from core.node_engine.binary_tree import TreeArray, hardware_inputs

logger = logging.getLogger(__name__)

Endpoint = Union[int, str]


@dataclass(frozen=True)
class Edge:
    """One dependency: ``source`` drives port ``port`` of ``sink``.

    ``source`` is a node address or an input port name; ``sink`` is a node
    address or, for output alignment, an output port name.
    """

    source: Endpoint
    name: str
    sink: Endpoint
    port: int


@dataclass(frozen=True)
class DelayElement:
    """A shift register of ``stages`` clock cycles on one edge."""

    source: Endpoint
    name: str
    sink: Tuple[Endpoint, int]
    stages: int
    width: int = WORD_BITS


@dataclass(frozen=True)
class ScheduledGraph:
    """A tree with per-node start/finish levels and inserted delays."""

    tree: TreeArray
    start: Tuple[int, ...]
    finish: Tuple[int, ...]
    delays: Tuple[DelayElement, ...] = ()
    total_cycles: int = 0

    @property
    def delay_stages(self) -> int:
        return sum(d.stages for d in self.delays)


def iter_edges(tree: TreeArray, include_outputs: bool = False) -> Iterator[Edge]:
    """Every producer-to-port edge in address order.

    Merge operands yield the if side on port 0, the else side on port 1 and
    the condition on port 2.
    """
    for node in tree.nodes:
        for slot in hardware_inputs(node):
            if slot.source is not None:
                yield Edge(slot.source, slot.name, node.address, slot.port)
    if include_outputs:
        for name in tree.outputs:
            binding = tree.output_bindings.get(name)
            if isinstance(binding, int):
                yield Edge(binding, name, name, 0)


class DAGScheduler:
    """
    ASAP scheduler with delay balancing.

    Every node gets dedicated hardware, so there are no resource constraints:
    a node starts one cycle after its latest operand finishes.
    """

    def __init__(self, tree: TreeArray):
        """
        Initialize the scheduler.

        Args:
            tree: A merge-complete binary tree array.
        """
        self.tree = tree

    def validate_dag(self) -> List[Diagnostic]:
        """Check that previous addresses point strictly backward at real producers."""
        results: List[Diagnostic] = []
        for node in self.tree.nodes:
            for operand, prev in zip(node.operands, node.prev_addresses):
                sides = prev if isinstance(prev, tuple) else (prev,)
                if isinstance(prev, tuple) and node.operator != OpKind.MERGE:
                    results.append(self._error(
                        f"node {node.address} reads '{operand}' through an unmerged pair"
                    ))
                for side in sides:
                    if side < 0:
                        continue
                    if side >= node.address:
                        results.append(self._error(
                            f"node {node.address} depends on later node {side}"
                        ))
                    elif operand not in self.tree.nodes[side].results:
                        results.append(self._error(
                            f"node {side} does not produce '{operand}' for node {node.address}"
                        ))
        return results

    @staticmethod
    def _error(message: str) -> Diagnostic:
        return Diagnostic(ValidationSeverity.ERROR, "E900", message)

    def assign_levels(self) -> ScheduledGraph:
        tree = self.tree
        start: List[int] = []
        finish: List[int] = []
        for node in tree.nodes:
            ready = 0
            for slot in hardware_inputs(node):
                if isinstance(slot.source, int):
                    ready = max(ready, finish[slot.source])
            start.append(ready + 1)
            finish.append(ready + node.delay_cycles)

        total = 0
        for binding in tree.output_bindings.values():
            for side in _addresses(binding):
                total = max(total, finish[side])
        logger.debug(f"Assigned levels to {len(start)} nodes, total {total} cycles")
        return ScheduledGraph(tree, tuple(start), tuple(finish), (), total)

    def insert_delays(self, graph: ScheduledGraph) -> ScheduledGraph:
        """Balance every edge, including edges into output ports."""
        delays: List[DelayElement] = []
        for edge in iter_edges(graph.tree, include_outputs=True):
            gap = _consumer_start(graph, edge.sink) - _producer_finish(graph, edge.source) - 1
            if gap > 0:
                delays.append(DelayElement(
                    source=edge.source,
                    name=edge.name,
                    sink=(edge.sink, edge.port),
                    stages=gap,
                    width=_width(graph.tree, edge.source),
                ))
        logger.info(
            f"Inserted {len(delays)} delay element(s), "
            f"{sum(d.stages for d in delays)} stage(s) in total"
        )
        return replace(graph, delays=tuple(delays))

    def schedule(self, mode: Mode) -> ScheduledGraph:
        graph = self.assign_levels()
        if mode == Mode.PIPELINED:
            graph = self.insert_delays(graph)
        return graph


def _addresses(binding) -> Tuple[int, ...]:
    if isinstance(binding, tuple):
        return tuple(a for a in binding if a >= 0)
    if isinstance(binding, int):
        return (binding,)
    return ()


def _producer_finish(graph: ScheduledGraph, source: Endpoint) -> int:
    return graph.finish[source] if isinstance(source, int) else 0


def _consumer_start(graph: ScheduledGraph, sink: Endpoint) -> int:
    # output ports sample at total_cycles
    return graph.start[sink] if isinstance(sink, int) else graph.total_cycles + 1


def _width(tree: TreeArray, source: Endpoint) -> int:
    if isinstance(source, int) and tree.nodes[source].operator == OpKind.IF_COMPARE:
        return 1
    return WORD_BITS


def assign_levels(tree: TreeArray) -> ScheduledGraph:
    return DAGScheduler(tree).assign_levels()


def insert_delays(graph: ScheduledGraph) -> ScheduledGraph:
    return DAGScheduler(graph.tree).insert_delays(graph)


def critical_path_cycles(graph: ScheduledGraph) -> int:
    """Processing cycles of the design; unaffected by delay insertion."""
    return graph.total_cycles


def verify_alignment(graph: ScheduledGraph) -> List[Diagnostic]:
    """Report every edge where consumer start != producer finish + stages + 1."""
    stages: Dict[Tuple[Endpoint, int], int] = {d.sink: d.stages for d in graph.delays}
    problems: List[Diagnostic] = []
    for edge in iter_edges(graph.tree, include_outputs=True):
        expected = _producer_finish(graph, edge.source) + stages.get((edge.sink, edge.port), 0) + 1
        actual = _consumer_start(graph, edge.sink)
        if actual != expected:
            problems.append(DAGScheduler._error(
                f"edge {edge.source}->{edge.sink}:{edge.port} ({edge.name}) "
                f"arrives at {expected}, consumer starts at {actual}"
            ))
    return problems


def dump_schedule(graph: ScheduledGraph) -> str:
    """``addr | level | finish`` per node followed by the delay list."""
    lines = [f"# schedule {graph.tree.name}: total {graph.total_cycles} cycles"]
    for address, (level, done) in enumerate(zip(graph.start, graph.finish)):
        lines.append(f"{address} | {level} | {done}")
    lines.append(f"# delays: {len(graph.delays)}")
    for index, delay in enumerate(graph.delays):
        sink, port = delay.sink
        lines.append(
            f"d{index} | {delay.source} -> {sink}:{port} | {delay.name} | "
            f"{delay.stages} | {delay.width}"
        )
    return "\n".join(lines) + "\n"
