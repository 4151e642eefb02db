"""
Verilog emission for scheduled designs.

The top module instantiates one function-library module per tree node and,
in pipelined mode, one ``Delay_V`` per delay element plus the start/busy/valid
control wrapper. Nodes inside an if/else block go to a separate module per
block; the block's compare and merge nodes stay in the enclosing module, so
nested blocks become nested module instances.

Module ports are derived from connectivity: a block module reads every net
its subtree uses but does not drive, and exports every net it drives that is
read elsewhere.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

from core.codegen.function_library import DELAY_MODULE
from core.codegen.net_namer import NetNamer, legal_identifier
from core.codegen.renderer import get_renderer
from core.design_interfaces import COMPARISONS, WORD_BITS, Mode, OpKind
from core.errors import InternalError
from core.node_engine.binary_tree import (
    ORIGIN_MERGE,
    ORIGIN_PADDING,
    TreeNode,
    hardware_inputs,
    iter_blocks,
)
from core.node_engine.dag_scheduler import ScheduledGraph

logger = logging.getLogger(__name__)

Owner = Optional[int]

_PORTS: Dict[OpKind, Tuple[Tuple[str, ...], Tuple[str, ...]]] = {
    OpKind.ADD: (("a", "b"), ("c",)),
    OpKind.SUB: (("a", "b"), ("c",)),
    OpKind.MUL: (("a", "b"), ("c",)),
    OpKind.DIV: (("a", "b"), ("c",)),
    OpKind.LOG: (("a", "b"), ("c",)),
    OpKind.POWER: (("a",), ("c",)),
    OpKind.SQRT: (("a",), ("c",)),
    OpKind.VALUE: (("a",), ("c",)),
    OpKind.SINCOSTAN: (("a",), ("sin_r", "cos_r", "tan_r")),
    OpKind.IF_COMPARE: (("a", "b"), ("c",)),
    OpKind.MERGE: (("a", "b", "sel"), ("c",)),
}

CLOCK_CONNECTIONS = (("clk", "clk"), ("rst", "rst"))


def _range(width: int) -> str:
    return "" if width == 1 else f"[{width - 1}:0] "


def _is_literal(net: str) -> bool:
    return "'" in net


@dataclass(frozen=True)
class PortSpec:
    direction: str
    name: str
    width: int = WORD_BITS
    reg: bool = False

    @property
    def declaration(self) -> str:
        kind = "reg " if self.reg else "wire"
        return f"{self.direction.ljust(6)} {kind} {_range(self.width)}{self.name}"


@dataclass(frozen=True)
class WireSpec:
    name: str
    width: int = WORD_BITS

    @property
    def range(self) -> str:
        return _range(self.width)


@dataclass(frozen=True)
class Instance:
    """One module instantiation with its port connections."""

    module: str
    name: str
    inputs: Tuple[Tuple[str, str], ...]
    outputs: Tuple[Tuple[str, str], ...]
    params: Tuple[Tuple[str, str], ...] = ()
    comments: Tuple[str, ...] = ()
    owner: Owner = None
    order: Tuple[int, ...] = ()
    kind: str = "node"

    @property
    def connections(self) -> Tuple[Tuple[str, str], ...]:
        return CLOCK_CONNECTIONS + self.inputs + self.outputs

    def read_nets(self) -> List[str]:
        return [net for _, net in self.inputs if not _is_literal(net)]

    def driven_nets(self) -> List[str]:
        return [net for _, net in self.outputs]


@dataclass(frozen=True)
class WrapperSpec:
    total: int
    counter_width: int


@dataclass
class EmitPlan:
    """Everything needed to render one Verilog module."""

    name: str
    file_name: str
    ports: List[PortSpec] = field(default_factory=list)
    wires: List[WireSpec] = field(default_factory=list)
    assigns: List[Tuple[str, str]] = field(default_factory=list)
    instances: List[Instance] = field(default_factory=list)
    header: List[str] = field(default_factory=list)
    wrapper: Optional[WrapperSpec] = None


def module_name(design: str) -> str:
    return legal_identifier(design)


def block_module_name(design: str, block_id: int) -> str:
    return f"{module_name(design)}_ifelse_{block_id}"


def wrapper_spec(total_cycles: int) -> WrapperSpec:
    total = max(total_cycles, 1)
    return WrapperSpec(total, total.bit_length())


def _owner(node: TreeNode) -> Owner:
    # compare and merge nodes already carry their enclosing block's path
    return node.block_path[-1][0] if node.block_path else None


def _comments(node: TreeNode, graph: ScheduledGraph) -> Tuple[str, ...]:
    lines = []
    if node.source_line:
        lines.append(f"line {node.source_line}: {node.source_text}")
    statement = node.describe()
    if node.origin == ORIGIN_PADDING:
        statement = f"branch padding: {statement}"
    elif node.origin == ORIGIN_MERGE:
        statement = f"select for block {node.merge_block}: {statement}"
    lines.append(statement)
    lines.append(f"cycle {graph.start[node.address]} to {graph.finish[node.address]}")
    return tuple(lines)


def node_instance(node: TreeNode, graph: ScheduledGraph, namer: NetNamer) -> Instance:
    """Instantiate the library module implementing ``node``."""
    delayed = {d.sink: index for index, d in enumerate(graph.delays)}
    nets: List[str] = []
    for slot in hardware_inputs(node):
        if slot.source is None:
            nets.append(slot.constant.verilog)
        elif (node.address, slot.port) in delayed:
            nets.append(namer.delay_net(delayed[(node.address, slot.port)]))
        else:
            nets.append(namer.net(slot.source, slot.name))

    params: Tuple[Tuple[str, str], ...] = ()
    if node.operator == OpKind.CALL:
        module = node.label
        in_ports, out_ports = node.entry.inputs, node.entry.outputs
    else:
        module = node.operator.hw_module
        in_ports, out_ports = _PORTS[node.operator]
        if node.operator == OpKind.POWER:
            params = (("EXP", str(node.exponent)),)
        elif node.operator == OpKind.IF_COMPARE:
            params = (("COND", str(COMPARISONS.index(node.condition))),)

    if len(nets) != len(in_ports) or len(node.results) != len(out_ports):
        raise InternalError(
            f"node {node.address} does not match the ports of {module}",
            address=node.address,
        )
    return Instance(
        module=module,
        name=namer.instance("node", node.address),
        inputs=tuple(zip(in_ports, nets)),
        outputs=tuple(
            (port, namer.net(node.address, name)) for port, name in zip(out_ports, node.results)
        ),
        params=params,
        comments=_comments(node, graph),
        owner=_owner(node),
        order=(node.address, 1),
    )


def delay_instances(graph: ScheduledGraph, namer: NetNamer) -> List[Instance]:
    tree = graph.tree
    instances = []
    for index, delay in enumerate(graph.delays):
        sink, port = delay.sink
        if isinstance(sink, str):
            owner, order, target = None, (len(tree), 0, index), f"output {sink}"
        else:
            owner = _owner(tree.nodes[sink])
            order, target = (sink, 0, index), f"node {sink} port {port}"
        instances.append(Instance(
            module=DELAY_MODULE,
            name=namer.instance("delay", index),
            inputs=(("d", namer.net(delay.source, delay.name)),),
            outputs=(("q", namer.delay_net(index)),),
            params=(("WIDTH", str(delay.width)), ("STAGES", str(delay.stages))),
            comments=(f"delay {delay.name} by {delay.stages} cycle(s) into {target}",),
            owner=owner,
            order=order,
            kind="delay",
        ))
    return instances


class _Blocks:
    """Block nesting and per-block connectivity."""

    def __init__(self, graph: ScheduledGraph, instances: List[Instance], namer: NetNamer):
        tree = graph.tree
        self.spans = {span.block_id: span for span in iter_blocks(tree)}
        self.parent: Dict[int, Owner] = {
            b: _owner(tree.nodes[span.compare]) for b, span in self.spans.items()
        }
        self.instances = instances
        self.external_reads: Set[str] = {namer.port(n) for n in tree.outputs}

    def subtree(self, block_id: int) -> Set[int]:
        members = {block_id}
        changed = True
        while changed:
            changed = False
            for child, parent in self.parent.items():
                if parent in members and child not in members:
                    members.add(child)
                    changed = True
        return members

    def ports(self, block_id: int) -> Tuple[List[str], List[str]]:
        members = self.subtree(block_id)
        driven: List[str] = []
        read: List[str] = []
        outside: Set[str] = set(self.external_reads)
        for inst in self.instances:
            if inst.owner in members:
                driven.extend(n for n in inst.driven_nets() if n not in driven)
                read.extend(n for n in inst.read_nets() if n not in read)
            else:
                outside.update(inst.read_nets())
        inputs = [n for n in read if n not in driven]
        outputs = [n for n in driven if n in outside]
        return inputs, outputs


def plan_design(
    graph: ScheduledGraph, namer: NetNamer, mode: Optional[Mode] = None
) -> Dict[Owner, EmitPlan]:
    """Build the top plan (key None) and one plan per if/else block.

    Args:
        graph: Scheduled graph; delays present only for pipelined builds.
        namer: Result of ``rename_signals`` on the same graph.
        mode: Adds the control wrapper to the top plan when pipelined.
    """
    tree = graph.tree
    design = tree.name
    instances = [node_instance(node, graph, namer) for node in tree.nodes]
    instances += delay_instances(graph, namer)
    blocks = _Blocks(graph, instances, namer)

    plans: Dict[Owner, EmitPlan] = {None: EmitPlan(module_name(design), "top.v")}
    block_ports: Dict[int, Tuple[List[str], List[str]]] = {}
    for block_id, span in sorted(blocks.spans.items()):
        compare = tree.nodes[span.compare]
        inputs, outputs = blocks.ports(block_id)
        block_ports[block_id] = (inputs, outputs)
        plan = EmitPlan(block_module_name(design, block_id), f"ifelse_{block_id}.v")
        plan.header = [
            f"{design}: if/else block {block_id}, nesting depth {span.depth}",
            f"line {compare.source_line}: {compare.source_text}",
            f"{len(span.members)} node(s) inside the block; condition and selects "
            f"live in the enclosing module",
        ]
        plan.ports = [PortSpec("input", "clk", 1), PortSpec("input", "rst", 1)]
        plan.ports += [PortSpec("input", n, namer.width(n)) for n in inputs]
        plan.ports += [PortSpec("output", n, namer.width(n)) for n in outputs]
        plans[block_id] = plan

    for block_id, (inputs, outputs) in block_ports.items():
        span = blocks.spans[block_id]
        instances.append(Instance(
            module=block_module_name(design, block_id),
            name=namer.instance("block", block_id),
            inputs=tuple((n, n) for n in inputs),
            outputs=tuple((n, n) for n in outputs),
            comments=(
                f"line {tree.nodes[span.compare].source_line}: "
                f"{tree.nodes[span.compare].source_text}",
                f"if/else block {block_id} ({len(span.members)} node(s))",
            ),
            owner=blocks.parent[block_id],
            order=(span.compare, 2),
            kind="block",
        ))

    for inst in sorted(instances, key=lambda i: i.order):
        plans[inst.owner].instances.append(inst)

    top = plans[None]
    top.ports = [PortSpec("input", "clk", 1), PortSpec("input", "rst", 1)]
    if mode == Mode.PIPELINED:
        top.wrapper = wrapper_spec(graph.total_cycles)
        top.ports += [
            PortSpec("input", "start", 1),
            PortSpec("output", "busy", 1, reg=True),
            PortSpec("output", "valid", 1),
        ]
    top.ports += [PortSpec("input", namer.port(n)) for n in tree.inputs]
    top.ports += [PortSpec("output", namer.port(n)) for n in tree.outputs]
    top.assigns = [
        (namer.port(name), value.verilog) for name, value in tree.constant_outputs.items()
    ]
    node_count = sum(1 for i in instances if i.kind == "node")
    top.header = [
        f"{design}: {(mode or Mode.UNROLLED).value} architecture",
        f"{node_count} function instance(s), {len(graph.delays)} delay element(s)",
    ]
    if mode == Mode.PIPELINED:
        top.header.append(
            f"processing cycles: {graph.total_cycles}; pulse start, results valid with valid"
        )
    else:
        top.header.append(
            f"hold inputs stable; outputs settle after {graph.total_cycles} clock edge(s)"
        )

    for plan in plans.values():
        port_names = {p.name for p in plan.ports}
        declared: List[str] = []
        for inst in plan.instances:
            declared.extend(
                n for n in inst.driven_nets() if n not in port_names and n not in declared
            )
        plan.wires = [WireSpec(n, namer.width(n)) for n in declared]
    return plans


def render_plan(plan: EmitPlan) -> str:
    return get_renderer().render("module.v.j2", plan=plan)


def emit_top(graph: ScheduledGraph, mode: Mode, namer: NetNamer) -> str:
    """Render ``top.v``."""
    plan = plan_design(graph, namer, mode)[None]
    logger.debug(f"Emitting top module {plan.name} with {len(plan.instances)} instance(s)")
    return render_plan(plan)


def emit_ifelse_module(graph: ScheduledGraph, namer: NetNamer) -> Dict[str, str]:
    """Render one ``ifelse_<k>.v`` per block; empty when the design has none."""
    plans = plan_design(graph, namer)
    return {
        plan.file_name: render_plan(plan)
        for owner, plan in sorted(
            ((o, p) for o, p in plans.items() if o is not None), key=lambda item: item[0]
        )
    }
