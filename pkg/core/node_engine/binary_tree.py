"""
Binary tree array: the address-indexed dataflow IR.

Every node stores its operand names, operator, result names, the address of the
most recent producer of each operand (``-1`` for inputs and constants, an
``(if, else)`` pair for names produced on both sides of a block) and its delay
in cycles. ``build_tree`` lowers elaborated statements, pads branches so both
sides of every block assign the same names, and inserts one merge node per
block-assigned name.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from core.cost_table import CostTable
from core.design_interfaces import (
    BlockPath,
    Branch,
    FixedConstant,
    FixedValue,
    LibraryEntry,
    OpKind,
    PrevAddress,
    Statement,
    describe_call,
)
from core.errors import ArityError, InternalError

logger = logging.getLogger(__name__)

NO_PRODUCER = -1
ZERO = FixedConstant(0)

ORIGIN_SOURCE = "source"
ORIGIN_PADDING = "padding"
ORIGIN_MERGE = "merge"

OutputBinding = Union[int, Tuple[int, int], FixedConstant]


@dataclass(frozen=True)
class TreeNode:
    """One entry of the binary tree array."""

    address: int
    operands: Tuple[Union[str, FixedConstant], ...]
    operator: OpKind
    results: Tuple[str, ...]
    prev_addresses: Tuple[PrevAddress, ...] = ()
    delay_cycles: int = 1
    block_path: BlockPath = ()
    condition: Optional[str] = None
    exponent: Optional[int] = None
    label: Optional[str] = None
    entry: Optional[LibraryEntry] = None
    opens_block: Optional[int] = None
    merge_block: Optional[int] = None
    pre_block_constants: Tuple[Tuple[str, FixedConstant], ...] = ()
    origin: str = ORIGIN_SOURCE
    source_line: int = 0
    source_text: str = ""

    @property
    def n_operands(self) -> int:
        return len(self.operands)

    @property
    def n_results(self) -> int:
        return len(self.results)

    @property
    def n_prev_addresses(self) -> Tuple[int, ...]:
        return tuple(2 if isinstance(p, tuple) else 1 for p in self.prev_addresses)

    def describe(self) -> str:
        return describe_call(
            self.operator, self.operator.value, self.results, self.operands,
            self.label, self.condition, self.exponent,
        )


@dataclass(frozen=True)
class TreeArray:
    """Dense, address-ordered node list plus the design's port names."""

    name: str
    nodes: Tuple[TreeNode, ...]
    inputs: Tuple[str, ...] = ()
    outputs: Tuple[str, ...] = ()
    output_bindings: Dict[str, OutputBinding] = field(default_factory=dict)
    constant_outputs: Dict[str, FixedConstant] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.nodes)

    def producer(self, address: int) -> TreeNode:
        return self.nodes[address]


@dataclass(frozen=True)
class PortSource:
    """What drives one hardware input port of a node.

    ``source`` is a producer address, an input port name, or None when the
    port is tied to ``constant``.
    """

    port: int
    name: str
    source: Union[int, str, None]
    constant: Optional[FixedConstant] = None


@dataclass(frozen=True)
class BlockSpan:
    """Addresses belonging to one if/else block."""

    block_id: int
    path: BlockPath
    compare: int
    members: Tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.path) + 1


def hardware_inputs(node: TreeNode) -> Tuple[PortSource, ...]:
    """Flatten a node's operands into hardware ports.

    A pair-valued operand occupies two ports (if side, else side); a pair side
    without a producer is tied to constant zero.
    """
    slots: List[PortSource] = []
    for operand, prev in zip(node.operands, node.prev_addresses):
        if isinstance(prev, tuple):
            for side in prev:
                if side == NO_PRODUCER:
                    slots.append(PortSource(len(slots), "", None, ZERO))
                else:
                    slots.append(PortSource(len(slots), operand, side))
        elif isinstance(operand, FixedValue):
            slots.append(PortSource(len(slots), "", None, operand))
        elif prev == NO_PRODUCER:
            slots.append(PortSource(len(slots), operand, operand))
        else:
            slots.append(PortSource(len(slots), operand, prev))
    return tuple(slots)


def lower_statements(
    stmts: Sequence[Statement],
    latencies: Optional[CostTable] = None,
    *,
    inputs: Sequence[str] = (),
    outputs: Sequence[str] = (),
    name: str = "design",
) -> TreeArray:
    """One node per non-folded statement, with previous addresses resolved.

    No padding or merging happens here, so a name assigned inside a block and
    read after it resolves to an ``(if, else)`` pair.
    """
    latencies = latencies or CostTable()
    nodes: List[TreeNode] = []
    last_assignment: Dict[str, Statement] = {}
    for stmt in stmts:
        for result in stmt.results:
            last_assignment[result] = stmt
        if stmt.folded is not None:
            continue
        if stmt.op is None:
            raise InternalError(f"unresolved function '{stmt.function}' reached the tree builder")
        if stmt.op == OpKind.CALL:
            entry = stmt.entry
            if entry is None:
                raise InternalError(f"library call '{stmt.label}' has no entry")
            if len(stmt.operands) != len(entry.inputs) or len(stmt.results) != len(entry.outputs):
                raise ArityError(
                    f"'{stmt.label}' takes {len(entry.outputs)} output(s) and "
                    f"{len(entry.inputs)} input(s), got {len(stmt.results)} and "
                    f"{len(stmt.operands)}",
                    line=stmt.line,
                )
            delay = entry.cycles
        else:
            delay = latencies.latency(stmt.op)
        nodes.append(TreeNode(
            address=len(nodes),
            operands=tuple(stmt.operands),
            operator=stmt.op,
            results=stmt.results,
            delay_cycles=delay,
            block_path=stmt.block_path,
            condition=stmt.condition,
            exponent=stmt.exponent,
            label=stmt.label,
            entry=stmt.entry,
            opens_block=stmt.opens_block,
            pre_block_constants=stmt.pre_block_constants,
            source_line=stmt.line,
            source_text=stmt.text,
        ))

    constant_outputs = {
        out: last_assignment[out].folded[last_assignment[out].results.index(out)]
        for out in outputs
        if out in last_assignment and last_assignment[out].folded is not None
    }
    tree = TreeArray(
        name=name,
        nodes=tuple(nodes),
        inputs=tuple(inputs),
        outputs=tuple(outputs),
        constant_outputs=constant_outputs,
    )
    return _link(tree, tree.nodes)


def build_tree(
    stmts: Sequence[Statement],
    latencies: Optional[CostTable] = None,
    *,
    inputs: Sequence[str] = (),
    outputs: Sequence[str] = (),
    name: str = "design",
) -> TreeArray:
    """Lower, pad and merge: the complete IR for scheduling."""
    latencies = latencies or CostTable()
    tree = lower_statements(stmts, latencies, inputs=inputs, outputs=outputs, name=name)
    tree = insert_merges(pad_else_branch(tree, latencies), latencies)
    logger.info(f"Built binary tree for '{name}' with {len(tree)} nodes")
    return tree


class _BlockState:
    def __init__(self, block_id: int, pre_env: Dict[str, PrevAddress]):
        self.block_id = block_id
        self.pre_env = pre_env
        self.envs: Dict[Branch, Dict[str, PrevAddress]] = {}
        self.assigned: List[str] = []


def _link(tree: TreeArray, nodes: Sequence[TreeNode]) -> TreeArray:
    """Renumber ``nodes`` densely and resolve every previous address."""
    inputs = set(tree.inputs)
    env: Dict[str, PrevAddress] = {}
    path: BlockPath = ()
    blocks: List[_BlockState] = []
    linked: List[TreeNode] = []

    def close_block() -> None:
        nonlocal env, path
        state = blocks.pop()
        state.envs[path[-1][1]] = env
        parent = dict(state.pre_env)
        for name in state.assigned:
            parent[name] = tuple(
                _collapse(state.envs.get(branch, state.pre_env).get(name,
                          state.pre_env.get(name, NO_PRODUCER)))
                for branch in (Branch.IF, Branch.ELSE)
            )
        env = parent
        path = path[:-1]
        if blocks:
            _note_assigned(blocks[-1], state.assigned)

    def enter(target: BlockPath) -> None:
        nonlocal env, path
        while path != target[: len(path)]:
            depth = len(path) - 1
            block_id, branch = path[-1]
            if len(target) > depth and target[depth][0] == block_id:
                state = blocks[-1]
                state.envs[branch] = env
                env = dict(state.envs.get(target[depth][1], state.pre_env))
                path = path[:-1] + (target[depth],)
            else:
                close_block()
        for step in target[len(path):]:
            blocks.append(_BlockState(step[0], dict(env)))
            path = path + (step,)

    for address, node in enumerate(nodes):
        enter(node.block_path)
        prevs: List[PrevAddress] = []
        for operand in node.operands:
            if isinstance(operand, FixedValue):
                prevs.append(NO_PRODUCER)
            elif operand in env:
                prevs.append(env[operand])
            elif operand in inputs:
                prevs.append(NO_PRODUCER)
            else:
                raise InternalError(
                    f"operand '{operand}' of node {address} has no producer",
                    line=node.source_line or None, address=address,
                )
        for result in node.results:
            env[result] = address
        if blocks and node.operator != OpKind.IF_COMPARE:
            _note_assigned(blocks[-1], node.results)
        linked.append(replace(node, address=address, prev_addresses=tuple(prevs)))
    enter(())

    bindings: Dict[str, OutputBinding] = {}
    for out in tree.outputs:
        if out in tree.constant_outputs:
            bindings[out] = tree.constant_outputs[out]
        elif out in env:
            bindings[out] = env[out]
        else:
            raise InternalError(f"output '{out}' is never produced")
    return replace(tree, nodes=tuple(linked), output_bindings=bindings)


def _note_assigned(state: _BlockState, names: Iterable[str]) -> None:
    for name in names:
        if name not in state.assigned:
            state.assigned.append(name)


def _collapse(prev: PrevAddress) -> int:
    # an unmerged inner pair seen from an outer block
    return prev[0] if isinstance(prev, tuple) else prev


def iter_blocks(tree: TreeArray) -> List[BlockSpan]:
    """Every block in compare order, with the addresses inside its branches."""
    spans: List[BlockSpan] = []
    for node in tree.nodes:
        if node.opens_block is None:
            continue
        depth = len(node.block_path)
        members = tuple(
            other.address
            for other in tree.nodes
            if len(other.block_path) > depth
            and other.block_path[:depth] == node.block_path
            and other.block_path[depth][0] == node.opens_block
        )
        spans.append(BlockSpan(node.opens_block, node.block_path, node.address, members))
    return spans


def _branch_assignments(tree: TreeArray, span: BlockSpan, branch: Branch) -> List[str]:
    prefix = span.path + ((span.block_id, branch),)
    names: List[str] = []
    for address in span.members:
        node = tree.nodes[address]
        if node.block_path[: len(prefix)] != prefix or node.operator == OpKind.IF_COMPARE:
            continue
        for result in node.results:
            if result not in names:
                names.append(result)
    return names


def _visible_from(producer_path: BlockPath, path: BlockPath) -> bool:
    """Whether a name produced under ``producer_path`` can be read later at ``path``."""
    common = 0
    while (
        common < min(len(producer_path), len(path))
        and producer_path[common] == path[common]
    ):
        common += 1
    if common == len(producer_path):
        return True
    # same block, other branch
    return not (common < len(path) and producer_path[common][0] == path[common][0])


def pad_else_branch(tree: TreeArray, latencies: Optional[CostTable] = None) -> TreeArray:
    """Make both branches of every block assign the same set of names.

    The deficient branch receives ``Value`` nodes at its end: the pre-block
    constant when there was one, a pass-through of the pre-block value when the
    name was visible before the block, constant 0 otherwise.
    """
    latencies = latencies or CostTable()
    delay = latencies.latency(OpKind.VALUE)
    nodes = list(tree.nodes)
    inserted = 0
    for span in sorted(iter_blocks(tree), key=lambda s: (-s.depth, s.compare)):
        compare = tree.nodes[span.compare]
        constants = dict(compare.pre_block_constants)
        assigned = {
            branch: _branch_assignments(tree, span, branch)
            for branch in (Branch.IF, Branch.ELSE)
        }
        for branch, other in ((Branch.IF, Branch.ELSE), (Branch.ELSE, Branch.IF)):
            missing = [n for n in assigned[other] if n not in assigned[branch]]
            if not missing:
                continue
            branch_path = span.path + ((span.block_id, branch),)
            padding = [
                TreeNode(
                    address=-1,
                    operands=(_padding_value(tree, span, name, constants),),
                    operator=OpKind.VALUE,
                    results=(name,),
                    delay_cycles=delay,
                    block_path=branch_path,
                    origin=ORIGIN_PADDING,
                    source_line=compare.source_line,
                    source_text=compare.source_text,
                )
                for name in missing
            ]
            anchor = _region_end(tree, span, branch)
            position = _position_after(nodes, anchor)
            nodes[position:position] = padding
            inserted += len(padding)
            logger.debug(
                f"Padded {branch.value} branch of block {span.block_id} with "
                f"{', '.join(missing)}"
            )
    if not inserted:
        return tree
    return _link(tree, nodes)


def _padding_value(
    tree: TreeArray, span: BlockSpan, name: str, constants: Dict[str, FixedConstant]
) -> Union[str, FixedConstant]:
    if name in constants:
        return constants[name]
    for node in tree.nodes[: span.compare]:
        if name in node.results and _visible_from(node.block_path, span.path):
            return name
    return ZERO


def _region_end(tree: TreeArray, span: BlockSpan, branch: Branch) -> TreeNode:
    """Last node of ``branch``, or the node the empty region would follow."""
    prefix = span.path + ((span.block_id, branch),)
    in_branch = [
        a for a in span.members if tree.nodes[a].block_path[: len(prefix)] == prefix
    ]
    if in_branch:
        return tree.nodes[in_branch[-1]]
    if branch == Branch.IF:
        return tree.nodes[span.compare]
    return tree.nodes[span.members[-1]] if span.members else tree.nodes[span.compare]


def _position_after(nodes: List[TreeNode], anchor: TreeNode) -> int:
    for index, node in enumerate(nodes):
        if node is anchor:
            position = index + 1
            # keep earlier padding of the same region in front
            while position < len(nodes) and nodes[position].address == -1:
                position += 1
            return position
    raise InternalError(f"node {anchor.address} vanished while padding")


def insert_merges(tree: TreeArray, latencies: Optional[CostTable] = None) -> TreeArray:
    """Add one select node per name assigned in a block, innermost blocks first."""
    latencies = latencies or CostTable()
    delay = latencies.latency(OpKind.MERGE)
    spans = iter_blocks(tree)
    if not spans:
        return tree
    nodes = list(tree.nodes)
    for span in sorted(spans, key=lambda s: (-s.depth, s.compare)):
        compare = tree.nodes[span.compare]
        cond = compare.results[0]
        names = _branch_assignments(tree, span, Branch.IF)
        names += [n for n in _branch_assignments(tree, span, Branch.ELSE) if n not in names]
        merges = [
            TreeNode(
                address=-1,
                operands=(name, cond),
                operator=OpKind.MERGE,
                results=(name,),
                delay_cycles=delay,
                block_path=span.path,
                merge_block=span.block_id,
                origin=ORIGIN_MERGE,
                source_line=compare.source_line,
                source_text=compare.source_text,
            )
            for name in names
        ]
        # after the block's last node, including merges of nested blocks
        last = max(i for i, n in enumerate(nodes) if _inside(n, span))
        nodes[last + 1:last + 1] = merges
    return _link(tree, nodes)


def _inside(node: TreeNode, span: BlockSpan) -> bool:
    depth = len(span.path)
    return (
        len(node.block_path) > depth
        and node.block_path[:depth] == span.path
        and node.block_path[depth][0] == span.block_id
    )


def dump_tree(tree: TreeArray) -> str:
    """Line-oriented ``addr | op | results | operands | prev | nprev | delay`` dump."""
    lines = [f"# tree {tree.name}: {len(tree)} nodes"]
    for node in tree.nodes:
        operands = ", ".join(
            o.hex if isinstance(o, FixedValue) else o for o in node.operands
        )
        prevs = ", ".join(_format_prev(p) for p in node.prev_addresses)
        nprev = ", ".join(str(n) for n in node.n_prev_addresses)
        lines.append(
            f"{node.address} | {node.operator.value} | {', '.join(node.results)} | "
            f"[{operands}] | [{prevs}] | [{nprev}] | {node.delay_cycles}"
        )
    for out in tree.outputs:
        binding = tree.output_bindings.get(out)
        shown = binding.hex if isinstance(binding, FixedValue) else _format_prev(binding)
        lines.append(f"# output {out} <- {shown}")
    return "\n".join(lines) + "\n"


def _format_prev(prev: Optional[PrevAddress]) -> str:
    if isinstance(prev, tuple):
        return f"({prev[0]},{prev[1]})"
    return str(prev)


def reconstruct_expressions(tree: TreeArray) -> List[str]:
    """Statement text of every source-derived node, in address order."""
    return [node.describe() for node in tree.nodes if node.origin == ORIGIN_SOURCE]
