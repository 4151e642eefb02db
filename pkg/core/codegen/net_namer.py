"""
Single-assignment wire naming.

Every node result gets its own wire. The first producer of a name keeps the
bare name and the k-th reassignment becomes ``name_vK``, so no net is ever
driven twice. Output ports reserve their bare name for the value that finally
reaches the port.
"""

import logging
import re
from typing import Dict, Iterable, List, Set, Tuple, Union

from core.design_interfaces import WORD_BITS, OpKind
from core.node_engine.binary_tree import iter_blocks
from core.node_engine.dag_scheduler import ScheduledGraph

logger = logging.getLogger(__name__)

CONTROL_PORTS = ("clk", "rst", "start", "busy", "valid", "count", "TOTAL")

VERILOG_KEYWORDS = frozenset("""
    always and assign automatic begin buf bufif0 bufif1 case casex casez cell cmos
    config deassign default defparam design disable edge else end endcase
    endconfig endfunction endgenerate endmodule endprimitive endspecify endtable
    endtask event for force forever fork function generate genvar highz0 highz1
    if ifnone incdir include initial inout input instance integer join large
    liblist library localparam macromodule medium module nand negedge nmos nor
    noshowcancelled not notif0 notif1 or output parameter pmos posedge primitive
    pull0 pull1 pulldown pullup pulsestyle_onevent pulsestyle_ondetect rcmos real
    realtime reg release repeat rnmos rpmos rtran rtranif0 rtranif1 scalared
    showcancelled signed small specify specparam strong0 strong1 supply0 supply1
    table task time tran tranif0 tranif1 tri tri0 tri1 triand trior trireg
    unsigned use uwire vectored wait wand weak0 weak1 while wire wor xnor xor
""".split())

_IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def legal_identifier(name: str) -> str:
    """Map ``name`` to a legal Verilog-2001 identifier."""
    name = re.sub(r"[^A-Za-z0-9_]", "_", name)
    if not _IDENTIFIER.match(name):
        name = f"n_{name}"
    if name in VERILOG_KEYWORDS:
        name = f"{name}_n"
    return name


class NetNamer:
    """Maps (producer, name) pairs to unique wire identifiers."""

    def __init__(self, reserved: Iterable[str] = CONTROL_PORTS):
        self._used: Set[str] = set(reserved)
        self._ports: Dict[str, str] = {}
        self._nets: Dict[Tuple[int, str], str] = {}
        self._delays: Dict[int, str] = {}
        self._instances: Dict[Tuple[str, int], str] = {}
        self.widths: Dict[str, int] = {}

    def claim(self, desired: str, width: int = WORD_BITS) -> str:
        base = legal_identifier(desired)
        identifier, suffix = base, 1
        while identifier in self._used:
            identifier = f"{base}_{suffix}"
            suffix += 1
        self._used.add(identifier)
        self.widths[identifier] = width
        return identifier

    def add_port(self, name: str) -> str:
        self._ports[name] = self.claim(name)
        return self._ports[name]

    def port(self, name: str) -> str:
        return self._ports[name]

    def bind(self, address: int, name: str, identifier: str) -> None:
        self._nets[(address, name)] = identifier

    def net(self, source: Union[int, str], name: str) -> str:
        """Wire carrying ``name`` as produced by node ``source`` (or input port)."""
        if isinstance(source, str):
            return self._ports[source]
        return self._nets[(source, name)]

    def set_delay(self, index: int, identifier: str) -> None:
        self._delays[index] = identifier

    def delay_net(self, index: int) -> str:
        return self._delays[index]

    def name_instance(self, kind: str, key: int, desired: str) -> str:
        self._instances[(kind, key)] = self.claim(desired)
        return self._instances[(kind, key)]

    def instance(self, kind: str, key: int) -> str:
        """Instance name of a node, delay or block, by ``kind``."""
        return self._instances[(kind, key)]

    def width(self, identifier: str) -> int:
        return self.widths.get(identifier, WORD_BITS)

    def versions(self) -> Dict[str, List[str]]:
        """Identifiers per source name in producer order."""
        table: Dict[str, List[str]] = {}
        for (_, name), identifier in sorted(self._nets.items()):
            table.setdefault(name, []).append(identifier)
        return table


def rename_signals(graph: ScheduledGraph) -> NetNamer:
    """Assign a fresh wire to every node result and delay element."""
    tree = graph.tree
    namer = NetNamer()
    for name in tree.inputs + tree.outputs:
        namer.add_port(name)

    # instances share the module namespace with nets
    for node in tree.nodes:
        kind = node.label if node.operator == OpKind.CALL else node.operator.short
        namer.name_instance("node", node.address, f"u{node.address}_{kind}")
    for index in range(len(graph.delays)):
        namer.name_instance("delay", index, f"d{index}")
    for span in iter_blocks(tree):
        namer.name_instance("block", span.block_id, f"u_ifelse_{span.block_id}")

    delayed_outputs = {
        delay.sink[0] for delay in graph.delays if isinstance(delay.sink[0], str)
    }
    outputs = set(tree.outputs)
    seen: Dict[str, int] = {}
    for node in tree.nodes:
        width = 1 if node.operator == OpKind.IF_COMPARE else WORD_BITS
        for name in node.results:
            version = seen.get(name, 0)
            seen[name] = version + 1
            if name in outputs:
                final = tree.output_bindings.get(name) == node.address
                if final and name not in delayed_outputs:
                    identifier = namer.port(name)
                else:
                    identifier = namer.claim(f"{name}_v{version}", width)
            elif version == 0:
                identifier = namer.claim(name, width)
            else:
                identifier = namer.claim(f"{name}_v{version}", width)
            namer.bind(node.address, name, identifier)

    for index, delay in enumerate(graph.delays):
        sink, _ = delay.sink
        if isinstance(sink, str):
            namer.set_delay(index, namer.port(sink))
            continue
        source = namer.net(delay.source, delay.name)
        namer.set_delay(index, namer.claim(f"{source}_dly_{index}", delay.width))

    reassigned = sum(1 for count in seen.values() if count > 1)
    logger.debug(f"Named {len(seen)} signal(s), {reassigned} reassigned")
    return namer


def dump_versions(namer: NetNamer) -> str:
    """``# net name: wire, wire_v1`` for every name driven by more than one node."""
    return "".join(
        f"# net {name}: {', '.join(wires)}\n"
        for name, wires in sorted(namer.versions().items())
        if len(wires) > 1
    )
