"""
Self-checking testbench generation.

Stimulus is drawn from a SplitMix64 stream over raw Q16.16 integers, so the
same seed always yields the same vectors. Expected outputs come from the
golden simulator; outputs that depend on a transcendental function are
compared within 2**-8.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Set, Tuple

from core.codegen.net_namer import NetNamer, rename_signals
from core.codegen.renderer import get_renderer
from core.codegen.verilog_writer import module_name
from core.design_interfaces import Diagnostic, FixedValue, Mode, OpKind, warning
from core.errors import DomainError, UnmodeledCall
from core.fixedpoint import CallModel, simulate_graph, to_fixed
from core.node_engine.binary_tree import TreeArray, hardware_inputs
from core.node_engine.dag_scheduler import ScheduledGraph

logger = logging.getLogger(__name__)

DEFAULT_RANGE = (-8.0, 8.0)
TRANSCENDENTAL_TOLERANCE = 256
MAX_REDRAWS = 100

_MASK64 = (1 << 64) - 1

Oracle = Callable[..., Dict[str, FixedValue]]


class SplitMix64:
    """64-bit SplitMix generator."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def raw_between(self, low: int, high: int) -> int:
        return low + self.next() % (high - low + 1)


@dataclass
class StimulusPlan:
    """Seed, vector count, per-input ranges and per-output tolerances."""

    seed: int = 1
    n_vectors: int = 10
    default_range: Tuple[float, float] = DEFAULT_RANGE
    ranges: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    tolerances: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n_vectors < 1:
            raise ValueError("a stimulus plan needs at least one vector")
        for name, (low, high) in {"default": self.default_range, **self.ranges}.items():
            if low > high:
                raise ValueError(f"empty stimulus range for {name}: {low} > {high}")

    def range_for(self, port: str) -> Tuple[float, float]:
        return self.ranges.get(port, self.default_range)


@dataclass(frozen=True)
class Vector:
    inputs: Dict[str, FixedValue]
    expected: Optional[Dict[str, FixedValue]] = None


def derive_tolerances(tree: TreeArray) -> Dict[str, int]:
    """Raw-LSB tolerance per output: 256 downstream of SinCosTan or Log, else 0."""
    inexact: Set[int] = set()
    for node in tree.nodes:
        if node.operator in (OpKind.SINCOSTAN, OpKind.LOG) or any(
            isinstance(slot.source, int) and slot.source in inexact
            for slot in hardware_inputs(node)
        ):
            inexact.add(node.address)

    tolerances: Dict[str, int] = {}
    for name in tree.outputs:
        binding = tree.output_bindings.get(name)
        sides = binding if isinstance(binding, tuple) else (binding,)
        affected = any(isinstance(side, int) and side in inexact for side in sides)
        tolerances[name] = TRANSCENDENTAL_TOLERANCE if affected else 0
    return tolerances


def generate_vectors(
    tree: TreeArray,
    plan: StimulusPlan,
    oracle: Optional[Oracle] = simulate_graph,
    call_models: Optional[Mapping[str, CallModel]] = None,
) -> List[Vector]:
    """Draw ``plan.n_vectors`` input vectors and their expected outputs.

    A vector whose golden evaluation leaves a function's domain (a negative
    square root, a non-positive logarithm) is redrawn, at most 100 times.
    With ``oracle=None`` the vectors carry no expected values.
    """
    rng = SplitMix64(plan.seed)
    bounds = {
        name: tuple(to_fixed(x).raw for x in plan.range_for(name)) for name in tree.inputs
    }
    vectors: List[Vector] = []
    for index in range(plan.n_vectors):
        for attempt in range(MAX_REDRAWS):
            inputs = {
                name: FixedValue(rng.raw_between(*bounds[name])) for name in tree.inputs
            }
            if oracle is None:
                vectors.append(Vector(inputs))
                break
            try:
                expected = oracle(tree, inputs, call_models=call_models)
            except DomainError as exc:
                logger.debug(f"Redrawing vector {index} (attempt {attempt + 1}): {exc.message}")
                continue
            vectors.append(Vector(inputs, expected))
            break
        else:
            raise DomainError(
                f"no vector within the stimulus ranges stays inside the function domains "
                f"after {MAX_REDRAWS} draws"
            )
    return vectors


def _connections(tree: TreeArray, mode: Mode, namer: NetNamer) -> List[Tuple[str, str]]:
    control = ["clk", "rst"]
    if mode == Mode.PIPELINED:
        control += ["start", "busy", "valid"]
    ports = [namer.port(name) for name in tree.inputs + tree.outputs]
    return [(name, name) for name in control + ports]


def emit_testbench(
    graph: ScheduledGraph,
    mode: Mode,
    plan: StimulusPlan,
    oracle: Optional[Oracle] = simulate_graph,
    namer: Optional[NetNamer] = None,
    assertions: bool = True,
    call_models: Optional[Mapping[str, CallModel]] = None,
    warnings: Optional[List[Diagnostic]] = None,
) -> str:
    """Render ``tb_top.v`` for the design in ``graph``.

    Args:
        graph: The scheduled design the testbench drives.
        mode: Pipelined testbenches pulse start and wait for valid; unrolled
            ones hold each vector for total_cycles + 1 clock edges.
        plan: Seed, vector count, ranges and optional tolerance overrides.
        oracle: Golden model producing expected outputs.
        namer: Port naming of the emitted top module.
        assertions: False emits stimulus only.
        call_models: Python models of library calls, by label.
        warnings: Receives W104 when expected values are unavailable.
    """
    tree = graph.tree
    namer = namer or rename_signals(graph)
    if assertions:
        try:
            vectors = generate_vectors(tree, plan, oracle, call_models)
        except UnmodeledCall as exc:
            message = f"testbench is stimulus-only: {exc.message}"
            logger.warning(message)
            if warnings is not None:
                warnings.append(warning("W104", message))
            assertions = False
            vectors = generate_vectors(tree, plan, None)
    else:
        vectors = generate_vectors(tree, plan, None)

    tolerances = {**derive_tolerances(tree), **plan.tolerances}
    rendered = []
    for vector in vectors:
        checks = []
        if assertions:
            checks = [
                (namer.port(name), vector.expected[name].verilog, tolerances[name])
                for name in tree.outputs
            ]
        rendered.append({
            "inputs": [(namer.port(name), value.verilog) for name, value in vector.inputs.items()],
            "checks": checks,
        })

    pipelined = mode == Mode.PIPELINED
    per_vector = graph.total_cycles + 4
    text = get_renderer().render(
        "testbench.v.j2",
        top=module_name(tree.name),
        mode=mode.value,
        seed=plan.seed,
        pipelined=pipelined,
        assertions=assertions,
        inputs=[namer.port(name) for name in tree.inputs],
        outputs=[namer.port(name) for name in tree.outputs],
        connections=_connections(tree, mode, namer),
        vectors=rendered,
        total_cycles=graph.total_cycles,
        timeout=10 * (len(vectors) * per_vector + 10),
    )
    logger.debug(f"Testbench for '{tree.name}': {len(vectors)} vector(s), assertions={assertions}")
    return text
