"""
Bit-exact Q16.16 semantics of the fundamental functions.

All port data is 32-bit two's complement with 16 fraction bits. Each function
keeps the internal precision of its hardware module:

    add / sub / value      fixed(32,16)
    mul / div / power      fixed(64,32)
    log                    fixed(128,64)
    sqrt                   fixed(16,8)
    sin / cos / tan        fixed(32,29)

The same rules back the golden simulator used for testbench expectations and
for equivalence checks between unrolled and pipelined builds.
"""

import logging
from math import isqrt
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from mpmath.ctx_mp import MPContext

from core.design_interfaces import (
    FRACTION_BITS,
    Diagnostic,
    FixedConstant,
    FixedValue,
    OpKind,
    warning,
)
from core.errors import DomainError, HlsError, RangeError, UndefinedName, UnmodeledCall
from core.node_engine.binary_tree import TreeArray, TreeNode, hardware_inputs
from core.node_engine.dag_scheduler import ScheduledGraph

logger = logging.getLogger(__name__)

RAW_MIN = -(1 << 31)
RAW_MAX = (1 << 31) - 1
ONE = 1 << FRACTION_BITS
POWER_EXPONENT_RANGE = (-128, 127)
TRIG_FRACTION_BITS = 29
LOG_FRACTION_BITS = 64

# private context so precision changes elsewhere cannot leak in
_MP = MPContext()
_MP.dps = 50

CallModel = Callable[[Sequence[FixedValue]], Sequence[FixedValue]]


def simulate_overflow(value: int, width: int) -> int:
    """Wrap ``value`` to a ``width``-bit two's-complement integer."""
    mask = (1 << width) - 1
    value &= mask
    if value & (1 << (width - 1)):
        value -= 1 << width
    return value


def _saturate(value: int, width: int) -> Tuple[int, bool]:
    low, high = -(1 << (width - 1)), (1 << (width - 1)) - 1
    if value < low:
        return low, True
    if value > high:
        return high, True
    return value, False


def _round_away(x) -> int:
    """Round to nearest integer, ties away from zero."""
    n = int(_MP.floor(abs(x) + _MP.mpf(1) / 2))
    return -n if x < 0 else n


def _trunc_div(a: int, b: int) -> int:
    """Integer division truncating toward zero, as Verilog's signed ``/``."""
    q = abs(a) // abs(b)
    return -q if (a < 0) != (b < 0) else q


def _real(value: FixedValue):
    return _MP.mpf(value.raw) / ONE


def to_fixed(x) -> FixedValue:
    """Convert a real number to Q16.16 (``number_to_hex``).

    Args:
        x: int, float, decimal string or mpmath number.

    Returns:
        The nearest representable value, ties rounded away from zero.

    Raises:
        RangeError: if ``x`` lies outside [-32768, 32768).
    """
    value = _MP.mpf(x)
    if value < -32768 or value >= 32768:
        raise RangeError(f"{x} is outside the Q16.16 range [-32768, 32768)")
    raw, _ = _saturate(_round_away(value * ONE), 32)
    return FixedValue(raw)


def to_constant(x) -> FixedConstant:
    return FixedConstant(to_fixed(x).raw)


def fixed_add(a: FixedValue, b: FixedValue) -> FixedValue:
    return FixedValue(simulate_overflow(a.raw + b.raw, 32))


def fixed_sub(a: FixedValue, b: FixedValue) -> FixedValue:
    return FixedValue(simulate_overflow(a.raw - b.raw, 32))


def fixed_mul(a: FixedValue, b: FixedValue) -> FixedValue:
    # 64-bit product, arithmetic shift right by 16, low 32 bits
    return FixedValue(simulate_overflow((a.raw * b.raw) >> FRACTION_BITS, 32))


def fixed_div(
    a: FixedValue, b: FixedValue, warnings: Optional[List[Diagnostic]] = None
) -> FixedValue:
    if b.raw == 0:
        _warn(warnings, "W102", f"division of {a.hex} by zero saturated")
        return FixedValue(RAW_MAX if a.raw >= 0 else RAW_MIN)
    return FixedValue(simulate_overflow(_trunc_div(a.raw << FRACTION_BITS, b.raw), 32))


def _mul_q32(x: int, y: int) -> int:
    return simulate_overflow((x * y) >> 32, 64)


def fixed_power(
    a: FixedValue, exponent: int, warnings: Optional[List[Diagnostic]] = None
) -> FixedValue:
    """Integer power by repeated squaring in Q32.32."""
    low, high = POWER_EXPONENT_RANGE
    if not low <= exponent <= high:
        raise DomainError(f"power exponent {exponent} is outside [{low}, {high}]")
    base = simulate_overflow(a.raw << FRACTION_BITS, 64)
    acc = 1 << 32
    magnitude = abs(exponent)
    while magnitude:
        if magnitude & 1:
            acc = _mul_q32(acc, base)
        magnitude >>= 1
        base = _mul_q32(base, base)
    if exponent < 0:
        if acc == 0:
            _warn(warnings, "W102", f"power({a.hex}, {exponent}) divides by zero")
            return FixedValue(RAW_MAX)
        acc = simulate_overflow(_trunc_div(1 << 64, acc), 64)
    return FixedValue(simulate_overflow(acc >> FRACTION_BITS, 32))


def fixed_sqrt(a: FixedValue) -> FixedValue:
    """Square root through Q8.8: floor(sqrt(a)) in Q8.8 equals isqrt(raw)."""
    if a.raw < 0:
        raise DomainError(f"sqrt of negative value {a.real}")
    return FixedValue(isqrt(a.raw) << 8)


def _q29_to_q16(value) -> int:
    raw29, _ = _saturate(_round_away(value * (1 << TRIG_FRACTION_BITS)), 32)
    return raw29 >> (TRIG_FRACTION_BITS - FRACTION_BITS)


def fixed_sincostan(a: FixedValue) -> Tuple[FixedValue, FixedValue, FixedValue]:
    x = _real(a)
    return tuple(FixedValue(_q29_to_q16(f(x))) for f in (_MP.sin, _MP.cos, _MP.tan))


def fixed_log(
    a: FixedValue, b: FixedValue, warnings: Optional[List[Diagnostic]] = None
) -> FixedValue:
    """Logarithm of ``b`` to base ``a``."""
    _check_log_domain(a, b)
    ratio = _MP.log(_real(b)) / _MP.log(_real(a))
    raw64 = _round_away(ratio * _MP.mpf(2) ** LOG_FRACTION_BITS)
    raw, clipped = _saturate(raw64 >> (LOG_FRACTION_BITS - FRACTION_BITS), 32)
    if clipped:
        _warn(warnings, "W101", f"log({a.real}, {b.real}) saturated")
    return FixedValue(raw)


def _check_log_domain(a: FixedValue, b: FixedValue) -> None:
    if a.raw <= 0 or a.raw == ONE:
        raise DomainError(f"logarithm base {a.real} must be positive and not 1")
    if b.raw <= 0:
        raise DomainError(f"logarithm argument {b.real} must be positive")


_COMPARATORS: Dict[str, Callable[[int, int], bool]] = {
    ">": lambda x, y: x > y,
    "<": lambda x, y: x < y,
    ">=": lambda x, y: x >= y,
    "<=": lambda x, y: x <= y,
    "==": lambda x, y: x == y,
    "!=": lambda x, y: x != y,
}


def fixed_compare(a: FixedValue, b: FixedValue, condition: str) -> FixedValue:
    return FixedValue(1 if _COMPARATORS[condition](a.raw, b.raw) else 0)


def eval_op(
    op: OpKind,
    args: Sequence[FixedValue],
    *,
    condition: Optional[str] = None,
    exponent: Optional[int] = None,
    warnings: Optional[List[Diagnostic]] = None,
) -> List[FixedValue]:
    """Evaluate one fundamental function on Q16.16 operands.

    Args:
        op: The operator.
        args: Operands in hardware port order; Merge takes (if, else, select).
        condition: Comparison token for IfCompare.
        exponent: Integer exponent for Power.
        warnings: Optional sink for saturation diagnostics.

    Returns:
        One value per result of the function.
    """
    if op == OpKind.ADD:
        return [fixed_add(*args)]
    if op == OpKind.SUB:
        return [fixed_sub(*args)]
    if op == OpKind.MUL:
        return [fixed_mul(*args)]
    if op == OpKind.DIV:
        return [fixed_div(args[0], args[1], warnings)]
    if op == OpKind.POWER:
        if exponent is None:
            raise DomainError("power requires an integer exponent")
        return [fixed_power(args[0], exponent, warnings)]
    if op == OpKind.LOG:
        return [fixed_log(args[0], args[1], warnings)]
    if op == OpKind.SQRT:
        return [fixed_sqrt(args[0])]
    if op == OpKind.SINCOSTAN:
        return list(fixed_sincostan(args[0]))
    if op == OpKind.VALUE:
        return [args[0]]
    if op == OpKind.IF_COMPARE:
        return [fixed_compare(args[0], args[1], condition or "==")]
    if op == OpKind.MERGE:
        return [args[0] if args[2].raw else args[1]]
    raise ValueError(f"{op} has no built-in semantics")


def fold_constant(
    op: OpKind,
    args: Sequence[FixedValue],
    *,
    exponent: Optional[int] = None,
    warnings: Optional[List[Diagnostic]] = None,
    line: Optional[int] = None,
) -> Tuple[FixedConstant, ...]:
    """Evaluate a constant statement in extended precision and quantize to Q16.16.

    Out-of-range results saturate with a W101 warning instead of failing.
    """
    x = [_real(a) for a in args]
    try:
        if op == OpKind.ADD:
            values = [x[0] + x[1]]
        elif op == OpKind.SUB:
            values = [x[0] - x[1]]
        elif op == OpKind.MUL:
            values = [x[0] * x[1]]
        elif op == OpKind.DIV:
            if args[1].raw == 0:
                _warn(warnings, "W102", "constant division by zero saturated", line)
                return (FixedConstant(RAW_MAX if args[0].raw >= 0 else RAW_MIN),)
            values = [x[0] / x[1]]
        elif op == OpKind.POWER:
            if args[0].raw == 0 and exponent is not None and exponent < 0:
                _warn(warnings, "W102", "constant power of zero saturated", line)
                return (FixedConstant(RAW_MAX),)
            values = [x[0] ** exponent]
        elif op == OpKind.LOG:
            _check_log_domain(args[0], args[1])
            values = [_MP.log(x[1]) / _MP.log(x[0])]
        elif op == OpKind.SQRT:
            if args[0].raw < 0:
                raise DomainError(f"sqrt of negative constant {args[0].real}")
            values = [_MP.sqrt(x[0])]
        elif op == OpKind.SINCOSTAN:
            values = [_MP.sin(x[0]), _MP.cos(x[0]), _MP.tan(x[0])]
        elif op == OpKind.VALUE:
            return (FixedConstant(args[0].raw),)
        else:
            raise ValueError(f"{op} cannot be folded")
    except HlsError as exc:
        raise exc.at(line)
    folded = []
    for value in values:
        raw, clipped = _saturate(_round_away(value * ONE), 32)
        if clipped:
            _warn(
                warnings, "W101",
                f"{op.value} constant {_MP.nstr(value, 8)} saturated to Q16.16", line,
            )
        folded.append(FixedConstant(raw))
    return tuple(folded)


def _warn(
    warnings: Optional[List[Diagnostic]], code: str, message: str,
    line: Optional[int] = None,
) -> None:
    logger.warning(message)
    if warnings is not None:
        warnings.append(warning(code, message, line))


def evaluate_node(
    node: TreeNode,
    args: Sequence[FixedValue],
    call_models: Optional[Mapping[str, CallModel]] = None,
    warnings: Optional[List[Diagnostic]] = None,
) -> List[FixedValue]:
    """Evaluate one tree node; errors carry the node address."""
    try:
        if node.operator == OpKind.CALL:
            model = (call_models or {}).get(node.label or "")
            if model is None:
                raise UnmodeledCall(f"no behavioural model for library call '{node.label}'")
            return list(model(args))
        return eval_op(
            node.operator, args, condition=node.condition,
            exponent=node.exponent, warnings=warnings,
        )
    except HlsError as exc:
        exc.address = node.address
        raise exc.at(node.source_line)


def simulate_graph(
    tree: TreeArray,
    inputs: Mapping[str, FixedValue],
    call_models: Optional[Mapping[str, CallModel]] = None,
    warnings: Optional[List[Diagnostic]] = None,
) -> Dict[str, FixedValue]:
    """Evaluate the tree in address order and return every declared output."""
    missing = [name for name in tree.inputs if name not in inputs]
    if missing:
        raise UndefinedName(f"no stimulus for input(s): {', '.join(missing)}")
    values: List[List[FixedValue]] = []

    def lookup(source, name: str) -> FixedValue:
        if isinstance(source, str):
            return inputs[source]
        return values[source][tree.nodes[source].results.index(name)]

    for node in tree.nodes:
        args = [
            slot.constant if slot.constant is not None else lookup(slot.source, slot.name)
            for slot in hardware_inputs(node)
        ]
        values.append(evaluate_node(node, args, call_models, warnings))

    outputs: Dict[str, FixedValue] = {}
    for name in tree.outputs:
        binding = tree.output_bindings[name]
        # folded constants are reported as plain port values
        outputs[name] = (
            FixedValue(binding.raw) if isinstance(binding, FixedValue) else lookup(binding, name)
        )
    return outputs


def simulate_pipelined(
    graph: ScheduledGraph,
    vectors: Sequence[Mapping[str, FixedValue]],
    call_models: Optional[Mapping[str, CallModel]] = None,
) -> List[Optional[Dict[str, FixedValue]]]:
    """Cycle-accurate run of the scheduled datapath fed one vector per clock.

    Every node registers its result ``delay_cycles`` clocks after its operands
    are sampled and every delay element shifts by its stage count. Entry ``t``
    of the returned list holds the output ports during cycle ``t``, or None
    while any output is still unknown. With balanced delays, vector ``j``
    appears at ``t = j + total_cycles``.
    """
    tree = graph.tree
    horizon = len(vectors) + graph.total_cycles
    stages = {delay.sink: delay.stages for delay in graph.delays}
    history: List[List[Optional[List[FixedValue]]]] = [
        [None] * horizon for _ in tree.nodes
    ]

    def source_value(source, name: str, tau: int) -> Optional[FixedValue]:
        if tau < 0:
            return None
        if isinstance(source, str):
            return vectors[tau][source] if tau < len(vectors) else None
        row = history[source][tau]
        return None if row is None else row[tree.nodes[source].results.index(name)]

    for t in range(horizon):
        for node in tree.nodes:
            sample = t - node.delay_cycles
            args: List[FixedValue] = []
            for slot in hardware_inputs(node):
                if slot.constant is not None:
                    args.append(slot.constant)
                    continue
                value = source_value(
                    slot.source, slot.name,
                    sample - stages.get((node.address, slot.port), 0),
                )
                if value is None:
                    break
                args.append(value)
            else:
                if sample >= 0:
                    history[node.address][t] = evaluate_node(node, args, call_models)

    stream: List[Optional[Dict[str, FixedValue]]] = []
    for t in range(horizon):
        row: Dict[str, FixedValue] = {}
        for name in tree.outputs:
            binding = tree.output_bindings[name]
            if isinstance(binding, FixedValue):
                row[name] = FixedValue(binding.raw)
                continue
            value = source_value(binding, name, t - stages.get((name, 0), 0))
            if value is None:
                break
            row[name] = value
        else:
            stream.append(row)
            continue
        stream.append(None)
    return stream
