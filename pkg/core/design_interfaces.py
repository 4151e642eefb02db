"""
Design interfaces and data models for the hlsgen compiler.

This module defines the data structures shared by every compilation stage:
source programs, elaborated statements, fixed-point constants, diagnostics and
hardware library entries.
"""

from dataclasses import dataclass, field
from enum import Enum, auto
from typing import Dict, Optional, Tuple, Union
import logging

logger = logging.getLogger(__name__)

FRACTION_BITS = 16
WORD_BITS = 32
MAX_PORT_NAMES = 20
MAX_NESTING_DEPTH = 2


class OpKind(Enum):
    """Fundamental functions of the source dialect, keyed by their call name."""

    ADD = "Addition_V"
    SUB = "Subtraction_V"
    MUL = "Multiplication_V"
    DIV = "Division_V"
    POWER = "Power_V"
    LOG = "Logarithm_V"
    SQRT = "Sqrt_V"
    SINCOSTAN = "SinCosTan_V"
    VALUE = "Value_V"
    IF_COMPARE = "If_V"
    MERGE = "Merge_V"
    CALL = "Call_V"

    @classmethod
    def from_function(cls, name: str) -> Optional["OpKind"]:
        """Map a user-callable function name to its operator, or None."""
        for op in cls:
            if op.value == name and op is not cls.MERGE:
                return op
        return None

    @property
    def n_results(self) -> int:
        return _SIGNATURES[self][0]

    @property
    def n_operands(self) -> int:
        return _SIGNATURES[self][1]

    @property
    def short(self) -> str:
        return _SIGNATURES[self][2]

    @property
    def hw_module(self) -> str:
        return _SIGNATURES[self][3]

    @property
    def foldable(self) -> bool:
        return self not in (OpKind.IF_COMPARE, OpKind.MERGE, OpKind.CALL)


# op -> (results, operands, short name, hardware module)
_SIGNATURES: Dict[OpKind, Tuple[int, int, str, str]] = {
    OpKind.ADD: (1, 2, "add", "Addition_V"),
    OpKind.SUB: (1, 2, "sub", "Subtraction_V"),
    OpKind.MUL: (1, 2, "mul", "Multiplication_V"),
    OpKind.DIV: (1, 2, "div", "Division_V"),
    OpKind.POWER: (1, 1, "power", "Power_V"),
    OpKind.LOG: (1, 2, "log", "Logarithm_V"),
    OpKind.SQRT: (1, 1, "sqrt", "Sqrt_V"),
    OpKind.SINCOSTAN: (3, 1, "sincostan", "SinCosTan_V"),
    OpKind.VALUE: (1, 1, "value", "Value_V"),
    OpKind.IF_COMPARE: (1, 2, "compare", "Compare_V"),
    OpKind.MERGE: (1, 2, "merge", "Merge_V"),
    OpKind.CALL: (0, 0, "call", ""),
}

COMPARISONS: Tuple[str, ...] = (">", "<", ">=", "<=", "==", "!=")


class Branch(Enum):
    """Side of an if/else block."""

    IF = "if"
    ELSE = "else"


class Mode(Enum):
    """Target architecture."""

    UNROLLED = "unrolled"
    PIPELINED = "pipelined"


class ValidationSeverity(Enum):
    """Severity levels for diagnostics."""

    INFO = auto()
    WARNING = auto()
    ERROR = auto()


@dataclass(frozen=True)
class Diagnostic:
    """One compiler message, positioned in the source when possible."""

    severity: ValidationSeverity
    code: str
    message: str
    line: Optional[int] = None
    column: Optional[int] = None
    source: Optional[str] = None

    @property
    def is_error(self) -> bool:
        return self.severity == ValidationSeverity.ERROR

    def format(self) -> str:
        location = self.source or "<design>"
        if self.line is not None:
            location = f"{location}:{self.line}"
            if self.column is not None:
                location = f"{location}:{self.column}"
        level = self.severity.name.lower()
        return f"{location}: {level} {self.code}: {self.message}"


def warning(code: str, message: str, line: Optional[int] = None) -> Diagnostic:
    """Shorthand for a warning diagnostic."""
    return Diagnostic(ValidationSeverity.WARNING, code, message, line=line)


@dataclass(frozen=True)
class FixedValue:
    """A Q16.16 two's-complement sample; real value = raw / 2**16."""

    raw: int

    def __post_init__(self) -> None:
        if not -(1 << 31) <= self.raw < (1 << 31):
            raise ValueError(f"raw value {self.raw} does not fit in 32 bits")

    @classmethod
    def from_real(cls, x) -> "FixedValue":
        """Nearest Q16.16 value, ties away from zero; see ``core.fixedpoint.to_fixed``."""
        from core.fixedpoint import to_fixed

        return cls(to_fixed(x).raw)

    @property
    def real(self) -> float:
        return self.raw / (1 << FRACTION_BITS)

    @property
    def hex(self) -> str:
        return f"0x{self.raw & 0xFFFFFFFF:08X}"

    @property
    def verilog(self) -> str:
        return f"32'h{self.raw & 0xFFFFFFFF:08X}"

    def __str__(self) -> str:
        return f"{self.real:.8f} ({self.hex})"


@dataclass(frozen=True)
class FixedConstant(FixedValue):
    """A constant operand produced by number_to_hex() or constant folding."""

    def __str__(self) -> str:
        return self.hex


@dataclass(frozen=True)
class BareLiteral:
    """A numeric argument that was not wrapped in number_to_hex()."""

    value: str

    def __str__(self) -> str:
        return self.value


Operand = Union[str, FixedConstant, BareLiteral]
PrevAddress = Union[int, Tuple[int, int]]
BlockPath = Tuple[Tuple[int, Branch], ...]


@dataclass(frozen=True)
class BlockContext:
    """Innermost block a statement belongs to."""

    branch: Branch
    block_id: int
    nesting_depth: int


@dataclass(frozen=True)
class PortDecl:
    """A declared port; ``size`` is set for array ports such as ``x[8]``."""

    name: str
    size: Optional[int] = None
    line: int = 0

    def expand(self) -> Tuple[str, ...]:
        if self.size is None:
            return (self.name,)
        return tuple(array_wire(self.name, i) for i in range(self.size))


def array_wire(name: str, index: int) -> str:
    """Flattened name of one array element."""
    return f"array_{name}_wire_{index}"


# Expression trees produced by the parser are plain tuples, e.g.
# ("num", "1.5"), ("var", "i"), ("add", lhs, rhs), ("str", "a[i]", line, col).
Expr = tuple


@dataclass(frozen=True)
class RawCall:
    """An unelaborated call statement."""

    function: str
    args: Tuple[Expr, ...]
    line: int
    column: int
    text: str = ""


@dataclass(frozen=True)
class RawFor:
    """A ``for NAME in range(...)`` loop, body not yet unrolled."""

    var: str
    bounds: Tuple[Expr, ...]
    body: tuple
    line: int
    column: int


@dataclass(frozen=True)
class RawIfBlock:
    """An ``If_V(...):`` block with its optional ``Else_V():`` partner."""

    compare: RawCall
    if_body: tuple
    else_body: tuple = ()
    has_else: bool = False


RawStatement = Union[RawCall, RawFor, RawIfBlock]


@dataclass(frozen=True)
class SourceProgram:
    """A parsed design: declared ports plus the unexpanded statement body."""

    name: str
    inputs: Tuple[PortDecl, ...]
    outputs: Tuple[PortDecl, ...]
    body: Tuple[RawStatement, ...]
    lines: Tuple[str, ...] = ()

    @property
    def input_names(self) -> Tuple[str, ...]:
        return tuple(name for port in self.inputs for name in port.expand())

    @property
    def output_names(self) -> Tuple[str, ...]:
        return tuple(name for port in self.outputs for name in port.expand())


@dataclass(frozen=True)
class ResourceCost:
    """FPGA resources of one hardware unit."""

    lut: int = 0
    ff: int = 0
    dsp: int = 0
    bram: int = 0


@dataclass(frozen=True)
class LibraryEntry:
    """A reusable hardware module registered in the hardware library."""

    label: str
    verilog_path: str
    inputs: Tuple[str, ...]
    outputs: Tuple[str, ...]
    cycles: int
    resources: ResourceCost = field(default_factory=ResourceCost)
    kind: str = "normal"
    bindings: Tuple[Tuple[str, str], ...] = ()

    def binding(self, context: str) -> Optional[str]:
        """Call signature recorded for a block context (normal, if, else)."""
        return dict(self.bindings).get(context)


@dataclass(frozen=True)
class Statement:
    """One elaborated fundamental-function call."""

    op: Optional[OpKind]
    function: str
    results: Tuple[str, ...]
    operands: Tuple[Operand, ...]
    block_path: BlockPath = ()
    condition: Optional[str] = None
    exponent: Optional[int] = None
    label: Optional[str] = None
    entry: Optional[LibraryEntry] = None
    binding: Optional[str] = None
    opens_block: Optional[int] = None
    pre_block_constants: Tuple[Tuple[str, FixedConstant], ...] = ()
    folded: Optional[Tuple[FixedConstant, ...]] = None
    source_operands: Tuple[str, ...] = ()
    line: int = 0
    column: int = 0
    text: str = ""

    @property
    def block_ctx(self) -> Optional[BlockContext]:
        if not self.block_path:
            return None
        block_id, branch = self.block_path[-1]
        return BlockContext(branch, block_id, len(self.block_path))

    def describe(self) -> str:
        return describe_call(
            self.op, self.function, self.results, self.operands, self.label,
            self.condition, self.exponent,
        )


def describe_call(
    op: Optional[OpKind],
    function: str,
    results: Tuple[str, ...],
    operands: tuple,
    label: Optional[str] = None,
    condition: Optional[str] = None,
    exponent: Optional[int] = None,
) -> str:
    """Render ``results = Function(operands)`` the same way for statements and nodes."""
    args = [_operand_text(o) for o in operands]
    if label is not None:
        args.insert(0, f'"{label}"')
    if condition is not None:
        args.append(f'"{condition}"')
    if exponent is not None:
        args.append(str(exponent))
    name = op.value if op is not None else function
    return f"{', '.join(results)} = {name}({', '.join(args)})"


def _operand_text(operand: object) -> str:
    if isinstance(operand, FixedValue):
        return operand.hex
    return str(operand)
