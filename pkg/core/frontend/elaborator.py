"""
Elaboration: loop unrolling, array flattening and constant folding.

Turns a ``SourceProgram`` into the linear ``Statement`` list consumed by the
tree builder. Indexed names ``x[i]`` become ``array_x_wire_<i>``; statements
whose operands are all constants are evaluated in extended precision and their
results substituted as Q16.16 constants.
"""

import logging
from collections import ChainMap
from dataclasses import replace
from typing import Dict, List, Mapping, Optional, Sequence, Set

from mpmath.ctx_mp import MPContext

from core.design_interfaces import (
    COMPARISONS,
    BareLiteral,
    BlockPath,
    Branch,
    Diagnostic,
    Expr,
    FixedConstant,
    OpKind,
    Operand,
    RawCall,
    RawFor,
    RawIfBlock,
    RawStatement,
    SourceProgram,
    Statement,
    array_wire,
    warning,
)
from core.errors import HlsError, NonConstantBound, NotFound, SourceSyntaxError, UndefinedName
from core.fixedpoint import POWER_EXPONENT_RANGE, fold_constant, to_constant
from core.frontend.parser import parse_expression_ref

logger = logging.getLogger(__name__)

_MP = MPContext()
_MP.dps = 50

RESERVED_CALLS = ("input_define", "output_define", "number_to_hex")


def condition_name(block_id: int) -> str:
    return f"if{block_id}_cond"


def evaluate_constant(expr: Expr, scope: Mapping[str, object], line: int = 0):
    """Evaluate an elaboration-time expression over loop variables, ``pi`` and ``e``."""
    kind = expr[0]
    if kind == "num":
        return _MP.mpf(expr[1])
    if kind == "var":
        if expr[1] in scope:
            return _MP.mpf(scope[expr[1]])
        if expr[1] == "pi":
            return +_MP.pi
        if expr[1] == "e":
            return +_MP.e
        raise NonConstantBound(f"'{expr[1]}' is not an elaboration-time constant", line)
    if kind == "neg":
        return -evaluate_constant(expr[1], scope, line)
    if kind in ("add", "sub", "mul", "div", "floordiv", "mod", "pow"):
        left = evaluate_constant(expr[1], scope, line)
        right = evaluate_constant(expr[2], scope, line)
        if kind == "add":
            return left + right
        if kind == "sub":
            return left - right
        if kind == "mul":
            return left * right
        if kind == "pow":
            return left ** right
        if right == 0:
            raise NonConstantBound("division by zero in constant expression", line)
        if kind == "div":
            return left / right
        if kind == "floordiv":
            return _MP.floor(left / right)
        return left - right * _MP.floor(left / right)
    if kind == "str":
        raise NonConstantBound(f"'{expr[1]}' is a signal name, not a constant", line)
    raise NonConstantBound("only arithmetic on numbers and loop variables is constant", line)


def _as_int(value, what: str, line: int) -> int:
    if value != _MP.floor(value):
        raise NonConstantBound(f"{what} {_MP.nstr(value, 8)} is not an integer", line)
    return int(value)


class _Elaborator:
    def __init__(
        self,
        prog: SourceProgram,
        library,
        warnings: Optional[List[Diagnostic]],
        fold: bool = True,
    ):
        self.prog = prog
        self.library = library
        self.fold_enabled = fold
        self.warnings = warnings if warnings is not None else []
        self.inputs: Set[str] = set(prog.input_names)
        self.visible: Set[str] = set(self.inputs)
        # name -> folded constant, or None once a non-constant value shadows it
        self.consts: ChainMap = ChainMap()
        self.out: List[Optional[Statement]] = []
        self.path: BlockPath = ()
        self.next_block = 0

    # ------------------------------------------------------------------ names

    def name_of(self, arg: Expr, scope: Mapping[str, int], line: int) -> str:
        if arg[0] != "str":
            raise SourceSyntaxError("signal names must be quoted strings", line)
        _, text, arg_line, column = arg
        base, index = parse_expression_ref(text.replace(" ", ""), arg_line, column)
        if index is None:
            return base
        position = _as_int(evaluate_constant(index, scope, arg_line), "array index", arg_line)
        if position < 0:
            raise NonConstantBound(f"negative index in '{text}'", arg_line, column)
        return array_wire(base, position)

    def operand(self, arg: Expr, scope: Mapping[str, int], line: int) -> Operand:
        if arg[0] == "call" and arg[1] == "number_to_hex":
            if len(arg[2]) != 1:
                raise SourceSyntaxError("number_to_hex takes exactly one argument", line)
            try:
                return to_constant(evaluate_constant(arg[2][0], scope, line))
            except HlsError as exc:
                raise exc.at(line)
        if arg[0] == "num" or (arg[0] == "neg" and arg[1][0] == "num"):
            text = arg[1] if arg[0] == "num" else f"-{arg[1][1]}"
            return BareLiteral(text)
        if arg[0] == "str":
            return self.name_of(arg, scope, line)
        raise SourceSyntaxError(
            "operands must be quoted names or number_to_hex(...) constants", line
        )

    def resolve(self, operand: Operand, results: Sequence[str], line: int) -> Operand:
        if not isinstance(operand, str):
            return operand
        constant = self.consts.get(operand)
        if constant is not None:
            return constant
        if operand in self.visible or operand in results:
            # self-reference is reported by the rule checker
            return operand
        raise UndefinedName(f"'{operand}' is used before it is assigned", line)

    # ------------------------------------------------------------- statements

    def run(self, body: Sequence[RawStatement], scope: Mapping[str, int]) -> None:
        for statement in body:
            if isinstance(statement, RawFor):
                self.unroll(statement, scope)
            elif isinstance(statement, RawIfBlock):
                self.block(statement, scope)
            else:
                self.call(statement, scope)

    def unroll(self, loop: RawFor, scope: Mapping[str, int]) -> None:
        bounds = [
            _as_int(evaluate_constant(b, scope, loop.line), "loop bound", loop.line)
            for b in loop.bounds
        ]
        lo, hi = (0, bounds[0]) if len(bounds) == 1 else bounds
        for value in range(lo, hi):
            self.run(loop.body, ChainMap({loop.var: value}, scope))

    def call(self, raw: RawCall, scope: Mapping[str, int]) -> None:
        if raw.function in RESERVED_CALLS:
            raise SourceSyntaxError(
                f"{raw.function} is only allowed at the top level of a design"
                if raw.function != "number_to_hex"
                else "number_to_hex() is not a statement",
                raw.line, raw.column,
            )
        if raw.function == OpKind.CALL.value:
            self.emit(self.library_call(raw, scope))
            return
        op = OpKind.from_function(raw.function)
        if op is None:
            self.emit(Statement(
                op=None, function=raw.function, results=(), operands=(),
                block_path=self.path, line=raw.line, column=raw.column, text=raw.text,
            ))
            return

        args = list(raw.args)
        exponent = None
        if op == OpKind.POWER and len(args) == 3:
            exponent = self.exponent(args.pop(), scope, raw.line)
        results = tuple(self.name_of(a, scope, raw.line) for a in args[: op.n_results])
        sources = [self.operand(a, scope, raw.line) for a in args[op.n_results:]]
        operands = tuple(self.resolve(o, results, raw.line) for o in sources)
        stmt = Statement(
            op=op,
            function=raw.function,
            results=results,
            operands=operands,
            block_path=self.path,
            exponent=exponent,
            source_operands=tuple(o for o in sources if isinstance(o, str)),
            line=raw.line,
            column=raw.column,
            text=raw.text,
        )
        if self.foldable(stmt):
            self.fold(stmt)
        else:
            self.emit(stmt)

    def exponent(self, arg: Expr, scope: Mapping[str, int], line: int) -> Optional[int]:
        try:
            value = evaluate_constant(arg, scope, line)
        except NonConstantBound:
            return None
        if value != _MP.floor(value):
            return None
        return int(value)

    def foldable(self, stmt: Statement) -> bool:
        if not self.fold_enabled or not stmt.op.foldable:
            return False
        if len(stmt.operands) != stmt.op.n_operands:
            return False
        if len(stmt.results) != stmt.op.n_results:
            return False
        if stmt.op == OpKind.POWER:
            low, high = POWER_EXPONENT_RANGE
            if stmt.exponent is None or not low <= stmt.exponent <= high:
                return False
        return all(isinstance(o, FixedConstant) for o in stmt.operands)

    def fold(self, stmt: Statement) -> None:
        values = fold_constant(
            stmt.op, stmt.operands, exponent=stmt.exponent,
            warnings=self.warnings, line=stmt.line,
        )
        if not self.path:
            self.out.append(replace(stmt, folded=values))
            for name, value in zip(stmt.results, values):
                self.consts[name] = value
                self.visible.add(name)
            return
        # inside a block every assignment needs a producer for the merge
        for name, value in zip(stmt.results, values):
            self.emit(Statement(
                op=OpKind.VALUE, function=OpKind.VALUE.value, results=(name,),
                operands=(value,), block_path=self.path, line=stmt.line,
                column=stmt.column, text=stmt.text,
            ))

    def emit(self, stmt: Statement) -> None:
        self.out.append(stmt)
        for name in stmt.results:
            self.visible.add(name)
            self.consts[name] = None

    def library_call(self, raw: RawCall, scope: Mapping[str, int]) -> Statement:
        if not raw.args or raw.args[0][0] != "str":
            raise SourceSyntaxError("Call_V expects a quoted library label first", raw.line)
        label = raw.args[0][1]
        if self.library is None:
            raise NotFound(f"no hardware library is configured for '{label}'", raw.line)
        try:
            entry = self.library.lookup(label)
        except HlsError as exc:
            raise exc.at(raw.line, raw.column)
        rest = raw.args[1:]
        n_out = len(entry.outputs)
        results = tuple(self.name_of(a, scope, raw.line) for a in rest[:n_out])
        sources = [self.operand(a, scope, raw.line) for a in rest[n_out:]]
        context = self.path[-1][1].value if self.path else "normal"
        return Statement(
            op=OpKind.CALL,
            function=raw.function,
            results=results,
            operands=tuple(self.resolve(o, results, raw.line) for o in sources),
            block_path=self.path,
            label=label,
            entry=entry,
            binding=entry.binding(context),
            source_operands=tuple(o for o in sources if isinstance(o, str)),
            line=raw.line,
            column=raw.column,
            text=raw.text,
        )

    # ----------------------------------------------------------------- blocks

    def block(self, block: RawIfBlock, scope: Mapping[str, int]) -> None:
        raw = block.compare
        if len(raw.args) not in (3, 5):
            raise SourceSyntaxError(
                "If_V takes (a, b, condition) or (a, b, condition, [ins], [outs])",
                raw.line, raw.column,
            )
        condition_arg = raw.args[2]
        if condition_arg[0] != "str" or condition_arg[1] not in COMPARISONS:
            raise SourceSyntaxError(
                f"If_V condition must be one of {', '.join(COMPARISONS)}", raw.line
            )
        block_id = self.next_block
        self.next_block += 1
        cond = condition_name(block_id)
        sources = [self.operand(a, scope, raw.line) for a in raw.args[:2]]
        operands = tuple(self.resolve(o, (), raw.line) for o in sources)

        index = len(self.out)
        self.out.append(None)
        outer_path, outer_visible, outer_consts = self.path, self.visible, self.consts
        assigned: Dict[Branch, List[str]] = {}
        reads: Set[str] = set()
        for branch, body in ((Branch.IF, block.if_body), (Branch.ELSE, block.else_body)):
            self.path = outer_path + ((block_id, branch),)
            self.visible = set(outer_visible)
            self.consts = outer_consts.new_child()
            start = len(self.out)
            self.run(body, scope)
            assigned[branch] = _assigned_names(self.out[start:])
            reads.update(_read_names(self.out[start:]))

        names = list(dict.fromkeys(assigned[Branch.IF] + assigned[Branch.ELSE]))
        self.path = outer_path
        self.visible = outer_visible | set(names)
        self.consts = outer_consts
        pre_block_constants = tuple(
            (name, outer_consts[name])
            for name in names
            if outer_consts.get(name) is not None
        )
        for name in names:
            self.consts[name] = None

        self.out[index] = Statement(
            op=OpKind.IF_COMPARE,
            function=raw.function,
            results=(cond,),
            operands=operands,
            block_path=outer_path,
            condition=condition_arg[1],
            opens_block=block_id,
            pre_block_constants=pre_block_constants,
            source_operands=tuple(o for o in sources if isinstance(o, str)),
            line=raw.line,
            column=raw.column,
            text=raw.text,
        )
        if len(raw.args) == 5:
            self.check_port_lists(raw, scope, names, reads)

    def check_port_lists(
        self, raw: RawCall, scope: Mapping[str, int], assigned: List[str], reads: Set[str]
    ) -> None:
        declared = []
        for arg in raw.args[3:]:
            if arg[0] != "list":
                raise SourceSyntaxError("If_V port lists must be [...] lists", raw.line)
            declared.append({self.name_of(item, scope, raw.line) for item in arg[1]})
        ins, outs = declared
        external_reads = reads - set(assigned)
        if ins != external_reads or outs != set(assigned):
            message = (
                f"If_V port lists do not match the block: reads "
                f"{sorted(external_reads)}, assigns {sorted(assigned)}"
            )
            logger.warning(message)
            self.warnings.append(warning("W103", message, raw.line))


def _assigned_names(stmts: Sequence[Optional[Statement]]) -> List[str]:
    names: List[str] = []
    for stmt in stmts:
        if stmt is None or stmt.op == OpKind.IF_COMPARE:
            continue
        for name in stmt.results:
            if name not in names:
                names.append(name)
    return names


def _read_names(stmts: Sequence[Optional[Statement]]) -> Set[str]:
    return {
        operand
        for stmt in stmts
        if stmt is not None
        for operand in stmt.operands
        if isinstance(operand, str)
    }


def elaborate(
    prog: SourceProgram,
    library=None,
    warnings: Optional[List[Diagnostic]] = None,
    *,
    fold: bool = True,
) -> List[Statement]:
    """Unroll, flatten and fold a parsed design.

    Args:
        prog: Output of ``parse_source``.
        library: Optional ``HardwareLibrary`` resolving ``Call_V`` labels.
        warnings: Optional sink for fold-time warnings (W101, W102, W103).
        fold: When False, all-constant statements are kept as hardware
            nodes and evaluated like any other.

    Returns:
        Statements in source order. Folded top-level statements are kept with
        ``folded`` set; their results are substituted as constants downstream.

    Raises:
        NonConstantBound: if a loop bound or index is not elaboration-constant.
        UndefinedName: if an operand was never produced.
    """
    elaborator = _Elaborator(prog, library, warnings, fold)
    elaborator.run(prog.body, {})
    stmts = [s for s in elaborator.out if s is not None]
    logger.info(
        f"Elaborated '{prog.name}' into {len(stmts)} statement(s), "
        f"{sum(1 for s in stmts if s.folded is not None)} folded"
    )
    return stmts
