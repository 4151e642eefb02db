"""
Source rule checks run after elaboration.

Violations are returned as ``Diagnostic`` records rather than raised, so a
single run reports every problem in the design.
"""

import logging
from collections import Counter
from typing import List, Sequence

from core.design_interfaces import (
    BareLiteral,
    Diagnostic,
    OpKind,
    SourceProgram,
    Statement,
    ValidationSeverity,
)
from core.fixedpoint import POWER_EXPONENT_RANGE

logger = logging.getLogger(__name__)


def _error(code: str, message: str, stmt: Statement = None, line: int = None) -> Diagnostic:
    return Diagnostic(
        severity=ValidationSeverity.ERROR,
        code=code,
        message=message,
        line=stmt.line if stmt is not None else line,
        column=stmt.column if stmt is not None else None,
    )


def validate_rules(stmts: Sequence[Statement], prog: SourceProgram) -> List[Diagnostic]:
    """Return every rule violation of an elaborated design (empty when compliant).

    Codes:
        E010 result is also an operand of the same statement
        E011 numeric literal not wrapped in number_to_hex()
        E012 unknown function
        E013 assignment to an input port
        E014 output never assigned
        E015 duplicate port name
        E016 wrong number of arguments
        E017 power exponent missing or outside [-128, 127]
        E018 library call has no binding for its block context
    """
    results: List[Diagnostic] = []

    seen = Counter(
        name for port in prog.inputs + prog.outputs for name in {port.name, *port.expand()}
    )
    for port in prog.inputs + prog.outputs:
        if seen[port.name] > 1:
            seen[port.name] = 0
            results.append(_error(
                "E015", f"port name '{port.name}' is declared more than once", line=port.line
            ))

    inputs = set(prog.input_names)
    for stmt in stmts:
        if stmt.op is None:
            results.append(_error("E012", f"unknown function '{stmt.function}'", stmt))
            continue
        if stmt.op not in (OpKind.CALL, OpKind.IF_COMPARE) and (
            len(stmt.operands) != stmt.op.n_operands or len(stmt.results) != stmt.op.n_results
        ):
            results.append(_error(
                "E016",
                f"{stmt.function} takes {stmt.op.n_results} result(s) and "
                f"{stmt.op.n_operands} operand(s)",
                stmt,
            ))
        for operand in stmt.operands:
            if isinstance(operand, BareLiteral):
                results.append(_error(
                    "E011", f"literal {operand} requires number_to_hex()", stmt
                ))
        for name in stmt.results:
            if name in stmt.source_operands:
                results.append(_error(
                    "E010",
                    f"result equals operand '{name}': use a new name for each "
                    f"accumulation step",
                    stmt,
                ))
            if name in inputs:
                results.append(_error("E013", f"cannot assign input port '{name}'", stmt))
        if stmt.op == OpKind.POWER:
            low, high = POWER_EXPONENT_RANGE
            if stmt.exponent is None or not low <= stmt.exponent <= high:
                results.append(_error(
                    "E017", f"Power_V needs an integer exponent in [{low}, {high}]", stmt
                ))
        if stmt.op == OpKind.CALL and stmt.binding is None:
            context = stmt.block_ctx.branch.value if stmt.block_ctx else "normal"
            results.append(_error(
                "E018", f"library module '{stmt.label}' has no {context} binding", stmt
            ))

    produced = {name for stmt in stmts for name in stmt.results}
    for port in prog.outputs:
        for name in port.expand():
            if name not in produced:
                results.append(_error("E014", f"output '{name}' is never assigned",
                                      line=port.line))

    if results:
        logger.info(f"Rule check found {len(results)} violation(s)")
    return results
