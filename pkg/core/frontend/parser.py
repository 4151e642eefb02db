"""
Parser for the ``.vpy`` design dialect.

A design is a sequence of call statements with ``for ... in range(...)`` loops
and indented ``If_V(...):`` / ``Else_V():`` blocks. Indentation is turned into
``_INDENT``/``_DEDENT`` tokens by a lark ``Indenter`` postlex stage.
"""

import logging
import re
import threading
from pathlib import Path
from typing import List, Optional, Tuple

from lark import Lark, Transformer, Token, v_args
from lark.exceptions import LarkError, UnexpectedInput
from lark.indenter import Indenter

from core.design_interfaces import (
    MAX_NESTING_DEPTH,
    MAX_PORT_NAMES,
    Expr,
    PortDecl,
    RawCall,
    RawFor,
    RawIfBlock,
    RawStatement,
    SourceProgram,
)
from core.errors import LimitError, NestingError, SourceSyntaxError

logger = logging.getLogger(__name__)

GRAMMAR_PATH = Path(__file__).with_name("grammar.lark")

PORT_PATTERN = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)(?:\[(\d+)\])?$")


class DesignIndenter(Indenter):
    NL_type = "_NL"
    OPEN_PAREN_types = ["LPAR", "LSQB"]
    CLOSE_PAREN_types = ["RPAR", "RSQB"]
    INDENT_type = "_INDENT"
    DEDENT_type = "_DEDENT"
    tab_len = 8


# the indenter keeps per-parse state, so every thread gets its own parser
_local = threading.local()


def _parser() -> Lark:
    parser = getattr(_local, "parser", None)
    if parser is None:
        parser = Lark(
            GRAMMAR_PATH.read_text(encoding="utf-8"),
            parser="lalr",
            postlex=DesignIndenter(),
            start=["start", "ref"],
            propagate_positions=True,
            maybe_placeholders=False,
        )
        _local.parser = parser
    return parser


class _ToTuples(Transformer):
    """Lower the lark tree to plain tuples."""

    def num(self, children):
        return ("num", str(children[0]))

    def string(self, children):
        token: Token = children[0]
        return ("str", str(token)[1:-1], token.line, token.column)

    def var(self, children):
        return ("var", str(children[0]))

    def args(self, children):
        return tuple(children)

    def list(self, children):
        return ("list", children[0] if children else ())

    def call(self, children):
        name = children[0]
        args = children[1] if len(children) > 1 else ()
        return ("call", str(name), args, name.line, name.column)

    def ref(self, children):
        return ("ref", str(children[0]), children[1] if len(children) > 1 else None)

    def add(self, children):
        return ("add", *children)

    def sub(self, children):
        return ("sub", *children)

    def mul(self, children):
        return ("mul", *children)

    def div(self, children):
        return ("div", *children)

    def floordiv(self, children):
        return ("floordiv", *children)

    def mod(self, children):
        return ("mod", *children)

    def pow(self, children):
        return ("pow", *children)

    def neg(self, children):
        return ("neg", children[0])

    def simple_stmt(self, children):
        return ("stmt", children[0])

    def block_stmt(self, children):
        return ("block", children[0], children[1])

    @v_args(meta=True)
    def for_stmt(self, meta, children):
        var, *bounds, suite = children
        return ("for", str(var), tuple(bounds), suite, meta.line, meta.column)

    def pass_stmt(self, children):
        return ("pass",)

    def suite(self, children):
        return tuple(children)

    def start(self, children):
        return tuple(children)


def parse_expression_ref(text: str, line: int = 0, column: int = 0) -> Tuple[str, Optional[Expr]]:
    """Parse a quoted operand such as ``x[i+1]`` into (name, index expression)."""
    try:
        tree = _parser().parse(text, start="ref")
    except LarkError as exc:
        raise SourceSyntaxError(f"'{text}' is not a name or indexed name", line, column) from exc
    _, name, index = _ToTuples().transform(tree)
    return name, index


def parse_source(text: str, name: str = "design") -> SourceProgram:
    """Parse one design file.

    Args:
        text: Source text.
        name: Design name, normally the file stem.

    Returns:
        The program with ports extracted and loops/blocks still unexpanded.

    Raises:
        SourceSyntaxError: if the text does not match the dialect.
        LimitError: if more than 20 inputs or outputs are declared.
        NestingError: if if/else blocks nest deeper than two levels.
    """
    if not text.endswith("\n"):
        text += "\n"
    try:
        tree = _parser().parse(text, start="start")
    except UnexpectedInput as exc:
        line = exc.line if getattr(exc, "line", -1) > 0 else None
        column = exc.column if getattr(exc, "column", -1) > 0 else None
        raise SourceSyntaxError(_describe_unexpected(exc), line, column) from exc
    except LarkError as exc:
        raise SourceSyntaxError(f"malformed source: {exc}") from exc

    builder = _ProgramBuilder(text.splitlines())
    body = builder.body(_ToTuples().transform(tree), depth=0, top_level=True)
    for kind, ports in (("inputs", builder.inputs), ("outputs", builder.outputs)):
        if len(ports) > MAX_PORT_NAMES:
            raise LimitError(
                f"{len(ports)} {kind} declared, at most {MAX_PORT_NAMES} are allowed",
                ports[MAX_PORT_NAMES].line,
            )
    logger.debug(
        f"Parsed '{name}': {len(builder.inputs)} input(s), "
        f"{len(builder.outputs)} output(s), {len(body)} top-level statement(s)"
    )
    return SourceProgram(
        name=name,
        inputs=tuple(builder.inputs),
        outputs=tuple(builder.outputs),
        body=tuple(body),
        lines=tuple(text.splitlines()),
    )


def _describe_unexpected(exc: UnexpectedInput) -> str:
    token = getattr(exc, "token", None)
    if token is not None:
        if token.type == "$END":
            return "unexpected end of file"
        if token.type in ("_INDENT", "_DEDENT"):
            return "unexpected indentation"
        return f"unexpected '{token}'"
    char = getattr(exc, "char", None)
    if char is not None:
        return f"unexpected character '{char}'"
    return "unexpected input"


class _ProgramBuilder:
    def __init__(self, lines: List[str]):
        self.lines = lines
        self.inputs: List[PortDecl] = []
        self.outputs: List[PortDecl] = []

    def text(self, line: int) -> str:
        return self.lines[line - 1].strip() if 0 < line <= len(self.lines) else ""

    def raw_call(self, call: tuple) -> RawCall:
        _, function, args, line, column = call
        return RawCall(function, tuple(args), line, column, self.text(line))

    def body(self, statements: tuple, depth: int, top_level: bool = False) -> List[RawStatement]:
        out: List[RawStatement] = []
        for statement in statements:
            kind = statement[0]
            if kind == "pass":
                continue
            if kind == "for":
                _, var, bounds, suite, line, column = statement
                if not 1 <= len(bounds) <= 2:
                    raise SourceSyntaxError("range() takes one or two bounds", line, column)
                out.append(RawFor(var, bounds, tuple(self.body(suite, depth)), line, column))
                continue

            call = self.raw_call(statement[1])
            if kind == "stmt":
                if top_level and call.function in ("input_define", "output_define"):
                    self.declare(call)
                    continue
                if call.function == "If_V":
                    raise SourceSyntaxError("If_V must open a block with ':'", call.line, call.column)
                if call.function == "Else_V":
                    raise SourceSyntaxError("Else_V must open a block with ':'", call.line, call.column)
                out.append(call)
                continue

            suite = statement[2]
            if call.function == "If_V":
                if depth + 1 > MAX_NESTING_DEPTH:
                    raise NestingError(
                        f"if/else blocks nest at most {MAX_NESTING_DEPTH} levels deep",
                        call.line, call.column,
                    )
                out.append(RawIfBlock(call, tuple(self.body(suite, depth + 1))))
            elif call.function == "Else_V":
                previous = out[-1] if out else None
                if not isinstance(previous, RawIfBlock) or previous.has_else:
                    raise SourceSyntaxError("Else_V without a matching If_V", call.line, call.column)
                if call.args:
                    raise SourceSyntaxError("Else_V takes no arguments", call.line, call.column)
                out[-1] = RawIfBlock(
                    previous.compare, previous.if_body, tuple(self.body(suite, depth + 1)),
                    has_else=True,
                )
            else:
                raise SourceSyntaxError(
                    f"only If_V and Else_V open a block, not {call.function}",
                    call.line, call.column,
                )
        return out

    def declare(self, call: RawCall) -> None:
        target = self.inputs if call.function == "input_define" else self.outputs
        for arg in call.args:
            if arg[0] != "str":
                raise SourceSyntaxError(
                    f"{call.function} expects quoted port names", call.line, call.column
                )
            match = PORT_PATTERN.match(arg[1].replace(" ", ""))
            if match is None:
                raise SourceSyntaxError(f"invalid port name '{arg[1]}'", call.line, arg[3])
            size = int(match.group(2)) if match.group(2) is not None else None
            if size == 0:
                raise SourceSyntaxError(f"array port '{arg[1]}' has no elements", call.line, arg[3])
            target.append(PortDecl(match.group(1), size, call.line))
