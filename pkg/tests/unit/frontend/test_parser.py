"""
Unit tests for the .vpy parser.
"""

import pytest

from core.design_interfaces import PortDecl, RawCall, RawFor, RawIfBlock
from core.errors import LimitError, NestingError, SourceSyntaxError
from core.frontend import parse_source
from core.frontend.parser import parse_expression_ref


class TestPorts:
    """input_define / output_define."""

    def test_scalar_and_array_ports(self):
        """Array ports expand to one wire per element."""
        prog = parse_source('input_define("A[3]", "b")\noutput_define("y")\n')
        assert prog.inputs == (PortDecl("A", 3, 1), PortDecl("b", None, 1))
        assert prog.input_names == (
            "array_A_wire_0", "array_A_wire_1", "array_A_wire_2", "b",
        )
        assert prog.output_names == ("y",)
        assert prog.body == ()

    def test_port_limit(self):
        """At most 20 input names."""
        names = ", ".join(f'"x{i}"' for i in range(21))
        with pytest.raises(LimitError):
            parse_source(f"input_define({names})\n")

    def test_twenty_ports_allowed(self):
        """Exactly 20 is fine."""
        names = ", ".join(f'"x{i}"' for i in range(20))
        assert len(parse_source(f"input_define({names})\n").inputs) == 20

    def test_invalid_port_name(self):
        """Port names must be identifiers with an optional size."""
        with pytest.raises(SourceSyntaxError):
            parse_source('input_define("1x")\n')
        with pytest.raises(SourceSyntaxError):
            parse_source('input_define("x[0]")\n')

    def test_unquoted_port(self):
        """Port names are quoted."""
        with pytest.raises(SourceSyntaxError):
            parse_source("input_define(x)\n")


class TestStatements:
    """Calls, loops and blocks."""

    def test_call_positions_and_text(self):
        """Raw calls keep their line and source text."""
        prog = parse_source('input_define("a")\n\nAddition_V("y", "a", "a")\n')
        (call,) = prog.body
        assert isinstance(call, RawCall)
        assert call.function == "Addition_V"
        assert call.line == 3
        assert call.text == 'Addition_V("y", "a", "a")'
        assert call.args[0][:2] == ("str", "y")

    def test_comments_and_missing_final_newline(self):
        """Comments are ignored and the last line needs no newline."""
        prog = parse_source('# header\ninput_define("a")  # ports\nValue_V("y", "a")')
        assert len(prog.body) == 1

    def test_for_loop(self):
        """Loops keep their bounds and body unexpanded."""
        prog = parse_source('for i in range(2, 5):\n    Value_V("v[i]", "a")\n')
        (loop,) = prog.body
        assert isinstance(loop, RawFor)
        assert loop.var == "i"
        assert len(loop.bounds) == 2
        assert len(loop.body) == 1

    def test_pass_is_dropped(self):
        """pass produces no statement."""
        prog = parse_source('for i in range(2):\n    pass\n')
        assert prog.body[0].body == ()

    def test_if_else_block(self):
        """Else_V attaches to the preceding If_V."""
        prog = parse_source(
            'If_V("a", number_to_hex(0), ">"):\n'
            '    Value_V("y", "a")\n'
            'Else_V():\n'
            '    Value_V("y", "b")\n'
        )
        (block,) = prog.body
        assert isinstance(block, RawIfBlock)
        assert len(block.if_body) == 1
        assert len(block.else_body) == 1
        assert block.has_else

    def test_nesting_limit(self):
        """Blocks nest at most two levels deep."""
        two = (
            'If_V("a", "b", ">"):\n'
            '    If_V("a", "b", "<"):\n'
            '        Value_V("y", "a")\n'
        )
        parse_source(two)
        three = (
            'If_V("a", "b", ">"):\n'
            '    If_V("a", "b", "<"):\n'
            '        If_V("a", "b", "=="):\n'
            '            Value_V("y", "a")\n'
        )
        with pytest.raises(NestingError) as info:
            parse_source(three)
        assert info.value.line == 3


class TestSyntaxErrors:
    """Malformed sources."""

    def test_unclosed_call(self):
        """Errors carry a position."""
        with pytest.raises(SourceSyntaxError) as info:
            parse_source('Addition_V("y", "a"\nValue_V("z", "a")\n')
        assert info.value.line is not None

    def test_if_without_block(self):
        """If_V must open a block."""
        with pytest.raises(SourceSyntaxError):
            parse_source('If_V("a", "b", ">")\n')

    def test_else_without_if(self):
        """Else_V needs a preceding If_V."""
        with pytest.raises(SourceSyntaxError):
            parse_source('Else_V():\n    Value_V("y", "a")\n')

    def test_second_else_after_empty_else(self):
        """An empty Else_V still closes the block."""
        with pytest.raises(SourceSyntaxError) as info:
            parse_source(
                'If_V("a", "b", ">"):\n    Value_V("y", "a")\n'
                'Else_V():\n    pass\n'
                'Else_V():\n    Value_V("y", "b")\n'
            )
        assert info.value.line == 5

    def test_else_with_arguments(self):
        """Else_V takes no arguments."""
        with pytest.raises(SourceSyntaxError):
            parse_source(
                'If_V("a", "b", ">"):\n    Value_V("y", "a")\n'
                'Else_V("a"):\n    Value_V("y", "b")\n'
            )

    def test_other_call_cannot_open_block(self):
        """Only If_V and Else_V take a suite."""
        with pytest.raises(SourceSyntaxError):
            parse_source('Addition_V("y", "a", "b"):\n    Value_V("z", "a")\n')

    def test_range_arity(self):
        """range() takes one or two bounds."""
        with pytest.raises(SourceSyntaxError):
            parse_source('for i in range():\n    Value_V("y", "a")\n')


class TestReferences:
    """Quoted operand names."""

    def test_plain_and_indexed(self):
        """Indexed names return their index expression."""
        assert parse_expression_ref("acc") == ("acc", None)
        name, index = parse_expression_ref("acc[i+1]")
        assert name == "acc"
        assert index[0] == "add"

    def test_bad_reference(self):
        """Anything else is a syntax error."""
        with pytest.raises(SourceSyntaxError):
            parse_expression_ref("a b")
