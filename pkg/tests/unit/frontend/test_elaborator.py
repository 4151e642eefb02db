"""
Unit tests for loop unrolling, array flattening and constant folding.
"""

import pytest

from core.design_interfaces import Branch, FixedConstant, OpKind
from core.errors import NonConstantBound, NotFound, SourceSyntaxError, UndefinedName
from core.fixedpoint import to_fixed
from core.frontend import elaborate, evaluate_constant, parse_source


def run(text: str, library=None, warnings=None):
    return elaborate(parse_source(text), library, warnings)


class TestUnrolling:
    """for loops and indexed names."""

    def test_loop_flattens_indices(self):
        """x[i] becomes array_x_wire_<i>."""
        stmts = run(
            'input_define("a[3]")\n'
            'for i in range(3):\n'
            '    Value_V("v[i]", "a[i]")\n'
        )
        assert [s.results for s in stmts] == [
            ("array_v_wire_0",), ("array_v_wire_1",), ("array_v_wire_2",),
        ]
        assert stmts[2].operands == ("array_a_wire_2",)

    def test_two_bound_range_and_index_arithmetic(self):
        """range(lo, hi) and expressions inside brackets."""
        stmts = run(
            'input_define("a")\n'
            'Value_V("acc[1]", "a")\n'
            'for i in range(1, 3):\n'
            '    Addition_V("acc[i+1]", "acc[i]", "a")\n'
        )
        assert [s.results[0] for s in stmts[1:]] == ["array_acc_wire_2", "array_acc_wire_3"]
        assert stmts[2].operands[0] == "array_acc_wire_2"

    def test_nested_loops(self):
        """Inner loops see outer loop variables."""
        stmts = run(
            'input_define("a")\n'
            'for i in range(2):\n'
            '    for j in range(2):\n'
            '        Value_V("v[2*i+j]", "a")\n'
        )
        assert len(stmts) == 4
        assert stmts[3].results == ("array_v_wire_3",)

    def test_non_constant_bound(self):
        """Loop bounds must be elaboration-time constants."""
        with pytest.raises(NonConstantBound):
            run('input_define("a")\nfor i in range(n):\n    Value_V("v[i]", "a")\n')

    def test_fractional_index(self):
        """Indices must be integers."""
        with pytest.raises(NonConstantBound):
            run('input_define("a")\nValue_V("v[1/2]", "a")\n')


class TestConstants:
    """number_to_hex and folding."""

    def test_evaluate_constant_knows_pi(self):
        """pi and e are available in constant expressions."""
        value = evaluate_constant(("mul", ("num", "2"), ("var", "pi")), {})
        assert abs(float(value) - 6.283185307179586) < 1e-12

    def test_top_level_fold_substitutes_constant(self):
        """A folded result is used as a constant operand downstream."""
        stmts = run(
            'input_define("a")\n'
            'output_define("y")\n'
            'Addition_V("c", number_to_hex(1), number_to_hex(2))\n'
            'Multiplication_V("y", "a", "c")\n'
        )
        folded, mul = stmts
        assert folded.folded == (FixedConstant(to_fixed(3).raw),)
        assert mul.operands[1] == FixedConstant(to_fixed(3).raw)

    def test_folding_disabled(self):
        """With fold=False constant statements stay nodes and names stay names."""
        prog = parse_source(
            'input_define("a")\n'
            'output_define("y")\n'
            'Addition_V("c", number_to_hex(1), number_to_hex(2))\n'
            'Multiplication_V("y", "a", "c")\n'
        )
        add, mul = elaborate(prog, fold=False)
        assert add.folded is None
        assert add.operands == (FixedConstant(to_fixed(1).raw), FixedConstant(to_fixed(2).raw))
        assert mul.operands == ("a", "c")

    def test_fold_inside_block_becomes_value(self):
        """Inside a block a folded result still needs a producer."""
        stmts = run(
            'input_define("a")\n'
            'output_define("y")\n'
            'If_V("a", number_to_hex(0), ">"):\n'
            '    Addition_V("y", number_to_hex(1), number_to_hex(2))\n'
            'Else_V():\n'
            '    Value_V("y", "a")\n'
        )
        compare, inside, other = stmts
        assert compare.op == OpKind.IF_COMPARE
        assert inside.op == OpKind.VALUE
        assert inside.operands == (FixedConstant(to_fixed(3).raw),)
        assert inside.block_ctx.branch == Branch.IF
        assert other.block_ctx.branch == Branch.ELSE

    def test_sincostan_fold_warns_on_saturation(self):
        """tan(pi/2) saturates with W101."""
        warnings = []
        run(
            'SinCosTan_V("s", "c", "t", number_to_hex(pi / 2))\n',
            warnings=warnings,
        )
        assert [w.code for w in warnings] == ["W101"]

    def test_pre_block_constants_recorded(self):
        """Constants reassigned inside a block are remembered for padding."""
        stmts = run(
            'input_define("a")\n'
            'output_define("y")\n'
            'Value_V("y", number_to_hex(5))\n'
            'If_V("a", number_to_hex(0), ">"):\n'
            '    Value_V("y", "a")\n'
        )
        compare = stmts[1]
        assert compare.pre_block_constants == (("y", FixedConstant(to_fixed(5).raw)),)


class TestNames:
    """Name resolution."""

    def test_use_before_assignment(self):
        """Operands must be inputs or earlier results."""
        with pytest.raises(UndefinedName) as info:
            run('input_define("a")\nAddition_V("y", "a", "ghost")\n')
        assert info.value.line == 2

    def test_branch_local_name_visible_after_block(self):
        """Names assigned in a block are visible after it."""
        stmts = run(
            'input_define("a")\n'
            'output_define("z")\n'
            'If_V("a", number_to_hex(0), ">"):\n'
            '    Value_V("y", "a")\n'
            'Addition_V("z", "y", "a")\n'
        )
        assert stmts[-1].operands == ("y", "a")

    def test_operands_must_be_quoted(self):
        """Bare identifiers are not operands."""
        with pytest.raises(SourceSyntaxError):
            run('input_define("a")\nValue_V("y", a)\n')

    def test_declarations_only_at_top_level(self):
        """input_define inside a loop is rejected."""
        with pytest.raises(SourceSyntaxError):
            run('for i in range(2):\n    input_define("a")\n')


class TestBlocks:
    """If_V arguments and port lists."""

    def test_condition_token(self):
        """The condition must be a comparison token."""
        with pytest.raises(SourceSyntaxError):
            run('input_define("a")\nIf_V("a", number_to_hex(0), "=>"):\n    Value_V("y", "a")\n')

    def test_port_lists_match(self):
        """Correct port lists raise no warning."""
        warnings = []
        run(
            'input_define("a")\n'
            'output_define("y")\n'
            'If_V("a", number_to_hex(0), ">", ["a"], ["y"]):\n'
            '    Value_V("y", "a")\n',
            warnings=warnings,
        )
        assert warnings == []

    def test_port_lists_mismatch_warns(self):
        """Wrong port lists produce W103 and the block is still built."""
        warnings = []
        stmts = run(
            'input_define("a")\n'
            'output_define("y")\n'
            'If_V("a", number_to_hex(0), ">", [], ["z"]):\n'
            '    Value_V("y", "a")\n',
            warnings=warnings,
        )
        assert [w.code for w in warnings] == ["W103"]
        assert len(stmts) == 2

    def test_compare_result_name(self):
        """Each block gets its own condition wire."""
        stmts = run(
            'input_define("a")\n'
            'If_V("a", number_to_hex(0), ">"):\n'
            '    Value_V("y", "a")\n'
            'If_V("a", number_to_hex(1), "<"):\n'
            '    Value_V("z", "a")\n'
        )
        compares = [s for s in stmts if s.op == OpKind.IF_COMPARE]
        assert [c.results for c in compares] == [("if0_cond",), ("if1_cond",)]
        assert [c.opens_block for c in compares] == [0, 1]


class TestLibraryCalls:
    """Call_V resolution."""

    def test_call_resolves_entry(self, scale_library):
        """The entry and its normal binding are attached."""
        (stmt,) = run('input_define("a")\nCall_V("scale2", "y", "a")\n', scale_library)
        assert stmt.op == OpKind.CALL
        assert stmt.label == "scale2"
        assert stmt.results == ("y",)
        assert stmt.operands == ("a",)
        assert stmt.binding.startswith('Call_V("scale2"')

    def test_unknown_label(self, scale_library):
        """Unregistered labels are NotFound with a position."""
        with pytest.raises(NotFound) as info:
            run('input_define("a")\nCall_V("nope", "y", "a")\n', scale_library)
        assert info.value.line == 2

    def test_no_library(self):
        """Without a library every call is NotFound."""
        with pytest.raises(NotFound):
            run('input_define("a")\nCall_V("scale2", "y", "a")\n')
