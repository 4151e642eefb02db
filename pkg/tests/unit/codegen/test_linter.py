"""
Unit tests for the emitted-Verilog linter.
"""

from core.codegen import library_sources, lint_design
from core.codegen.linter import parse_modules


def codes(text: str, library=None):
    return [d.code for d in lint_design({"top.v": text}, library)]


class TestParsing:
    """Module header extraction."""

    def test_ports_and_regs(self):
        modules = parse_modules({"lib.v": library_sources()["Merge_V"]})
        header = modules["Merge_V"].header
        assert header.inputs == ["clk", "rst", "a", "b", "sel"]
        assert header.outputs == ["c"]
        assert header.regs == ["c"]

    def test_comments_ignored(self):
        text = "// module fake (input wire a);\nmodule m (\n    input wire a,\n    output wire y\n);\n    assign y = a;\nendmodule\n"
        assert list(parse_modules({"m.v": text})) == ["m"]


class TestViolations:
    """One violation per check."""

    def test_clean_module(self):
        assert codes("module m (input wire a, output wire y);\n    assign y = a;\nendmodule\n") == []

    def test_multiple_drivers(self):
        text = (
            "module m (input wire a, input wire b, output wire y);\n"
            "    assign y = a;\n"
            "    assign y = b;\n"
            "endmodule\n"
        )
        assert codes(text) == ["L001"]

    def test_undriven_net(self):
        text = (
            "module m (input wire a, output wire y);\n"
            "    wire t;\n"
            "    assign y = t;\n"
            "endmodule\n"
        )
        assert codes(text) == ["L002"]

    def test_undriven_output(self):
        assert codes("module m (input wire a, output wire y);\nendmodule\n") == ["L002"]

    def test_unconnected_port(self):
        text = (
            "module m (input wire clk, input wire rst, input wire [31:0] a, output wire [31:0] y);\n"
            "    Value_V u0 (\n"
            "        .clk(clk),\n"
            "        .rst(rst),\n"
            "        .a(a)\n"
            "    );\n"
            "    assign y = a;\n"
            "endmodule\n"
        )
        assert codes(text, library_sources()) == ["L003"]

    def test_unknown_module_and_port(self):
        text = (
            "module m (input wire clk, input wire rst, input wire [31:0] a, output wire [31:0] y);\n"
            "    Mystery_V u0 (.a(a), .c(y));\n"
            "    Value_V u1 (.clk(clk), .rst(rst), .a(a), .c(y), .z(a));\n"
            "endmodule\n"
        )
        assert codes(text, library_sources()) == ["L004", "L004"]

    def test_undeclared_net(self):
        text = "module m (input wire a, output wire y);\n    assign y = ghost;\nendmodule\n"
        assert codes(text) == ["L005"]

    def test_literals_are_not_nets(self):
        text = "module m (input wire a, output wire [31:0] y);\n    assign y = 32'h00010000;\nendmodule\n"
        assert codes(text) == []

    def test_diagnostics_name_the_file(self):
        (problem,) = lint_design({"ifelse_0.v": "module m (input wire a, output wire y);\nendmodule\n"})
        assert problem.source == "ifelse_0.v"
        assert problem.is_error
