"""
Unit tests for single-assignment wire naming.
"""

from core.codegen import NetNamer, dump_versions, rename_signals
from core.codegen.net_namer import legal_identifier
from tests.conftest import compile_graph


class TestLegalIdentifier:
    """Mapping source names to Verilog identifiers."""

    def test_plain_names_unchanged(self):
        assert legal_identifier("array_x_wire_3") == "array_x_wire_3"

    def test_keywords_and_bad_characters(self):
        assert legal_identifier("wire") == "wire_n"
        assert legal_identifier("1x") == "n_1x"
        assert legal_identifier("a.b") == "a_b"


class TestNetNamer:
    """Claiming identifiers."""

    def test_control_ports_reserved(self):
        """Control port names are never reused for nets."""
        namer = NetNamer()
        assert namer.claim("clk") == "clk_1"
        assert namer.claim("clk") == "clk_2"

    def test_widths_recorded(self):
        namer = NetNamer()
        cond = namer.claim("if0_cond", width=1)
        assert namer.width(cond) == 1
        assert namer.width("unknown") == 32


class TestRenameSignals:
    """rename_signals on compiled designs."""

    def test_reassigned_names_get_versions(self):
        """Every producer drives its own wire."""
        graph = compile_graph(
            'input_define("a")\n'
            'output_define("y")\n'
            'Value_V("t", "a")\n'
            'Addition_V("t", "a", "a")\n'
            'Value_V("y", "t")\n'
        )
        namer = rename_signals(graph)
        assert namer.versions()["t"] == ["t", "t_v1"]
        assert namer.net(2, "y") == "y"
        assert namer.net("a", "a") == "a"
        assert dump_versions(namer) == "# net t: t, t_v1\n"

    def test_delayed_output_keeps_port_for_delay(self):
        """An output reaching its port through a delay drives the port from the delay."""
        graph = compile_graph(
            'input_define("a", "b")\noutput_define("y", "z")\n'
            'Multiplication_V("p", "a", "b")\nAddition_V("y", "p", "a")\n'
            'Value_V("z", "a")\n'
        )
        namer = rename_signals(graph)
        (index,) = [i for i, d in enumerate(graph.delays) if d.sink == ("z", 0)]
        assert namer.delay_net(index) == "z"
        assert namer.net(2, "z") == "z_v0"

    def test_instance_names(self):
        """Instances are named after address and operator."""
        graph = compile_graph(
            'input_define("a", "b")\noutput_define("y")\n'
            'Multiplication_V("p", "a", "b")\nAddition_V("y", "p", "a")\n'
        )
        namer = rename_signals(graph)
        assert namer.instance("node", 0) == "u0_mul"
        assert namer.instance("node", 1) == "u1_add"
        assert namer.instance("delay", 0) == "d0"
