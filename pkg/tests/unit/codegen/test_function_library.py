"""
Unit tests for the function library modules.
"""

from core.codegen import emit_function_library, library_sources
from core.codegen.function_library import LIBRARY_MODULES, _trig_constants
from core.codegen.linter import parse_modules


class TestLibrarySources:
    """Rendered library text."""

    def test_every_module_rendered(self):
        sources = library_sources()
        assert tuple(sources) == LIBRARY_MODULES
        modules = parse_modules(sources)
        assert sorted(modules) == sorted(LIBRARY_MODULES)

    def test_common_clock_ports(self):
        """Every module takes clk and rst first."""
        for name, parsed in parse_modules(library_sources()).items():
            assert parsed.header.inputs[:2] == ["clk", "rst"], name

    def test_sincostan_outputs(self):
        header = parse_modules(library_sources())["SinCosTan_V"].header
        assert header.outputs == ["sin_r", "cos_r", "tan_r"]

    def test_multiplier_keeps_middle_bits(self):
        assert "product[47:16]" in library_sources()["Multiplication_V"]

    def test_cordic_table_baked_in(self):
        """The arctangent table is emitted as literals."""
        text = library_sources()["SinCosTan_V"]
        assert "atan_table[0] = 32'sd421657428;" in text


class TestTrigConstants:
    """Tables computed at generation time."""

    def test_atan_table(self):
        constants = _trig_constants()
        assert len(constants["atan_table"]) == constants["iterations"]
        assert constants["atan_table"][0] == 421657428
        assert constants["atan_table"] == sorted(constants["atan_table"], reverse=True)

    def test_gain_and_pi(self):
        constants = _trig_constants()
        assert abs(constants["gain_q29"] / 2 ** 29 - 0.6072529350088813) < 1e-8
        assert constants["pi_q16"] == 205887
        assert constants["half_pi_q16"] == 102944


class TestEmitFunctionLibrary:
    """Writing the library directory."""

    def test_writes_one_file_per_module(self, tmp_path):
        texts = emit_function_library(tmp_path / "lib")
        files = sorted(p.name for p in (tmp_path / "lib").iterdir())
        assert files == sorted(f"{name}.v" for name in LIBRARY_MODULES)
        assert len(texts) == len(LIBRARY_MODULES)
