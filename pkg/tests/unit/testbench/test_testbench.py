"""
Unit tests for stimulus generation and testbench emission.
"""

import pytest

from core.design_interfaces import FixedValue, Mode
from core.errors import DomainError
from core.fixedpoint import simulate_graph, to_fixed
from core.testbench import (
    SplitMix64,
    StimulusPlan,
    derive_tolerances,
    emit_testbench,
    generate_vectors,
)
from tests.conftest import compile_graph, compile_tree

STRAIGHT = (
    'input_define("a", "b")\n'
    'output_define("y")\n'
    'Multiplication_V("p", "a", "b")\n'
    'Addition_V("s", "p", "a")\n'
    'Addition_V("y", "s", "p")\n'
)


class TestSplitMix64:
    """The stimulus stream."""

    def test_reference_value(self):
        assert SplitMix64(0).next() == 0xE220A8397B1DCDAF

    def test_deterministic(self):
        first, second = SplitMix64(42), SplitMix64(42)
        assert [first.next() for _ in range(5)] == [second.next() for _ in range(5)]

    def test_raw_between_bounds(self):
        rng = SplitMix64(7)
        values = [rng.raw_between(-3, 3) for _ in range(200)]
        assert min(values) >= -3
        assert max(values) <= 3
        assert len(set(values)) == 7


class TestStimulusPlan:
    """Plan validation."""

    def test_rejects_empty_range(self):
        with pytest.raises(ValueError):
            StimulusPlan(ranges={"a": (2.0, 1.0)})

    def test_rejects_zero_vectors(self):
        with pytest.raises(ValueError):
            StimulusPlan(n_vectors=0)

    def test_per_port_range(self):
        plan = StimulusPlan(ranges={"a": (0.0, 1.0)})
        assert plan.range_for("a") == (0.0, 1.0)
        assert plan.range_for("b") == (-8.0, 8.0)


class TestVectors:
    """generate_vectors."""

    def test_same_seed_same_vectors(self):
        tree = compile_tree(STRAIGHT)
        first = generate_vectors(tree, StimulusPlan(seed=5, n_vectors=4))
        second = generate_vectors(tree, StimulusPlan(seed=5, n_vectors=4))
        assert first == second
        assert first != generate_vectors(tree, StimulusPlan(seed=6, n_vectors=4))

    def test_inputs_within_range(self):
        tree = compile_tree(STRAIGHT)
        plan = StimulusPlan(n_vectors=20, ranges={"a": (0.0, 0.5)})
        for vector in generate_vectors(tree, plan):
            assert 0 <= vector.inputs["a"].raw <= to_fixed(0.5).raw
            assert to_fixed(-8).raw <= vector.inputs["b"].raw <= to_fixed(8).raw

    def test_expected_from_golden_model(self):
        tree = compile_tree(STRAIGHT)
        (vector,) = generate_vectors(tree, StimulusPlan(n_vectors=1))
        assert vector.expected == simulate_graph(tree, vector.inputs)

    def test_domain_redraw(self):
        """Vectors outside the sqrt domain are redrawn."""
        tree = compile_tree('input_define("x")\noutput_define("y")\nSqrt_V("y", "x")\n')
        vectors = generate_vectors(tree, StimulusPlan(n_vectors=10))
        assert all(v.inputs["x"].raw >= 0 for v in vectors)

    def test_domain_never_satisfied(self):
        tree = compile_tree('input_define("x")\noutput_define("y")\nSqrt_V("y", "x")\n')
        with pytest.raises(DomainError):
            generate_vectors(tree, StimulusPlan(n_vectors=1, ranges={"x": (-8.0, -1.0)}))


class TestTolerances:
    """derive_tolerances."""

    def test_transcendental_outputs(self):
        tree = compile_tree(
            'input_define("x")\noutput_define("s", "z", "y")\n'
            'SinCosTan_V("s", "c", "t", "x")\n'
            'Addition_V("z", "c", "x")\n'
            'Addition_V("y", "x", "x")\n'
        )
        assert derive_tolerances(tree) == {"s": 256, "z": 256, "y": 0}


class TestEmitTestbench:
    """tb_top.v text."""

    def test_pipelined_testbench(self):
        graph = compile_graph(STRAIGHT)
        text = emit_testbench(graph, Mode.PIPELINED, StimulusPlan(seed=3, n_vectors=2))
        assert "module tb_design;" in text
        assert "design dut (" in text
        assert "wait (valid);" in text
        assert text.count("check(\"y\"") == 2
        assert "seed 3, 2 vector(s)" in text

    def test_unrolled_testbench_holds_inputs(self):
        graph = compile_graph(STRAIGHT, Mode.UNROLLED)
        text = emit_testbench(graph, Mode.UNROLLED, StimulusPlan(n_vectors=1))
        assert "repeat (4) @(posedge clk);" in text
        assert "start" not in text

    def test_expected_values_embedded(self):
        graph = compile_graph(STRAIGHT)
        plan = StimulusPlan(seed=9, n_vectors=1)
        (vector,) = generate_vectors(graph.tree, plan)
        text = emit_testbench(graph, Mode.PIPELINED, plan)
        assert vector.expected["y"].verilog in text

    def test_stimulus_only(self):
        graph = compile_graph(STRAIGHT)
        text = emit_testbench(graph, Mode.PIPELINED, StimulusPlan(n_vectors=1), assertions=False)
        assert "stimulus only" in text
        assert "check(" not in text

    def test_unmodeled_call_falls_back(self, scale_library):
        """Without a model for a library call the testbench drops its checks and warns."""
        graph = compile_graph(
            'input_define("a")\noutput_define("y")\nCall_V("scale2", "y", "a")\n',
            library=scale_library,
        )
        warnings = []
        text = emit_testbench(graph, Mode.PIPELINED, StimulusPlan(n_vectors=2), warnings=warnings)
        assert [w.code for w in warnings] == ["W104"]
        assert "stimulus only" in text

    def test_call_model_enables_checks(self, scale_library):
        graph = compile_graph(
            'input_define("a")\noutput_define("y")\nCall_V("scale2", "y", "a")\n',
            library=scale_library,
        )
        models = {"scale2": lambda args: (FixedValue(args[0].raw * 2),)}
        text = emit_testbench(
            graph, Mode.PIPELINED, StimulusPlan(n_vectors=2), call_models=models
        )
        assert text.count('check("y"') == 2
