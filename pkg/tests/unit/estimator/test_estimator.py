"""
Unit tests for cycle and resource estimation.
"""

import random

import pytest

from core.cost_table import CostTable
from core.design_interfaces import Mode
from core.estimator import emit_report, estimate
from tests.conftest import compile_graph, read_corpus

STRAIGHT = (
    'input_define("a", "b")\n'
    'output_define("y")\n'
    'Multiplication_V("p", "a", "b")\n'
    'Addition_V("s", "p", "a")\n'
    'Addition_V("y", "s", "p")\n'
)


class TestEstimate:
    """Resource sums."""

    def test_pipelined_straight_line(self):
        """Nodes, two one-stage delays and a two-bit counter."""
        report = estimate(compile_graph(STRAIGHT), mode=Mode.PIPELINED)
        assert report.total_cycles == 3
        assert (report.lut, report.ff, report.dsp, report.bram) == (304, 162, 4, 0)
        assert list(report.breakdown["kind"]) == ["node"] * 3 + ["delay"] * 2 + ["wrapper"]

    def test_unrolled_has_no_cycle_count(self):
        report = estimate(compile_graph(STRAIGHT, Mode.UNROLLED), mode=Mode.UNROLLED)
        assert report.total_cycles is None
        assert report.cycles_text == "NA"
        assert (report.lut, report.ff, report.dsp) == (302, 96, 4)

    def test_mac16_unrolled(self):
        """16 multipliers and 16 adders."""
        graph = compile_graph(read_corpus("mac16"), Mode.UNROLLED, name="mac16")
        report = estimate(graph, mode=Mode.UNROLLED)
        assert (report.lut, report.ff, report.dsp, report.bram) == (4320, 1024, 64, 0)

    def test_custom_costs(self):
        costs = CostTable().with_overrides({"mul.dsp": 1})
        report = estimate(compile_graph(STRAIGHT, Mode.UNROLLED), costs, Mode.UNROLLED)
        assert report.dsp == 1

    def test_library_call_resources(self, scale_library):
        graph = compile_graph(
            'input_define("a")\noutput_define("y")\nCall_V("scale2", "y", "a")\n',
            Mode.UNROLLED,
            library=scale_library,
        )
        report = estimate(graph, mode=Mode.UNROLLED)
        assert (report.lut, report.ff) == (40, 32)
        assert report.breakdown.iloc[0]["module"] == "scale2"

    def test_constant_only_design(self):
        graph = compile_graph('output_define("y")\nValue_V("y", number_to_hex(1))\n')
        report = estimate(graph)
        assert report.breakdown.empty
        assert report.lut == 0


class TestReportText:
    """emit_report."""

    def test_sections(self):
        text = emit_report(estimate(compile_graph(STRAIGHT)))
        assert "Breakdown" in text
        assert "Multiplication_V" in text
        assert text.rstrip().splitlines()[-1] == "TOTAL lut=304 ff=162 dsp=4 bram=0"

    def test_unrolled_cycles_na(self):
        text = emit_report(estimate(compile_graph(STRAIGHT, Mode.UNROLLED), mode=Mode.UNROLLED))
        assert "NA" in text.splitlines()[1]

    def test_empty_design(self):
        graph = compile_graph('output_define("y")\nValue_V("y", number_to_hex(1))\n')
        assert "(no hardware)" in emit_report(estimate(graph))


class TestMonotonicity:
    """Growing a design never shrinks a resource total."""

    OPS = ("Addition_V", "Subtraction_V", "Multiplication_V")

    def grown_designs(self, rng, steps):
        lines, names = [], ["a", "b"]
        for k in range(steps):
            op = rng.choice(self.OPS)
            lines.append(f'{op}("t{k}", "{rng.choice(names)}", "{rng.choice(names)}")\n')
            names.append(f"t{k}")
            outputs = ", ".join(f'"t{i}"' for i in range(k + 1))
            yield f'input_define("a", "b")\noutput_define({outputs})\n' + "".join(lines)

    @pytest.mark.parametrize("mode", [Mode.UNROLLED, Mode.PIPELINED])
    def test_one_operation_at_a_time(self, mode):
        for seed in range(10):
            rng = random.Random(seed)
            previous = (0, 0, 0, 0)
            for text in self.grown_designs(rng, 12):
                report = estimate(compile_graph(text, mode), mode=mode)
                totals = (report.lut, report.ff, report.dsp, report.bram)
                assert all(now >= before for now, before in zip(totals, previous)), (seed, text)
                previous = totals
