"""
测试配置和公共工具模块
为所有测试提供统一的临时目录、示例设计和编译辅助函数
"""

import functools
import os
import sys
import tempfile
import shutil
import pytest
import logging
from pathlib import Path
from typing import List, Optional

# 添加项目根目录到Python路径
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from core.cost_table import CostTable
from core.design_interfaces import LibraryEntry, Mode, ResourceCost
from core.frontend import elaborate, parse_source, validate_rules
from core.node_engine import DAGScheduler, ScheduledGraph, TreeArray, build_tree

DESIGNS_DIR = PROJECT_ROOT / "designs"

# 示例设计及其流水线处理周期
CORPUS_CYCLES = {
    "mac16": 17,
    "fft32": 34,
    "demodulation": 13,
    "modulation": 2,
    "back_propagation": 7,
}

# 测试配置
TEST_CONFIG = {
    'temp_dir_prefix': 'hlsgen_test_',
    'log_level': logging.WARNING,  # 测试时减少日志噪音
    'benchmark_iterations': 3,  # 性能测试迭代次数
}

# 一个最小的外部 Verilog 模块，用于硬件库测试
SCALE_MODULE = """\
module scale2 (
    input clk,
    input rst,
    input [31:0] x,
    output reg [31:0] y
);
    always @(posedge clk) begin
        if (rst)
            y <= 32'd0;
        else
            y <= x <<< 1;
    end
endmodule
"""


class TestEnvironment:
    """测试环境管理器"""

    def __init__(self):
        self.temp_dir = None
        self.original_log_level = None

    def setup(self):
        """设置测试环境"""
        self.temp_dir = tempfile.mkdtemp(prefix=TEST_CONFIG['temp_dir_prefix'])
        self.original_log_level = logging.getLogger().level
        logging.getLogger().setLevel(TEST_CONFIG['log_level'])
        return self

    def cleanup(self):
        """清理测试环境"""
        if self.temp_dir and os.path.exists(self.temp_dir):
            shutil.rmtree(self.temp_dir, ignore_errors=True)
        if self.original_log_level is not None:
            logging.getLogger().setLevel(self.original_log_level)

    @property
    def path(self) -> Path:
        return Path(self.temp_dir)

    def create_source(self, text: str, name: str = "design") -> Path:
        """在临时目录写入一个 .vpy 设计文件"""
        path = self.path / f"{name}.vpy"
        path.write_text(text, encoding="utf-8")
        return path

    def create_verilog(self, text: str = SCALE_MODULE, name: str = "scale2") -> Path:
        """在临时目录写入一个 .v 文件"""
        path = self.path / f"{name}.v"
        path.write_text(text, encoding="utf-8")
        return path


def corpus_source(name: str) -> Path:
    return DESIGNS_DIR / f"{name}.vpy"


def read_corpus(name: str) -> str:
    return corpus_source(name).read_text(encoding="utf-8")


def compile_tree(text: str, name: str = "design", library=None,
                 costs: Optional[CostTable] = None, fold: bool = True) -> TreeArray:
    """源码 -> 二叉树数组；设计规则违例时断言失败"""
    prog = parse_source(text, name=name)
    stmts = elaborate(prog, library, fold=fold)
    problems = validate_rules(stmts, prog)
    assert not [p for p in problems if p.is_error], [p.format() for p in problems]
    return build_tree(
        stmts, costs, inputs=prog.input_names, outputs=prog.output_names, name=name
    )


def compile_graph(text: str, mode: Mode = Mode.PIPELINED, name: str = "design",
                  library=None) -> ScheduledGraph:
    """源码 -> 调度图"""
    return DAGScheduler(compile_tree(text, name, library)).schedule(mode)


def scale_entry(path: Path, label: str = "scale2", cycles: int = 3) -> LibraryEntry:
    return LibraryEntry(
        label=label,
        verilog_path=str(path),
        inputs=("x",),
        outputs=("y",),
        cycles=cycles,
        resources=ResourceCost(lut=40, ff=32, dsp=0, bram=0),
    )


def rule_codes(text: str, name: str = "design") -> List[str]:
    prog = parse_source(text, name=name)
    return [d.code for d in validate_rules(elaborate(prog), prog)]


@pytest.fixture
def test_env():
    """测试环境fixture"""
    env = TestEnvironment()
    env.setup()
    try:
        yield env
    finally:
        env.cleanup()


@pytest.fixture
def scale_library(test_env):
    """已注册 scale2 模块的硬件库"""
    from core.hw_library import HardwareLibrary

    library = HardwareLibrary(test_env.path / "hwlib")
    library.register(scale_entry(test_env.create_verilog()))
    return library


# 性能测试装饰器
def benchmark(func):
    """性能测试装饰器；保留原函数签名以便 pytest 注入 fixture"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        import time
        times = []
        for _ in range(TEST_CONFIG['benchmark_iterations']):
            start = time.perf_counter()
            result = func(*args, **kwargs)
            times.append(time.perf_counter() - start)

        avg_time = sum(times) / len(times)
        print(f"\n性能测试结果 - {func.__name__}:")
        print(f"  平均时间: {avg_time:.4f}s")
        print(f"  最短时间: {min(times):.4f}s")
        print(f"  最长时间: {max(times):.4f}s")
        return result
    return wrapper
