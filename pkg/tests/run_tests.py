"""
hlsgen 测试入口

    python tests/run_tests.py unit
    python tests/run_tests.py all -n 4
    python tests/run_tests.py --specific tests/unit/codegen/test_linter.py
"""

import argparse
import sys
from pathlib import Path

import pytest

PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

TESTS_DIR = PROJECT_ROOT / "tests"

# 套件名 -> (说明, 测试路径, 额外参数)
SUITES = {
    "unit": ("单元测试", ["unit", "test_config_manager.py"], []),
    "acceptance": ("示例设计验收与命令行测试", ["test_corpus_acceptance.py", "test_cli.py"], []),
    "performance": ("性能测试", ["test_performance.py"], ["-s"]),
    "all": ("完整测试套件", [""], ["--durations=10"]),
    "smoke": ("冒烟测试", [
        "test_config_manager.py::TestConfigManager::test_default_config_structure",
        "unit/frontend/test_parser.py",
        "test_corpus_acceptance.py::TestCorpusBuilds::test_mac16_unrolled_resources",
    ], []),
}

REQUIRED_FILES = ["main.py", "core/driver.py", "designs/mac16.vpy", "utils/config_manager.py"]


def run_suite(name: str, workers: str = None) -> int:
    title, paths, extra = SUITES[name]
    print(f"▶ {title}")
    args = [str(TESTS_DIR / p) for p in paths] + ["-v", "--tb=short", *extra]
    if workers:
        args += ["-n", workers]  # pytest-xdist
    return pytest.main(args)


def main() -> int:
    parser = argparse.ArgumentParser(description="hlsgen 测试运行器")
    parser.add_argument("suite", choices=sorted(SUITES), nargs="?", default="smoke",
                        help="要运行的测试套件 (默认: smoke)")
    parser.add_argument("--specific", type=str, help="运行特定的测试文件或测试函数")
    parser.add_argument("-n", "--workers", type=str, help="并行进程数")
    args = parser.parse_args()

    missing = [f for f in REQUIRED_FILES if not (PROJECT_ROOT / f).exists()]
    if missing:
        print(f"❌ 缺少项目文件: {', '.join(missing)}")
        return 1

    try:
        if args.specific:
            exit_code = pytest.main([args.specific, "-v", "--tb=short"])
        else:
            exit_code = run_suite(args.suite, args.workers)
    except KeyboardInterrupt:
        print("\n⚠️  测试被用户中断")
        return 1

    print("✅ 通过" if exit_code == 0 else f"❌ 失败 (exit {exit_code})")
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
