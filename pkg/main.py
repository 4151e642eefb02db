"""
hlsgen command line.

    hlsgen build <src.vpy>... --mode {unrolled|pipelined} --out <dir> [options]
    hlsgen estimate <src.vpy> [--mode M] [--costs FILE]
    hlsgen simulate <src.vpy> [--inputs FILE] [--set name=value ...]
    hlsgen lib add <file.v> --label L --inputs a,b --outputs c --cycles N [--lut N ...]
    hlsgen lib list | lib show <label>
    hlsgen config show | config set <key> <value>

Settings not given on the command line come from app_config.json (or
``--config``), then from built-in defaults.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

# 添加当前目录到Python路径（支持直接运行）
current_dir = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, current_dir)

from colored import attr, fg, stylize

from core.design_interfaces import Diagnostic, LibraryEntry, Mode, ResourceCost, ValidationSeverity
from core.driver import (
    BuildConfig,
    BuildResult,
    build_corpus,
    count_severity,
    exit_code_of,
    format_outputs,
    parse_input_lines,
    run_build,
    run_estimate,
    run_simulate,
)
from core.errors import EXIT_OK, EXIT_USAGE, HlsError, MissingFile
from core.hw_library import HardwareLibrary
from utils.config_manager import ConfigManager, get_config_manager
from utils.file_validator import FileValidator

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"

_STYLES = {
    ValidationSeverity.ERROR: fg("red") + attr("bold"),
    ValidationSeverity.WARNING: fg("yellow"),
    ValidationSeverity.INFO: fg("cyan"),
}


class HlsArgumentParser(argparse.ArgumentParser):
    """Argument errors exit with status 1 instead of argparse's 2."""

    def error(self, message: str) -> None:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _range(text: str) -> Tuple[float, float]:
    low, sep, high = text.partition(":")
    try:
        if not sep:
            raise ValueError(text)
        bounds = float(low), float(high)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected lo:hi, got '{text}'")
    if bounds[0] > bounds[1]:
        raise argparse.ArgumentTypeError(f"empty range {text}")
    return bounds


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _names(text: str) -> Tuple[str, ...]:
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    if not names:
        raise argparse.ArgumentTypeError("expected a comma-separated list of port names")
    return names


def build_parser() -> argparse.ArgumentParser:
    parser = HlsArgumentParser(prog="hlsgen", description="Compile .vpy designs to Verilog.")
    parser.add_argument("--config", help="configuration file (default: app_config.json)")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    parser.add_argument("--no-color", action="store_true", help="plain diagnostics")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=HlsArgumentParser)

    def design_options(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--mode", choices=[m.value for m in Mode])
        sub.add_argument("--lib", help="hardware library directory")
        sub.add_argument("--costs", help="cost override file (op.field=value lines)")

    build = commands.add_parser("build", help="emit Verilog, testbench and report")
    build.add_argument("sources", nargs="+", help=".vpy design files")
    design_options(build)
    build.add_argument("--out", help="output directory")
    build.add_argument("--seed", type=_non_negative)
    build.add_argument("--stim", type=_positive, help="number of test vectors")
    build.add_argument("--range", type=_range, dest="stim_range", help="stimulus range lo:hi")
    build.add_argument("--no-testbench", action="store_true")
    build.add_argument("--no-assert", action="store_true", help="stimulus-only testbench")
    build.add_argument("--report", dest="report", action="store_true", default=None)
    build.add_argument("--no-report", dest="report", action="store_false")
    build.add_argument("--dump-ir", action="store_true")
    build.add_argument("--dump-schedule", action="store_true")
    build.add_argument("--jobs", type=_positive, help="parallel builds for several sources")

    est = commands.add_parser("estimate", help="print the cycle and resource report")
    est.add_argument("source")
    design_options(est)

    sim = commands.add_parser("simulate", help="golden run on one input vector")
    sim.add_argument("source")
    design_options(sim)
    sim.add_argument("--inputs", help="file of 'name = decimal' lines")
    sim.add_argument("--set", action="append", default=[], metavar="NAME=VALUE")

    lib = commands.add_parser("lib", help="manage the hardware library")
    lib.add_argument("--lib", help="hardware library directory")
    lib_commands = lib.add_subparsers(dest="lib_command", required=True, parser_class=HlsArgumentParser)
    add = lib_commands.add_parser("add", help="register a Verilog module")
    add.add_argument("file")
    add.add_argument("--label", required=True)
    add.add_argument("--inputs", type=_names, required=True)
    add.add_argument("--outputs", type=_names, required=True)
    add.add_argument("--cycles", type=_positive, required=True)
    for resource in ("lut", "ff", "dsp", "bram"):
        add.add_argument(f"--{resource}", type=_non_negative, default=0)
    add.add_argument("--kind", choices=["normal", "if_variant", "else_variant"], default="normal")
    add.add_argument("--force", action="store_true", help="replace an existing label")
    lib_commands.add_parser("list", help="list registered modules")
    show = lib_commands.add_parser("show", help="print one entry and its binding records")
    show.add_argument("label")

    cfg = commands.add_parser("config", help="show or change the configuration file")
    cfg_commands = cfg.add_subparsers(
        dest="config_command", required=True, parser_class=HlsArgumentParser
    )
    cfg_commands.add_parser("show", help="print the effective configuration")
    assign = cfg_commands.add_parser("set", help="change one setting and save the file")
    assign.add_argument("key", help="dotted key such as build.seed")
    assign.add_argument("value", help="JSON value; anything else is taken as a string")
    return parser


def setup_logging(level: str, verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, level, logging.INFO),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )


def print_diagnostics(diagnostics: Sequence[Diagnostic], color: bool) -> None:
    for diagnostic in diagnostics:
        text = diagnostic.format()
        if color:
            text = stylize(text, _STYLES[diagnostic.severity])
        print(text, file=sys.stderr)


def _pick(flag, config: ConfigManager, key: str):
    """CLI flag when given, otherwise the configured value."""
    return config.get(key) if flag is None else flag


def make_build_config(args: argparse.Namespace, config: ConfigManager, source: str) -> BuildConfig:
    settings = config.get_build_settings()
    costs = getattr(args, "costs", None)
    report = getattr(args, "report", None)
    return BuildConfig(
        source=Path(source),
        mode=Mode(_pick(args.mode, config, "build.mode")),
        out_dir=Path(_pick(getattr(args, "out", None), config, "build.out_dir")),
        lib_dir=Path(_pick(args.lib, config, "build.lib_dir")),
        seed=_pick(getattr(args, "seed", None), config, "build.seed"),
        stim=_pick(getattr(args, "stim", None), config, "build.stim"),
        stim_range=getattr(args, "stim_range", None) or config.get_stimulus_range(),
        emit_testbench=settings["emit_testbench"] and not getattr(args, "no_testbench", False),
        assertions=settings["assertions"] and not getattr(args, "no_assert", False),
        emit_report=settings["emit_report"] if report is None else report,
        dump_ir=getattr(args, "dump_ir", False),
        dump_schedule=getattr(args, "dump_schedule", False),
        costs_path=Path(costs) if costs else None,
        memory_budget_mb=config.get_memory_budget_mb(),
    )


def _summarize(result: BuildResult) -> str:
    if not result.ok:
        return f"{result.design}: failed (exit {result.exit_code})"
    cycles = result.report.cycles_text if result.report else "NA"
    warnings = count_severity(result.diagnostics, ValidationSeverity.WARNING)
    return (
        f"{result.design}: {len(result.artifacts)} file(s) in {result.out_dir}, "
        f"cycles {cycles}, {warnings} warning(s)"
    )


def cmd_build(args: argparse.Namespace, config: ConfigManager, color: bool) -> int:
    if len(args.sources) == 1:
        results = [run_build(make_build_config(args, config, args.sources[0]))]
    else:
        base = make_build_config(args, config, args.sources[0])
        workers = args.jobs or config.get("build.max_workers", 4)
        results = build_corpus(args.sources, base, max_workers=workers)
    for result in results:
        print_diagnostics(result.diagnostics, color)
        print(_summarize(result))
    return exit_code_of(results)


def cmd_estimate(args: argparse.Namespace, config: ConfigManager, color: bool) -> int:
    result = run_estimate(make_build_config(args, config, args.source))
    print_diagnostics(result.diagnostics, color)
    if result.ok:
        print(result.artifacts["report.txt"], end="")
    return result.exit_code


def _simulation_inputs(args: argparse.Namespace) -> dict:
    values = {}
    if args.inputs:
        path = Path(args.inputs)
        if not path.is_file():
            raise MissingFile(f"input file not found: {path}")
        values.update(parse_input_lines(path.read_text(encoding="utf-8")))
    values.update(parse_input_lines("\n".join(args.set)))
    return values


def cmd_simulate(args: argparse.Namespace, config: ConfigManager, color: bool) -> int:
    result = run_simulate(make_build_config(args, config, args.source), _simulation_inputs(args))
    print_diagnostics(result.diagnostics, color)
    if result.ok:
        print(format_outputs(result.outputs), end="")
    return result.exit_code


def _describe_entry(entry: LibraryEntry) -> List[str]:
    resources = entry.resources
    lines = [
        f"label:    {entry.label}",
        f"file:     {entry.verilog_path}",
        f"kind:     {entry.kind}",
        f"inputs:   {', '.join(entry.inputs)}",
        f"outputs:  {', '.join(entry.outputs)}",
        f"cycles:   {entry.cycles}",
        f"lut={resources.lut} ff={resources.ff} dsp={resources.dsp} bram={resources.bram}",
    ]
    for context in ("normal", "if", "else"):
        lines.append(f"{context + ':':9} {entry.binding(context) or '(not callable here)'}")
    return lines


def cmd_lib(args: argparse.Namespace, config: ConfigManager, color: bool) -> int:
    library = HardwareLibrary(_pick(args.lib, config, "build.lib_dir"))
    if args.lib_command == "add":
        if not FileValidator.validate_verilog_file(args.file):
            raise MissingFile(f"not a readable .v file: {args.file}")
        entry = LibraryEntry(
            label=args.label,
            verilog_path=args.file,
            inputs=args.inputs,
            outputs=args.outputs,
            cycles=args.cycles,
            resources=ResourceCost(args.lut, args.ff, args.dsp, args.bram),
            kind=args.kind,
        )
        stored = library.register(entry, force=args.force)
        print(f"registered {stored.label} -> {library.verilog_file(stored)}")
    elif args.lib_command == "list":
        for entry in library.entries():
            print(
                f"{entry.label:20} {entry.kind:12} in={len(entry.inputs):<3} "
                f"out={len(entry.outputs):<3} cycles={entry.cycles}"
            )
    else:
        print("\n".join(_describe_entry(library.lookup(args.label))))
    return EXIT_OK


def _config_value(text: str):
    try:
        return json.loads(text)
    except ValueError:
        return text


def cmd_config(args: argparse.Namespace, config: ConfigManager, color: bool) -> int:
    if args.config_command == "set":
        config.set(args.key, _config_value(args.value))
        problems = config.check()
        if problems:
            for problem in problems:
                print(f"hlsgen: error: {problem}", file=sys.stderr)
            return EXIT_USAGE
        if not config.save_config():
            print(f"hlsgen: error: cannot write {config.config_file}", file=sys.stderr)
            return EXIT_USAGE
        logger.info(f"Saved {args.key} to {config.config_file}")
    print(json.dumps(config.config, indent=2, ensure_ascii=False))
    return EXIT_OK


COMMANDS = {
    "build": cmd_build,
    "estimate": cmd_estimate,
    "simulate": cmd_simulate,
    "lib": cmd_lib,
    "config": cmd_config,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.config and not os.path.isfile(args.config):
        print(f"hlsgen: error: configuration file not found: {args.config}", file=sys.stderr)
        return EXIT_USAGE
    config = get_config_manager(args.config)
    setup_logging(config.get_log_level(), args.verbose)
    color = not args.no_color and sys.stderr.isatty()

    try:
        return COMMANDS[args.command](args, config, color)
    except HlsError as exc:
        print_diagnostics([exc.to_diagnostic()], color)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
