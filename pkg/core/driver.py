"""
Build orchestration: source -> statements -> tree -> schedule -> artifacts.

The entry points never raise for compiler errors. Every failure becomes a
diagnostic plus an exit code (0 ok, 1 usage, 2 invalid source, 3 internal).
Artifacts are rendered in memory and only written once every stage has
succeeded, so a rejected design leaves the output directory untouched.
"""

import logging
import os
import shutil
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import psutil

from core.codegen import (
    dump_versions,
    emit_ifelse_module,
    emit_top,
    library_sources,
    lint_design,
    rename_signals,
)
from core.cost_table import CostTable
from core.design_interfaces import (
    Diagnostic,
    FixedValue,
    Mode,
    OpKind,
    SourceProgram,
    Statement,
    ValidationSeverity,
)
from core.errors import (
    EXIT_INTERNAL,
    EXIT_INVALID_SOURCE,
    EXIT_OK,
    HlsError,
    InternalError,
    MissingFile,
    OutputError,
    SourceSyntaxError,
)
from core.estimator import Report, emit_report, estimate
from core.fixedpoint import simulate_graph, to_fixed
from core.frontend import elaborate, parse_source, validate_rules
from core.hw_library import HardwareLibrary
from core.node_engine import DAGScheduler, ScheduledGraph, TreeArray, build_tree, dump_tree
from core.node_engine.dag_scheduler import dump_schedule, verify_alignment
from core.testbench import DEFAULT_RANGE, StimulusPlan, emit_testbench
from utils.file_validator import FileValidator

logger = logging.getLogger(__name__)

TOP_FILE = "top.v"
TESTBENCH_FILE = "tb_top.v"
REPORT_FILE = "report.txt"
IR_FILE = "ir.txt"
SCHEDULE_FILE = "schedule.txt"
LIB_DIR = "lib"

# files a previous build may have left behind in an output directory
ARTIFACT_PATTERNS = (
    TOP_FILE, TESTBENCH_FILE, REPORT_FILE, IR_FILE, SCHEDULE_FILE,
    "ifelse_*.v", f"{LIB_DIR}/*.v",
)


@dataclass
class BuildConfig:
    """Everything one build needs; CLI flags and app_config.json both map here."""

    source: Path
    mode: Mode = Mode.PIPELINED
    out_dir: Path = Path("build")
    lib_dir: Path = Path("hwlib")
    seed: int = 1
    stim: int = 10
    stim_range: Tuple[float, float] = DEFAULT_RANGE
    emit_testbench: bool = True
    assertions: bool = True
    emit_report: bool = True
    dump_ir: bool = False
    dump_schedule: bool = False
    costs_path: Optional[Path] = None
    memory_budget_mb: int = 200

    def __post_init__(self) -> None:
        self.source = Path(self.source)
        self.out_dir = Path(self.out_dir)
        self.lib_dir = Path(self.lib_dir)
        if self.costs_path is not None:
            self.costs_path = Path(self.costs_path)
        if not isinstance(self.mode, Mode):
            self.mode = Mode(self.mode)

    @property
    def design_name(self) -> str:
        return FileValidator.sanitize_identifier(self.source.stem)


@dataclass
class BuildResult:
    """Exit code, rendered artifacts (relative path -> text) and diagnostics."""

    exit_code: int
    artifacts: Dict[str, str] = field(default_factory=dict)
    diagnostics: List[Diagnostic] = field(default_factory=list)
    design: str = ""
    out_dir: Optional[Path] = None
    report: Optional[Report] = None
    outputs: Dict[str, FixedValue] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.exit_code == EXIT_OK

    @property
    def errors(self) -> List[Diagnostic]:
        return [d for d in self.diagnostics if d.is_error]


@dataclass
class CompiledDesign:
    program: SourceProgram
    statements: List[Statement]
    tree: TreeArray
    graph: ScheduledGraph
    costs: CostTable
    library: HardwareLibrary


@contextmanager
def _stage(name: str, budget_mb: int) -> Iterator[None]:
    """Log wall time and resident-set growth of one build stage."""
    process = psutil.Process()
    before = process.memory_info().rss / 1024 / 1024
    started = time.perf_counter()
    yield
    after = process.memory_info().rss / 1024 / 1024
    elapsed_ms = (time.perf_counter() - started) * 1000
    logger.debug(f"Stage {name}: {elapsed_ms:.1f} ms, RSS {after:.1f} MB ({after - before:+.1f} MB)")
    if after - before > budget_mb:
        logger.warning(
            f"Stage {name} grew resident memory by {after - before:.1f} MB "
            f"(budget {budget_mb} MB)"
        )


def _with_source(diagnostics: Sequence[Diagnostic], source: str) -> List[Diagnostic]:
    return [d if d.source else replace(d, source=source) for d in diagnostics]


def _guarded(cfg: BuildConfig, body: Callable[[List[Diagnostic]], BuildResult]) -> BuildResult:
    """Run ``body`` and turn any exception into diagnostics and an exit code."""
    source = str(cfg.source)
    diagnostics: List[Diagnostic] = []
    try:
        result = body(diagnostics)
    except HlsError as exc:
        if exc.exit_code == EXIT_INTERNAL:
            logger.error(f"Internal error while building {source}: {exc}", exc_info=True)
        diagnostics.append(exc.to_diagnostic(source))
        result = BuildResult(exc.exit_code, diagnostics=diagnostics)
    except OSError as exc:
        logger.error(f"I/O failure while building {source}: {exc}", exc_info=True)
        diagnostics.append(InternalError(f"I/O failure: {exc}").to_diagnostic(source))
        result = BuildResult(EXIT_INTERNAL, diagnostics=diagnostics)
    except Exception as exc:
        logger.error(f"Unexpected failure while building {source}: {exc}", exc_info=True)
        diagnostics.append(InternalError(f"unexpected failure: {exc}").to_diagnostic(source))
        result = BuildResult(EXIT_INTERNAL, diagnostics=diagnostics)
    result.diagnostics = _with_source(result.diagnostics, source)
    result.design = result.design or cfg.design_name
    return result


def _read_source(path: Path) -> str:
    if not path.is_file():
        raise MissingFile(f"source file not found: {path}")
    if not FileValidator.validate_source_file(str(path)):
        logger.warning(f"{path} is not a readable .vpy file under the size limit, parsing anyway")
    try:
        return path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise SourceSyntaxError(f"{path} is not UTF-8 text: {exc}") from exc


def load_costs(costs_path: Optional[Path]) -> CostTable:
    return CostTable.from_file(costs_path) if costs_path else CostTable()


def compile_design(cfg: BuildConfig, diagnostics: List[Diagnostic]) -> Optional[CompiledDesign]:
    """Parse, elaborate, rule-check, lower and schedule one design.

    Rule violations are appended to ``diagnostics`` and yield None; structural
    errors are raised as ``HlsError``.
    """
    budget = cfg.memory_budget_mb
    costs = load_costs(cfg.costs_path)
    library = HardwareLibrary(cfg.lib_dir)

    with _stage("parse", budget):
        program = parse_source(_read_source(cfg.source), name=cfg.design_name)
    with _stage("elaborate", budget):
        statements = elaborate(program, library, diagnostics)
        violations = validate_rules(statements, program)
    if violations:
        diagnostics.extend(violations)
        if any(d.is_error for d in violations):
            logger.info(f"'{program.name}' violates {len(violations)} design rule(s)")
            return None

    with _stage("tree", budget):
        tree = build_tree(
            statements, costs,
            inputs=program.input_names, outputs=program.output_names, name=program.name,
        )
    with _stage("schedule", budget):
        scheduler = DAGScheduler(tree)
        problems = scheduler.validate_dag()
        if problems:
            raise InternalError(problems[0].message)
        graph = scheduler.schedule(cfg.mode)
        if cfg.mode == Mode.PIPELINED:
            problems = verify_alignment(graph)
            if problems:
                raise InternalError(problems[0].message)
    return CompiledDesign(program, statements, tree, graph, costs, library)


def _called_labels(tree: TreeArray) -> List[str]:
    return sorted({node.label for node in tree.nodes if node.operator == OpKind.CALL})


def render_artifacts(
    design: CompiledDesign, cfg: BuildConfig, diagnostics: List[Diagnostic]
) -> Tuple[Dict[str, str], Report]:
    """Render every requested file in memory and lint the Verilog.

    Raises:
        InternalError: if the emitted Verilog fails the linter.
    """
    graph, mode = design.graph, cfg.mode
    namer = rename_signals(graph)
    design_files = {TOP_FILE: emit_top(graph, mode, namer)}
    design_files.update(emit_ifelse_module(graph, namer))

    library_files = {f"{module}.v": text for module, text in library_sources().items()}
    labels = _called_labels(design.tree)
    if labels:
        library_files.update(design.library.sources(labels))

    problems = lint_design(design_files, library_files)
    if problems:
        diagnostics.extend(problems)
        raise InternalError(f"emitted Verilog has {len(problems)} structural problem(s)")

    artifacts = dict(design_files)
    artifacts.update({f"{LIB_DIR}/{name}": text for name, text in library_files.items()})
    if cfg.emit_testbench:
        plan = StimulusPlan(seed=cfg.seed, n_vectors=cfg.stim, default_range=cfg.stim_range)
        artifacts[TESTBENCH_FILE] = emit_testbench(
            graph, mode, plan, namer=namer, assertions=cfg.assertions, warnings=diagnostics
        )
    report = estimate(graph, design.costs, mode)
    if cfg.emit_report:
        artifacts[REPORT_FILE] = emit_report(report)
    if cfg.dump_ir:
        artifacts[IR_FILE] = dump_tree(design.tree) + dump_versions(namer)
    if cfg.dump_schedule:
        artifacts[SCHEDULE_FILE] = dump_schedule(graph)
    return artifacts, report


def write_artifacts(out_dir: Union[str, Path], artifacts: Mapping[str, str]) -> List[Path]:
    """Stage every file, then move the set into ``out_dir``.

    Artifacts of an earlier build in the same directory are removed so the
    directory holds exactly this build's files; anything else is left alone.
    """
    out_dir = Path(out_dir)
    if not FileValidator.validate_output_directory(str(out_dir)):
        raise OutputError(f"output directory is not writable: {out_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=".staging-", dir=out_dir))
    written: List[Path] = []
    try:
        for relative, text in sorted(artifacts.items()):
            path = staging / relative
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
        for pattern in ARTIFACT_PATTERNS:
            for stale in out_dir.glob(pattern):
                if stale.is_file():
                    stale.unlink()
        for relative in sorted(artifacts):
            destination = out_dir / relative
            destination.parent.mkdir(parents=True, exist_ok=True)
            os.replace(staging / relative, destination)
            written.append(destination)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    logger.info(f"Wrote {len(written)} file(s) to {out_dir}")
    return written


def _build(cfg: BuildConfig, diagnostics: List[Diagnostic]) -> BuildResult:
    design = compile_design(cfg, diagnostics)
    if design is None:
        return BuildResult(EXIT_INVALID_SOURCE, diagnostics=diagnostics)
    with _stage("emit", cfg.memory_budget_mb):
        artifacts, report = render_artifacts(design, cfg, diagnostics)
    with _stage("write", cfg.memory_budget_mb):
        write_artifacts(cfg.out_dir, artifacts)
    logger.info(
        f"Built '{design.tree.name}' ({cfg.mode.value}): {len(artifacts)} artifact(s), "
        f"cycles {report.cycles_text}"
    )
    return BuildResult(
        EXIT_OK, artifacts, diagnostics,
        design=design.tree.name, out_dir=cfg.out_dir, report=report,
    )


def run_build(cfg: BuildConfig) -> BuildResult:
    """Compile one design and write its artifacts to ``cfg.out_dir``."""
    return _guarded(cfg, lambda diagnostics: _build(cfg, diagnostics))


def run_estimate(cfg: BuildConfig) -> BuildResult:
    """Compile one design and return its report without writing anything."""

    def body(diagnostics: List[Diagnostic]) -> BuildResult:
        design = compile_design(cfg, diagnostics)
        if design is None:
            return BuildResult(EXIT_INVALID_SOURCE, diagnostics=diagnostics)
        report = estimate(design.graph, design.costs, cfg.mode)
        return BuildResult(
            EXIT_OK, {REPORT_FILE: emit_report(report)}, diagnostics,
            design=design.tree.name, report=report,
        )

    return _guarded(cfg, body)


def parse_input_lines(text: str) -> Dict[str, float]:
    """Read ``name = decimal`` lines; blank lines and ``#`` comments are skipped.

    Raises:
        SourceSyntaxError: on a malformed line.
    """
    values: Dict[str, float] = {}
    for number, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        name, sep, value = line.partition("=")
        try:
            if not sep or not name.strip():
                raise ValueError(line)
            values[name.strip()] = float(value.strip())
        except ValueError:
            raise SourceSyntaxError(f"expected 'name = decimal', got '{line}'", line=number)
    return values


def format_outputs(outputs: Mapping[str, FixedValue]) -> str:
    """One `name = decimal (0xHEX)` line per output."""
    return "".join(f"{name} = {FixedValue(value.raw)}\n" for name, value in outputs.items())


def run_simulate(cfg: BuildConfig, inputs: Mapping[str, float]) -> BuildResult:
    """Golden run of one design on one input vector.

    ``inputs`` maps every declared input (array elements by their wire name)
    to a real value; the outputs are returned as Q16.16 values.
    """

    def body(diagnostics: List[Diagnostic]) -> BuildResult:
        design = compile_design(cfg, diagnostics)
        if design is None:
            return BuildResult(EXIT_INVALID_SOURCE, diagnostics=diagnostics)
        vector = {name: to_fixed(value) for name, value in inputs.items()}
        outputs = simulate_graph(design.tree, vector, warnings=diagnostics)
        return BuildResult(
            EXIT_OK, diagnostics=diagnostics, design=design.tree.name, outputs=outputs
        )

    return _guarded(cfg, body)


def build_corpus(
    sources: Sequence[Union[str, Path]], base: BuildConfig, max_workers: int = 4
) -> List[BuildResult]:
    """Build several designs into ``<base.out_dir>/<design>/`` on a thread pool.

    Designs share nothing mutable, so results are the same as building them
    one at a time. Results come back in ``sources`` order.
    """
    configs = []
    for source in sources:
        cfg = replace(base, source=Path(source))
        configs.append(replace(cfg, out_dir=base.out_dir / cfg.design_name))
    names = [cfg.design_name for cfg in configs]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    if duplicates:
        raise OutputError(f"several sources build into the same directory: {', '.join(duplicates)}")
    if not configs:
        return []

    workers = max(1, min(max_workers, len(configs)))
    logger.info(f"Building {len(configs)} design(s) with {workers} worker(s)")
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="BuildWorker") as executor:
        results = list(executor.map(run_build, configs))
    failed = [r.design for r in results if not r.ok]
    if failed:
        logger.warning(f"{len(failed)} design(s) failed: {', '.join(failed)}")
    return results


def exit_code_of(results: Sequence[BuildResult]) -> int:
    """Worst exit code of a corpus build."""
    return max((r.exit_code for r in results), default=EXIT_OK)


def count_severity(diagnostics: Sequence[Diagnostic], severity: ValidationSeverity) -> int:
    return sum(1 for d in diagnostics if d.severity == severity)
