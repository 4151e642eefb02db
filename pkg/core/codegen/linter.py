"""
Structural linter for emitted Verilog.

Parses the restricted subset the emitters produce (ANSI module headers, wire
and reg declarations, ``assign`` statements and named-port instances) and
checks connectivity:

    L001  net driven more than once
    L002  net read but never driven, or output port never driven
    L003  instance port left unconnected
    L004  unknown module or port name
    L005  net used without a declaration
"""

import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

from core.codegen.net_namer import VERILOG_KEYWORDS
from core.design_interfaces import Diagnostic, ValidationSeverity

logger = logging.getLogger(__name__)

_COMMENT = re.compile(r"//[^\n]*|/\*.*?\*/", re.S)
_MODULE = re.compile(
    r"\bmodule\s+(\w+)\s*(?:#\s*\((?P<params>.*?)\)\s*)?\((?P<ports>.*?)\)\s*;(?P<body>.*?)\bendmodule\b",
    re.S,
)
_DECLARATION = re.compile(r"^\s*(wire|reg|localparam)\b([^;]*);", re.M)
_ASSIGN = re.compile(r"^\s*assign\s+(\w+)\s*=\s*([^;]*);", re.M)
_INSTANCE = re.compile(
    r"^\s*(?P<module>\w+)(?:\s*#\s*\((?P<params>(?:[^()]|\([^()]*\))*)\))?"
    r"\s+(?P<name>\w+)\s*\((?P<conns>[^;]*?)\)\s*;",
    re.M | re.S,
)
_CONNECTION = re.compile(r"\.(\w+)\s*\(\s*([^()]*?)\s*\)")
_IDENTIFIER = re.compile(r"(?<![\w'$])[A-Za-z_]\w*")


@dataclass
class ModuleHeader:
    name: str
    inputs: List[str] = field(default_factory=list)
    outputs: List[str] = field(default_factory=list)
    regs: List[str] = field(default_factory=list)

    @property
    def ports(self) -> List[str]:
        return self.inputs + self.outputs


@dataclass
class ParsedModule:
    header: ModuleHeader
    body: str
    file_name: str


def _strip_comments(text: str) -> str:
    return _COMMENT.sub("", text)


def _parse_ports(name: str, ports: str) -> ModuleHeader:
    header = ModuleHeader(name)
    for declaration in ports.split(","):
        words = declaration.split()
        if not words:
            continue
        port = words[-1]
        if words[0] == "input":
            header.inputs.append(port)
        elif words[0] == "output":
            header.outputs.append(port)
            if "reg" in words:
                header.regs.append(port)
    return header


def parse_modules(files: Mapping[str, str]) -> Dict[str, ParsedModule]:
    """Every module defined in ``files``, keyed by module name."""
    modules: Dict[str, ParsedModule] = {}
    for file_name, text in files.items():
        for match in _MODULE.finditer(_strip_comments(text)):
            header = _parse_ports(match.group(1), match.group("ports"))
            modules[header.name] = ParsedModule(header, match.group("body"), file_name)
    return modules


def _declared_names(declaration: str) -> List[str]:
    # "[31:0] a, b" or "TOTAL = 17"
    declaration = re.sub(r"\[[^\]]*\]", "", declaration)
    names = []
    for part in declaration.split(","):
        words = part.split("=")[0].split()
        if words:
            names.append(words[-1])
    return names


def _diagnostic(code: str, message: str, source: str) -> Diagnostic:
    return Diagnostic(ValidationSeverity.ERROR, code, message, source=source)


def lint_module(
    module: ParsedModule, known: Mapping[str, ModuleHeader]
) -> List[Diagnostic]:
    """Check one module body against the headers in ``known``."""
    header = module.header
    problems: List[Diagnostic] = []

    def report(code: str, message: str) -> None:
        problems.append(_diagnostic(code, f"{header.name}: {message}", module.file_name))

    declared = set(header.ports)
    drivers: Counter = Counter(header.inputs)
    reads: List[Tuple[str, str]] = []
    for kind, rest in _DECLARATION.findall(module.body):
        for name in _declared_names(rest):
            declared.add(name)
            if kind != "wire":
                drivers[name] += 1
    for port in header.regs:
        drivers[port] += 1

    for target, value in _ASSIGN.findall(module.body):
        drivers[target] += 1
        reads.extend((name, f"assign {target}") for name in _IDENTIFIER.findall(value))

    for match in _INSTANCE.finditer(module.body):
        kind = match.group("module")
        if kind in VERILOG_KEYWORDS:
            continue
        instance = match.group("name")
        definition = known.get(kind)
        if definition is None:
            report("L004", f"instance {instance} of unknown module {kind}")
            continue
        connections = dict(_CONNECTION.findall(match.group("conns")))
        for port in definition.ports:
            net = connections.get(port, "")
            if not net:
                report("L003", f"port {port} of {instance} ({kind}) is unconnected")
                continue
            if "'" in net:
                continue
            if port in definition.outputs:
                drivers[net] += 1
            else:
                reads.append((net, instance))
        for port in connections:
            if port not in definition.ports:
                report("L004", f"{kind} has no port {port} (instance {instance})")

    for net, count in sorted(drivers.items()):
        if count > 1:
            report("L001", f"net {net} has {count} drivers")
    for net, user in reads:
        if net in VERILOG_KEYWORDS:
            continue
        if net not in declared:
            report("L005", f"net {net} read by {user} is not declared")
        elif drivers[net] == 0:
            report("L002", f"net {net} read by {user} is never driven")
    for port in header.outputs:
        if drivers[port] == 0:
            report("L002", f"output {port} is never driven")
    return problems


def lint_design(
    files: Mapping[str, str], library: Optional[Mapping[str, str]] = None
) -> List[Diagnostic]:
    """Lint every module in ``files``.

    Args:
        files: Emitted design files (top and if/else modules) by file name.
        library: Files that only contribute module headers, such as the
            function library and registered library entries.

    Returns:
        One diagnostic per violation; empty when the design is clean.
    """
    design = parse_modules(files)
    known = {name: parsed.header for name, parsed in parse_modules(library or {}).items()}
    known.update({name: parsed.header for name, parsed in design.items()})
    problems: List[Diagnostic] = []
    for parsed in design.values():
        problems.extend(lint_module(parsed, known))
    logger.debug(f"Linted {len(design)} module(s): {len(problems)} problem(s)")
    return problems
