"""
Code generation package: wire renaming, Verilog emission, the function
library and the emitted-code linter.
"""

from core.codegen.function_library import emit_function_library, library_sources
from core.codegen.linter import lint_design
from core.codegen.net_namer import NetNamer, dump_versions, rename_signals
from core.codegen.verilog_writer import emit_ifelse_module, emit_top, module_name

__all__ = [
    'NetNamer',
    'rename_signals',
    'dump_versions',
    'emit_top',
    'emit_ifelse_module',
    'module_name',
    'emit_function_library',
    'library_sources',
    'lint_design',
]
