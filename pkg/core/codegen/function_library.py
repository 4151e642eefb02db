"""
Function library: one registered Verilog module per fundamental function.

Every module takes ``clk`` and ``rst`` and registers its result, so each one
costs exactly one cycle in the schedule. Transcendental bodies are CORDIC,
digit-by-digit and repeated-squaring approximations whose tables are computed
here with mpmath and baked into the emitted text.
"""

import logging
from pathlib import Path
from typing import Dict, List, Union

from mpmath.ctx_mp import MPContext

from core.codegen.renderer import get_renderer
from core.design_interfaces import COMPARISONS, FRACTION_BITS

logger = logging.getLogger(__name__)

CORDIC_ITERATIONS = 28
TRIG_FRACTION_BITS = 29
LOG_FRACTION_BITS = 24
EXPONENT_BITS = 8

DELAY_MODULE = "Delay_V"

# module -> (expression comment, extra declarations, registered right-hand side)
_BINARY_OPS = {
    "Addition_V": ("a + b", (), "a + b"),
    "Subtraction_V": ("a - b", (), "a - b"),
    "Multiplication_V": (
        "a * b",
        ("// fixed(64,32) product, arithmetic shift right 16, low 32 bits",
         "wire signed [63:0] product = $signed(a) * $signed(b);"),
        "product[47:16]",
    ),
}

LIBRARY_MODULES = (
    "Addition_V", "Subtraction_V", "Multiplication_V", "Division_V", "Power_V",
    "Logarithm_V", "Sqrt_V", "SinCosTan_V", "Value_V", "Compare_V", "Merge_V",
    DELAY_MODULE,
)


def _trig_constants() -> Dict[str, object]:
    mp = MPContext()
    mp.dps = 50
    q29 = mp.mpf(2) ** TRIG_FRACTION_BITS
    q16 = mp.mpf(2) ** FRACTION_BITS
    atan_table = [int(mp.nint(mp.atan(mp.mpf(2) ** -i) * q29)) for i in range(CORDIC_ITERATIONS)]
    gain = mp.mpf(1)
    for i in range(CORDIC_ITERATIONS):
        gain /= mp.sqrt(1 + mp.mpf(2) ** (-2 * i))
    return {
        "iterations": CORDIC_ITERATIONS,
        "atan_table": atan_table,
        "gain_q29": int(mp.nint(gain * q29)),
        "pi_q16": int(mp.nint(mp.pi * q16)),
        "two_pi_q16": int(mp.nint(2 * mp.pi * q16)),
        "half_pi_q16": int(mp.nint(mp.pi / 2 * q16)),
        "pi_q29": int(mp.nint(mp.pi * q29)),
    }


def library_sources() -> Dict[str, str]:
    """Render every function-library module, keyed by module name."""
    renderer = get_renderer()
    context = {
        **_trig_constants(),
        "exponent_bits": EXPONENT_BITS,
        "log_fraction_bits": LOG_FRACTION_BITS,
        "comparisons": COMPARISONS,
    }
    sources: Dict[str, str] = {}
    for module in LIBRARY_MODULES:
        if module in _BINARY_OPS:
            expression, declarations, rhs = _BINARY_OPS[module]
            sources[module] = renderer.render(
                "lib/binary_op.v.j2",
                module=module, expression=expression, declarations=declarations, rhs=rhs,
            )
        else:
            sources[module] = renderer.render(f"lib/{module}.v.j2", **context)
    return sources


def emit_function_library(dest: Union[str, Path]) -> List[str]:
    """Write ``<dest>/<Module>.v`` for every library module.

    Returns:
        The emitted texts in library order.

    Raises:
        OSError: if the directory or a file cannot be written.
    """
    dest = Path(dest)
    dest.mkdir(parents=True, exist_ok=True)
    texts: List[str] = []
    for module, text in library_sources().items():
        (dest / f"{module}.v").write_text(text, encoding="utf-8")
        texts.append(text)
    logger.debug(f"Wrote {len(texts)} function library module(s) to {dest}")
    return texts
