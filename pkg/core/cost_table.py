"""
Per-operator latency and resource costs.

The defaults for add, sub, mul and value are calibrated so that a 16-tap
multiply-accumulate built unrolled costs 4320 LUT, 1024 FF and 64 DSP. Div,
power, log, sqrt and sincostan carry placeholder costs that users override
with ``--costs <file>``.
"""

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Mapping, Union

from core.design_interfaces import WORD_BITS, OpKind
from core.errors import CostFileError, MissingFile

logger = logging.getLogger(__name__)

DELAY_KEY = "delay"
COST_FIELDS = ("lut", "ff", "dsp", "bram", "latency")


@dataclass(frozen=True)
class OpCost:
    """Resources of one hardware unit plus its latency in clock cycles."""

    lut: int = 0
    ff: int = 0
    dsp: int = 0
    bram: int = 0
    latency: int = 1


_DEFAULT_COSTS: Dict[str, OpCost] = {
    "add": OpCost(lut=32, ff=32),
    "sub": OpCost(lut=32, ff=32),
    "mul": OpCost(lut=238, ff=32, dsp=4),
    "div": OpCost(lut=1200, ff=32, dsp=4),
    "power": OpCost(lut=700, ff=64, dsp=8),
    "log": OpCost(lut=2500, ff=128, dsp=16),
    "sqrt": OpCost(lut=400, ff=16),
    "sincostan": OpCost(lut=1800, ff=96),
    "value": OpCost(ff=32),
    "compare": OpCost(lut=32, ff=1),
    "merge": OpCost(lut=32, ff=32),
    # per stage of one 32-bit delay element
    DELAY_KEY: OpCost(ff=32, latency=0),
}


class CostTable:
    """Lookup table keyed by operator short name (``mul``, ``sincostan`` ...)."""

    def __init__(self, costs: Mapping[str, OpCost] = None):
        self._costs: Dict[str, OpCost] = dict(_DEFAULT_COSTS)
        if costs:
            self._costs.update(costs)
        for key, cost in self._costs.items():
            self._check(key, cost)

    @staticmethod
    def _check(key: str, cost: OpCost) -> None:
        if min(cost.lut, cost.ff, cost.dsp, cost.bram) < 0:
            raise CostFileError(f"negative resource cost for '{key}'")
        if key != DELAY_KEY and cost.latency < 1:
            raise CostFileError(f"latency of '{key}' must be at least 1")

    def cost(self, op: OpKind) -> OpCost:
        return self._costs[op.short]

    def latency(self, op: OpKind) -> int:
        return self._costs[op.short].latency

    @property
    def delay_stage(self) -> OpCost:
        return self._costs[DELAY_KEY]

    def delay_cost(self, stages: int, width: int = WORD_BITS) -> OpCost:
        """Resources of a ``stages``-deep shift register of ``width`` bits."""
        stage = self.delay_stage
        return OpCost(
            lut=stage.lut * stages,
            ff=stage.ff * stages * width // WORD_BITS,
            dsp=stage.dsp * stages,
            bram=stage.bram * stages,
            latency=stages,
        )

    def keys(self):
        return sorted(self._costs)

    def with_overrides(self, overrides: Mapping[str, int]) -> "CostTable":
        """Return a copy with ``op.field`` keys replaced.

        Raises:
            CostFileError: on an unknown operator or field.
        """
        costs = dict(self._costs)
        for key, value in overrides.items():
            op_name, _, field_name = key.partition(".")
            if op_name not in costs or field_name not in COST_FIELDS:
                raise CostFileError(f"unknown cost key '{key}'")
            costs[op_name] = replace(costs[op_name], **{field_name: value})
        return CostTable(costs)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "CostTable":
        """Load ``op.field=value`` lines on top of the defaults.

        Blank lines and ``#`` comments are ignored.
        """
        path = Path(path)
        if not path.is_file():
            raise MissingFile(f"cost file not found: {path}")
        overrides: Dict[str, int] = {}
        for number, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise CostFileError(f"expected 'op.field=value', got '{line}'", line=number)
            try:
                overrides[key.strip()] = int(value.strip())
            except ValueError:
                raise CostFileError(f"cost '{value.strip()}' is not an integer", line=number)
        table = cls().with_overrides(overrides)
        logger.info(f"Loaded {len(overrides)} cost override(s) from {path}")
        return table
