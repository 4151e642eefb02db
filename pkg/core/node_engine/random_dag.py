"""
Random dataflow generator for scheduler fuzzing.
"""

import random
from typing import List, Optional

from core.cost_table import CostTable
from core.design_interfaces import FixedConstant, OpKind, Statement
from core.node_engine.binary_tree import TreeArray, build_tree

_OPS = (OpKind.ADD, OpKind.SUB, OpKind.MUL, OpKind.VALUE)


def random_cost_table(rng: random.Random, max_latency: int = 4) -> CostTable:
    """Default costs with a random latency per operator."""
    return CostTable().with_overrides({
        f"{op.short}.latency": rng.randint(1, max_latency) for op in _OPS
    })


def generate_random_tree(
    rng: random.Random,
    n_nodes: int = 24,
    n_inputs: int = 4,
    max_latency: int = 4,
    costs: Optional[CostTable] = None,
) -> TreeArray:
    """Build a random straight-line design.

    Operands are drawn from inputs, earlier results and the occasional constant.
    Every result nobody consumes becomes an output, so no node is dead.
    """
    inputs = [f"in{i}" for i in range(n_inputs)]
    produced: List[str] = []
    consumed = set()
    stmts: List[Statement] = []
    for index in range(n_nodes):
        op = rng.choice(_OPS)
        operands = []
        for _ in range(op.n_operands):
            pool = inputs + produced
            if rng.random() < 0.1:
                operands.append(FixedConstant(rng.randint(-(1 << 18), 1 << 18)))
                continue
            name = rng.choice(pool)
            consumed.add(name)
            operands.append(name)
        result = f"n{index}"
        produced.append(result)
        stmts.append(Statement(
            op=op, function=op.value, results=(result,), operands=tuple(operands),
            line=index + 1,
        ))
    outputs = [name for name in produced if name not in consumed] or produced[-1:]
    return build_tree(
        stmts,
        costs or random_cost_table(rng, max_latency),
        inputs=inputs,
        outputs=outputs,
        name="random_dag",
    )
