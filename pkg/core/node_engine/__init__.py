"""
Node engine package initialization.

This package holds the dataflow IR (the binary tree array) and the pipeline
scheduler that levels it and balances every edge with delay elements.
"""

from core.node_engine.binary_tree import (
    TreeArray,
    TreeNode,
    build_tree,
    dump_tree,
    hardware_inputs,
    insert_merges,
    lower_statements,
    pad_else_branch,
)
from core.node_engine.dag_scheduler import (
    DAGScheduler,
    DelayElement,
    ScheduledGraph,
    assign_levels,
    critical_path_cycles,
    insert_delays,
)

__all__ = [
    'TreeArray',
    'TreeNode',
    'build_tree',
    'dump_tree',
    'hardware_inputs',
    'insert_merges',
    'lower_statements',
    'pad_else_branch',
    'DAGScheduler',
    'DelayElement',
    'ScheduledGraph',
    'assign_levels',
    'critical_path_cycles',
    'insert_delays',
]
