"""Recurrent cells: a single-gate memory cell plus four baselines, with
forward dynamics, hand-derived backward steps, sequence unrolling, component
census, and weight serialization."""

from .base import (
    CellParams,
    CellState,
    CellType,
    SeqGrads,
    StepGrads,
    architectures,
    backward_sequence,
    forward_sequence,
    get_cell,
    init_params,
    zero_state,
)
from . import baselines, litelstm  # noqa: F401  (import registers the cells)
from .census import REFERENCE_COMPONENTS, census_table, param_census
from .serial import load_params, save_params

__all__ = [
    "CellParams",
    "CellState",
    "CellType",
    "SeqGrads",
    "StepGrads",
    "REFERENCE_COMPONENTS",
    "architectures",
    "backward_sequence",
    "census_table",
    "forward_sequence",
    "get_cell",
    "init_params",
    "load_params",
    "param_census",
    "save_params",
    "zero_state",
]
