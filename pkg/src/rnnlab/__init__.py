"""rnnlab: a recurrent-cell laboratory.

Five cells behind one abstraction — a single-gate memory cell plus RNN, GRU,
LSTM, and peephole-LSTM baselines — with hand-derived backpropagation through
time, a finite-difference gradient oracle, component/compute accounting, and
a reproducible experiment harness for sequence classification.
"""

__version__ = "0.1.0"

from .cells import (  # noqa: E402
    CellParams,
    CellState,
    architectures,
    backward_sequence,
    census_table,
    forward_sequence,
    get_cell,
    init_params,
    load_params,
    param_census,
    save_params,
    zero_state,
)

__all__ = [
    "CellParams",
    "CellState",
    "__version__",
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
