"""Containers, the architecture registry, and sequence-level BPTT plumbing.

A cell is described by a :class:`CellType`: its named parameter slots, its
step/backward-step functions, and the structural counts used by the census.
CellType instances register themselves here; ``get_cell`` is the lookup used
by everything downstream (harness, gradcheck, CLI).

Step functions accept a single sample (``x`` of shape ``(m,)``, state vectors
``(n,)``) or a batch (``(B, m)`` / ``(B, n)``) through the same code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..linalg import GATE_FNS, glorot_init


@dataclass
class CellState:
    """Hidden vector h plus, where the architecture has one, memory cell c."""

    h: np.ndarray
    c: np.ndarray | None = None


@dataclass
class CellParams:
    """Named weight matrices and bias vectors for one cell instance."""

    arch: str
    n: int
    m: int
    gate_fn: str
    arrays: dict[str, np.ndarray]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.arrays[name]


@dataclass
class StepGrads:
    """Per-slot parameter gradients plus the gradients flowing out of a step."""

    by_name: dict[str, np.ndarray]
    d_x: np.ndarray
    d_h_prev: np.ndarray
    d_c_prev: np.ndarray | None = None


@dataclass
class SeqGrads:
    """Parameter gradients summed over a sequence, plus boundary gradients."""

    by_name: dict[str, np.ndarray]
    d_x: list[np.ndarray]
    d_h0: np.ndarray
    d_c0: np.ndarray | None = None


# Slot shape kinds: "nm" input matrix, "nn" recurrent/peephole matrix, "n" bias.
@dataclass(frozen=True)
class CellType:
    name: str
    slots: tuple[tuple[str, str], ...]
    has_cell_state: bool
    gates: int
    activations: int
    elementwise_mults: int
    step: Callable
    backward_step: Callable


_REGISTRY: dict[str, CellType] = {}


def register(cell: CellType) -> CellType:
    _REGISTRY[cell.name] = cell
    return cell


def get_cell(arch: str) -> CellType:
    try:
        return _REGISTRY[arch]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise ValueError(f"unknown architecture {arch!r}, expected one of: {known}") from None


def architectures() -> tuple[str, ...]:
    """Registered architecture names in comparison-table order."""
    order = ("rnn", "gru", "lstm", "plstm", "litelstm")
    return tuple(a for a in order if a in _REGISTRY)


def slot_shape(kind: str, n: int, m: int) -> tuple[int, ...]:
    if kind == "nm":
        return (n, m)
    if kind == "nn":
        return (n, n)
    if kind == "n":
        return (n,)
    raise ValueError(f"unknown slot kind {kind!r}")


def init_params(
    cell: CellType | str,
    n: int,
    m: int,
    rng: np.random.Generator,
    gate_fn: str = "logistic",
) -> CellParams:
    """Glorot-uniform matrices, zero biases, in the cell's fixed slot order."""
    if isinstance(cell, str):
        cell = get_cell(cell)
    if n < 1 or m < 1:
        raise ValueError(f"hidden and input sizes must be >= 1, got n={n}, m={m}")
    if gate_fn not in GATE_FNS:
        raise ValueError(f"unknown gate function {gate_fn!r}, expected one of {GATE_FNS}")
    arrays: dict[str, np.ndarray] = {}
    for name, kind in cell.slots:
        shape = slot_shape(kind, n, m)
        if len(shape) == 2:
            arrays[name] = glorot_init(shape[0], shape[1], rng)
        else:
            arrays[name] = np.zeros(shape)
    return CellParams(arch=cell.name, n=n, m=m, gate_fn=gate_fn, arrays=arrays)


def zero_state(cell: CellType, n: int, batch: int | None = None) -> CellState:
    shape = (n,) if batch is None else (batch, n)
    c = np.zeros(shape) if cell.has_cell_state else None
    return CellState(h=np.zeros(shape), c=c)


def check_step_shapes(cell: CellType, params: CellParams, x: np.ndarray, s: CellState) -> None:
    if x.shape[-1] != params.m:
        raise ValueError(
            f"{cell.name} step: input x has last dimension {x.shape[-1]}, expected m={params.m}"
        )
    if s.h.shape[-1] != params.n:
        raise ValueError(
            f"{cell.name} step: state h has last dimension {s.h.shape[-1]}, expected n={params.n}"
        )
    if cell.has_cell_state:
        if s.c is None:
            raise ValueError(f"{cell.name} step: state is missing memory cell c")
        if s.c.shape != s.h.shape:
            raise ValueError(
                f"{cell.name} step: memory cell c has shape {s.c.shape}, expected {s.h.shape}"
            )
    elif s.c is not None:
        raise ValueError(f"{cell.name} step: architecture carries no memory cell but c was given")


def outer_sum(d: np.ndarray, v: np.ndarray) -> np.ndarray:
    """d (.., n) and v (.., m) -> weight gradient (n, m), summed over batch."""
    if d.ndim == 1:
        return np.outer(d, v)
    return d.T @ v


def bias_sum(d: np.ndarray) -> np.ndarray:
    return d if d.ndim == 1 else d.sum(axis=0)


def forward_sequence(
    cell: CellType,
    params: CellParams,
    xs,
    s0: CellState | None = None,
) -> tuple[list[CellState], list[dict]]:
    """Unroll the cell over a sequence of inputs.

    ``xs`` is a list of per-step arrays or a single array of shape
    ``(T, m)`` / ``(T, B, m)``.  Returns the state after each step and the
    cached intermediates the backward pass needs.
    """
    T = len(xs)
    if T == 0:
        raise ValueError("forward_sequence: empty sequence")
    if s0 is None:
        batch = None if xs[0].ndim == 1 else xs[0].shape[0]
        s0 = zero_state(cell, params.n, batch)
    states: list[CellState] = []
    caches: list[dict] = []
    s = s0
    for t in range(T):
        s, cache = cell.step(params, xs[t], s)
        states.append(s)
        caches.append(cache)
    return states, caches


def backward_sequence(
    cell: CellType,
    params: CellParams,
    caches: list[dict],
    d_h_list,
    d_c_last: np.ndarray | None = None,
) -> SeqGrads:
    """Reverse-time accumulation of per-step gradients (full-sequence BPTT).

    ``d_h_list[t]`` is the loss gradient arriving directly at h_t; the
    optional ``d_c_last`` arrives at the final memory cell.  Parameter
    gradients are summed over time in fixed reverse order.
    """
    if len(caches) != len(d_h_list):
        raise ValueError(
            f"backward_sequence: {len(caches)} cached steps but {len(d_h_list)} upstream gradients"
        )
    total = {name: np.zeros_like(arr) for name, arr in params.arrays.items()}
    d_x_list: list[np.ndarray] = [None] * len(caches)  # type: ignore[list-item]
    d_h_next = np.zeros_like(d_h_list[-1])
    d_c_next = d_c_last
    for t in range(len(caches) - 1, -1, -1):
        d_h = d_h_list[t] + d_h_next
        sg = cell.backward_step(params, caches[t], d_h, d_c_next)
        for name, g in sg.by_name.items():
            total[name] += g
        d_x_list[t] = sg.d_x
        d_h_next = sg.d_h_prev
        d_c_next = sg.d_c_prev
    return SeqGrads(by_name=total, d_x=d_x_list, d_h0=d_h_next, d_c0=d_c_next)
