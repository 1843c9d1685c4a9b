"""Single-gate memory cell with a peephole connection.

One sigmoid gate f does triple duty: it decays the carried memory, admits
the tanh candidate, and exposes the output —

    inp = W_fx x + U_fh h_prev + W_fc c_prev + b_f
    f   = G(inp)                        (G: logistic or hard sigmoid)
    g   = tanh(W_gx x + U_gh h_prev + b_g)
    c   = f * c_prev + f * g
    h   = f * tanh(c)

The backward pass differentiates this by hand.  Two paths are easy to drop
and are both accumulated here: f multiplies three different terms, and
c_prev feeds the gate pre-activation through the peephole W_fc as well as
the carry term of c.
"""

from __future__ import annotations

import numpy as np

from ..linalg import gate_apply, gate_grad
from .base import (
    CellParams,
    CellState,
    CellType,
    StepGrads,
    bias_sum,
    check_step_shapes,
    outer_sum,
    register,
)


def step(p: CellParams, x: np.ndarray, s: CellState) -> tuple[CellState, dict]:
    check_step_shapes(LITELSTM, p, x, s)
    A = p.arrays
    inp = x @ A["W_fx"].T + s.h @ A["U_fh"].T + s.c @ A["W_fc"].T + A["b_f"]
    f = gate_apply(p.gate_fn, inp)
    g = np.tanh(x @ A["W_gx"].T + s.h @ A["U_gh"].T + A["b_g"])
    c_new = f * s.c + f * g
    tanh_c = np.tanh(c_new)
    h_new = f * tanh_c
    cache = {
        "x": x,
        "h_prev": s.h,
        "c_prev": s.c,
        "inp": inp,
        "f": f,
        "g": g,
        "c_new": c_new,
        "tanh_c": tanh_c,
    }
    return CellState(h=h_new, c=c_new), cache


def backward_step(
    p: CellParams, cache: dict, d_h: np.ndarray, d_c: np.ndarray | None = None
) -> StepGrads:
    A = p.arrays
    f, g, tanh_c = cache["f"], cache["g"], cache["tanh_c"]
    x, h_prev, c_prev = cache["x"], cache["h_prev"], cache["c_prev"]
    if d_h.shape != f.shape:
        raise ValueError(f"backward step: d_h has shape {d_h.shape}, expected {f.shape}")

    # h = f * tanh(c)
    d_f = d_h * tanh_c
    d_c_total = d_h * f * (1.0 - tanh_c * tanh_c)
    if d_c is not None:
        d_c_total = d_c_total + d_c
    # c = f * c_prev + f * g: one gate scales both terms
    d_f = d_f + d_c_total * (c_prev + g)
    d_g = d_c_total * f
    d_c_prev = d_c_total * f
    # candidate branch
    d_ag = d_g * (1.0 - g * g)
    # gate branch
    d_inp = d_f * gate_grad(p.gate_fn, cache["inp"], f)

    grads = {
        "W_fx": outer_sum(d_inp, x),
        "U_fh": outer_sum(d_inp, h_prev),
        "W_fc": outer_sum(d_inp, c_prev),
        "b_f": bias_sum(d_inp),
        "W_gx": outer_sum(d_ag, x),
        "U_gh": outer_sum(d_ag, h_prev),
        "b_g": bias_sum(d_ag),
    }
    d_x = d_inp @ A["W_fx"] + d_ag @ A["W_gx"]
    d_h_prev = d_inp @ A["U_fh"] + d_ag @ A["U_gh"]
    # c_prev also feeds the gate through the peephole
    d_c_prev = d_c_prev + d_inp @ A["W_fc"]
    return StepGrads(by_name=grads, d_x=d_x, d_h_prev=d_h_prev, d_c_prev=d_c_prev)


LITELSTM = register(
    CellType(
        name="litelstm",
        slots=(
            ("W_fx", "nm"),
            ("U_fh", "nn"),
            ("W_fc", "nn"),
            ("b_f", "n"),
            ("W_gx", "nm"),
            ("U_gh", "nn"),
            ("b_g", "n"),
        ),
        has_cell_state=True,
        gates=1,
        activations=2,
        elementwise_mults=3,
        step=step,
        backward_step=backward_step,
    )
)
