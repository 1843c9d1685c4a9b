"""The four comparison cells: vanilla RNN, GRU, LSTM, and peephole LSTM.

Standard published dynamics, each with a hand-derived backward step.  The
peephole variant feeds the memory cell into all three gates: c_prev into the
forget and input gates, the freshly written c into the output gate.
"""

from __future__ import annotations

import numpy as np

from ..linalg import sigmoid
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


def _check_upstream(d_h: np.ndarray, h_like: np.ndarray, arch: str) -> None:
    if d_h.shape != h_like.shape:
        raise ValueError(f"{arch} backward step: d_h has shape {d_h.shape}, expected {h_like.shape}")


# ---------------------------------------------------------------------------
# vanilla RNN: h = tanh(W_hx x + U_hh h_prev + b_h)
# ---------------------------------------------------------------------------

def rnn_step(p: CellParams, x: np.ndarray, s: CellState) -> tuple[CellState, dict]:
    check_step_shapes(RNN, p, x, s)
    A = p.arrays
    h_new = np.tanh(x @ A["W_hx"].T + s.h @ A["U_hh"].T + A["b_h"])
    cache = {"x": x, "h_prev": s.h, "h_new": h_new}
    return CellState(h=h_new), cache


def rnn_backward_step(
    p: CellParams, cache: dict, d_h: np.ndarray, d_c: np.ndarray | None = None
) -> StepGrads:
    A = p.arrays
    h_new = cache["h_new"]
    _check_upstream(d_h, h_new, "rnn")
    d_a = d_h * (1.0 - h_new * h_new)
    grads = {
        "W_hx": outer_sum(d_a, cache["x"]),
        "U_hh": outer_sum(d_a, cache["h_prev"]),
        "b_h": bias_sum(d_a),
    }
    return StepGrads(
        by_name=grads,
        d_x=d_a @ A["W_hx"],
        d_h_prev=d_a @ A["U_hh"],
        d_c_prev=None,
    )


RNN = register(
    CellType(
        name="rnn",
        slots=(("W_hx", "nm"), ("U_hh", "nn"), ("b_h", "n")),
        has_cell_state=False,
        gates=0,
        activations=1,
        elementwise_mults=0,
        step=rnn_step,
        backward_step=rnn_backward_step,
    )
)


# ---------------------------------------------------------------------------
# GRU: z keeps the old state, r resets it inside the candidate
#   z = sig(W_zx x + U_zh h_prev + b_z)
#   r = sig(W_rx x + U_rh h_prev + b_r)
#   cand = tanh(W_hx x + U_hh (r * h_prev) + b_h)
#   h = z * h_prev + (1 - z) * cand
# ---------------------------------------------------------------------------

def gru_step(p: CellParams, x: np.ndarray, s: CellState) -> tuple[CellState, dict]:
    check_step_shapes(GRU, p, x, s)
    A = p.arrays
    z = sigmoid(x @ A["W_zx"].T + s.h @ A["U_zh"].T + A["b_z"])
    r = sigmoid(x @ A["W_rx"].T + s.h @ A["U_rh"].T + A["b_r"])
    rh = r * s.h
    cand = np.tanh(x @ A["W_hx"].T + rh @ A["U_hh"].T + A["b_h"])
    h_new = z * s.h + (1.0 - z) * cand
    cache = {"x": x, "h_prev": s.h, "z": z, "r": r, "rh": rh, "cand": cand}
    return CellState(h=h_new), cache


def gru_backward_step(
    p: CellParams, cache: dict, d_h: np.ndarray, d_c: np.ndarray | None = None
) -> StepGrads:
    A = p.arrays
    z, r, cand, h_prev = cache["z"], cache["r"], cache["cand"], cache["h_prev"]
    _check_upstream(d_h, z, "gru")
    d_z = d_h * (h_prev - cand)
    d_cand = d_h * (1.0 - z)
    d_h_prev = d_h * z

    d_ah = d_cand * (1.0 - cand * cand)
    d_rh = d_ah @ A["U_hh"]
    d_r = d_rh * h_prev
    d_h_prev = d_h_prev + d_rh * r

    d_az = d_z * z * (1.0 - z)
    d_ar = d_r * r * (1.0 - r)

    grads = {
        "W_zx": outer_sum(d_az, cache["x"]),
        "U_zh": outer_sum(d_az, h_prev),
        "b_z": bias_sum(d_az),
        "W_rx": outer_sum(d_ar, cache["x"]),
        "U_rh": outer_sum(d_ar, h_prev),
        "b_r": bias_sum(d_ar),
        "W_hx": outer_sum(d_ah, cache["x"]),
        "U_hh": outer_sum(d_ah, cache["rh"]),
        "b_h": bias_sum(d_ah),
    }
    d_x = d_az @ A["W_zx"] + d_ar @ A["W_rx"] + d_ah @ A["W_hx"]
    d_h_prev = d_h_prev + d_az @ A["U_zh"] + d_ar @ A["U_rh"]
    return StepGrads(by_name=grads, d_x=d_x, d_h_prev=d_h_prev, d_c_prev=None)


GRU = register(
    CellType(
        name="gru",
        slots=(
            ("W_zx", "nm"),
            ("U_zh", "nn"),
            ("b_z", "n"),
            ("W_rx", "nm"),
            ("U_rh", "nn"),
            ("b_r", "n"),
            ("W_hx", "nm"),
            ("U_hh", "nn"),
            ("b_h", "n"),
        ),
        has_cell_state=False,
        gates=2,
        activations=1,
        elementwise_mults=3,
        step=gru_step,
        backward_step=gru_backward_step,
    )
)


# ---------------------------------------------------------------------------
# LSTM with forget gate:
#   f, i, o = sig(...), g = tanh(...)
#   c = f * c_prev + i * g ;  h = o * tanh(c)
# ---------------------------------------------------------------------------

def lstm_step(p: CellParams, x: np.ndarray, s: CellState) -> tuple[CellState, dict]:
    check_step_shapes(LSTM, p, x, s)
    A = p.arrays
    f = sigmoid(x @ A["W_fx"].T + s.h @ A["U_fh"].T + A["b_f"])
    i = sigmoid(x @ A["W_ix"].T + s.h @ A["U_ih"].T + A["b_i"])
    g = np.tanh(x @ A["W_gx"].T + s.h @ A["U_gh"].T + A["b_g"])
    o = sigmoid(x @ A["W_ox"].T + s.h @ A["U_oh"].T + A["b_o"])
    c_new = f * s.c + i * g
    tanh_c = np.tanh(c_new)
    h_new = o * tanh_c
    cache = {
        "x": x,
        "h_prev": s.h,
        "c_prev": s.c,
        "f": f,
        "i": i,
        "g": g,
        "o": o,
        "c_new": c_new,
        "tanh_c": tanh_c,
    }
    return CellState(h=h_new, c=c_new), cache


def lstm_backward_step(
    p: CellParams, cache: dict, d_h: np.ndarray, d_c: np.ndarray | None = None
) -> StepGrads:
    A = p.arrays
    f, i, g, o = cache["f"], cache["i"], cache["g"], cache["o"]
    tanh_c, c_prev = cache["tanh_c"], cache["c_prev"]
    _check_upstream(d_h, f, "lstm")

    d_o = d_h * tanh_c
    d_c_total = d_h * o * (1.0 - tanh_c * tanh_c)
    if d_c is not None:
        d_c_total = d_c_total + d_c
    d_f = d_c_total * c_prev
    d_i = d_c_total * g
    d_g = d_c_total * i
    d_c_prev = d_c_total * f

    d_af = d_f * f * (1.0 - f)
    d_ai = d_i * i * (1.0 - i)
    d_ag = d_g * (1.0 - g * g)
    d_ao = d_o * o * (1.0 - o)

    grads = {
        "W_fx": outer_sum(d_af, cache["x"]),
        "U_fh": outer_sum(d_af, cache["h_prev"]),
        "b_f": bias_sum(d_af),
        "W_ix": outer_sum(d_ai, cache["x"]),
        "U_ih": outer_sum(d_ai, cache["h_prev"]),
        "b_i": bias_sum(d_ai),
        "W_gx": outer_sum(d_ag, cache["x"]),
        "U_gh": outer_sum(d_ag, cache["h_prev"]),
        "b_g": bias_sum(d_ag),
        "W_ox": outer_sum(d_ao, cache["x"]),
        "U_oh": outer_sum(d_ao, cache["h_prev"]),
        "b_o": bias_sum(d_ao),
    }
    d_x = d_af @ A["W_fx"] + d_ai @ A["W_ix"] + d_ag @ A["W_gx"] + d_ao @ A["W_ox"]
    d_h_prev = d_af @ A["U_fh"] + d_ai @ A["U_ih"] + d_ag @ A["U_gh"] + d_ao @ A["U_oh"]
    return StepGrads(by_name=grads, d_x=d_x, d_h_prev=d_h_prev, d_c_prev=d_c_prev)


LSTM = register(
    CellType(
        name="lstm",
        slots=(
            ("W_fx", "nm"),
            ("U_fh", "nn"),
            ("b_f", "n"),
            ("W_ix", "nm"),
            ("U_ih", "nn"),
            ("b_i", "n"),
            ("W_gx", "nm"),
            ("U_gh", "nn"),
            ("b_g", "n"),
            ("W_ox", "nm"),
            ("U_oh", "nn"),
            ("b_o", "n"),
        ),
        has_cell_state=True,
        gates=3,
        activations=2,
        elementwise_mults=3,
        step=lstm_step,
        backward_step=lstm_backward_step,
    )
)


# ---------------------------------------------------------------------------
# peephole LSTM: the memory cell feeds every gate.  Forget and input gates
# see c_prev; the output gate sees the freshly written c.
# ---------------------------------------------------------------------------

def plstm_step(p: CellParams, x: np.ndarray, s: CellState) -> tuple[CellState, dict]:
    check_step_shapes(PLSTM, p, x, s)
    A = p.arrays
    f = sigmoid(x @ A["W_fx"].T + s.h @ A["U_fh"].T + s.c @ A["W_fc"].T + A["b_f"])
    i = sigmoid(x @ A["W_ix"].T + s.h @ A["U_ih"].T + s.c @ A["W_ic"].T + A["b_i"])
    g = np.tanh(x @ A["W_gx"].T + s.h @ A["U_gh"].T + A["b_g"])
    c_new = f * s.c + i * g
    o = sigmoid(x @ A["W_ox"].T + s.h @ A["U_oh"].T + c_new @ A["W_oc"].T + A["b_o"])
    tanh_c = np.tanh(c_new)
    h_new = o * tanh_c
    cache = {
        "x": x,
        "h_prev": s.h,
        "c_prev": s.c,
        "f": f,
        "i": i,
        "g": g,
        "o": o,
        "c_new": c_new,
        "tanh_c": tanh_c,
    }
    return CellState(h=h_new, c=c_new), cache


def plstm_backward_step(
    p: CellParams, cache: dict, d_h: np.ndarray, d_c: np.ndarray | None = None
) -> StepGrads:
    A = p.arrays
    f, i, g, o = cache["f"], cache["i"], cache["g"], cache["o"]
    tanh_c, c_prev, c_new = cache["tanh_c"], cache["c_prev"], cache["c_new"]
    _check_upstream(d_h, f, "plstm")

    d_o = d_h * tanh_c
    d_ao = d_o * o * (1.0 - o)
    # c gathers three contributions: the carried-in d_c, the output path
    # through tanh, and the output gate's peephole.
    d_c_total = d_h * o * (1.0 - tanh_c * tanh_c) + d_ao @ A["W_oc"]
    if d_c is not None:
        d_c_total = d_c_total + d_c
    d_f = d_c_total * c_prev
    d_i = d_c_total * g
    d_g = d_c_total * i

    d_af = d_f * f * (1.0 - f)
    d_ai = d_i * i * (1.0 - i)
    d_ag = d_g * (1.0 - g * g)
    # c_prev: carry term plus the two gate peepholes that read it
    d_c_prev = d_c_total * f + d_af @ A["W_fc"] + d_ai @ A["W_ic"]

    grads = {
        "W_fx": outer_sum(d_af, cache["x"]),
        "U_fh": outer_sum(d_af, cache["h_prev"]),
        "W_fc": outer_sum(d_af, c_prev),
        "b_f": bias_sum(d_af),
        "W_ix": outer_sum(d_ai, cache["x"]),
        "U_ih": outer_sum(d_ai, cache["h_prev"]),
        "W_ic": outer_sum(d_ai, c_prev),
        "b_i": bias_sum(d_ai),
        "W_gx": outer_sum(d_ag, cache["x"]),
        "U_gh": outer_sum(d_ag, cache["h_prev"]),
        "b_g": bias_sum(d_ag),
        "W_ox": outer_sum(d_ao, cache["x"]),
        "U_oh": outer_sum(d_ao, cache["h_prev"]),
        "W_oc": outer_sum(d_ao, c_new),
        "b_o": bias_sum(d_ao),
    }
    d_x = d_af @ A["W_fx"] + d_ai @ A["W_ix"] + d_ag @ A["W_gx"] + d_ao @ A["W_ox"]
    d_h_prev = d_af @ A["U_fh"] + d_ai @ A["U_ih"] + d_ag @ A["U_gh"] + d_ao @ A["U_oh"]
    return StepGrads(by_name=grads, d_x=d_x, d_h_prev=d_h_prev, d_c_prev=d_c_prev)


PLSTM = register(
    CellType(
        name="plstm",
        slots=(
            ("W_fx", "nm"),
            ("U_fh", "nn"),
            ("W_fc", "nn"),
            ("b_f", "n"),
            ("W_ix", "nm"),
            ("U_ih", "nn"),
            ("W_ic", "nn"),
            ("b_i", "n"),
            ("W_gx", "nm"),
            ("U_gh", "nn"),
            ("b_g", "n"),
            ("W_ox", "nm"),
            ("U_oh", "nn"),
            ("W_oc", "nn"),
            ("b_o", "n"),
        ),
        has_cell_state=True,
        gates=3,
        activations=2,
        elementwise_mults=3,
        step=plstm_step,
        backward_step=plstm_backward_step,
    )
)
