"""Dense kernels and activations shared by every cell.

All arrays are float64; every function is pure.  Batched callers pass arrays
whose last axis is the vector dimension — the kernels broadcast over any
leading axes.
"""

from __future__ import annotations

import numpy as np

# Breakpoints of the piecewise-linear gate: clamp(0.2 x + 0.5, 0, 1) is flat
# outside [-2.5, 2.5].
HARD_SIGMOID_SLOPE = 0.2
HARD_SIGMOID_OFFSET = 0.5
HARD_SIGMOID_BREAK = 2.5


def matvec(m: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Matrix-vector product, out[i] = sum_j m[i, j] * v[j]."""
    if m.ndim != 2 or v.ndim != 1 or m.shape[1] != v.shape[0]:
        raise ValueError(
            f"matvec: incompatible shapes, matrix is {m.shape} but vector is {v.shape}"
        )
    return m @ v


def hadamard(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise product of two equal-length vectors."""
    if a.shape != b.shape:
        raise ValueError(f"hadamard: length mismatch, {a.shape} vs {b.shape}")
    return a * b


def sigmoid(v: np.ndarray) -> np.ndarray:
    """Logistic function, branched on sign so large |v| saturates instead of
    overflowing exp."""
    v = np.asarray(v, dtype=np.float64)
    out = np.empty_like(v)
    pos = v >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-v[pos]))
    ev = np.exp(v[~pos])
    out[~pos] = ev / (1.0 + ev)
    return out


def hard_sigmoid(v: np.ndarray) -> np.ndarray:
    """Piecewise-linear gate clamp(0.2 v + 0.5, 0, 1); saturates to exactly
    0 and 1 outside [-2.5, 2.5]."""
    v = np.asarray(v, dtype=np.float64)
    return np.clip(HARD_SIGMOID_SLOPE * v + HARD_SIGMOID_OFFSET, 0.0, 1.0)


def tanh_vec(v: np.ndarray) -> np.ndarray:
    return np.tanh(np.asarray(v, dtype=np.float64))


GATE_FNS = ("logistic", "hard")


def gate_apply(kind: str, pre: np.ndarray) -> np.ndarray:
    """Apply the configured gate squashing function to a pre-activation."""
    if kind == "logistic":
        return sigmoid(pre)
    if kind == "hard":
        return hard_sigmoid(pre)
    raise ValueError(f"unknown gate function {kind!r}, expected one of {GATE_FNS}")


def gate_grad(kind: str, pre: np.ndarray, out: np.ndarray) -> np.ndarray:
    """Derivative of the gate function, from the pre-activation and its output.

    The piecewise-linear gate is non-differentiable at +-2.5; the interior
    slope 0.2 is used there as the subgradient.
    """
    if kind == "logistic":
        return out * (1.0 - out)
    if kind == "hard":
        inside = np.abs(pre) <= HARD_SIGMOID_BREAK
        return np.where(inside, HARD_SIGMOID_SLOPE, 0.0)
    raise ValueError(f"unknown gate function {kind!r}, expected one of {GATE_FNS}")


def glorot_init(rows: int, cols: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform init on +-sqrt(6 / (rows + cols)), deterministic given the rng."""
    if rows < 1 or cols < 1:
        raise ValueError(f"glorot_init: shape must be positive, got {rows}x{cols}")
    bound = np.sqrt(6.0 / (rows + cols))
    return rng.uniform(-bound, bound, size=(rows, cols))
