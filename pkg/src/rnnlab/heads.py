"""Classification head and loss: a dense map from the final hidden state to
class logits, trained with softmax cross-entropy.

Functions accept a single sample (1-D) or a batch (2-D, samples on the first
axis).  Batched losses use mean reduction so the learning rate keeps its
meaning across batch sizes.
"""

from __future__ import annotations

import numpy as np

from .linalg import glorot_init


def init_dense(k: int, n: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
    """Glorot-uniform W_out (k x n) and zero b_out (k); k classes, k >= 2."""
    if k < 2:
        raise ValueError(f"classifier needs at least 2 classes, got k={k}")
    return {"W_out": glorot_init(k, n, rng), "b_out": np.zeros(k)}


def dense_forward(head: dict[str, np.ndarray], h: np.ndarray) -> np.ndarray:
    W, b = head["W_out"], head["b_out"]
    if h.shape[-1] != W.shape[1]:
        raise ValueError(
            f"dense head: input has last dimension {h.shape[-1]}, expected {W.shape[1]}"
        )
    return h @ W.T + b


def dense_backward(
    head: dict[str, np.ndarray], h: np.ndarray, d_logits: np.ndarray
) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Gradients of the dense map; returns (parameter grads, d_h)."""
    if d_logits.ndim == 1:
        grads = {"W_out": np.outer(d_logits, h), "b_out": d_logits}
    else:
        grads = {"W_out": d_logits.T @ h, "b_out": d_logits.sum(axis=0)}
    return grads, d_logits @ head["W_out"]


def softmax_xent(logits: np.ndarray, label) -> tuple[float, np.ndarray]:
    """Cross-entropy of softmax(logits) against an integer label.

    Computed via the log-sum-exp shift.  For 2-D logits with a label array,
    returns the batch mean loss and d_logits already scaled by 1/B, so the
    caller can backpropagate it directly.
    """
    logits = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(label)
    k = logits.shape[-1]
    if np.any(labels < 0) or np.any(labels >= k):
        raise ValueError(f"label {label} out of range for {k} classes")

    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    probs = exp / exp.sum(axis=-1, keepdims=True)
    log_probs = shifted - np.log(exp.sum(axis=-1, keepdims=True))

    if logits.ndim == 1:
        loss = -log_probs[int(labels)]
        d_logits = probs.copy()
        d_logits[int(labels)] -= 1.0
        return float(loss), d_logits

    rows = np.arange(logits.shape[0])
    loss = float(-log_probs[rows, labels].mean())
    d_logits = probs
    d_logits[rows, labels] -= 1.0
    d_logits /= logits.shape[0]
    return loss, d_logits
