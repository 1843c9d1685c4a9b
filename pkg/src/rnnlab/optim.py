"""Adam with bias correction, applied uniformly to every trainable array.

Defaults are the experiment protocol's hyperparameters: lr 1e-3, beta1 0.9,
beta2 0.999, eps 1e-7, with eps added outside the square root.  An optional
global max-norm gradient clip is available but off by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-7
    t: int = 0
    clip_norm: float | None = None
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_init(
    params: dict[str, np.ndarray],
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-7,
    clip_norm: float | None = None,
) -> AdamState:
    if not (lr > 0 and eps > 0 and 0 <= beta1 < 1 and 0 <= beta2 < 1):
        raise ValueError(
            f"invalid Adam hyperparameters: lr={lr}, beta1={beta1}, beta2={beta2}, eps={eps}"
        )
    return AdamState(
        lr=lr,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
        t=0,
        clip_norm=clip_norm,
        m={k: np.zeros_like(a) for k, a in params.items()},
        v={k: np.zeros_like(a) for k, a in params.items()},
    )


def clip_by_global_norm(grads: dict[str, np.ndarray], max_norm: float) -> dict[str, np.ndarray]:
    total = np.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
    if total <= max_norm or total == 0.0:
        return grads
    scale = max_norm / total
    return {k: g * scale for k, g in grads.items()}


def adam_step(
    params: dict[str, np.ndarray],
    grads: dict[str, np.ndarray],
    state: AdamState,
) -> tuple[dict[str, np.ndarray], AdamState]:
    """One update; returns new parameter and state dicts (inputs untouched)."""
    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise FloatingPointError(f"non-finite gradient in array {name!r}")
        if g.shape != params[name].shape:
            raise ValueError(
                f"gradient for {name!r} has shape {g.shape}, parameter is {params[name].shape}"
            )
    if state.clip_norm is not None:
        grads = clip_by_global_norm(grads, state.clip_norm)

    t = state.t + 1
    b1, b2 = state.beta1, state.beta2
    bc1 = 1.0 - b1**t
    bc2 = 1.0 - b2**t
    new_params: dict[str, np.ndarray] = {}
    new_m: dict[str, np.ndarray] = {}
    new_v: dict[str, np.ndarray] = {}
    for name, theta in params.items():
        g = grads[name]
        m = b1 * state.m[name] + (1.0 - b1) * g
        v = b2 * state.v[name] + (1.0 - b2) * (g * g)
        new_m[name] = m
        new_v[name] = v
        new_params[name] = theta - state.lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    new_state = AdamState(
        lr=state.lr,
        beta1=b1,
        beta2=b2,
        eps=state.eps,
        t=t,
        clip_norm=state.clip_norm,
        m=new_m,
        v=new_v,
    )
    return new_params, new_state
