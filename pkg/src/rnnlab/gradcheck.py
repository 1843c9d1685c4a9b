"""Central finite-difference oracle for every analytic gradient in the repo.

This module is the ground truth: the hand-derived backward passes are only
trusted because they agree with these finite differences.  ``check_cell``
rolls random instances of an architecture, computes a scalar loss that
exercises every gradient path (all hidden states plus the final memory
cell), and compares analytic gradients against central differences
coordinate by coordinate.

A coordinate passes when the absolute error is at most ``abs_tol`` or the
relative error is at most ``rel_tol``.  With the piecewise-linear hard gate,
coordinates whose perturbed evaluations bring any gate pre-activation within
``kink_tol`` of the breakpoints +-2.5 are excluded: central differences
straddle the kink there and say nothing about the subgradient.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cells import CellParams, backward_sequence, forward_sequence, get_cell
from .cells.base import slot_shape
from .linalg import HARD_SIGMOID_BREAK

DEFAULT_EPSILON = 1e-5
DEFAULT_REL_TOL = 1e-4
DEFAULT_ABS_TOL = 1e-7
KINK_TOL = 1e-3


@dataclass
class SlotCheck:
    """Worst-case comparison for one parameter slot across all seeds."""

    name: str
    max_abs_err: float = 0.0
    max_rel_err: float = 0.0
    worst_index: tuple = ()
    checked: int = 0
    skipped: int = 0
    failed: int = 0


@dataclass
class GradReport:
    label: str
    rel_tol: float
    abs_tol: float
    slots: list[SlotCheck]
    passed: bool

    def format(self) -> str:
        lines = [
            f"gradient check: {self.label}",
            f"{'slot':<8} {'max abs err':>12} {'max rel err':>12} {'checked':>8} "
            f"{'skipped':>8} {'failed':>7}  worst at",
        ]
        for s in self.slots:
            lines.append(
                f"{s.name:<8} {s.max_abs_err:>12.3e} {s.max_rel_err:>12.3e} "
                f"{s.checked:>8} {s.skipped:>8} {s.failed:>7}  {s.worst_index}"
            )
        lines.append(
            f"result: {'PASS' if self.passed else 'FAIL'} "
            f"(rel tol {self.rel_tol:g}, abs tol {self.abs_tol:g})"
        )
        return "\n".join(lines)


def _central_diffs(loss_fn, arrays: dict[str, np.ndarray], epsilon: float):
    """Yield (name, index, central difference) for every scalar coordinate.

    Evaluations for a coordinate happen when the consumer advances the
    generator, so callers may interleave bookkeeping between coordinates.
    """
    work = {name: arr.astype(np.float64).copy() for name, arr in arrays.items()}
    for name, arr in work.items():
        for idx in np.ndindex(arr.shape):
            orig = arr[idx]
            arr[idx] = orig + epsilon
            lp = loss_fn(work)
            arr[idx] = orig - epsilon
            lm = loss_fn(work)
            arr[idx] = orig
            if not (np.isfinite(lp) and np.isfinite(lm)):
                raise FloatingPointError(
                    f"non-finite loss while perturbing {name}[{idx}]: {lp}, {lm}"
                )
            yield name, idx, (lp - lm) / (2.0 * epsilon)


def finite_diff(loss_fn, params: dict[str, np.ndarray], epsilon: float) -> dict[str, np.ndarray]:
    """Central finite-difference gradient of ``loss_fn`` over every array entry."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    grads = {name: np.zeros_like(arr, dtype=np.float64) for name, arr in params.items()}
    for name, idx, fd in _central_diffs(loss_fn, params, epsilon):
        grads[name][idx] = fd
    return grads


def _random_instance(arch: str, n: int, m: int, T: int, seed: int, gate_fn: str):
    rng = np.random.default_rng(seed)
    cell = get_cell(arch)
    arrays = {}
    for name, kind in cell.slots:
        arrays[name] = rng.uniform(-0.6, 0.6, size=slot_shape(kind, n, m))
    xs = rng.uniform(-1.0, 1.0, size=(T, m))
    return cell, arrays, xs


def check_cell(
    arch: str,
    n: int,
    m: int,
    T: int,
    seeds,
    epsilon: float = DEFAULT_EPSILON,
    rel_tol: float = DEFAULT_REL_TOL,
    abs_tol: float = DEFAULT_ABS_TOL,
    gate_fn: str = "logistic",
) -> GradReport:
    """Compare analytic BPTT gradients with finite differences on random
    instances; loss = sum of every h_t entry plus the final memory cell."""
    if n < 1 or m < 1 or T < 1:
        raise ValueError(f"n, m, T must be >= 1, got ({n}, {m}, {T})")
    seeds = [int(s) for s in seeds]
    cell = get_cell(arch)
    slots: dict[str, SlotCheck] = {name: SlotCheck(name=name) for name, _ in cell.slots}
    passed = True

    for seed in seeds:
        cell, arrays, xs = _random_instance(arch, n, m, T, seed, gate_fn)
        kink = {"tripped": False}

        def loss_fn(arrs, _xs=xs):
            params = CellParams(arch=arch, n=n, m=m, gate_fn=gate_fn, arrays=arrs)
            states, caches = forward_sequence(cell, params, _xs)
            if gate_fn == "hard":
                for c in caches:
                    if np.any(np.abs(np.abs(c["inp"]) - HARD_SIGMOID_BREAK) < KINK_TOL):
                        kink["tripped"] = True
                        break
            total = sum(float(s.h.sum()) for s in states)
            if cell.has_cell_state:
                total += float(states[-1].c.sum())
            return total

        params = CellParams(arch=arch, n=n, m=m, gate_fn=gate_fn, arrays=arrays)
        states, caches = forward_sequence(cell, params, xs)
        d_h_list = [np.ones(n) for _ in range(T)]
        d_c_last = np.ones(n) if cell.has_cell_state else None
        analytic = backward_sequence(cell, params, caches, d_h_list, d_c_last).by_name

        kink["tripped"] = False
        for name, idx, fd in _central_diffs(loss_fn, arrays, epsilon):
            tripped = kink["tripped"]
            kink["tripped"] = False
            rec = slots[name]
            if tripped:
                rec.skipped += 1
                continue
            a = float(analytic[name][idx])
            abs_err = abs(a - fd)
            denom = max(abs(a), abs(fd))
            rec.checked += 1
            if abs_err > rec.max_abs_err:
                rec.max_abs_err = abs_err
            if abs_err > abs_tol:
                rel = abs_err / denom if denom > 0 else np.inf
                if rel > rec.max_rel_err:
                    rec.max_rel_err = rel
                    rec.worst_index = (int(seed),) + tuple(int(i) for i in idx)
                if rel > rel_tol:
                    rec.failed += 1
                    passed = False

    return GradReport(
        label=f"{arch} (n={n}, m={m}, T={T}, gate={gate_fn}, eps={epsilon:g}, "
        f"{len(seeds)} seeds)",
        rel_tol=rel_tol,
        abs_tol=abs_tol,
        slots=list(slots.values()),
        passed=passed,
    )
