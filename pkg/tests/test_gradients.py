"""Backward-pass checks: hand-derived gradients against finite differences,
plus the analytic edge cases."""

import numpy as np
import pytest

from rnnlab.cells import (
    CellParams,
    CellState,
    backward_sequence,
    forward_sequence,
    get_cell,
    zero_state,
)
from rnnlab.gradcheck import check_cell, finite_diff

from test_cells import ones_params, random_params

ALL_ARCHS = ("rnn", "gru", "lstm", "plstm", "litelstm")


def rollout_loss_fn(arch, n, m, xs, gate_fn="logistic"):
    cell = get_cell(arch)

    def loss(arrays):
        p = CellParams(arch=arch, n=n, m=m, gate_fn=gate_fn, arrays=arrays)
        states, _ = forward_sequence(cell, p, xs)
        total = sum(float(s.h.sum()) for s in states)
        if cell.has_cell_state:
            total += float(states[-1].c.sum())
        return total

    return loss


class TestBackwardStepEdgeCases:
    def test_zero_upstream_zero_grads(self):
        for arch in ALL_ARCHS:
            cell = get_cell(arch)
            p = random_params(arch, 4, 3, seed=11)
            rng = np.random.default_rng(12)
            s0 = zero_state(cell, 4)
            _, cache = cell.step(p, rng.normal(size=3), s0)
            d_c = np.zeros(4) if cell.has_cell_state else None
            sg = cell.backward_step(p, cache, np.zeros(4), d_c)
            for name, g in sg.by_name.items():
                np.testing.assert_array_equal(g, np.zeros_like(g), err_msg=f"{arch}:{name}")
            np.testing.assert_array_equal(sg.d_x, np.zeros(3))
            np.testing.assert_array_equal(sg.d_h_prev, np.zeros(4))

    def test_scalar_case_matches_finite_differences(self):
        # d_h = 1, d_c = 0: loss is the single step's h
        p = ones_params("litelstm", 1, 1)
        cell = get_cell("litelstm")
        _, cache = cell.step(p, np.ones(1), zero_state(cell, 1))
        sg = cell.backward_step(p, cache, np.ones(1), np.zeros(1))

        def h_loss(arrays):
            q = CellParams(arch="litelstm", n=1, m=1, gate_fn="logistic", arrays=arrays)
            s, _ = cell.step(q, np.ones(1), zero_state(cell, 1))
            return float(s.h[0])

        fd = finite_diff(h_loss, p.arrays, epsilon=1e-5)
        for name in p.arrays:
            idx = (0,) * p.arrays[name].ndim
            assert sg.by_name[name][idx] == pytest.approx(fd[name][idx], abs=1e-7), name

    def test_saturated_gate_blocks_candidate_gradient(self):
        cell = get_cell("litelstm")
        p = random_params("litelstm", 4, 3, seed=2)
        p.arrays["b_f"][:] = -1e3
        rng = np.random.default_rng(3)
        s0 = CellState(h=rng.normal(size=4), c=rng.normal(size=4))
        _, cache = cell.step(p, rng.normal(size=3), s0)
        sg = cell.backward_step(p, cache, np.ones(4), np.ones(4))
        # no signal flows through a closed gate to the candidate branch
        for name in ("W_gx", "U_gh", "b_g"):
            assert np.all(np.abs(sg.by_name[name]) < 1e-12), name

    def test_upstream_shape_mismatch(self):
        cell = get_cell("litelstm")
        p = random_params("litelstm", 4, 3, seed=2)
        _, cache = cell.step(p, np.zeros(3), zero_state(cell, 4))
        with pytest.raises(ValueError, match="d_h"):
            cell.backward_step(p, cache, np.zeros(5), np.zeros(4))


class TestBackwardSequence:
    def test_single_step_equals_backward_step(self):
        for arch in ALL_ARCHS:
            cell = get_cell(arch)
            p = random_params(arch, 4, 3, seed=5)
            xs = np.random.default_rng(6).normal(size=(1, 3))
            _, caches = forward_sequence(cell, p, xs)
            d_h = np.random.default_rng(7).normal(size=4)
            d_c = np.ones(4) if cell.has_cell_state else None
            seq = backward_sequence(cell, p, caches, [d_h], d_c)
            single = cell.backward_step(p, caches[0], d_h, d_c)
            for name in seq.by_name:
                np.testing.assert_array_equal(seq.by_name[name], single.by_name[name])

    @pytest.mark.parametrize("arch", ("rnn", "gru", "lstm", "plstm"))
    def test_duplicated_step_without_coupling_doubles_grads(self, arch):
        # once every cross-step path is severed, two identical steps with
        # identical upstream grads accumulate to exactly twice one step.
        # Severing differs per architecture: zeroed recurrent weights for the
        # RNN; additionally a shut update gate for the GRU (its copy-through
        # path has no weight) and a shut forget gate plus zero peepholes for
        # the LSTM family (the memory carry has no weight either).
        cell = get_cell(arch)
        p = random_params(arch, 4, 3, seed=8)
        for name in p.arrays:
            if name.startswith("U") or name.endswith("c"):
                p.arrays[name] = np.zeros_like(p.arrays[name])
        if arch == "gru":
            p.arrays["b_z"][:] = -1e3
        if arch in ("lstm", "plstm"):
            p.arrays["b_f"][:] = -1e3
        x = np.random.default_rng(9).normal(size=3)
        # the decoupled dynamics reach their fixed point after one step, so
        # steps 2 and 3 are genuinely identical timesteps
        xs = np.stack([x, x, x])
        states, caches = forward_sequence(cell, p, xs)
        np.testing.assert_array_equal(states[1].h, states[2].h)
        np.testing.assert_array_equal(caches[1]["h_prev"], caches[2]["h_prev"])
        d_h = np.random.default_rng(10).normal(size=4)
        d_c = np.zeros(4) if cell.has_cell_state else None
        seq = backward_sequence(cell, p, caches[1:], [d_h, d_h], d_c)
        single = cell.backward_step(p, caches[1], d_h, d_c)
        doubled = 0
        for name in seq.by_name:
            np.testing.assert_allclose(
                seq.by_name[name], 2.0 * single.by_name[name], rtol=0, atol=1e-15
            )
            doubled += np.any(single.by_name[name] != 0)
        assert doubled >= 3  # the check must not be vacuous

    def test_length_mismatch(self):
        cell = get_cell("rnn")
        p = random_params("rnn", 2, 2, seed=0)
        _, caches = forward_sequence(cell, p, np.zeros((3, 2)))
        with pytest.raises(ValueError, match="3 cached steps but 2"):
            backward_sequence(cell, p, caches, [np.zeros(2)] * 2)

    @pytest.mark.parametrize("arch", ALL_ARCHS)
    def test_full_sequence_matches_finite_differences(self, arch):
        n, m, T = 4, 3, 6
        cell = get_cell(arch)
        p = random_params(arch, n, m, seed=42)
        xs = np.random.default_rng(43).uniform(-1, 1, size=(T, m))
        states, caches = forward_sequence(cell, p, xs)
        d_h_list = [np.ones(n)] * T
        d_c = np.ones(n) if cell.has_cell_state else None
        analytic = backward_sequence(cell, p, caches, d_h_list, d_c).by_name
        fd = finite_diff(rollout_loss_fn(arch, n, m, xs), p.arrays, epsilon=1e-5)
        for name in p.arrays:
            np.testing.assert_allclose(analytic[name], fd[name], rtol=1e-4, atol=1e-7)

    def test_batched_grads_equal_sum_of_per_sample_grads(self):
        for arch in ALL_ARCHS:
            cell = get_cell(arch)
            p = random_params(arch, 3, 2, seed=50)
            rng = np.random.default_rng(51)
            xs = rng.normal(size=(4, 5, 2))  # T=4, B=5
            _, caches = forward_sequence(cell, p, xs)
            d_h_list = [rng.normal(size=(5, 3)) for _ in range(4)]
            d_c = np.zeros((5, 3)) if cell.has_cell_state else None
            batched = backward_sequence(cell, p, caches, d_h_list, d_c).by_name
            summed = {name: np.zeros_like(arr) for name, arr in p.arrays.items()}
            for b in range(5):
                _, solo_caches = forward_sequence(cell, p, xs[:, b, :])
                solo_dh = [d[b] for d in d_h_list]
                solo_dc = np.zeros(3) if cell.has_cell_state else None
                solo = backward_sequence(cell, p, solo_caches, solo_dh, solo_dc).by_name
                for name in summed:
                    summed[name] += solo[name]
            for name in summed:
                np.testing.assert_allclose(batched[name], summed[name], rtol=1e-10, atol=1e-12)


class TestCheckCellSweeps:
    @pytest.mark.parametrize("arch", ALL_ARCHS)
    def test_small_sweep_passes(self, arch):
        report = check_cell(arch, n=4, m=3, T=6, seeds=range(5))
        assert report.passed, report.format()

    def test_hard_gate_passes_with_kink_exclusion(self):
        report = check_cell("litelstm", n=4, m=3, T=6, seeds=range(5), gate_fn="hard")
        assert report.passed, report.format()

    def test_epsilon_robustness(self):
        statuses = set()
        for eps in (1e-4, 1e-5, 1e-6):
            statuses.add(
                check_cell("litelstm", n=4, m=3, T=6, seeds=range(5), epsilon=eps).passed
            )
        assert statuses == {True}
