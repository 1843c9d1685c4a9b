import json

import numpy as np
import pytest

from rnnlab.cells import get_cell, init_params, load_params, save_params

from test_cells import random_params


class TestRoundTrip:
    @pytest.mark.parametrize("arch", ("rnn", "gru", "lstm", "plstm", "litelstm"))
    def test_bit_exact_round_trip(self, arch, tmp_path):
        p = random_params(arch, 5, 3, seed=1)
        path = tmp_path / "weights.bin"
        save_params(path, p)
        loaded, extra = load_params(path)
        assert loaded.arch == arch and loaded.n == 5 and loaded.m == 3
        assert extra == {}
        for name in p.arrays:
            np.testing.assert_array_equal(loaded.arrays[name], p.arrays[name])

    def test_gate_fn_survives(self, tmp_path):
        p = random_params("litelstm", 3, 2, seed=0, gate_fn="hard")
        save_params(tmp_path / "w.bin", p)
        loaded, _ = load_params(tmp_path / "w.bin")
        assert loaded.gate_fn == "hard"

    def test_extra_arrays_round_trip(self, tmp_path):
        p = random_params("litelstm", 4, 2, seed=3)
        head = {"W_out": np.random.default_rng(0).normal(size=(3, 4)), "b_out": np.zeros(3)}
        save_params(tmp_path / "w.bin", p, extra=head)
        _, extra = load_params(tmp_path / "w.bin")
        np.testing.assert_array_equal(extra["W_out"], head["W_out"])
        np.testing.assert_array_equal(extra["b_out"], head["b_out"])


class TestSidecar:
    def test_lists_names_shapes_offsets(self, tmp_path):
        p = init_params(get_cell("litelstm"), 4, 2, np.random.default_rng(0))
        path = tmp_path / "w.bin"
        save_params(path, p)
        sidecar = json.loads((tmp_path / "w.bin.json").read_text())
        assert sidecar["arch"] == "litelstm"
        names = [e["name"] for e in sidecar["arrays"]]
        assert names == ["W_fx", "U_fh", "W_fc", "b_f", "W_gx", "U_gh", "b_g"]
        # offsets must point at the actual bytes
        blob = path.read_bytes()
        entry = sidecar["arrays"][1]  # U_fh
        start = entry["offset"]
        raw = np.frombuffer(blob, dtype="<f8", count=16, offset=start).reshape(4, 4)
        np.testing.assert_array_equal(raw, p.arrays["U_fh"])

    def test_offsets_are_contiguous(self, tmp_path):
        p = init_params(get_cell("gru"), 3, 2, np.random.default_rng(0))
        save_params(tmp_path / "w.bin", p)
        sidecar = json.loads((tmp_path / "w.bin.json").read_text())
        offset = sidecar["arrays"][0]["offset"]
        for entry in sidecar["arrays"]:
            assert entry["offset"] == offset
            offset += 8 * int(np.prod(entry["shape"]))
        assert offset == (tmp_path / "w.bin").stat().st_size


class TestCorruption:
    def test_bad_magic(self, tmp_path):
        path = tmp_path / "w.bin"
        p = random_params("rnn", 2, 2, seed=0)
        save_params(path, p)
        blob = bytearray(path.read_bytes())
        blob[:4] = b"XXXX"
        path.write_bytes(bytes(blob))
        with pytest.raises(ValueError, match="bad magic"):
            load_params(path)

    def test_truncation_names_slot(self, tmp_path):
        path = tmp_path / "w.bin"
        p = random_params("rnn", 3, 2, seed=0)
        save_params(path, p)
        path.write_bytes(path.read_bytes()[:40])
        with pytest.raises(ValueError, match="truncated"):
            load_params(path)
